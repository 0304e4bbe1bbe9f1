"""Exception types shared across the package."""


class MeshTVError(Exception):
    """Base class for all package-specific errors."""


class ParseError(MeshTVError):
    """Mesh or image file could not be parsed."""


class DegenerateTriangle(MeshTVError):
    """Triangle with a repeated vertex or (near-)zero area."""


class IndexOutOfRange(MeshTVError):
    """Face references a vertex index outside [0, n_vertices)."""


class IsolatedVertex(MeshTVError):
    """Vertex not referenced by any triangle."""


class DimensionMismatch(MeshTVError):
    """Operands disagree on vertex / triangle / channel counts."""


class NaNInput(MeshTVError):
    """Input contains NaN where finite values are required."""


class ZeroResidualInSupport(MeshTVError):
    """A support index has an exactly zero residual (support bookkeeping bug)."""


class InvalidP(MeshTVError):
    """Operation requires an exponent strictly inside (0, 1)."""


class InnerSolverFailure(MeshTVError):
    """Inner ADMM did not reach its tolerance.

    Normally reported via the trace and a warning instead of being raised.
    """


class NonFiniteIterate(MeshTVError):
    """Solver produced NaN or infinite values."""


class IterationLimitExceeded(MeshTVError):
    """Iterative linear solver hit its iteration cap before converging."""


class SingularSystem(MeshTVError):
    """Normal-equation matrix could not be factorized or solved."""


class InvalidParams(MeshTVError):
    """Bad parameters for synthetic data generation."""
