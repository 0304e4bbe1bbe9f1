import numpy as np
import pytest

from meshtv.mesh import TriangleMesh


@pytest.fixture
def right_triangle_mesh():
    """Single right triangle (0,0,0), (1,0,0), (0,1,0): area 1/2."""
    return TriangleMesh(
        [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], [[0, 1, 2]]
    )


@pytest.fixture
def two_triangle_mesh():
    """Unit square in z = 0 split along the diagonal: 4 vertices, 2 triangles."""
    verts = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
    ]
    return TriangleMesh(verts, [[0, 1, 2], [1, 3, 2]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
