import numpy as np
import pytest

from meshtv.errors import (
    DegenerateTriangle,
    IndexOutOfRange,
    IsolatedVertex,
    ParseError,
)
from meshtv.imaging import MeshImage
from meshtv.mesh import (
    TriangleMesh,
    control_cell_areas,
    load_mesh,
    save_mesh,
    triangle_areas,
)
from meshtv.synthetic import icosahedron, icosphere

RIGHT_TRIANGLE_OFF = """OFF
3 1 0
0 0 0
1 0 0
0 1 0
3 0 1 2
"""


def test_load_off_right_triangle(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text(RIGHT_TRIANGLE_OFF)
    mesh = load_mesh(str(path))
    assert mesh.n_vertices == 3
    assert mesh.n_triangles == 1
    assert triangle_areas(mesh)[0] == pytest.approx(0.5, abs=1e-15)


def test_load_off_repeated_index_is_degenerate(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 1\n")
    with pytest.raises(DegenerateTriangle):
        load_mesh(str(path))


def test_load_off_header_with_counts_inline(tmp_path):
    path = tmp_path / "inline.off"
    path.write_text("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    mesh = load_mesh(str(path))
    assert mesh.n_vertices == 3


def test_load_off_garbage_raises_parse_error(tmp_path):
    path = tmp_path / "junk.off"
    path.write_text("not a mesh\n")
    with pytest.raises(ParseError):
        load_mesh(str(path))


def test_icosahedron_off_is_closed(tmp_path):
    path = tmp_path / "ico.off"
    save_mesh(str(path), icosahedron())
    mesh = load_mesh(str(path))
    assert mesh.n_vertices == 12
    assert mesh.n_triangles == 20
    # independent oracle: count incidences per undirected edge
    counts = {}
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    assert all(c == 2 for c in counts.values())
    assert not mesh.boundary_flags.any()


def test_boundary_flags_on_open_mesh(two_triangle_mesh):
    # the square patch has every vertex on its boundary
    assert two_triangle_mesh.boundary_flags.all()


def test_index_out_of_range():
    with pytest.raises(IndexOutOfRange):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])


def test_zero_area_triangle_rejected():
    with pytest.raises(DegenerateTriangle):
        TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])


def test_nearly_zero_area_triangle_rejected():
    verts = [[0, 0, 0], [1, 0, 0], [0.5, 1e-14, 0]]
    with pytest.raises(DegenerateTriangle):
        TriangleMesh(verts, [[0, 1, 2]])


def test_isolated_vertex_rejected():
    verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 5, 5]]
    with pytest.raises(IsolatedVertex):
        TriangleMesh(verts, [[0, 1, 2]])


def test_equilateral_triangle_area():
    side = 2.0
    verts = [[0, 0, 0], [side, 0, 0], [side / 2, side * np.sqrt(3) / 2, 0]]
    mesh = TriangleMesh(verts, [[0, 1, 2]])
    assert triangle_areas(mesh)[0] == pytest.approx(np.sqrt(3), rel=1e-12)


def test_icosahedron_areas_match_closed_form():
    mesh = icosahedron()
    areas = triangle_areas(mesh)
    assert np.allclose(areas, areas[0], rtol=1e-12)
    # unit circumradius: edge a = 4 / sqrt(10 + 2 sqrt(5)), area 20 * sqrt(3)/4 * a^2
    edge = 4.0 / np.sqrt(10.0 + 2.0 * np.sqrt(5.0))
    assert areas.sum() == pytest.approx(5.0 * np.sqrt(3.0) * edge**2, rel=1e-12)


def test_control_cells_single_triangle(right_triangle_mesh):
    s = control_cell_areas(right_triangle_mesh)
    assert np.allclose(s, [1 / 6, 1 / 6, 1 / 6], atol=1e-15)


def test_control_cells_shared_edge():
    # two unit-area triangles sharing edge (1, 2)
    verts = [[0, 0, 0], [2, 0, 0], [0, 1, 0], [2, 1, 0]]
    mesh = TriangleMesh(verts, [[0, 1, 2], [1, 3, 2]])
    assert np.allclose(triangle_areas(mesh), 1.0)
    s = control_cell_areas(mesh)
    assert np.allclose(s, [1 / 3, 2 / 3, 2 / 3, 1 / 3], atol=1e-14)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_area_partition(level):
    mesh = icosphere(level)
    s = control_cell_areas(mesh)
    total = triangle_areas(mesh).sum()
    assert abs(s.sum() - total) <= 1e-12 * total


def test_constant_image_integral():
    mesh = icosphere(2)
    c = 0.37
    u = MeshImage(np.full(mesh.n_vertices, c))
    s = control_cell_areas(mesh)
    total_area = triangle_areas(mesh).sum()
    assert float(u.values[:, 0] @ s) == pytest.approx(c * total_area, rel=1e-12)


@pytest.mark.parametrize("fmt", ["off", "obj", "ply"])
def test_round_trip(tmp_path, fmt):
    mesh = icosphere(1)
    path = tmp_path / f"mesh.{fmt}"
    save_mesh(str(path), mesh)
    back = load_mesh(str(path))
    assert np.array_equal(back.triangles, mesh.triangles)
    assert np.abs(back.vertices - mesh.vertices).max() < 1e-9


def test_obj_one_based_indices(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    mesh = load_mesh(str(path))
    assert np.array_equal(mesh.triangles, [[0, 1, 2]])


def test_obj_face_with_texture_refs(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n")
    mesh = load_mesh(str(path))
    assert mesh.n_triangles == 1


def test_obj_quad_rejected(tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(ParseError):
        load_mesh(str(path))


def test_ply_binary_rejected(tmp_path):
    path = tmp_path / "bin.ply"
    path.write_text("ply\nformat binary_little_endian 1.0\nend_header\n")
    with pytest.raises(ParseError):
        load_mesh(str(path))


def test_mesh_arrays_are_read_only(right_triangle_mesh):
    with pytest.raises(ValueError):
        right_triangle_mesh.vertices[0, 0] = 5.0
