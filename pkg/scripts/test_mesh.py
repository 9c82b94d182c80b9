"""
Tests for OBJ ingestion, mesh validation and the tetrahedral decomposition.
"""
import math
import os
import sys

import numpy as np
import pytest

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.errors import (
    DegenerateFaceError,
    InputError,
    MeshIndexError,
    NonPositiveVolumeError,
    ObjParseError,
    OpenSurfaceError,
    WindingError,
)
from shgrav.mesh import (
    brillouin_radius,
    cube,
    icosahedron,
    load_obj,
    mesh_info,
    parse_obj,
    random_star_mesh,
    regular_tetrahedron,
    serialize_obj,
    tetrahedralize,
)

from conftest import SPHERE_R, asset_path, sphere_volume

TETRA_OBJ = """\
# regular tetrahedron
v 1 1 1
v 1 -1 -1
v -1 1 -1
v -1 -1 1
f 1 2 3
f 1 4 2
f 1 3 4
f 2 4 3
"""

# Unit cube as quads, with texture/normal indices and a comment
CUBE_QUADS_OBJ = """\
o cube
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
vn 0 0 1
f 1/1/1 4/1/1 3/1/1 2/1/1
f 5//1 6//1 7//1 8//1
f 1 2 6 5  # -y
f 3 4 8 7
f 2 3 7 6
f 1 5 8 4
"""


def _edit_faces(text: str, replace) -> str:
    lines = text.splitlines()
    out = [replace(l) if l.startswith("f ") else l for l in lines]
    return "\n".join(out) + "\n"


# --- parse_obj ---

def test_parse_regular_tetrahedron():
    mesh = parse_obj(TETRA_OBJ)
    assert mesh.vertex_count == 4
    assert mesh.face_count == 4
    assert mesh.faces.min() == 0
    assert mesh.volume == pytest.approx(8.0 / 3.0, rel=1e-14)


def test_parse_icosahedron_volume():
    edge = 2.0
    mesh = parse_obj(serialize_obj(icosahedron(edge)))
    assert (mesh.vertex_count, mesh.face_count) == (12, 20)
    expected = 5.0 / 12.0 * (3.0 + math.sqrt(5.0)) * edge**3
    assert mesh.volume == pytest.approx(expected, rel=1e-12)


def test_out_of_range_index():
    text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 2 99\n"
    with pytest.raises(MeshIndexError):
        parse_obj(text)


def test_zero_index_is_rejected():
    with pytest.raises(MeshIndexError):
        parse_obj(_edit_faces(TETRA_OBJ, lambda l: l.replace("f 1 2 3", "f 0 2 3")))


def test_quads_are_fan_triangulated():
    mesh = parse_obj(CUBE_QUADS_OBJ)
    assert mesh.face_count == 12
    assert mesh.volume == pytest.approx(1.0, abs=1e-14)


def test_negative_indices_count_back_from_last_vertex():
    text = "v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf -4 -3 -2\nf -4 -1 -3\nf -4 -2 -1\nf -3 -1 -2\n"
    assert np.array_equal(parse_obj(text).faces, parse_obj(TETRA_OBJ).faces)


def test_open_surface():
    text = "\n".join(TETRA_OBJ.splitlines()[:-1]) + "\n"
    with pytest.raises(OpenSurfaceError):
        parse_obj(text)


def test_inconsistent_winding():
    with pytest.raises(WindingError):
        parse_obj(_edit_faces(TETRA_OBJ, lambda l: "f 1 3 2" if l == "f 1 2 3" else l))


def test_inward_winding_needs_fix_flag():
    def flip(line):
        a, b, c = line.split()[1:]
        return f"f {a} {c} {b}"

    inward = _edit_faces(TETRA_OBJ, flip)
    with pytest.raises(NonPositiveVolumeError):
        parse_obj(inward)
    fixed = parse_obj(inward, fix_winding=True)
    assert fixed.volume == pytest.approx(8.0 / 3.0, rel=1e-14)


def test_repeated_vertex_in_face():
    with pytest.raises(DegenerateFaceError):
        parse_obj(_edit_faces(TETRA_OBJ, lambda l: "f 1 1 3" if l == "f 1 2 3" else l))


def test_malformed_records():
    with pytest.raises(ObjParseError):
        parse_obj("v 1 2\n")
    with pytest.raises(ObjParseError):
        parse_obj("v 1 2 x\n")
    with pytest.raises(ObjParseError):
        parse_obj("# nothing here\n")


def test_load_obj_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_obj(str(tmp_path / "missing.obj"))


def test_load_obj_from_disk(tmp_path):
    path = tmp_path / "tetra.obj"
    path.write_text(TETRA_OBJ)
    assert load_obj(str(path)).face_count == 4


def test_round_trip_is_exact():
    mesh = random_star_mesh(np.random.default_rng(3))
    again = parse_obj(serialize_obj(mesh))
    assert np.array_equal(again.vertices, mesh.vertices)
    assert np.array_equal(again.faces, mesh.faces)
    assert again.mesh_id == mesh.mesh_id


# --- tetrahedralize ---

def test_unit_cube_volume():
    tets = tetrahedralize(cube(1.0))
    assert len(tets) == 12
    assert math.fsum(t.volume for t in tets) == pytest.approx(1.0, abs=1e-14)


def test_unit_simplex_face(unit_simplex):
    tets = tetrahedralize(unit_simplex)
    assert tets[0].detJ == 1.0
    assert np.array_equal(tets[0].jacobian, np.eye(3))
    # Faces through the origin are kept with zero volume
    assert [t.detJ for t in tets[1:]] == [0.0, 0.0, 0.0]


def test_determinant_is_triple_product():
    mesh = random_star_mesh(np.random.default_rng(11))
    for t in tetrahedralize(mesh):
        assert t.detJ == pytest.approx(float(np.linalg.det(t.jacobian)), rel=1e-12)


def test_icosphere_volume(sphere_mesh):
    assert sphere_mesh.face_count >= 10_000
    assert sphere_mesh.volume == pytest.approx(sphere_volume(SPHERE_R), rel=5e-3)


def test_volume_is_translation_invariant():
    mesh = random_star_mesh(np.random.default_rng(5))
    moved = mesh.translated((1500.0, -700.0, 300.0))
    assert not np.allclose(moved.signed_determinants(), mesh.signed_determinants())
    assert moved.volume == pytest.approx(mesh.volume, rel=1e-10)


def test_every_edge_shared_by_two_opposite_faces(coarse_sphere):
    f = coarse_sphere.faces
    directed = set(zip(f.ravel(), np.roll(f, -1, axis=1).ravel()))
    assert len(directed) == 3 * coarse_sphere.face_count
    assert all((b, a) in directed for a, b in directed)


# --- brillouin_radius / mesh_info ---

def test_brillouin_radius(sphere_mesh):
    assert brillouin_radius(sphere_mesh) == pytest.approx(SPHERE_R, rel=1e-12)
    assert brillouin_radius(regular_tetrahedron(1.0)) == pytest.approx(1.0, rel=1e-15)


def test_mesh_info_report():
    info = mesh_info(cube(2.0))
    assert info["vertex_count"] == 8
    assert info["face_count"] == 12
    assert info["volume_m3"] == pytest.approx(8.0)
    assert info["brillouin_radius_m"] == pytest.approx(math.sqrt(3.0))
    assert len(info["mesh_id"]) == 64


@pytest.mark.assets
def test_eros_brillouin_radius():
    mesh = load_obj(asset_path("eros.obj"))
    assert brillouin_radius(mesh) > 15_000.0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
