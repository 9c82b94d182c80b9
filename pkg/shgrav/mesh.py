"""
Polyhedral shape models.

A TriangleMesh is a closed, consistently wound triangulated surface in the
body-fixed frame. Each face together with the frame origin spans one
tetrahedron; signed determinants make the decomposition valid whether or not
the origin lies inside the body.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import (
    DegenerateFaceError,
    InputError,
    MeshIndexError,
    NonPositiveVolumeError,
    ObjParseError,
    OpenSurfaceError,
    WindingError,
)
from .provenance import compute_mesh_id, short_id

logger = logging.getLogger("Mesh")


@dataclass(frozen=True)
class Tetrahedron:
    """Origin-anchored tetrahedron spanned by one surface face."""
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    detJ: float

    @property
    def jacobian(self) -> np.ndarray:
        return np.column_stack([self.c1, self.c2, self.c3])

    @property
    def volume(self) -> float:
        return self.detJ / 6.0


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float, meters
    faces: np.ndarray  # (F, 3) int, 0-based
    _mesh_id: Optional[str] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=float)
        faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def mesh_id(self) -> str:
        if self._mesh_id is None:
            object.__setattr__(self, "_mesh_id", compute_mesh_id(self.vertices, self.faces))
        return self._mesh_id

    def jacobians(self) -> np.ndarray:
        """J_s = [c1 c2 c3] per face, shape (F, 3, 3); columns are the face vertices."""
        return np.stack(
            [self.vertices[self.faces[:, 0]],
             self.vertices[self.faces[:, 1]],
             self.vertices[self.faces[:, 2]]],
            axis=2,
        )

    def signed_determinants(self) -> np.ndarray:
        """Scalar triple products c1 . (c2 x c3), one per face."""
        c1 = self.vertices[self.faces[:, 0]]
        c2 = self.vertices[self.faces[:, 1]]
        c3 = self.vertices[self.faces[:, 2]]
        return np.einsum("ij,ij->i", c1, np.cross(c2, c3))

    @property
    def volume(self) -> float:
        return math.fsum(self.signed_determinants()) / 6.0

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=float), self.faces)


# --- validation ---

def _check_indices(vertex_count: int, faces: np.ndarray) -> None:
    if faces.size == 0:
        raise ObjParseError("mesh has no faces")
    bad = np.nonzero((faces < 0) | (faces >= vertex_count))[0]
    if bad.size:
        f = int(bad[0])
        raise MeshIndexError(
            f"face {f} references vertex index out of range "
            f"(indices {faces[f].tolist()}, vertex count {vertex_count})"
        )
    repeated = np.nonzero(
        (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 2] == faces[:, 0])
    )[0]
    if repeated.size:
        f = int(repeated[0])
        raise DegenerateFaceError(f"face {f} repeats a vertex: {faces[f].tolist()}")


def _check_closed_and_wound(vertex_count: int, faces: np.ndarray) -> None:
    """Every undirected edge has exactly two faces, traversed in opposite directions."""
    tails = faces.reshape(-1)
    heads = np.roll(faces, -1, axis=1).reshape(-1)

    lo = np.minimum(tails, heads)
    hi = np.maximum(tails, heads)
    undirected, counts = np.unique(lo * vertex_count + hi, return_counts=True)
    bad = np.nonzero(counts != 2)[0]
    if bad.size:
        key = int(undirected[bad[0]])
        a, b = divmod(key, vertex_count)
        raise OpenSurfaceError(
            f"edge ({a}, {b}) has {int(counts[bad[0]])} incident faces; "
            f"{bad.size} edges in total are not shared by exactly 2 faces"
        )

    directed, dcounts = np.unique(tails * vertex_count + heads, return_counts=True)
    twice = np.nonzero(dcounts > 1)[0]
    if twice.size:
        a, b = divmod(int(directed[twice[0]]), vertex_count)
        raise WindingError(
            f"edge ({a} -> {b}) is traversed in the same direction by two faces; "
            f"winding is inconsistent at {twice.size} edges"
        )


def validate_mesh(vertices: np.ndarray, faces: np.ndarray, fix_winding: bool = False) -> TriangleMesh:
    """Check every TriangleMesh invariant; optionally flip an inward-wound surface."""
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 3)
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if not np.all(np.isfinite(vertices)):
        raise ObjParseError("mesh contains non-finite vertex coordinates")

    _check_indices(len(vertices), faces)
    _check_closed_and_wound(len(vertices), faces)

    mesh = TriangleMesh(vertices, faces)
    volume = mesh.volume
    if volume < 0 and fix_winding:
        logger.warning(f"Total volume {volume:.6g} m^3 is negative; flipping all faces (--fix-winding)")
        mesh = TriangleMesh(vertices, faces[:, [0, 2, 1]])
        volume = mesh.volume
    if not volume > 0:
        raise NonPositiveVolumeError(
            f"total signed volume is {volume:.6g} m^3; faces must be wound outward "
            f"(use --fix-winding to flip an inward-wound surface)"
        )
    return mesh


# --- OBJ I/O ---

def _parse_index(token: str, vertex_count: int, line_no: int) -> int:
    head = token.split("/", 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise ObjParseError(f"line {line_no}: bad face index {token!r}")
    if idx > 0:
        return idx - 1
    if idx < 0:
        # Relative index counts back from the latest vertex
        return vertex_count + idx
    raise MeshIndexError(f"line {line_no}: face index 0 is invalid in OBJ (indices are 1-based)")


def parse_obj(text: str, fix_winding: bool = False) -> TriangleMesh:
    """
    Parse `v x y z` and `f i j k ...` records into a validated mesh.
    Polygons are fan-triangulated; any other record type is ignored.
    """
    vertices: List[List[float]] = []
    faces: List[List[int]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError(f"line {line_no}: vertex needs 3 coordinates")
            try:
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError:
                raise ObjParseError(f"line {line_no}: bad vertex coordinates {parts[1:4]}")
        elif tag == "f":
            if len(parts) < 4:
                raise ObjParseError(f"line {line_no}: face needs at least 3 vertices")
            poly = [_parse_index(tok, len(vertices), line_no) for tok in parts[1:]]
            for i in range(1, len(poly) - 1):
                faces.append([poly[0], poly[i], poly[i + 1]])

    if not vertices:
        raise ObjParseError("no vertex records found")
    mesh = validate_mesh(np.array(vertices), np.array(faces, dtype=np.int64), fix_winding=fix_winding)
    logger.info(
        f"Accepted mesh: {mesh.vertex_count} vertices, {mesh.face_count} faces, "
        f"volume {mesh.volume:.6g} m^3, id {short_id(mesh.mesh_id)}"
    )
    return mesh


def serialize_obj(mesh: TriangleMesh) -> str:
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    return "\n".join(lines) + "\n"


def load_obj(path: str, fix_winding: bool = False) -> TriangleMesh:
    try:
        with open(path, "r", encoding="ascii", errors="strict") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise InputError(f"cannot read mesh file {path}: {e}")
    return parse_obj(text, fix_winding=fix_winding)


# --- geometry ---

def tetrahedralize(mesh: TriangleMesh) -> List[Tetrahedron]:
    """One tetrahedron per face, in face order. Degenerate ones are kept."""
    J = mesh.jacobians()
    det = mesh.signed_determinants()
    return [
        Tetrahedron(c1=J[s, :, 0], c2=J[s, :, 1], c3=J[s, :, 2], detJ=float(det[s]))
        for s in range(len(det))
    ]


def brillouin_radius(mesh: TriangleMesh) -> float:
    return float(np.max(np.linalg.norm(mesh.vertices, axis=1)))


def mesh_info(mesh: TriangleMesh) -> Dict[str, object]:
    return {
        "vertex_count": mesh.vertex_count,
        "face_count": mesh.face_count,
        "volume_m3": mesh.volume,
        "brillouin_radius_m": brillouin_radius(mesh),
        "mesh_id": mesh.mesh_id,
    }


# --- reference shapes ---

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

_ICOSAHEDRON_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def _icosahedron_unit_vertices() -> np.ndarray:
    g = _GOLDEN
    v = np.array([
        (-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0),
        (0, -1, g), (0, 1, g), (0, -1, -g), (0, 1, -g),
        (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1),
    ], dtype=float)
    return v / np.linalg.norm(v[0])


def icosahedron(edge: float = 1.0) -> TriangleMesh:
    v = _icosahedron_unit_vertices()
    # Unit circumradius icosahedron has edge 1/sin(2*pi/5)
    scale = edge * math.sin(2.0 * math.pi / 5.0)
    return validate_mesh(v * scale, np.array(_ICOSAHEDRON_FACES))


def icosphere(radius: float, subdivisions: int = 5) -> TriangleMesh:
    """Subdivided icosahedron with every vertex on the sphere; 20 * 4**k faces."""
    vertices = [tuple(p) for p in _icosahedron_unit_vertices()]
    faces = list(_ICOSAHEDRON_FACES)
    for _ in range(subdivisions):
        midpoints: Dict[tuple, int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoints:
                p = np.add(vertices[a], vertices[b])
                vertices.append(tuple(p / np.linalg.norm(p)))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = refined
    return validate_mesh(np.array(vertices) * radius, np.array(faces))


def cube(edge: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    h = edge / 2.0
    v = np.array([
        (-h, -h, -h), (h, -h, -h), (h, h, -h), (-h, h, -h),
        (-h, -h, h), (h, -h, h), (h, h, h), (-h, h, h),
    ]) + np.asarray(center, dtype=float)
    f = np.array([
        (0, 2, 1), (0, 3, 2),  # -z
        (4, 5, 6), (4, 6, 7),  # +z
        (0, 1, 5), (0, 5, 4),  # -y
        (2, 3, 7), (2, 7, 6),  # +y
        (1, 2, 6), (1, 6, 5),  # +x
        (0, 4, 7), (0, 7, 3),  # -x
    ])
    return validate_mesh(v, f)


def regular_tetrahedron(radius: float = 1.0) -> TriangleMesh:
    """Vertices at distance `radius` from the origin."""
    v = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    v *= radius / math.sqrt(3.0)
    f = np.array([(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)])
    return validate_mesh(v, f)


def random_star_mesh(rng: np.random.Generator, radius: float = 1000.0, jitter: float = 0.3) -> TriangleMesh:
    """Icosahedron with each vertex scaled by a random factor in [1-jitter, 1+jitter]: 20 faces, star-shaped."""
    v = _icosahedron_unit_vertices()
    scales = rng.uniform(1.0 - jitter, 1.0 + jitter, size=(len(v), 1))
    return validate_mesh(v * scales * radius, np.array(_ICOSAHEDRON_FACES))
