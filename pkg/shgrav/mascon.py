"""
Point-mass (mascon) reference model built from the same slabs as the
coefficient pipeline: one mascon per (tetrahedron, slab), at the slab's
sampling center, carrying the slab's sampled density times its volume.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import G_DEFAULT, MASCON_SINGULAR_DISTANCE, MGAL
from .density import DensityModel
from .errors import SingularQueryError
from .field import SHField
from .mesh import TriangleMesh
from .parallel import chunk_ranges, map_chunks
from .shcoeff import SHModel, SlabScheme, segment_points, slab_volumes

logger = logging.getLogger("Mascon")

# Upper bound in bytes for one query block of (block, n_mascons, 3) doubles
QUERY_BLOCK_BYTES = 64 << 20


@dataclass(frozen=True)
class PointMassSet:
    positions: np.ndarray  # (K, 3) m
    masses: np.ndarray  # (K,) kg
    total_mass: float

    def __len__(self) -> int:
        return len(self.masses)

    def center_of_mass(self) -> np.ndarray:
        return self.masses @ self.positions / self.total_mass


def build_mascons(
    mesh: TriangleMesh,
    density: DensityModel,
    n_q: int,
    scheme: SlabScheme = SlabScheme.Z,
) -> PointMassSet:
    scheme = SlabScheme(scheme)
    J = mesh.jacobians()
    detJ = mesh.signed_determinants()
    positions = segment_points(J, n_q, scheme)  # (S, n_q, 3)
    rho = density.evaluate(positions.reshape(-1, 3)).reshape(len(detJ), n_q)
    masses = rho * detJ[:, None] * slab_volumes(n_q, scheme)[None, :]

    masses = masses.ravel()
    total = math.fsum(masses)
    logger.info(f"Built {len(masses)} mascons ({mesh.face_count} tetrahedra x {n_q} slabs), M={total:.6e} kg")
    return PointMassSet(positions=positions.reshape(-1, 3), masses=masses, total_mass=total)


def _query_block(set_: PointMassSet) -> int:
    return max(1, QUERY_BLOCK_BYTES // (24 * max(1, len(set_))))


def _block_terms(set_: PointMassSet, x: np.ndarray):
    d = x[:, None, :] - set_.positions[None, :, :]
    dist = np.linalg.norm(d, axis=2)
    if np.any(dist < MASCON_SINGULAR_DISTANCE):
        q, k = np.argwhere(dist < MASCON_SINGULAR_DISTANCE)[0]
        raise SingularQueryError(
            f"query {x[q].tolist()} coincides with mascon {int(k)} at {set_.positions[k].tolist()}"
        )
    return d, dist


def mascon_acceleration_many(set_: PointMassSet, points: np.ndarray, G: float = G_DEFAULT, threads: int = 1) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty_like(points)

    def work(start: int, stop: int) -> None:
        d, dist = _block_terms(set_, points[start:stop])
        w = set_.masses[None, :] / dist**3
        out[start:stop] = -G * np.einsum("qk,qki->qi", w, d)

    for _ in map_chunks(work, chunk_ranges(len(points), _query_block(set_)), threads=threads, ordered=False):
        pass
    return out


def mascon_potential_many(set_: PointMassSet, points: np.ndarray, G: float = G_DEFAULT, threads: int = 1) -> np.ndarray:
    """U = G sum m_i / |x - p_i|, positive like the harmonic potential."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty(len(points))

    def work(start: int, stop: int) -> None:
        _, dist = _block_terms(set_, points[start:stop])
        out[start:stop] = G * (set_.masses[None, :] / dist).sum(axis=1)

    for _ in map_chunks(work, chunk_ranges(len(points), _query_block(set_)), threads=threads, ordered=False):
        pass
    return out


def mascon_acceleration(set_: PointMassSet, x, G: float = G_DEFAULT) -> np.ndarray:
    return mascon_acceleration_many(set_, np.asarray(x, dtype=float)[None, :], G)[0]


@dataclass(frozen=True)
class MasconComparison:
    a_sh: np.ndarray  # (N, 3)
    a_mascon: np.ndarray
    norm_sh: np.ndarray  # (N,)
    norm_mascon: np.ndarray
    delta: np.ndarray  # |a_sh - a_mascon|, m/s^2
    inside_brillouin: np.ndarray

    @property
    def delta_mgal(self) -> np.ndarray:
        return self.delta / MGAL

    @property
    def max_delta(self) -> float:
        return float(np.max(self.delta)) if len(self.delta) else 0.0


def compare_sh_mascon(
    model: SHModel,
    mascons: PointMassSet,
    points: np.ndarray,
    G: Optional[float] = None,
    brillouin_r: Optional[float] = None,
    threads: int = 1,
) -> MasconComparison:
    """Harmonic vs mascon acceleration at each point. G defaults to the one recorded in the model."""
    G = model.provenance.G if G is None else G
    sh = SHField(model, brillouin_r).evaluate_points(points, threads=threads)
    am = mascon_acceleration_many(mascons, points, G, threads=threads)
    delta = np.linalg.norm(sh.a - am, axis=1)
    logger.info(f"Compared {len(delta)} points: max |da| = {np.max(delta):.3e} m/s^2 ({np.max(delta) / MGAL:.4f} mgal)")
    return MasconComparison(
        a_sh=sh.a,
        a_mascon=am,
        norm_sh=np.linalg.norm(sh.a, axis=1),
        norm_mascon=np.linalg.norm(am, axis=1),
        delta=delta,
        inside_brillouin=sh.inside_brillouin,
    )
