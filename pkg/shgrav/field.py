"""
Potential and acceleration of an SHModel at body-fixed points.

    U = (mu/r) sum_n (R0/r)^n sum_m P̄nm(sin phi) (C̄nm cos m lon + S̄nm sin m lon)

The acceleration is assembled from dU/dr, dU/dlon and dU/dphi through the
spherical-to-Cartesian chain rule. Within POLE_GUARD of the z-axis the chain
rule is replaced by its exact limit.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .constants import POLE_GUARD
from .errors import NumericDomainError, SingularPointError
from .legendre import legendre_dphi_values, legendre_values
from .parallel import chunk_ranges, map_chunks
from .shcoeff import SHModel

logger = logging.getLogger("Field")

POINT_CHUNK = 4096


@dataclass(frozen=True)
class SphericalCoords:
    r: float
    lam: float
    phi: float
    u: float
    eta: float


def spherical_coords(x) -> SphericalCoords:
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise SingularPointError("spherical coordinates are undefined at the origin")
    eta = math.hypot(x[0], x[1])
    return SphericalCoords(r=r, lam=math.atan2(x[1], x[0]), phi=math.atan2(x[2], eta), u=x[2] / r, eta=eta)


@dataclass(frozen=True)
class FieldSample:
    U: float
    a: Optional[np.ndarray]
    inside_brillouin: bool
    near_pole_path: bool


@dataclass(frozen=True)
class FieldBatch:
    U: np.ndarray  # (N,)
    a: np.ndarray  # (N, 3)
    inside_brillouin: np.ndarray  # (N,) bool
    near_pole_path: np.ndarray  # (N,) bool


class SHField:
    """
    Evaluator bound to one model. brillouin_r defaults to the radius recorded
    in the model provenance, else R0. paper_exact_eq11 multiplies the
    longitude derivative by (n+1), which breaks gradient consistency; it
    exists only to study that formula.
    """

    def __init__(self, model: SHModel, brillouin_r: Optional[float] = None, paper_exact_eq11: bool = False):
        self.model = model
        if brillouin_r is None:
            brillouin_r = model.provenance.brillouin_radius_m or model.R0
        self.brillouin_r = float(brillouin_r)
        self.paper_exact_eq11 = paper_exact_eq11

        n = np.arange(model.nmax + 1, dtype=float)
        m = np.arange(model.nmax + 1, dtype=float)
        self._n = n
        self._m = m
        self._lon_factor = np.outer(n + 1.0 if paper_exact_eq11 else np.ones_like(n), m)
        # Pole limits of P̄n0 and of P̄n1 / cos(phi), at u = +1
        self._p_n0_pole = np.sqrt(2.0 * n + 1.0)
        self._q_n1_pole = np.sqrt((2.0 * n + 1.0) * n * (n + 1.0) / 2.0)

    # --- single point ---

    def potential(self, x) -> FieldSample:
        b = self.evaluate_points(np.asarray(x, dtype=float)[None, :], with_acceleration=False)
        return FieldSample(U=float(b.U[0]), a=None, inside_brillouin=bool(b.inside_brillouin[0]),
                           near_pole_path=bool(b.near_pole_path[0]))

    def acceleration(self, x) -> FieldSample:
        b = self.evaluate_points(np.asarray(x, dtype=float)[None, :])
        return FieldSample(U=float(b.U[0]), a=b.a[0].copy(), inside_brillouin=bool(b.inside_brillouin[0]),
                           near_pole_path=bool(b.near_pole_path[0]))

    # --- batches ---

    def evaluate_points(self, points: np.ndarray, with_acceleration: bool = True, threads: int = 1) -> FieldBatch:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        r = np.linalg.norm(points, axis=1)
        if np.any(r == 0.0):
            raise SingularPointError("field evaluation at the origin (r = 0) is singular")

        U = np.empty(len(points))
        a = np.zeros((len(points), 3))
        eta = np.hypot(points[:, 0], points[:, 1])
        pole = eta < POLE_GUARD * r

        def work(start: int, stop: int) -> int:
            sl = slice(start, stop)
            U[sl], a[sl] = self._evaluate(points[sl], r[sl], eta[sl], pole[sl], with_acceleration)
            return stop - start

        # Each chunk writes its own slice; order is irrelevant
        for _ in map_chunks(work, chunk_ranges(len(points), POINT_CHUNK), threads=threads, ordered=False):
            pass
        return FieldBatch(U=U, a=a, inside_brillouin=r < self.brillouin_r, near_pole_path=pole)

    def _evaluate(self, pts, r, eta, pole, with_acceleration) -> Tuple[np.ndarray, np.ndarray]:
        U = np.empty(len(pts))
        acc = np.zeros((len(pts), 3))
        regular = ~pole
        if np.any(regular):
            U[regular], acc[regular] = self._regular(pts[regular], r[regular], eta[regular], with_acceleration)
        if np.any(pole):
            U[pole], acc[pole] = self._axis_limit(pts[pole], r[pole])
        return U, acc

    def _regular(self, pts, r, eta, with_acceleration):
        mdl = self.model
        nmax = mdl.nmax
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        u = np.clip(z / r, -1.0, 1.0)
        s = eta / r
        cos_l, sin_l = x / eta, y / eta

        # cos/sin(m lon) by angle addition, shape (nmax+1, N)
        cm = np.empty((nmax + 1, len(pts)))
        sm = np.empty((nmax + 1, len(pts)))
        cm[0], sm[0] = 1.0, 0.0
        for m in range(1, nmax + 1):
            cm[m] = cm[m - 1] * cos_l - sm[m - 1] * sin_l
            sm[m] = sm[m - 1] * cos_l + cm[m - 1] * sin_l

        P = legendre_values(nmax, u, s, extra_order=True)  # (n, m+1, N)
        C = mdl.Cbar[:, :, None]
        S = mdl.Sbar[:, :, None]
        trig = C * cm[None, :, :] + S * sm[None, :, :]  # (n, m, N)
        rn = (mdl.R0 / r)[None, :] ** self._n[:, None]  # (n, N)

        per_degree = np.einsum("nmk,nmk->nk", P[:, : nmax + 1], trig)
        mu_r = mdl.mu / r
        U = mu_r * np.einsum("nk,nk->k", rn, per_degree)
        if not with_acceleration:
            return U, np.zeros((len(pts), 3))

        dP = legendre_dphi_values(nmax, u, s, P)
        dtrig = self._lon_factor[:, :, None] * (S * cm[None, :, :] - C * sm[None, :, :])

        dU_dr = -(mu_r / r) * np.einsum("nk,n,nk->k", rn, self._n + 1.0, per_degree)
        dU_dphi = mu_r * np.einsum("nk,nk->k", rn, np.einsum("nmk,nmk->nk", dP, trig))
        dU_dlam = mu_r * np.einsum("nk,nk->k", rn, np.einsum("nmk,nmk->nk", P[:, : nmax + 1], dtrig))

        radial = dU_dr / r - z * dU_dphi / (r * r * eta)
        lon = dU_dlam / (eta * eta)
        a = np.column_stack([
            radial * x - lon * y,
            radial * y + lon * x,
            dU_dr * z / r + eta * dU_dphi / (r * r),
        ])
        return U, a

    def _axis_limit(self, pts, r):
        """
        Exact values on the z-axis: only m = 0 terms reach U and a_z, only
        m = 1 terms reach a_x and a_y, through P̄n1 = cos(phi) Q_n(u).
        """
        mdl = self.model
        nmax = mdl.nmax
        sign = np.where(pts[:, 2] >= 0.0, 1.0, -1.0)
        n = self._n
        parity = sign[None, :] ** n[:, None]  # (n, N)
        rn = (mdl.R0 / r)[None, :] ** n[:, None]

        p_n0 = self._p_n0_pole[:, None] * parity
        zonal = np.einsum("nk,nk,n->k", rn, p_n0, mdl.Cbar[:, 0])
        U = mdl.mu / r * zonal
        dU_dr = -(mdl.mu / r**2) * np.einsum("nk,nk,n->k", rn, p_n0 * (n[:, None] + 1.0), mdl.Cbar[:, 0])

        a = np.zeros((len(pts), 3))
        a[:, 2] = dU_dr * pts[:, 2] / r
        if nmax >= 1:
            q = self._q_n1_pole[1:, None] * parity[1:] * sign[None, :]
            scale = mdl.mu / r**2
            a[:, 0] = scale * np.einsum("nk,nk,n->k", rn[1:], q, mdl.Cbar[1:, 1])
            a[:, 1] = scale * np.einsum("nk,nk,n->k", rn[1:], q, mdl.Sbar[1:, 1])
        return U, a


def potential(model: SHModel, x, brillouin_r: Optional[float] = None) -> FieldSample:
    return SHField(model, brillouin_r).potential(x)


def acceleration(model: SHModel, x, brillouin_r: Optional[float] = None, paper_exact_eq11: bool = False) -> FieldSample:
    return SHField(model, brillouin_r, paper_exact_eq11).acceleration(x)


@dataclass(frozen=True)
class EllipsoidGrid:
    lon_deg: np.ndarray  # (N,)
    lat_deg: np.ndarray
    points: np.ndarray  # (N, 3)


def ellipsoid_grid(a: float, b: float, c: float, res_deg: float) -> EllipsoidGrid:
    """Surface points of the x/a, y/b, z/c ellipsoid; lat -90..90 inclusive, lon -180..180 exclusive."""
    if not (a > 0 and b > 0 and c > 0 and res_deg > 0):
        raise NumericDomainError(f"ellipsoid semi-axes and resolution must be positive, got {(a, b, c, res_deg)}")
    n_lat = int(round(180.0 / res_deg)) + 1
    n_lon = int(round(360.0 / res_deg))
    lat = np.linspace(-90.0, 90.0, n_lat)
    lon = -180.0 + res_deg * np.arange(n_lon)
    LAT, LON = np.meshgrid(lat, lon, indexing="ij")
    la, lo = np.radians(LAT.ravel()), np.radians(LON.ravel())
    pts = np.column_stack([a * np.cos(la) * np.cos(lo), b * np.cos(la) * np.sin(lo), c * np.sin(la)])
    return EllipsoidGrid(lon_deg=LON.ravel(), lat_deg=LAT.ravel(), points=pts)
