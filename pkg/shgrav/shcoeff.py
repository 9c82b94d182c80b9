"""
Normalized gravity coefficients of a polyhedron with piecewise-constant
interior density.

Every face spans a tetrahedron with the origin. Mapping it onto the standard
simplex X, Y, Z >= 0, X + Y + Z <= 1 turns each shape function into a
trinomial in (X, Y, Z). The simplex is cut into n_q slabs, each carrying the
density sampled at its center, and the monomial integrals over a slab are
closed-form beta / incomplete-beta expressions.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from .artifacts import read_json, write_json
from .constants import CHUNK_SIZE, G_DEFAULT, SHMODEL_FORMAT_VERSION
from .density import DensityModel, density_digest
from .errors import (
    InputError,
    InsufficientDegreeError,
    ModelError,
    NonFiniteAccumulationError,
    NonPositiveMassError,
    NumericDomainError,
)
from .mesh import TriangleMesh, brillouin_radius
from .parallel import KahanAccumulator, chunk_ranges, map_chunks
from .shape_cache import shape_cache
from .trinomial import compose_monomials, monomial_exponents

logger = logging.getLogger("SHCoeff")


# --- beta functions ---

def _check_positive_int(name: str, v) -> int:
    if int(v) != v or v < 1:
        raise NumericDomainError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


def beta_exact(a: int, b: int) -> Fraction:
    a = _check_positive_int("a", a)
    b = _check_positive_int("b", b)
    return Fraction(math.factorial(a - 1) * math.factorial(b - 1), math.factorial(a + b - 1))


def beta_fn(a: int, b: int) -> float:
    """Euler beta function for integer arguments, (a-1)! (b-1)! / (a+b-1)!."""
    return float(beta_exact(a, b))


def incomplete_beta(x, a: int, b: int):
    """
    Integral of t^(a-1) (1-t)^(b-1) over [0, x] for integer a, b >= 1.

    Uses the finite binomial form
        beta(a, b) * sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^(a+b-1-j)
    whose terms are all positive. Accepts scalars or arrays.
    """
    a = _check_positive_int("a", a)
    b = _check_positive_int("b", b)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr >= 0.0) | ~(x_arr <= 1.0)):
        raise NumericDomainError(f"incomplete_beta needs 0 <= x <= 1, got {x!r}")
    top = a + b - 1
    y = 1.0 - x_arr
    total = np.zeros_like(x_arr)
    for j in range(a, top + 1):
        total = total + math.comb(top, j) * x_arr**j * y ** (top - j)
    out = beta_fn(a, b) * total
    return float(out) if np.ndim(out) == 0 else out


def slab_integral_h(q_bound, i: int, j: int, k: int):
    """Integral of X^i Y^j Z^k over the part of the standard simplex with Z <= q_bound."""
    if min(i, j, k) < 0:
        raise NumericDomainError(f"exponents must be non-negative, got {(i, j, k)}")
    return beta_fn(j + 1, i + 2) / (i + 1) * incomplete_beta(q_bound, k + 1, i + j + 3)


# --- radial discretization ---

class SlabScheme(str, Enum):
    # Planes of constant Z
    Z = "z"
    # Shells of constant X + Y + Z, scaled copies of the surface face
    RADIAL = "radial"


@dataclass(frozen=True)
class RadialDiscretization:
    n_q: int
    scheme: SlabScheme = SlabScheme.Z

    def __post_init__(self):
        if int(self.n_q) != self.n_q or self.n_q < 1:
            raise NumericDomainError(f"n_q must be a positive integer, got {self.n_q!r}")
        object.__setattr__(self, "scheme", SlabScheme(self.scheme))

    @property
    def q_minus(self) -> np.ndarray:
        return np.arange(self.n_q) / self.n_q

    @property
    def q_plus(self) -> np.ndarray:
        return np.arange(1, self.n_q + 1) / self.n_q

    def centers(self) -> np.ndarray:
        return segment_centers(self.n_q, self.scheme)

    def volumes(self) -> np.ndarray:
        return slab_volumes(self.n_q, self.scheme)


@lru_cache(maxsize=64)
def segment_centers(n_q: int, scheme: SlabScheme = SlabScheme.Z) -> np.ndarray:
    """Simplex coordinates (n_q, 3) of the point where each slab samples density."""
    scheme = SlabScheme(scheme)
    mid = (np.arange(n_q) + 0.5) / n_q
    if scheme is SlabScheme.Z:
        side = (1.0 - mid) / 3.0
        out = np.column_stack([side, side, mid])
    else:
        out = np.repeat((mid / 3.0)[:, None], 3, axis=1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def slab_volumes(n_q: int, scheme: SlabScheme = SlabScheme.Z) -> np.ndarray:
    """Volume of each slab of the standard simplex; they sum to 1/6."""
    scheme = SlabScheme(scheme)
    lo = np.arange(n_q) / n_q
    hi = np.arange(1, n_q + 1) / n_q
    if scheme is SlabScheme.Z:
        out = ((1.0 - lo) ** 3 - (1.0 - hi) ** 3) / 6.0
    else:
        out = (hi**3 - lo**3) / 6.0
    out.setflags(write=False)
    return out


@lru_cache(maxsize=256)
def slab_weight_table(n: int, n_q: int, scheme: SlabScheme = SlabScheme.Z) -> np.ndarray:
    """
    Integral of each degree-n monomial over each slab, shape (n_q, nd), columns
    in monomial_exponents(n) order.
    """
    scheme = SlabScheme(scheme)
    exps = monomial_exponents(n)
    lo = np.arange(n_q) / n_q
    hi = np.arange(1, n_q + 1) / n_q
    out = np.empty((n_q, len(exps)))
    if scheme is SlabScheme.Z:
        for d, (i, j, k) in enumerate(exps):
            out[:, d] = slab_integral_h(hi, i, j, k) - slab_integral_h(lo, i, j, k)
    else:
        shell = hi ** (n + 3) - lo ** (n + 3)
        for d, (i, j, k) in enumerate(exps):
            full = math.factorial(i) * math.factorial(j) * math.factorial(k) / math.factorial(n + 3)
            out[:, d] = shell * full
    out.setflags(write=False)
    return out


def slab_index(X: np.ndarray, n_q: int, scheme: SlabScheme = SlabScheme.Z) -> np.ndarray:
    """Slab containing each simplex point X (N, 3)."""
    scheme = SlabScheme(scheme)
    X = np.asarray(X, dtype=float)
    coord = X[:, 2] if scheme is SlabScheme.Z else X.sum(axis=1)
    return np.clip(np.floor(coord * n_q).astype(np.intp), 0, n_q - 1)


def segment_points(jacobians: np.ndarray, n_q: int, scheme: SlabScheme = SlabScheme.Z) -> np.ndarray:
    """Body-frame segment centers x_q = J_s X_q, shape (S, n_q, 3)."""
    return np.einsum("sij,qj->sqi", jacobians, segment_centers(n_q, SlabScheme(scheme)))


# --- model ---

class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    mesh_id: Optional[str] = None
    density_sha256: Optional[str] = None
    n_q: Optional[int] = None
    G: float = G_DEFAULT
    slab_scheme: Optional[str] = None
    total_mass_kg: Optional[float] = None
    brillouin_radius_m: Optional[float] = None
    tetrahedron_count: Optional[int] = None


@dataclass(frozen=True)
class SHModel:
    mu: float
    R0: float
    nmax: int
    Cbar: np.ndarray  # (nmax+1, nmax+1), zero above the diagonal
    Sbar: np.ndarray
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        C = np.array(self.Cbar, dtype=float)
        S = np.array(self.Sbar, dtype=float)
        shape = (self.nmax + 1, self.nmax + 1)
        if self.nmax < 0 or C.shape != shape or S.shape != shape:
            raise ModelError(f"coefficient arrays must have shape {shape}, got {C.shape} and {S.shape}")
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(S))):
            raise ModelError("coefficient arrays contain non-finite entries")
        if not (math.isfinite(self.mu) and self.mu > 0 and math.isfinite(self.R0) and self.R0 > 0):
            raise ModelError(f"mu and R0 must be positive and finite, got mu={self.mu!r}, R0={self.R0!r}")
        if abs(C[0, 0] - 1.0) > 1e-12:
            raise ModelError(f"C00 must be 1 for a mass-normalized model, got {C[0, 0]!r}")
        if np.any(S[:, 0] != 0.0):
            raise ModelError("S_n0 must be exactly zero")
        C.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "Cbar", C)
        object.__setattr__(self, "Sbar", S)

    @classmethod
    def point_mass(cls, mu: float, R0: float) -> "SHModel":
        return cls(mu=mu, R0=R0, nmax=0, Cbar=np.ones((1, 1)), Sbar=np.zeros((1, 1)))

    def truncated(self, nmax: int) -> "SHModel":
        if nmax > self.nmax:
            raise InsufficientDegreeError(f"model has degree {self.nmax}, cannot truncate to {nmax}")
        k = nmax + 1
        return SHModel(self.mu, self.R0, nmax, self.Cbar[:k, :k], self.Sbar[:k, :k], self.provenance)


def center_of_mass(model: SHModel) -> np.ndarray:
    if model.nmax < 1:
        raise InsufficientDegreeError("center of mass needs degree-1 coefficients (nmax >= 1)")
    return math.sqrt(3.0) * model.R0 * np.array([model.Cbar[1, 1], model.Sbar[1, 1], model.Cbar[1, 0]])


# --- pipeline ---

def _moment_chunk(J_unit, J_phys, detJ, density, shapes, weights, n_q, scheme, nmax, offset):
    """Raw moments I_nm of one chunk of tetrahedra, shape (nmax+1, 2, nmax+1)."""
    B = len(detJ)
    rho = density.evaluate(segment_points(J_phys, n_q, scheme).reshape(-1, 3)).reshape(B, n_q)
    composed = compose_monomials(J_unit, nmax)

    out = np.zeros((nmax + 1, 2, nmax + 1))
    for n in range(nmax + 1):
        H = rho @ weights[n]  # (B, nd)
        mom = np.einsum("abd,bd->ab", composed[n], H)  # (nd, B)
        contrib = (shapes.matrices[n] @ mom) * detJ[None, :]  # (2(n+1), B)
        finite = np.all(np.isfinite(contrib), axis=0)
        if not np.all(finite):
            s = offset + int(np.argmin(finite))
            raise NonFiniteAccumulationError(
                f"non-finite moment at degree {n} from tetrahedron {s}", tetrahedron=s
            )
        sums = contrib.sum(axis=1)
        out[n, 0, : n + 1] = sums[: n + 1]
        out[n, 1, : n + 1] = sums[n + 1 :]
    return out


def compute_coefficients(
    mesh: TriangleMesh,
    density: DensityModel,
    nmax: int,
    n_q: int,
    R0: Optional[float] = None,
    G: float = G_DEFAULT,
    scheme: SlabScheme = SlabScheme.Z,
    threads: int = 1,
    deterministic: bool = True,
) -> SHModel:
    """
    Integrate the shape functions against the slab-sampled density over every
    tetrahedron and normalize by the total mass.

    Chunks of CHUNK_SIZE tetrahedra are reduced with compensated summation in
    chunk order, so with `deterministic` the result does not depend on
    `threads`.
    """
    if nmax < 0:
        raise NumericDomainError(f"nmax must be >= 0, got {nmax}")
    disc = RadialDiscretization(n_q, scheme)
    scheme = disc.scheme
    r_brillouin = brillouin_radius(mesh)
    R0 = r_brillouin if R0 is None else float(R0)
    if not R0 > 0:
        raise NumericDomainError(f"R0 must be positive, got {R0!r}")
    if nmax > 16:
        logger.warning(f"nmax={nmax} is above the practical cap of 16; cost grows as nmax^4")

    start_time = time.perf_counter()
    logger.info(
        f"Computing coefficients: {mesh.face_count} tetrahedra, nmax={nmax}, n_q={n_q}, "
        f"slabs={scheme.value}, R0={R0:g} m, threads={threads}"
    )

    # 1. Shape functions at unit radius; Jacobians scaled by 1/R0 instead
    shapes = shape_cache.get(nmax, 1.0)
    J_phys = mesh.jacobians()
    J_unit = J_phys / R0
    detJ = mesh.signed_determinants()
    weights = [slab_weight_table(n, n_q, scheme) for n in range(nmax + 1)]

    # 2. Map over fixed chunks, reduce in chunk order
    def work(start: int, stop: int) -> np.ndarray:
        return _moment_chunk(
            J_unit[start:stop], J_phys[start:stop], detJ[start:stop],
            density, shapes, weights, n_q, scheme, nmax, start,
        )

    acc = KahanAccumulator((nmax + 1, 2, nmax + 1))
    chunks = chunk_ranges(mesh.face_count, CHUNK_SIZE)
    for partial in map_chunks(work, chunks, threads=threads, ordered=deterministic):
        acc.add(partial)
    I = acc.total

    # 3. Mass normalization
    M = float(I[0, 0, 0])
    if not M > 0:
        raise NonPositiveMassError(f"total mass is {M!r} kg; check density values and mesh winding")
    Cbar = I[:, 0, :] / M
    Sbar = I[:, 1, :] / M
    Sbar[:, 0] = 0.0
    Cbar[0, 0] = 1.0

    provenance = Provenance(
        mesh_id=mesh.mesh_id,
        density_sha256=density_digest(density),
        n_q=n_q,
        G=G,
        slab_scheme=scheme.value,
        total_mass_kg=M,
        brillouin_radius_m=r_brillouin,
        tetrahedron_count=mesh.face_count,
    )
    model = SHModel(mu=G * M, R0=R0, nmax=nmax, Cbar=Cbar, Sbar=Sbar, provenance=provenance)
    logger.info(
        f"✅ Coefficients computed in {time.perf_counter() - start_time:.2f}s: "
        f"M={M:.6e} kg, mu={model.mu:.6e} m^3/s^2"
    )
    return model


# --- files ---

class SHModelFile(BaseModel):
    """On-disk schema; triangular arrays are stored one row per degree."""
    model_config = ConfigDict(extra="forbid")

    format_version: int
    mu_m3s2: float
    R0_m: float
    nmax: int
    Cbar: List[List[float]]
    Sbar: List[List[float]]
    provenance: Provenance = Provenance()


def model_to_dict(model: SHModel) -> dict:
    def tri(A: np.ndarray) -> List[List[float]]:
        return [A[n, : n + 1].tolist() for n in range(model.nmax + 1)]

    return SHModelFile(
        format_version=SHMODEL_FORMAT_VERSION,
        mu_m3s2=model.mu,
        R0_m=model.R0,
        nmax=model.nmax,
        Cbar=tri(model.Cbar),
        Sbar=tri(model.Sbar),
        provenance=model.provenance,
    ).model_dump(mode="json")


def model_from_dict(data: dict) -> SHModel:
    try:
        f = SHModelFile.model_validate(data)
    except ValidationError as e:
        raise InputError(f"invalid SHModel file: {e.errors()[0]['loc']}: {e.errors()[0]['msg']}")
    if f.format_version != SHMODEL_FORMAT_VERSION:
        raise InputError(f"unsupported SHModel format_version {f.format_version} (expected {SHMODEL_FORMAT_VERSION})")
    rows = (f.nmax + 1, f.nmax + 1)
    C, S = np.zeros(rows), np.zeros(rows)
    for name, src, dst in (("Cbar", f.Cbar, C), ("Sbar", f.Sbar, S)):
        if len(src) != f.nmax + 1 or any(len(src[n]) != n + 1 for n in range(len(src))):
            raise InputError(f"{name} must have nmax+1 rows with n+1 entries in row n")
        for n, row in enumerate(src):
            dst[n, : n + 1] = row
    return SHModel(mu=f.mu_m3s2, R0=f.R0_m, nmax=f.nmax, Cbar=C, Sbar=S, provenance=f.provenance)


def save_model(model: SHModel, path: str) -> None:
    write_json(path, model_to_dict(model))
    logger.info(f"Wrote SHModel nmax={model.nmax} to {path}")


def load_model(path: str) -> SHModel:
    return model_from_dict(read_json(path))
