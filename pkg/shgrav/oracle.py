"""
Brute-force checks for the coefficient pipeline.

`mc_coefficients` estimates the defining volume integrals directly: it draws
points uniformly inside the body (tetrahedron chosen by |detJ|, position by
uniform simplex sampling) and averages density times shape function. It
shares nothing with the analytic path except the trinomials themselves.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from .constants import MC_BATCH
from .density import DensityModel
from .errors import NumericDomainError
from .mesh import TriangleMesh, brillouin_radius
from .parallel import chunk_ranges, map_chunks
from .shape_cache import shape_cache
from .shcoeff import SHModel, SlabScheme, segment_centers, slab_index

logger = logging.getLogger("Oracle")

MONOMIAL_DEGREE_CAP = 20


def simplex_monomial_integral(i: int, j: int, k: int) -> Fraction:
    """Integral of X^i Y^j Z^k over the standard simplex: i! j! k! / (i+j+k+3)!."""
    if min(i, j, k) < 0:
        raise NumericDomainError(f"exponents must be non-negative, got {(i, j, k)}")
    if i + j + k > MONOMIAL_DEGREE_CAP:
        raise NumericDomainError(f"total degree {i + j + k} exceeds the cap of {MONOMIAL_DEGREE_CAP}")
    f = math.factorial
    return Fraction(f(i) * f(j) * f(k), f(i + j + k + 3))


class SamplingMode(str, Enum):
    # Density at each sample point
    POINTWISE = "pointwise"
    # Density at the center of the slab holding the sample
    SEGMENT = "segment"


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    standard_error: float
    sample_count: int


@dataclass(frozen=True)
class MonteCarloCoefficients:
    nmax: int
    R0: float
    C: np.ndarray  # (nmax+1, nmax+1) estimates of C̄nm
    S: np.ndarray
    C_se: np.ndarray
    S_se: np.ndarray
    mass: QuadratureEstimate
    sample_count: int

    def estimate(self, kind: str, n: int, m: int) -> QuadratureEstimate:
        value, se = (self.C, self.C_se) if kind == "C" else (self.S, self.S_se)
        return QuadratureEstimate(float(value[n, m]), float(se[n, m]), self.sample_count)


def sample_simplex(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points of X, Y, Z >= 0, X+Y+Z <= 1 from the spacings of sorted uniforms."""
    u = np.sort(rng.random((count, 3)), axis=1)
    return np.column_stack([u[:, 0], u[:, 1] - u[:, 0], u[:, 2] - u[:, 1]])


def _shape_rows(nmax: int, R0: float):
    """Flat list of (kind, n, m, trinomial), C rows first then S rows with m >= 1."""
    pairs = shape_cache.get(nmax, R0).pairs
    rows = [("C", n, m, pairs[n][m].c) for n in range(nmax + 1) for m in range(n + 1)]
    rows += [("S", n, m, pairs[n][m].s) for n in range(1, nmax + 1) for m in range(1, n + 1)]
    return rows


def mc_coefficients(
    mesh: TriangleMesh,
    density: DensityModel,
    nmax: int,
    samples: int,
    seed: int,
    R0: Optional[float] = None,
    mode: SamplingMode = SamplingMode.POINTWISE,
    n_q: int = 10,
    scheme: SlabScheme = SlabScheme.Z,
    threads: int = 1,
) -> MonteCarloCoefficients:
    """
    Ratio estimates C̄nm = mean(rho c̄nm) / mean(rho), with delta-method
    standard errors. Batches of MC_BATCH samples draw from independent
    substreams of `seed` and are reduced in batch order.
    """
    if samples < 10_000:
        raise NumericDomainError(f"the oracle needs at least 1e4 samples, got {samples}")
    mode = SamplingMode(mode)
    scheme = SlabScheme(scheme)
    R0 = brillouin_radius(mesh) if R0 is None else float(R0)

    J = mesh.jacobians()
    detJ = mesh.signed_determinants()
    weights = np.abs(detJ)
    abs_volume = weights.sum() / 6.0
    prob = weights / weights.sum()
    sign = np.sign(detJ)
    rows = _shape_rows(nmax, R0)
    centers = segment_centers(n_q, scheme)

    batches = chunk_ranges(samples, MC_BATCH)
    streams = np.random.SeedSequence(seed).spawn(len(batches))

    def work(start: int, stop: int) -> np.ndarray:
        rng = np.random.default_rng(streams[start // MC_BATCH])
        count = stop - start
        tet = rng.choice(len(detJ), size=count, p=prob)
        X = sample_simplex(rng, count)
        x = np.einsum("kij,kj->ki", J[tet], X)
        if mode is SamplingMode.POINTWISE:
            rho = density.evaluate(x)
        else:
            Xq = centers[slab_index(X, n_q, scheme)]
            rho = density.evaluate(np.einsum("kij,kj->ki", J[tet], Xq))

        mass_term = abs_volume * sign[tet] * rho  # B
        vals = np.vstack([mass_term * t.evaluate(x) for _, _, _, t in rows])  # A per row
        # Sums of B, B^2, A, A^2, A*B
        return np.concatenate([
            [mass_term.sum(), (mass_term**2).sum()],
            vals.sum(axis=1), (vals**2).sum(axis=1), (vals * mass_term).sum(axis=1),
        ])

    totals = None
    for part in map_chunks(work, batches, threads=threads, ordered=True):
        totals = part if totals is None else totals + part

    N = samples
    k = len(rows)
    sB, sB2 = totals[0], totals[1]
    sA, sA2, sAB = totals[2 : 2 + k], totals[2 + k : 2 + 2 * k], totals[2 + 2 * k :]
    mean_B = sB / N
    ratio = (sA / N) / mean_B
    # var(A - R B) with A, B sample moments; unbiased
    var = (sA2 / N - 2.0 * ratio * sAB / N + ratio**2 * sB2 / N) * N / (N - 1)
    se = np.sqrt(np.maximum(var, 0.0) / N) / abs(mean_B)

    C = np.zeros((nmax + 1, nmax + 1))
    S = np.zeros_like(C)
    C_se = np.zeros_like(C)
    S_se = np.zeros_like(C)
    for idx, (kind, n, m, _) in enumerate(rows):
        target, target_se = (C, C_se) if kind == "C" else (S, S_se)
        target[n, m] = ratio[idx]
        target_se[n, m] = se[idx]
    C[0, 0], C_se[0, 0] = 1.0, 0.0

    mass_se = math.sqrt(max(sB2 / N - mean_B**2, 0.0) * N / (N - 1) / N)
    logger.info(f"Monte-Carlo oracle: {N} samples, mode={mode.value}, M={mean_B:.6e} +- {mass_se:.2e} kg")
    return MonteCarloCoefficients(
        nmax=nmax, R0=R0, C=C, S=S, C_se=C_se, S_se=S_se,
        mass=QuadratureEstimate(mean_B, mass_se, N), sample_count=N,
    )


@dataclass(frozen=True)
class VerifyReport:
    rows: List[Dict[str, object]]
    pass_fraction: float
    z_limit: float

    def to_dict(self) -> Dict[str, object]:
        return {"z_limit": self.z_limit, "pass_fraction": self.pass_fraction, "rows": self.rows}


def verify_report(analytic: SHModel, estimates: MonteCarloCoefficients, z_limit: float = 3.0) -> VerifyReport:
    """
    One row per C̄nm (all m) and S̄nm (m >= 1) up to the estimate's degree.
    C̄00 is normalized on both sides and is not counted.
    """
    rows: List[Dict[str, object]] = []
    nmax = min(analytic.nmax, estimates.nmax)
    for kind, table in (("C", analytic.Cbar), ("S", analytic.Sbar)):
        for n in range(1, nmax + 1):
            for m in range(0 if kind == "C" else 1, n + 1):
                est = estimates.estimate(kind, n, m)
                diff = float(table[n, m]) - est.value
                if est.standard_error > 0:
                    z = diff / est.standard_error
                else:
                    z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
                rows.append({
                    "n": n, "m": m, "kind": kind,
                    "analytic": float(table[n, m]), "mc": est.value,
                    "sigma": est.standard_error, "z": z,
                })
    passed = sum(1 for r in rows if abs(r["z"]) <= z_limit)
    fraction = passed / len(rows) if rows else 1.0
    return VerifyReport(rows=rows, pass_fraction=fraction, z_limit=z_limit)
