"""
Fully normalized associated Legendre functions P̄nm(u), u = sin(phi), and
their latitude derivatives.

Geodesy normalization: N_nm = sqrt((n-m)! (2n+1) (2 - delta_m0) / (n+m)!),
no Condon-Shortley phase. Recursion, anchored on P̄00, P̄10, P̄11:

    P̄nn    = sqrt((2n+1)/(2n)) s P̄n-1,n-1
    P̄n,n-1 = sqrt(2n+1) u P̄n-1,n-1
    P̄nm    = G_nm u P̄n-1,m - (G_nm / G_n-1,m) P̄n-2,m
    G_nm   = sqrt((2n+1)(2n-1) / ((n-m)(n+m)))

with s = cos(phi) = sqrt(1 - u^2). All array routines broadcast over the
trailing axes of u.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from .constants import EPS_POLE, EXACT_FACTORIAL_MAX
from .errors import NumericDomainError, PoleProximityError


def norm_factor(n: int, m: int) -> float:
    if n < 0 or m < 0 or m > n:
        raise NumericDomainError(f"norm_factor needs 0 <= m <= n, got n={n}, m={m}")
    delta = 2 if m > 0 else 1
    if n <= EXACT_FACTORIAL_MAX:
        ratio = Fraction(math.factorial(n - m) * (2 * n + 1) * delta, math.factorial(n + m))
        return math.sqrt(ratio)
    log_ratio = math.lgamma(n - m + 1) - math.lgamma(n + m + 1)
    return math.sqrt(delta * (2 * n + 1) * math.exp(log_ratio))


@lru_cache(maxsize=32)
def _recursion_coefficients(nmax: int) -> Tuple[np.ndarray, ...]:
    """
    Precomputed recursion constants, indexed [n] or [n, m].
    Returned arrays are shared; callers must not write to them.
    """
    size = nmax + 2
    diag = np.zeros(size)
    sub = np.zeros(size)
    gamma = np.zeros((size, size))
    ratio = np.zeros((size, size))
    deriv_k = np.zeros((size, size))

    for n in range(1, size):
        diag[n] = math.sqrt((2 * n + 1) / (2 * n))
        sub[n] = math.sqrt(2 * n + 1)
        for m in range(0, n):
            gamma[n, m] = math.sqrt((2 * n + 1) * (2 * n - 1) / ((n - m) * (n + m)))
    for n in range(2, size):
        for m in range(0, n - 1):
            ratio[n, m] = gamma[n, m] / gamma[n - 1, m]
    for n in range(0, size):
        deriv_k[n, 0] = math.sqrt(n * (n + 1) / 2)
        for m in range(1, n + 1):
            deriv_k[n, m] = math.sqrt((n - m) * (n + m + 1))

    for arr in (diag, sub, gamma, ratio, deriv_k):
        arr.setflags(write=False)
    return diag, sub, gamma, ratio, deriv_k


def legendre_values(nmax: int, u, s=None, extra_order: bool = False) -> np.ndarray:
    """
    P̄nm(u) for 0 <= m <= n <= nmax, shape (nmax+1, ncols, *u.shape).

    `s` is cos(phi); pass it when it is known more accurately than
    sqrt(1 - u^2) (near the poles). With extra_order an additional zero column
    m = nmax+1 is included so P̄n,m+1 can be indexed for every m <= n.
    """
    if nmax < 0:
        raise NumericDomainError(f"nmax must be >= 0, got {nmax}")
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0):
        raise NumericDomainError(f"Legendre argument must satisfy |u| <= 1 (max |u| = {np.max(np.abs(u))!r})")
    if s is None:
        s = np.sqrt(np.maximum(0.0, 1.0 - u * u))
    else:
        s = np.asarray(s, dtype=float)

    diag, sub, gamma, ratio, _ = _recursion_coefficients(nmax)
    ncols = nmax + 2 if extra_order else nmax + 1
    P = np.zeros((nmax + 1, ncols) + u.shape)
    P[0, 0] = 1.0
    if nmax >= 1:
        P[1, 0] = math.sqrt(3.0) * u
        P[1, 1] = math.sqrt(3.0) * s
    for n in range(2, nmax + 1):
        P[n, n] = diag[n] * s * P[n - 1, n - 1]
        P[n, n - 1] = sub[n] * u * P[n - 1, n - 1]
        g = gamma[n, : n - 1].reshape((-1,) + (1,) * u.ndim)
        k = ratio[n, : n - 1].reshape((-1,) + (1,) * u.ndim)
        P[n, : n - 1] = g * u * P[n - 1, : n - 1] - k * P[n - 2, : n - 1]
    return P


def legendre_dphi_values(nmax: int, u, s, P: Optional[np.ndarray] = None) -> np.ndarray:
    """
    dP̄nm/dphi = -m tan(phi) P̄nm + K_nm P̄n,m+1, shape (nmax+1, nmax+1, *u.shape).
    Requires s > 0; the pole is the caller's business.
    """
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    if P is None or P.shape[1] < nmax + 2:
        P = legendre_values(nmax, u, s, extra_order=True)
    _, _, _, _, deriv_k = _recursion_coefficients(nmax)
    expand = (slice(None), slice(None)) + (None,) * u.ndim
    m = np.arange(nmax + 1, dtype=float)[None, :]
    tan_phi = u / s
    return (
        -(m[expand] * P[:, : nmax + 1]) * tan_phi
        + deriv_k[: nmax + 1, : nmax + 1][expand] * P[:, 1 : nmax + 2]
    )


@dataclass(frozen=True)
class LegendreTable:
    nmax: int
    u: float
    values: np.ndarray  # (nmax+1, nmax+1), zero above the diagonal

    def __getitem__(self, nm: Tuple[int, int]) -> float:
        n, m = nm
        return float(self.values[n, m])


@dataclass(frozen=True)
class LegendreDerivTable:
    nmax: int
    phi: float
    values: np.ndarray

    def __getitem__(self, nm: Tuple[int, int]) -> float:
        n, m = nm
        return float(self.values[n, m])


def legendre_table(nmax: int, u: float) -> LegendreTable:
    u = float(u)
    if not abs(u) <= 1.0:
        raise NumericDomainError(f"Legendre argument must satisfy |u| <= 1, got {u!r}")
    values = legendre_values(nmax, u)
    values.setflags(write=False)
    return LegendreTable(nmax=nmax, u=u, values=values)


def legendre_dphi_table(nmax: int, phi: float) -> LegendreDerivTable:
    phi = float(phi)
    if not abs(phi) <= math.pi / 2 - EPS_POLE:
        raise PoleProximityError(
            f"latitude {phi!r} rad is within {EPS_POLE:g} rad of a pole; "
            f"use the guarded field path on the z-axis"
        )
    values = legendre_dphi_values(nmax, math.sin(phi), math.cos(phi))
    values.setflags(write=False)
    return LegendreDerivTable(nmax=nmax, phi=phi, values=values)
