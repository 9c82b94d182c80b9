"""
Homogeneous trinomials in (x, y, z) and the solid-harmonic shape functions.

The shape functions of degree n are

    c̄nm(x) = (r/R0)^n P̄nm(z/r) cos(m lon) / (2n+1)
    s̄nm(x) = (r/R0)^n P̄nm(z/r) sin(m lon) / (2n+1)

which are polynomials of degree n. They are built from the Legendre
recursions multiplied through by r^n, with angle addition absorbing the
longitude terms.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Tuple

import numpy as np

Exponent = Tuple[int, int, int]


@lru_cache(maxsize=None)
def monomial_exponents(n: int) -> Tuple[Exponent, ...]:
    """Graded order for degree n: i descending, then j descending."""
    return tuple((i, j, n - i - j) for i in range(n, -1, -1) for j in range(n - i, -1, -1))


@lru_cache(maxsize=None)
def monomial_index(n: int) -> Dict[Exponent, int]:
    return {e: idx for idx, e in enumerate(monomial_exponents(n))}


@dataclass(frozen=True)
class SparseTrinomial:
    degree: int
    terms: Mapping[Exponent, float] = field(default_factory=dict)

    def __post_init__(self):
        for key in self.terms:
            if sum(key) != self.degree or min(key) < 0:
                raise ValueError(f"term {key} does not belong to a degree-{self.degree} trinomial")

    @classmethod
    def from_terms(cls, degree: int, terms: Mapping[Exponent, float]) -> "SparseTrinomial":
        """Build with zero coefficients dropped."""
        return cls(degree, {k: float(v) for k, v in terms.items() if v != 0.0})

    @classmethod
    def zero(cls, degree: int) -> "SparseTrinomial":
        return cls(degree, {})

    @classmethod
    def from_dense(cls, degree: int, coeffs: np.ndarray) -> "SparseTrinomial":
        return cls.from_terms(degree, dict(zip(monomial_exponents(degree), np.asarray(coeffs).tolist())))

    def to_dense(self) -> np.ndarray:
        index = monomial_index(self.degree)
        out = np.zeros(len(index))
        for key, c in self.terms.items():
            out[index[key]] = c
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def scaled(self, factor: float) -> "SparseTrinomial":
        return SparseTrinomial.from_terms(self.degree, {k: factor * c for k, c in self.terms.items()})

    def __add__(self, other: "SparseTrinomial") -> "SparseTrinomial":
        if other.degree != self.degree:
            raise ValueError(f"cannot add degree {self.degree} and degree {other.degree} trinomials")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0.0) + c
        return SparseTrinomial.from_terms(self.degree, terms)

    def __sub__(self, other: "SparseTrinomial") -> "SparseTrinomial":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "SparseTrinomial") -> "SparseTrinomial":
        return tri_mul(self, other)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        x, y, z = points[:, 0], points[:, 1], points[:, 2]
        out = np.zeros(len(points))
        for (i, j, k), c in self.terms.items():
            out += c * x**i * y**j * z**k
        return out


@dataclass(frozen=True)
class HarmonicPair:
    n: int
    m: int
    c: SparseTrinomial
    s: SparseTrinomial


def tri_mul(a: SparseTrinomial, b: SparseTrinomial) -> SparseTrinomial:
    terms: Dict[Exponent, float] = {}
    for (i1, j1, k1), c1 in a.terms.items():
        for (i2, j2, k2), c2 in b.terms.items():
            key = (i1 + i2, j1 + j2, k1 + k2)
            terms[key] = terms.get(key, 0.0) + c1 * c2
    return SparseTrinomial.from_terms(a.degree + b.degree, terms)


def linear_form(a: float, b: float, c: float) -> SparseTrinomial:
    return SparseTrinomial.from_terms(1, {(1, 0, 0): a, (0, 1, 0): b, (0, 0, 1): c})


def tri_compose_linear(t: SparseTrinomial, J: np.ndarray) -> SparseTrinomial:
    """t'(X) = t(J X): substitute each of x, y, z by the matching row of J."""
    J = np.asarray(J, dtype=float)
    forms = [linear_form(*J[row]) for row in range(3)]
    powers: List[List[SparseTrinomial]] = [[SparseTrinomial.from_terms(0, {(0, 0, 0): 1.0})] for _ in range(3)]
    for row in range(3):
        for _ in range(t.degree):
            powers[row].append(tri_mul(powers[row][-1], forms[row]))

    result = SparseTrinomial.zero(t.degree)
    for (i, j, k), c in t.terms.items():
        result = result + tri_mul(tri_mul(powers[0][i], powers[1][j]), powers[2][k]).scaled(c)
    return result


# --- shape functions ---

_R2 = SparseTrinomial(2, {(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0})


def build_shape_functions(nmax: int, R0: float) -> List[List[HarmonicPair]]:
    """pairs[n][m] for 0 <= m <= n <= nmax."""
    if nmax < 0 or not R0 > 0:
        raise ValueError(f"build_shape_functions needs nmax >= 0 and R0 > 0, got {nmax}, {R0}")
    inv_r0 = 1.0 / R0
    x = linear_form(inv_r0, 0.0, 0.0)
    y = linear_form(0.0, inv_r0, 0.0)
    z = linear_form(0.0, 0.0, inv_r0)
    r2 = _R2.scaled(inv_r0 * inv_r0)

    C: List[List[SparseTrinomial]] = [[SparseTrinomial(0, {(0, 0, 0): 1.0})]]
    S: List[List[SparseTrinomial]] = [[SparseTrinomial.zero(0)]]

    for n in range(1, nmax + 1):
        c_row: List[SparseTrinomial] = [SparseTrinomial.zero(n)] * (n + 1)
        s_row: List[SparseTrinomial] = [SparseTrinomial.zero(n)] * (n + 1)
        shrink = (2 * n - 1) / (2 * n + 1)

        # Sectoral
        cp, sp = C[n - 1][n - 1], S[n - 1][n - 1]
        if n == 1:
            k = math.sqrt(3.0) / 3.0
            c_row[1], s_row[1] = x.scaled(k), y.scaled(k)
        else:
            k = math.sqrt((2 * n + 1) / (2 * n)) * shrink
            c_row[n] = (x * cp - y * sp).scaled(k)
            s_row[n] = (y * cp + x * sp).scaled(k)

        # First off-diagonal
        k = math.sqrt(2 * n + 1) * shrink
        c_row[n - 1] = (z * cp).scaled(k)
        s_row[n - 1] = (z * sp).scaled(k)

        # Remaining orders
        for m in range(0, n - 1):
            gamma = math.sqrt((2 * n + 1) * (2 * n - 1) / ((n - m) * (n + m)))
            gamma_prev = math.sqrt((2 * n - 1) * (2 * n - 3) / ((n - 1 - m) * (n - 1 + m)))
            a = gamma * shrink
            b = (gamma / gamma_prev) * (2 * n - 3) / (2 * n + 1)
            c_row[m] = (z * C[n - 1][m]).scaled(a) - (r2 * C[n - 2][m]).scaled(b)
            s_row[m] = (z * S[n - 1][m]).scaled(a) - (r2 * S[n - 2][m]).scaled(b)

        s_row[0] = SparseTrinomial.zero(n)
        C.append(c_row)
        S.append(s_row)

    return [[HarmonicPair(n, m, C[n][m], S[n][m]) for m in range(n + 1)] for n in range(nmax + 1)]


def shape_matrix(pairs: List[List[HarmonicPair]], n: int) -> np.ndarray:
    """Dense rows [c̄n0 .. c̄nn, s̄n0 .. s̄nn] over monomial_exponents(n), shape (2(n+1), nd)."""
    rows = [p.c.to_dense() for p in pairs[n]] + [p.s.to_dense() for p in pairs[n]]
    return np.vstack(rows)


# --- batched composition ---

@lru_cache(maxsize=None)
def _raise_maps(n: int) -> Tuple[Tuple[np.ndarray, np.ndarray, int], ...]:
    """
    Degree-n monomials grouped by the first axis e with a nonzero exponent,
    so that child = parent * unit(e). Per group: (child indices, parent
    indices in degree n-1, e).
    """
    child_index = monomial_index(n)
    parent_index = monomial_index(n - 1)
    groups = []
    for e in range(3):
        children, parents = [], []
        for a in monomial_exponents(n):
            if next(d for d in range(3) if a[d] > 0) != e:
                continue
            parent = list(a)
            parent[e] -= 1
            children.append(child_index[a])
            parents.append(parent_index[tuple(parent)])
        groups.append((np.array(children, dtype=np.intp), np.array(parents, dtype=np.intp), e))
    return tuple(groups)


@lru_cache(maxsize=None)
def _raise_index(n: int) -> np.ndarray:
    """raise[f, d'] = degree-n index of (monomial d' of degree n-1) * unit(f)."""
    child_index = monomial_index(n)
    out = np.zeros((3, len(monomial_exponents(n - 1))), dtype=np.intp)
    for d, a in enumerate(monomial_exponents(n - 1)):
        for f in range(3):
            b = list(a)
            b[f] += 1
            out[f, d] = child_index[tuple(b)]
    return out


def compose_monomials(J_batch: np.ndarray, nmax: int) -> List[np.ndarray]:
    """
    For every Jacobian J in the batch and every monomial x^i y^j z^k of degree
    n <= nmax, the coefficients of (J X) substituted into that monomial, in the
    X basis. Entry n has shape (nd, B, nd): [monomial of x, batch, monomial of X].
    """
    J_batch = np.asarray(J_batch, dtype=float)
    B = J_batch.shape[0]
    out = [np.ones((1, B, 1))]
    for n in range(1, nmax + 1):
        prev = out[-1]
        nd = len(monomial_exponents(n))
        raise_idx = _raise_index(n)
        cur = np.zeros((nd, B, nd))
        for children, parents, e in _raise_maps(n):
            if children.size == 0:
                continue
            block = np.zeros((children.size, B, nd))
            src = prev[parents]
            for f in range(3):
                block[:, :, raise_idx[f]] += src * J_batch[None, :, e, f, None]
            cur[children] = block
        out.append(cur)
    return out
