"""
Tests for the normalized Legendre recursions and their latitude derivatives.
"""
import math
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import lpmv

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.errors import NumericDomainError, PoleProximityError
from shgrav.legendre import (
    legendre_dphi_table,
    legendre_dphi_values,
    legendre_table,
    legendre_values,
    norm_factor,
)


# --- norm_factor ---

def test_norm_factor_examples():
    assert norm_factor(0, 0) == 1.0
    assert norm_factor(1, 0) == pytest.approx(math.sqrt(3.0), rel=1e-15)
    assert norm_factor(2, 2) == pytest.approx(math.sqrt(5.0 / 12.0), rel=1e-15)


def test_norm_factor_log_space_branch():
    n, m = 25, 7
    exact = Fraction(math.factorial(n - m) * (2 * n + 1) * 2, math.factorial(n + m))
    assert norm_factor(n, m) == pytest.approx(math.sqrt(exact), rel=1e-12)


def test_norm_factor_domain():
    with pytest.raises(NumericDomainError):
        norm_factor(2, 3)
    with pytest.raises(ValueError):
        norm_factor(-1, 0)


# --- legendre_table ---

def test_table_low_degree_values():
    t = legendre_table(1, 0.5)
    assert t[0, 0] == 1.0
    assert t[1, 0] == pytest.approx(0.8660254037844386, rel=1e-15)
    assert t[1, 1] == pytest.approx(1.5, rel=1e-15)
    assert legendre_table(2, 0.0)[2, 0] == pytest.approx(-math.sqrt(5.0) / 2.0, rel=1e-15)


@pytest.mark.parametrize("u", [1.0, -1.0])
def test_table_at_poles(u):
    t = legendre_table(8, u)
    for n in range(9):
        for m in range(1, n + 1):
            assert t[n, m] == 0.0


def test_table_domain():
    with pytest.raises(NumericDomainError):
        legendre_table(3, 1.0000001)


def test_table_is_read_only():
    t = legendre_table(3, 0.2)
    with pytest.raises(ValueError):
        t.values[0, 0] = 2.0


def test_matches_definition():
    # scipy's lpmv carries the Condon-Shortley phase (-1)^m
    u = np.linspace(-0.999, 0.999, 41)
    P = legendre_values(4, u)
    for n in range(5):
        for m in range(n + 1):
            ref = norm_factor(n, m) * (-1) ** m * lpmv(m, n, u)
            np.testing.assert_allclose(P[n, m], ref, rtol=1e-12, atol=1e-13)


def test_orthonormality():
    nodes, weights = np.polynomial.legendre.leggauss(24)
    lam = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    P = legendre_values(6, nodes)
    for n in range(7):
        for m in range(n + 1):
            mean_cos2 = np.mean(np.cos(m * lam) ** 2)
            average = 0.5 * np.sum(weights * P[n, m] ** 2) * mean_cos2
            assert average == pytest.approx(1.0, abs=1e-10), (n, m)


# --- legendre_dphi_table ---

def test_dphi_examples():
    assert legendre_dphi_table(1, 0.0)[1, 0] == pytest.approx(math.sqrt(3.0), rel=1e-15)
    d = legendre_dphi_table(6, 0.0)
    for n in range(7):
        assert d[n, n] == 0.0


def test_dphi_21_against_finite_difference():
    phi, h = 0.3, 1e-6
    fd = (legendre_table(2, math.sin(phi + h))[2, 1] - legendre_table(2, math.sin(phi - h))[2, 1]) / (2 * h)
    assert legendre_dphi_table(2, phi)[2, 1] == pytest.approx(fd, rel=1e-8)


def test_dphi_against_finite_difference_grid():
    phi = np.random.default_rng(4).uniform(-1.4, 1.4, 1000)
    h = 1e-6
    nmax = 10
    d = legendre_dphi_values(nmax, np.sin(phi), np.cos(phi))
    plus = legendre_values(nmax, np.sin(phi + h), np.cos(phi + h))
    minus = legendre_values(nmax, np.sin(phi - h), np.cos(phi - h))
    fd = (plus - minus) / (2 * h)
    assert np.max(np.abs(d - fd)) < 1e-7


def test_dphi_refuses_poles():
    with pytest.raises(PoleProximityError):
        legendre_dphi_table(4, math.pi / 2)
    with pytest.raises(PoleProximityError):
        legendre_dphi_table(4, -math.pi / 2 + 1e-12)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
