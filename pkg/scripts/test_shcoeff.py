"""
Tests for the beta-function integrals, slab discretization and the coefficient pipeline.
"""
import json
import os
import sys

import numpy as np
import pytest
from scipy import integrate, special

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.constants import G_DEFAULT
from shgrav.density import HalfSpaceDensity, RadialShellsDensity, UniformDensity
from shgrav.errors import (
    InputError,
    InsufficientDegreeError,
    ModelError,
    NonFiniteAccumulationError,
    NumericDomainError,
)
from shgrav.mesh import load_obj
from shgrav.oracle import simplex_monomial_integral
from shgrav.shcoeff import (
    RadialDiscretization,
    SHModel,
    SlabScheme,
    beta_fn,
    center_of_mass,
    compute_coefficients,
    incomplete_beta,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    slab_integral_h,
    slab_volumes,
    slab_weight_table,
)
from shgrav.trinomial import monomial_exponents

from conftest import HALF_SPHERE_X_COM, RHO_SPHERE, SPHERE_R, asset_path, sphere_volume


def _exponents(max_degree):
    return [(i, j, k) for n in range(max_degree + 1) for (i, j, k) in monomial_exponents(n)]


# --- beta functions ---

def test_beta_examples():
    assert beta_fn(1, 2) == 0.5
    assert beta_fn(1, 1) == 1.0
    assert beta_fn(3, 2) == pytest.approx(1.0 / 12.0, rel=1e-15)


def test_beta_domain():
    with pytest.raises(NumericDomainError):
        beta_fn(0, 2)
    with pytest.raises(NumericDomainError):
        incomplete_beta(0.5, 1.5, 2)
    with pytest.raises(NumericDomainError):
        incomplete_beta(1.2, 1, 2)


def test_incomplete_beta_examples():
    assert incomplete_beta(1.0, 4, 7) == pytest.approx(beta_fn(4, 7), rel=1e-15)
    assert incomplete_beta(0.5, 1, 3) == pytest.approx(0.875 / 3.0, rel=1e-15)
    assert incomplete_beta(0.0, 3, 5) == 0.0


def test_incomplete_beta_against_scipy():
    x = np.linspace(0.0, 1.0, 23)
    for a in range(1, 9):
        for b in range(1, 12):
            ref = special.betainc(a, b, x) * special.beta(a, b)
            np.testing.assert_allclose(incomplete_beta(x, a, b), ref, rtol=1e-11, atol=1e-300)


# --- slab integrals ---

def test_slab_integral_examples():
    assert slab_integral_h(1.0, 0, 0, 0) == pytest.approx(1.0 / 6.0, rel=1e-15)
    assert slab_integral_h(0.5, 0, 0, 0) == pytest.approx(0.5 * 0.875 / 3.0, rel=1e-15)


def test_full_slab_is_simplex_monomial_integral():
    for i, j, k in _exponents(8):
        exact = float(simplex_monomial_integral(i, j, k))
        assert abs(slab_integral_h(1.0, i, j, k) - exact) < 1e-15, (i, j, k)


def test_slab_integral_against_cubature():
    i, j, k, q = 2, 1, 1, 0.37
    ref, _ = integrate.tplquad(
        lambda X, Y, Z: X**i * Y**j * Z**k,
        0.0, q,
        lambda Z: 0.0, lambda Z: 1.0 - Z,
        lambda Z, Y: 0.0, lambda Z, Y: 1.0 - Y - Z,
        epsabs=1e-15, epsrel=1e-12,
    )
    assert slab_integral_h(q, i, j, k) == pytest.approx(ref, rel=1e-10)


def test_radial_shell_integral_against_cubature():
    i, j, k, s = 1, 0, 2, 0.6
    n = i + j + k
    ref, _ = integrate.tplquad(
        lambda X, Y, Z: X**i * Y**j * Z**k,
        0.0, s,
        lambda Z: 0.0, lambda Z: s - Z,
        lambda Z, Y: 0.0, lambda Z, Y: s - Y - Z,
        epsabs=1e-15, epsrel=1e-12,
    )
    # With n_q = 5 the first three shells fill X + Y + Z <= 0.6
    table = slab_weight_table(n, 5, SlabScheme.RADIAL)
    d = monomial_exponents(n).index((i, j, k))
    assert table[:3, d].sum() == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("scheme", list(SlabScheme))
@pytest.mark.parametrize("n_q", [1, 3, 10, 37])
def test_slab_weights_telescope(scheme, n_q):
    for n in range(9):
        table = slab_weight_table(n, n_q, scheme)
        for d, (i, j, k) in enumerate(monomial_exponents(n)):
            assert abs(table[:, d].sum() - slab_integral_h(1.0, i, j, k)) < 1e-14


@pytest.mark.parametrize("scheme", list(SlabScheme))
def test_slab_volumes_sum_to_simplex_volume(scheme):
    for n_q in (1, 2, 7, 40):
        assert slab_volumes(n_q, scheme).sum() == pytest.approx(1.0 / 6.0, rel=1e-13)
        np.testing.assert_allclose(slab_volumes(n_q, scheme), slab_weight_table(0, n_q, scheme)[:, 0], rtol=1e-11)


def test_radial_discretization_bounds():
    disc = RadialDiscretization(4)
    np.testing.assert_array_equal(disc.q_minus, [0.0, 0.25, 0.5, 0.75])
    np.testing.assert_array_equal(disc.q_plus, [0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(disc.centers()[1], [0.625 / 3.0, 0.625 / 3.0, 0.375])
    with pytest.raises(NumericDomainError):
        RadialDiscretization(0)


# --- compute_coefficients ---

def test_uniform_sphere(uniform_sphere_model, sphere_mesh):
    model = uniform_sphere_model
    expected_mu = G_DEFAULT * sphere_volume(SPHERE_R) * RHO_SPHERE
    assert model.mu == pytest.approx(93.3, rel=5e-3)
    assert model.mu == pytest.approx(expected_mu, rel=5e-3)
    assert model.mu == pytest.approx(G_DEFAULT * sphere_mesh.volume * RHO_SPHERE, rel=1e-12)
    assert model.Cbar[0, 0] == 1.0
    assert np.max(np.abs(model.Cbar[1:])) < 1e-5
    assert np.max(np.abs(model.Sbar)) < 1e-5
    assert model.provenance.n_q == 10
    assert model.provenance.tetrahedron_count == sphere_mesh.face_count


def test_uniform_sphere_center_of_mass(uniform_sphere_model):
    assert np.linalg.norm(center_of_mass(uniform_sphere_model)) < 0.1


def test_half_space_sphere_center_of_mass(half_sphere_model):
    com = center_of_mass(half_sphere_model)
    assert HALF_SPHERE_X_COM == pytest.approx(77.21, abs=0.01)
    assert abs(com[0] - HALF_SPHERE_X_COM) < 1.0
    assert abs(com[1]) < 1.0 and abs(com[2]) < 1.0


def test_degree_zero_model(star_mesh):
    model = compute_coefficients(star_mesh, HalfSpaceDensity(normal=(0, 0, 1), rho_pos=3000, rho_neg=1000), 0, 5)
    assert model.Cbar.shape == (1, 1)
    assert model.Cbar[0, 0] == 1.0


def test_uniform_density_does_not_depend_on_slab_count(star_mesh):
    density = UniformDensity(rho=2500.0)
    a = compute_coefficients(star_mesh, density, 4, 1)
    b = compute_coefficients(star_mesh, density, 4, 7)
    assert b.mu == pytest.approx(a.mu, rel=1e-13)
    np.testing.assert_allclose(b.Cbar, a.Cbar, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(b.Sbar, a.Sbar, rtol=1e-13, atol=1e-15)


def test_uniform_density_same_for_both_slab_schemes(star_mesh):
    density = UniformDensity(rho=2500.0)
    a = compute_coefficients(star_mesh, density, 4, 6, scheme=SlabScheme.Z)
    b = compute_coefficients(star_mesh, density, 4, 6, scheme=SlabScheme.RADIAL)
    np.testing.assert_allclose(b.Cbar, a.Cbar, rtol=1e-12, atol=1e-15)
    assert b.provenance.slab_scheme == "radial"


def test_translation_moves_center_of_mass(star_mesh):
    density = UniformDensity(rho=1800.0)
    t = np.array([120.0, -80.0, 40.0])
    before = center_of_mass(compute_coefficients(star_mesh, density, 1, 2))
    after = center_of_mass(compute_coefficients(star_mesh.translated(t), density, 1, 2))
    assert np.linalg.norm(after - before - t) < 1e-9 * np.linalg.norm(t) + 1e-6


def test_recentred_mesh_has_no_degree_one_terms(star_mesh):
    density = UniformDensity(rho=1800.0)
    com = center_of_mass(compute_coefficients(star_mesh, density, 1, 2))
    model = compute_coefficients(star_mesh.translated(-com), density, 1, 2)
    assert max(abs(model.Cbar[1, 0]), abs(model.Cbar[1, 1]), abs(model.Sbar[1, 1])) < 1e-10


def test_radial_slabs_resolve_a_small_core(coarse_sphere):
    core_r, rho_core, rho_mantle = 250.0, 5000.0, 2000.0
    density = RadialShellsDensity(breaks_m=[core_r], values_kgm3=[rho_core, rho_mantle])
    expected = rho_mantle * coarse_sphere.volume + (rho_core - rho_mantle) * sphere_volume(core_r)

    radial = compute_coefficients(coarse_sphere, density, 0, 10, scheme=SlabScheme.RADIAL)
    z_slabs = compute_coefficients(coarse_sphere, density, 0, 10, scheme=SlabScheme.Z)
    assert radial.provenance.total_mass_kg == pytest.approx(expected, rel=1e-2)
    # Z-slab sample points never come close enough to the origin to see the core
    assert abs(z_slabs.provenance.total_mass_kg - expected) > 0.05 * expected


def test_threads_do_not_change_the_result(coarse_sphere):
    density = HalfSpaceDensity(normal=(0.6, 0.0, 0.8), offset_m=40.0, rho_pos=3000.0, rho_neg=2000.0)
    one = compute_coefficients(coarse_sphere, density, 6, 5, threads=1, deterministic=True)
    many = compute_coefficients(coarse_sphere, density, 6, 5, threads=4, deterministic=True)
    assert json.dumps(model_to_dict(one)) == json.dumps(model_to_dict(many))


class _BrokenDensity:
    type = "broken"

    def evaluate(self, points):
        return np.full(len(np.asarray(points).reshape(-1, 3)), np.nan)


def test_non_finite_accumulation_names_tetrahedron(star_mesh):
    with pytest.raises(NonFiniteAccumulationError) as info:
        compute_coefficients(star_mesh, _BrokenDensity(), 2, 3)
    assert info.value.tetrahedron == 0


def test_argument_domain(star_mesh):
    with pytest.raises(NumericDomainError):
        compute_coefficients(star_mesh, UniformDensity(rho=1.0), -1, 3)
    with pytest.raises(NumericDomainError):
        compute_coefficients(star_mesh, UniformDensity(rho=1.0), 2, 0)
    with pytest.raises(NumericDomainError):
        compute_coefficients(star_mesh, UniformDensity(rho=1.0), 2, 3, R0=-5.0)


# --- SHModel ---

def test_model_invariants():
    C = np.zeros((3, 3))
    S = np.zeros((3, 3))
    C[0, 0] = 1.0
    SHModel(mu=1.0, R0=1.0, nmax=2, Cbar=C, Sbar=S)

    bad_c00 = C.copy()
    bad_c00[0, 0] = 1.0 + 1e-9
    with pytest.raises(ModelError):
        SHModel(mu=1.0, R0=1.0, nmax=2, Cbar=bad_c00, Sbar=S)
    bad_s = S.copy()
    bad_s[2, 0] = 1e-20
    with pytest.raises(ModelError):
        SHModel(mu=1.0, R0=1.0, nmax=2, Cbar=C, Sbar=bad_s)
    bad_nan = C.copy()
    bad_nan[2, 1] = np.nan
    with pytest.raises(ModelError):
        SHModel(mu=1.0, R0=1.0, nmax=2, Cbar=bad_nan, Sbar=S)
    with pytest.raises(ModelError):
        SHModel(mu=-1.0, R0=1.0, nmax=2, Cbar=C, Sbar=S)


def test_center_of_mass_needs_degree_one():
    with pytest.raises(InsufficientDegreeError):
        center_of_mass(SHModel.point_mass(5.0, 100.0))


def test_truncated(half_sphere_model):
    low = half_sphere_model.truncated(2)
    assert low.nmax == 2
    np.testing.assert_array_equal(low.Cbar, half_sphere_model.Cbar[:3, :3])
    with pytest.raises(InsufficientDegreeError):
        low.truncated(3)


def test_model_file_round_trip(tmp_path, half_sphere_model):
    path = tmp_path / "half.shm.json"
    save_model(half_sphere_model, str(path))
    data = json.loads(path.read_text())
    assert data["format_version"] == 1
    assert [len(row) for row in data["Cbar"]] == [1, 2, 3, 4, 5]
    assert data["provenance"]["slab_scheme"] == "z"

    loaded = load_model(str(path))
    np.testing.assert_array_equal(loaded.Cbar, half_sphere_model.Cbar)
    np.testing.assert_array_equal(loaded.Sbar, half_sphere_model.Sbar)
    assert loaded.mu == half_sphere_model.mu
    assert loaded.provenance == half_sphere_model.provenance


def test_model_file_errors(tmp_path, half_sphere_model):
    data = model_to_dict(half_sphere_model)
    with pytest.raises(InputError):
        model_from_dict({**data, "format_version": 2})
    with pytest.raises(InputError):
        model_from_dict({**data, "Cbar": data["Cbar"][:-1]})
    with pytest.raises(InputError):
        model_from_dict({k: v for k, v in data.items() if k != "mu_m3s2"})

    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    with pytest.raises(InputError):
        load_model(str(garbage))



@pytest.mark.slow
@pytest.mark.assets
def test_arrokoth_center_of_mass():
    mesh = load_obj(asset_path("arrokoth.obj"))
    model = compute_coefficients(mesh, UniformDensity(rho=235.0), nmax=1, n_q=10, threads=4)
    assert np.linalg.norm(center_of_mass(model) - [101.0, 20.0, 79.0]) < 5.0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
