"""
Tests for the density variants and the JSON density spec.
"""
import json
import os
import sys

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.density import (
    HalfSpaceDensity,
    RadialShellsDensity,
    TabulatedDensity,
    UniformDensity,
    density_at,
    density_digest,
    load_density,
    parse_density,
)
from shgrav.errors import DensityDomainError, DensityError, InputError

EROS_CORE = {"type": "radial_shells", "breaks_m": [5000], "values_kgm3": [2937, 2670]}


def _linear_table():
    # rho = 1000 + x + 2y + 3z on a 3x3x3 grid with unit spacing
    i, j, k = np.meshgrid(np.arange(3), np.arange(3), np.arange(3), indexing="ij")
    values = 1000.0 + i + 2.0 * j + 3.0 * k
    return TabulatedDensity(origin_m=(0.0, 0.0, 0.0), spacing_m=(1.0, 1.0, 1.0), values_kgm3=values.tolist())


def test_uniform():
    model = parse_density({"type": "uniform", "rho": 2670})
    assert isinstance(model, UniformDensity)
    assert density_at(model, [123.0, -4.0, 9e3]) == 2670.0


def test_uniform_is_constant_everywhere():
    points = np.random.default_rng(0).normal(scale=1e4, size=(1_000_000, 3))
    assert np.all(UniformDensity(rho=2670.0).evaluate(points) == 2670.0)


def test_half_space_hemispheres():
    model = HalfSpaceDensity(normal=(1.0, 0.0, 0.0), offset_m=0.0, rho_pos=3204.0, rho_neg=1335.0)
    assert density_at(model, [1.0, 0.0, 0.0]) == 3204.0
    assert density_at(model, [-1.0, 0.0, 0.0]) == 1335.0
    # On the plane the positive side wins
    assert density_at(model, [0.0, 5.0, -2.0]) == 3204.0


def test_radial_shells_core():
    model = parse_density(EROS_CORE)
    assert density_at(model, [4000.0, 0.0, 0.0]) == 2937.0
    assert density_at(model, [0.0, 6000.0, 0.0]) == 2670.0
    # On a break the inner shell wins
    assert density_at(model, [0.0, 0.0, 5000.0]) == 2937.0


def test_radial_shells_depend_only_on_radius():
    model = RadialShellsDensity(breaks_m=[1000.0, 3000.0, 4500.0], values_kgm3=[4000.0, 3000.0, 2500.0, 1900.0])
    rng = np.random.default_rng(1)
    points = rng.uniform(-6000.0, 6000.0, size=(20_000, 3))
    rotated = Rotation.from_rotvec(rng.normal(size=3)).apply(points)
    np.testing.assert_array_equal(model.evaluate(points), model.evaluate(rotated))


def test_tabulated_is_trilinear():
    model = _linear_table()
    assert density_at(model, [0.5, 1.5, 0.25]) == pytest.approx(1004.25, rel=1e-14)
    assert density_at(model, [2.0, 2.0, 2.0]) == pytest.approx(1012.0, rel=1e-14)


def test_tabulated_outside_grid():
    with pytest.raises(DensityDomainError):
        density_at(_linear_table(), [2.5, 0.0, 0.0])


def test_non_finite_query():
    with pytest.raises(DensityDomainError):
        density_at(UniformDensity(rho=1.0), [np.nan, 0.0, 0.0])


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "uniform", "rho": -1.0},
        {"type": "uniform", "rho": 0.0},
        {"type": "uniform", "rho": 1.0, "extra": 2},
        {"type": "radial_shells", "breaks_m": [3000, 2000], "values_kgm3": [1, 2, 3]},
        {"type": "radial_shells", "breaks_m": [2000], "values_kgm3": [1, 2, 3]},
        {"type": "half_space", "normal": [1, 1, 0], "rho_pos": 1, "rho_neg": 2},
        {"type": "tabulated", "origin_m": [0, 0, 0], "spacing_m": [1, 1, 1], "values_kgm3": [[[1.0]]]},
        {"type": "marble", "rho": 1.0},
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(DensityError):
        parse_density(spec)


def test_load_density_inline_and_file(tmp_path):
    inline = load_density(json.dumps(EROS_CORE))
    path = tmp_path / "core.json"
    path.write_text(json.dumps(EROS_CORE))
    from_file = load_density(str(path))
    assert inline == from_file


def test_load_density_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_density(str(tmp_path / "nope.json"))


def test_digest_ignores_key_order():
    a = parse_density('{"type": "half_space", "normal": [0, 0, 1], "rho_pos": 2, "rho_neg": 1}')
    b = parse_density('{"rho_neg": 1, "rho_pos": 2, "normal": [0, 0, 1], "type": "half_space"}')
    assert density_digest(a) == density_digest(b)
    assert density_digest(a) != density_digest(parse_density(EROS_CORE))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
