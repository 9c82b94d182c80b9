"""
Acceptance benchmark: accuracy and runtime of the reference cases.

  1. Uniform sphere: mass and vanishing higher-degree terms
  2. Two-hemisphere sphere: center of mass against the closed form
  3. Arrokoth: center of mass against the published estimate (needs arrokoth.obj)
  4. Eros: SH vs mascon on the 30x20x20 km ellipsoid, uniform and cored (needs eros.obj)
  5. Determinism: 1 thread vs SHGRAV_THREADS threads, bit-identical models

Shape models are looked up in SHGRAV_ASSETS (default ./assets). A missing
model skips its case and the skip is reported.
"""
import json
import logging
import math
import os
import sys
import time
from typing import Dict, List

import numpy as np

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.density import HalfSpaceDensity, RadialShellsDensity, UniformDensity
from shgrav.field import ellipsoid_grid
from shgrav.mascon import build_mascons, compare_sh_mascon
from shgrav.mesh import brillouin_radius, icosphere, load_obj
from shgrav.shcoeff import center_of_mass, compute_coefficients, model_to_dict

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger("Acceptance")

ASSETS_DIR = os.getenv("SHGRAV_ASSETS", os.path.join(PROJECT_ROOT, "assets"))
THREADS = int(os.getenv("SHGRAV_THREADS", "4"))
RESULTS_FILE = os.getenv("SHGRAV_ACCEPTANCE_RESULTS", os.path.join(PROJECT_ROOT, "results", "acceptance.json"))

SPHERE_R = 500.0
RHO_POS, RHO_NEG = 3204.0, 1335.0
ARROKOTH_COM_M = np.array([101.0, 20.0, 79.0])
EROS_CORE = RadialShellsDensity(breaks_m=[5000.0], values_kgm3=[2937.0, 2670.0])


def _asset(name: str):
    path = os.path.join(ASSETS_DIR, name)
    return path if os.path.isfile(path) else None


def _skipped(case: str, name: str) -> Dict:
    logger.warning(f"⚠️  {case}: SKIPPED ({name} not found in {ASSETS_DIR})")
    return {"case": case, "status": "skipped", "reason": f"{name} not found in {ASSETS_DIR}"}


def case_uniform_sphere() -> Dict:
    mesh = icosphere(SPHERE_R, subdivisions=5)
    start = time.perf_counter()
    model = compute_coefficients(mesh, UniformDensity(rho=2670.0), 4, 10, R0=SPHERE_R, threads=THREADS)
    elapsed = time.perf_counter() - start
    expected_mu = model.provenance.G * 4.0 / 3.0 * math.pi * SPHERE_R**3 * 2670.0
    worst = max(float(np.max(np.abs(model.Cbar[1:]))), float(np.max(np.abs(model.Sbar))))
    passed = abs(model.mu / expected_mu - 1.0) < 5e-3 and worst < 1e-5
    return {
        "case": "uniform_sphere", "status": "pass" if passed else "fail", "seconds": elapsed,
        "mu_m3s2": model.mu, "expected_mu_m3s2": expected_mu, "max_higher_degree_coefficient": worst,
    }


def case_half_sphere() -> Dict:
    mesh = icosphere(SPHERE_R, subdivisions=5)
    density = HalfSpaceDensity(normal=(1.0, 0.0, 0.0), rho_pos=RHO_POS, rho_neg=RHO_NEG)
    start = time.perf_counter()
    com = center_of_mass(compute_coefficients(mesh, density, 1, 10, R0=SPHERE_R, threads=THREADS))
    elapsed = time.perf_counter() - start
    expected = np.array([3.0 / 8.0 * SPHERE_R * (RHO_POS - RHO_NEG) / (RHO_POS + RHO_NEG), 0.0, 0.0])
    error = np.abs(com - expected)
    passed = bool(np.all(error < 1.0)) and elapsed < 10.0
    return {
        "case": "half_sphere_com", "status": "pass" if passed else "fail", "seconds": elapsed,
        "com_m": com.tolist(), "expected_m": expected.tolist(), "error_m": error.tolist(),
    }


def case_arrokoth() -> Dict:
    path = _asset("arrokoth.obj")
    if path is None:
        return _skipped("arrokoth_com", "arrokoth.obj")
    mesh = load_obj(path)
    start = time.perf_counter()
    com = center_of_mass(compute_coefficients(mesh, UniformDensity(rho=235.0), 1, 10, threads=THREADS))
    elapsed = time.perf_counter() - start
    error = float(np.linalg.norm(com - ARROKOTH_COM_M))
    return {
        "case": "arrokoth_com", "status": "pass" if error < 5.0 else "fail", "seconds": elapsed,
        "com_m": com.tolist(), "expected_m": ARROKOTH_COM_M.tolist(), "error_m": error,
    }


def case_eros_mascon() -> List[Dict]:
    path = _asset("eros.obj")
    if path is None:
        return [_skipped("eros_mascon", "eros.obj")]
    mesh = load_obj(path)
    grid = ellipsoid_grid(30_000.0, 20_000.0, 20_000.0, 2.0)
    results = []
    for label, density in (("uniform", UniformDensity(rho=2670.0)), ("cored", EROS_CORE)):
        start = time.perf_counter()
        model = compute_coefficients(mesh, density, 8, 10, threads=THREADS)
        mascons = build_mascons(mesh, density, 10)
        cmp = compare_sh_mascon(model, mascons, grid.points, brillouin_r=brillouin_radius(mesh), threads=THREADS)
        elapsed = time.perf_counter() - start
        results.append({
            "case": f"eros_mascon_{label}", "status": "pass" if cmp.max_delta < 1e-5 else "fail",
            "seconds": elapsed, "max_delta_ms2": cmp.max_delta, "max_delta_mgal": float(np.max(cmp.delta_mgal)),
            "points_inside_brillouin": int(cmp.inside_brillouin.sum()),
        })
    return results


def case_determinism() -> Dict:
    mesh = icosphere(SPHERE_R, subdivisions=4)
    density = HalfSpaceDensity(normal=(0.0, 0.6, 0.8), offset_m=50.0, rho_pos=RHO_POS, rho_neg=RHO_NEG)
    one = compute_coefficients(mesh, density, 8, 10, threads=1, deterministic=True)
    many = compute_coefficients(mesh, density, 8, 10, threads=THREADS, deterministic=True)
    same = json.dumps(model_to_dict(one)) == json.dumps(model_to_dict(many))
    return {"case": "determinism", "status": "pass" if same else "fail", "threads": THREADS}


def main() -> int:
    logger.info(f"\n{'='*70}")
    logger.info(f"ACCEPTANCE BENCHMARK (threads={THREADS}, assets={ASSETS_DIR})")
    logger.info(f"{'='*70}\n")

    results: List[Dict] = []
    for step, case in enumerate((case_uniform_sphere, case_half_sphere, case_arrokoth, case_eros_mascon, case_determinism), 1):
        logger.info(f"{step}. {case.__name__[5:].replace('_', ' ')}...")
        out = case()
        results.extend(out if isinstance(out, list) else [out])

    print(f"\n{'='*70}")
    print(f"{'Case':<28}{'Status':<10}{'Seconds':>10}")
    print(f"{'-'*70}")
    for r in results:
        seconds = f"{r['seconds']:.2f}" if "seconds" in r else "-"
        print(f"{r['case']:<28}{r['status'].upper():<10}{seconds:>10}")
    print(f"{'='*70}\n")

    os.makedirs(os.path.dirname(RESULTS_FILE), exist_ok=True)
    with open(RESULTS_FILE, "w") as f:
        json.dump({"threads": THREADS, "results": results}, f, indent=2)
    logger.info(f"✅ Results saved to {RESULTS_FILE}")

    failed = [r["case"] for r in results if r["status"] == "fail"]
    if failed:
        logger.error(f"❌ Failed cases: {', '.join(failed)}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
