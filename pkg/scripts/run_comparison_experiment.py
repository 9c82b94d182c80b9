"""
Trajectory divergence experiment around Eros.

Propagates the same initial state for 24 h under two harmonic models of the
same shape, a uniform 2670 kg/m^3 body and one with a denser core, and
reports how far the trajectories drift apart.

Eros's spin state is an input: EROS_SPIN_PERIOD_S defaults to 5.27 h about
+z of the body frame (NEAR Shoemaker rotation period). Needs eros.obj in
SHGRAV_ASSETS; without it the experiment is skipped and says so.
"""
import json
import logging
import os
import sys
import time

import numpy as np

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.artifacts import write_csv
from shgrav.density import RadialShellsDensity, UniformDensity
from shgrav.mesh import load_obj
from shgrav.propagate import (
    TRAJECTORY_HEADER,
    RotationModel,
    SHGravity,
    StateVector,
    compare_trajectories,
    propagate_many,
    trajectory_columns,
)
from shgrav.shcoeff import compute_coefficients, save_model

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger("DivergenceExperiment")

ASSETS_DIR = os.getenv("SHGRAV_ASSETS", os.path.join(PROJECT_ROOT, "assets"))
RESULTS_DIR = os.getenv("SHGRAV_RESULTS", os.path.join(PROJECT_ROOT, "results"))
THREADS = int(os.getenv("SHGRAV_THREADS", "4"))
EROS_SPIN_PERIOD_S = float(os.getenv("EROS_SPIN_PERIOD_S", str(5.27 * 3600.0)))

NMAX = 8
N_Q = 10
DURATION_S = 86_400.0
SAMPLE_DT_S = 60.0
R0_M = np.array([710.0, -45_000.0, 0.0])
V0_MS = np.array([2.24, -0.035, 2.21])

DR_BRACKET_M = (1_000.0, 100_000.0)
DV_BRACKET_MS = (0.05, 5.0)


def run_experiment() -> dict:
    mesh_path = os.path.join(ASSETS_DIR, "eros.obj")
    if not os.path.isfile(mesh_path):
        logger.warning(f"⚠️  Experiment SKIPPED: eros.obj not found in {ASSETS_DIR}")
        return {"status": "skipped", "reason": f"eros.obj not found in {ASSETS_DIR}"}

    os.makedirs(RESULTS_DIR, exist_ok=True)
    mesh = load_obj(mesh_path)

    # 1. Two density models of the same shape
    logger.info("1. Computing harmonic models...")
    models = {}
    for label, density in (
        ("uniform", UniformDensity(rho=2670.0)),
        ("cored", RadialShellsDensity(breaks_m=[5000.0], values_kgm3=[2937.0, 2670.0])),
    ):
        models[label] = compute_coefficients(mesh, density, NMAX, N_Q, threads=THREADS)
        save_model(models[label], os.path.join(RESULTS_DIR, f"eros_{label}.shm.json"))

    # 2. Same initial state, both models
    logger.info(f"2. Propagating {DURATION_S / 3600:.0f} h, spin period {EROS_SPIN_PERIOD_S / 3600:.2f} h...")
    rot = RotationModel(period_s=EROS_SPIN_PERIOD_S)
    state0 = StateVector(0.0, R0_M, V0_MS)
    sources = [SHGravity(models["uniform"]), SHGravity(models["cored"])]
    start = time.perf_counter()
    uniform, cored = propagate_many(state0, DURATION_S, sources, rot, threads=2, sample_dt=SAMPLE_DT_S)
    elapsed = time.perf_counter() - start

    # 3. Divergence
    diff = compare_trajectories(uniform, cored)
    write_csv(os.path.join(RESULTS_DIR, "eros_divergence.csv"), ["t", "dr_m", "dv_ms"], [diff.t, diff.dr, diff.dv])
    for label, traj in (("uniform", uniform), ("cored", cored)):
        write_csv(os.path.join(RESULTS_DIR, f"eros_trajectory_{label}.csv"), TRAJECTORY_HEADER, trajectory_columns(traj))

    dr, dv = float(diff.dr[-1]), float(diff.dv[-1])
    in_bracket = DR_BRACKET_M[0] <= dr <= DR_BRACKET_M[1] and DV_BRACKET_MS[0] <= dv <= DV_BRACKET_MS[1]
    return {
        "status": "pass" if in_bracket else "fail",
        "seconds": elapsed,
        "spin_period_s": EROS_SPIN_PERIOD_S,
        "final_dr_m": dr,
        "final_dv_ms": dv,
        "dr_bracket_m": list(DR_BRACKET_M),
        "dv_bracket_ms": list(DV_BRACKET_MS),
        "samples_inside_brillouin": int(uniform.inside_brillouin.sum() + cored.inside_brillouin.sum()),
    }


if __name__ == "__main__":
    logger.info(f"\n{'='*70}")
    logger.info("EROS TRAJECTORY DIVERGENCE: UNIFORM vs CORED DENSITY")
    logger.info(f"{'='*70}\n")
    result = run_experiment()

    if result["status"] != "skipped":
        print(f"\n{'='*70}")
        print(f"Final position divergence: {result['final_dr_m'] / 1000:.3f} km")
        print(f"Final velocity divergence: {result['final_dv_ms']:.4f} m/s")
        print(f"Propagation time:          {result['seconds']:.1f} s")
        print(f"{'='*70}\n")
        with open(os.path.join(RESULTS_DIR, "eros_divergence.json"), "w") as f:
            json.dump(result, f, indent=2)
        logger.info(f"✅ Results saved to {RESULTS_DIR}")

    sys.exit(1 if result["status"] == "fail" else 0)
