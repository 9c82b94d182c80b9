"""
Trajectory propagation around a uniformly rotating body.

The state lives in the inertial frame N. At every right-hand-side call the
position is rotated into the body frame B, the gravity source evaluates the
acceleration there, and the result is rotated back.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.integrate import DOP853
from scipy.interpolate import CubicHermiteSpline
from scipy.spatial.transform import Rotation

from .constants import G_DEFAULT
from .errors import GravityPipelineError, PropagationError
from .field import SHField
from .mascon import PointMassSet, mascon_acceleration_many, mascon_potential_many
from .shcoeff import SHModel

logger = logging.getLogger("Propagate")


class RotationModel(BaseModel):
    """Uniform spin about a fixed axis. period_s=None means a non-rotating body."""
    model_config = ConfigDict(frozen=True)

    axis: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    period_s: Optional[float] = Field(default=None, gt=0)
    theta0: float = 0.0

    @field_validator("axis")
    @classmethod
    def _unit_axis(cls, v):
        norm = math.sqrt(sum(c * c for c in v))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"spin axis must have unit norm within 1e-12 (|axis| = {norm!r})")
        return v

    @field_validator("period_s")
    @classmethod
    def _infinite_is_static(cls, v):
        return None if v is not None and math.isinf(v) else v

    @property
    def rate(self) -> float:
        return 0.0 if self.period_s is None else 2.0 * math.pi / self.period_s

    @property
    def omega(self) -> np.ndarray:
        return self.rate * np.asarray(self.axis)

    def angle(self, t: float) -> float:
        return self.theta0 + self.rate * t

    def matrix(self, t: float) -> np.ndarray:
        return Rotation.from_rotvec(self.angle(t) * np.asarray(self.axis)).as_matrix()


def body_to_inertial(rot: RotationModel, t: float) -> np.ndarray:
    return rot.matrix(t)


@dataclass(frozen=True)
class StateVector:
    t: float
    r: np.ndarray  # frame N, m
    v: np.ndarray  # frame N, m/s

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if r.shape != (3,) or v.shape != (3,) or not (np.all(np.isfinite(r)) and np.all(np.isfinite(v)) and math.isfinite(self.t)):
            raise PropagationError(f"state must be finite 3-vectors, got r={r.tolist()}, v={v.tolist()}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)


# --- gravity sources ---

class GravitySource(Protocol):
    brillouin_r: float

    def acceleration(self, r_B: np.ndarray) -> np.ndarray: ...

    def potential(self, r_B: np.ndarray) -> np.ndarray: ...


class SHGravity:
    def __init__(self, model: SHModel, brillouin_r: Optional[float] = None, paper_exact_eq11: bool = False):
        self.field = SHField(model, brillouin_r, paper_exact_eq11)
        self.brillouin_r = self.field.brillouin_r
        self.mu = model.mu

    def acceleration(self, r_B: np.ndarray) -> np.ndarray:
        return self.field.evaluate_points(np.atleast_2d(r_B)).a

    def potential(self, r_B: np.ndarray) -> np.ndarray:
        return self.field.evaluate_points(np.atleast_2d(r_B), with_acceleration=False).U


class MasconGravity:
    def __init__(self, mascons: PointMassSet, G: float = G_DEFAULT, brillouin_r: Optional[float] = None):
        self.mascons = mascons
        self.G = G
        self.mu = G * mascons.total_mass
        if brillouin_r is None:
            brillouin_r = float(np.max(np.linalg.norm(mascons.positions, axis=1)))
        self.brillouin_r = brillouin_r

    def acceleration(self, r_B: np.ndarray) -> np.ndarray:
        return mascon_acceleration_many(self.mascons, np.atleast_2d(r_B), self.G)

    def potential(self, r_B: np.ndarray) -> np.ndarray:
        return mascon_potential_many(self.mascons, np.atleast_2d(r_B), self.G)


# --- frames and invariants ---

def to_body_frame(state: StateVector, rot: RotationModel) -> Tuple[np.ndarray, np.ndarray]:
    R = rot.matrix(state.t)
    r_B = R.T @ state.r
    v_B = R.T @ state.v - np.cross(rot.omega, r_B)
    return r_B, v_B


def specific_energy(state: StateVector, source: GravitySource, rot: Optional[RotationModel] = None) -> float:
    """v^2/2 - U, conserved when the body does not rotate."""
    r_B = state.r if rot is None else rot.matrix(state.t).T @ state.r
    return 0.5 * float(state.v @ state.v) - float(source.potential(r_B)[0])


def jacobi_constant(state: StateVector, source: GravitySource, rot: RotationModel) -> float:
    """v_B^2/2 - U - |omega x r_B|^2/2, conserved in the uniformly rotating frame."""
    r_B, v_B = to_body_frame(state, rot)
    w = np.cross(rot.omega, r_B)
    return 0.5 * float(v_B @ v_B) - float(source.potential(r_B)[0]) - 0.5 * float(w @ w)


# --- propagation ---

@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray  # (K,)
    r: np.ndarray  # (K, 3) frame N
    v: np.ndarray
    r_body: np.ndarray  # (K, 3) frame B
    v_body: np.ndarray
    inside_brillouin: np.ndarray  # (K,) bool
    steps: int

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, k: int) -> StateVector:
        return StateVector(float(self.t[k]), self.r[k], self.v[k])

    @property
    def final(self) -> StateVector:
        return self[-1]


def sample_times(t0: float, t_end: float, sample_dt: float) -> np.ndarray:
    if not sample_dt > 0:
        raise PropagationError(f"sample_dt must be positive, got {sample_dt!r}")
    ts = t0 + np.arange(0.0, t_end - t0, sample_dt)
    return np.append(ts, t_end)


def _accepted_state(solver: DOP853) -> StateVector:
    return StateVector(float(solver.t), solver.y[:3].copy(), solver.y[3:].copy())


def propagate(
    state0: StateVector,
    t_end: float,
    source: GravitySource,
    rot: RotationModel,
    tol: float = 1e-10,
    sample_dt: float = 60.0,
    atol_position: float = 1e-3,
    atol_velocity: float = 1e-9,
    times: Optional[Sequence[float]] = None,
    max_step: Optional[float] = None,
) -> Trajectory:
    """
    DOP853 with relative tolerance `tol`. Accepted steps are joined by cubic
    Hermite interpolation (the derivative is the dynamics itself) to produce
    samples every `sample_dt` seconds, or at `times` when given.

    Steps are capped at the sample spacing unless `max_step` says otherwise;
    the Hermite error grows with the fourth power of the step.
    """
    if not t_end > state0.t:
        raise PropagationError(f"t_end={t_end!r} must be after the initial epoch {state0.t!r}", last_state=state0)
    if not tol > 0:
        raise PropagationError(f"tol must be positive, got {tol!r}", last_state=state0)
    r0 = float(np.linalg.norm(state0.r))
    if r0 == 0.0:
        raise PropagationError("initial position is at the body origin", last_state=state0)
    if r0 < source.brillouin_r:
        logger.warning(
            f"⚠️  Initial position |r| = {r0:.1f} m is inside the Brillouin sphere "
            f"({source.brillouin_r:.1f} m); the field may not converge there"
        )

    ts = np.asarray(times, dtype=float) if times is not None else sample_times(state0.t, t_end, sample_dt)
    if max_step is None:
        spacing = np.diff(np.concatenate([[state0.t], np.sort(ts)]))
        spacing = spacing[spacing > 0]
        max_step = float(spacing.min()) if len(spacing) else np.inf

    def rhs(t, y):
        R = rot.matrix(t)
        a_B = source.acceleration(R.T @ y[:3])[0]
        return np.concatenate([y[3:], R @ a_B])

    atol = np.array([atol_position] * 3 + [atol_velocity] * 3)
    y0 = np.concatenate([state0.r, state0.v])
    start = time.perf_counter()
    try:
        solver = DOP853(rhs, state0.t, y0, t_end, rtol=tol, atol=atol, max_step=max_step)
    except GravityPipelineError as e:
        raise PropagationError(f"gravity evaluation failed at t={state0.t:.3f} s: {e.message}", last_state=state0) from e

    steps_t, steps_y, derivs = [solver.t], [solver.y.copy()], [solver.f.copy()]
    while solver.status == "running":
        try:
            message = solver.step()
        except GravityPipelineError as e:
            # The solver still holds the last accepted step
            raise PropagationError(
                f"gravity evaluation failed after t={solver.t:.3f} s: {e.message}",
                last_state=_accepted_state(solver),
            ) from e
        if solver.status == "failed":
            raise PropagationError(
                f"integration stopped at t={solver.t:.3f} s: {message}", last_state=_accepted_state(solver)
            )
        steps_t.append(solver.t)
        steps_y.append(solver.y.copy())
        derivs.append(solver.f.copy())

    # Dense output between accepted steps
    steps_t = np.array(steps_t)
    steps_y = np.array(steps_y)
    spline = CubicHermiteSpline(steps_t, steps_y, np.array(derivs), axis=0)

    Y = spline(ts)
    Y[ts == t_end] = steps_y[-1]
    r, v = Y[:, :3], Y[:, 3:]

    r_body = np.empty_like(r)
    v_body = np.empty_like(v)
    for k, t in enumerate(ts):
        r_body[k], v_body[k] = to_body_frame(StateVector(float(t), r[k], v[k]), rot)
    inside = np.linalg.norm(r_body, axis=1) < source.brillouin_r

    logger.info(
        f"Propagation finished in {time.perf_counter() - start:.2f}s: {len(steps_t) - 1} steps, "
        f"{solver.nfev} evaluations, {int(inside.sum())} samples inside the Brillouin sphere"
    )
    return Trajectory(t=ts, r=r, v=v, r_body=r_body, v_body=v_body, inside_brillouin=inside, steps=len(steps_t) - 1)


def propagate_many(
    state0: StateVector,
    t_end: float,
    sources: Sequence[GravitySource],
    rot: RotationModel,
    threads: int = 2,
    **kwargs,
) -> List[Trajectory]:
    """Independent propagations of the same initial state, one per source."""
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(lambda s: propagate(state0, t_end, s, rot, **kwargs), sources))


@dataclass(frozen=True)
class TrajectoryDifference:
    t: np.ndarray
    dr: np.ndarray  # |r_a - r_b|, m
    dv: np.ndarray  # |v_a - v_b|, m/s


def compare_trajectories(a: Trajectory, b: Trajectory) -> TrajectoryDifference:
    if len(a.t) != len(b.t) or not np.array_equal(a.t, b.t):
        raise PropagationError("trajectories must share their sample times to be compared")
    return TrajectoryDifference(
        t=a.t,
        dr=np.linalg.norm(a.r - b.r, axis=1),
        dv=np.linalg.norm(a.v - b.v, axis=1),
    )


# Column layout of trajectory CSV artifacts: inertial state, body-frame state, flag
TRAJECTORY_HEADER = [
    "t", "rx", "ry", "rz", "vx", "vy", "vz",
    "rbx", "rby", "rbz", "vbx", "vby", "vbz", "inside_brillouin",
]


def trajectory_columns(traj: Trajectory) -> list:
    cols = [traj.t]
    cols += [traj.r[:, i] for i in range(3)] + [traj.v[:, i] for i in range(3)]
    cols += [traj.r_body[:, i] for i in range(3)] + [traj.v_body[:, i] for i in range(3)]
    cols.append(traj.inside_brillouin)
    return cols
