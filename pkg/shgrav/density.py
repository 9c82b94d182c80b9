"""
Interior density distributions.

Each variant is a frozen pydantic model tagged by `type`, so a JSON density
spec validates straight into the right class. `evaluate` is vectorized over
(N, 3) points; `density_at` is the scalar form.
"""

import json
import logging
import math
import os
from typing import Annotated, List, Literal, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, TypeAdapter, ValidationError, field_validator, model_validator
from scipy.interpolate import RegularGridInterpolator

from .errors import DensityDomainError, DensityError, InputError
from .provenance import compute_text_hash

logger = logging.getLogger("Density")

PositiveFinite = Annotated[float, Field(gt=0, allow_inf_nan=False)]
FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]


class _DensityBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class UniformDensity(_DensityBase):
    type: Literal["uniform"] = "uniform"
    rho: PositiveFinite

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.full(len(points), self.rho)


class RadialShellsDensity(_DensityBase):
    """Piecewise-constant in |x|; a point exactly on a break takes the inner shell."""
    type: Literal["radial_shells"] = "radial_shells"
    breaks_m: List[FiniteFloat]
    values_kgm3: List[PositiveFinite]

    @field_validator("breaks_m")
    @classmethod
    def _ascending(cls, v: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("breaks_m must be strictly ascending")
        return v

    @model_validator(mode="after")
    def _shell_count(self):
        if len(self.values_kgm3) != len(self.breaks_m) + 1:
            raise ValueError(
                f"values_kgm3 needs len(breaks_m) + 1 = {len(self.breaks_m) + 1} entries, "
                f"got {len(self.values_kgm3)}"
            )
        return self

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        r = np.linalg.norm(points, axis=1)
        shell = np.searchsorted(np.asarray(self.breaks_m), r, side="left")
        return np.asarray(self.values_kgm3)[shell]


class HalfSpaceDensity(_DensityBase):
    """rho_pos where normal . x >= offset_m, rho_neg elsewhere."""
    type: Literal["half_space"] = "half_space"
    normal: Tuple[FiniteFloat, FiniteFloat, FiniteFloat]
    offset_m: FiniteFloat = 0.0
    rho_pos: PositiveFinite
    rho_neg: PositiveFinite

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, v):
        norm = math.sqrt(sum(c * c for c in v))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"normal must have unit norm within 1e-12 (|n| = {norm!r})")
        return v

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        side = points @ np.asarray(self.normal) >= self.offset_m
        return np.where(side, self.rho_pos, self.rho_neg)


class TabulatedDensity(_DensityBase):
    """
    Regular grid of samples, trilinearly interpolated.
    values_kgm3[i][j][k] sits at origin_m + (i*dx, j*dy, k*dz). Queries outside
    the grid box raise DensityDomainError.
    """
    type: Literal["tabulated"] = "tabulated"
    origin_m: Tuple[FiniteFloat, FiniteFloat, FiniteFloat]
    spacing_m: Tuple[PositiveFinite, PositiveFinite, PositiveFinite]
    values_kgm3: List[List[List[PositiveFinite]]]

    _interpolator: RegularGridInterpolator = PrivateAttr()

    @field_validator("values_kgm3")
    @classmethod
    def _regular_grid(cls, v):
        try:
            table = np.array(v, dtype=float)
        except ValueError:
            raise ValueError("values_kgm3 must be a rectangular 3-D array")
        if table.ndim != 3 or min(table.shape) < 2:
            raise ValueError(f"values_kgm3 must have shape (nx, ny, nz) with every axis >= 2, got {table.shape}")
        return v

    def model_post_init(self, __context) -> None:
        table = np.array(self.values_kgm3, dtype=float)
        axes = tuple(
            self.origin_m[d] + self.spacing_m[d] * np.arange(table.shape[d])
            for d in range(3)
        )
        self._interpolator = RegularGridInterpolator(
            axes, table, method="linear", bounds_error=False, fill_value=np.nan
        )

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo = np.array([g[0] for g in self._interpolator.grid])
        hi = np.array([g[-1] for g in self._interpolator.grid])
        return lo, hi

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        rho = self._interpolator(points)
        outside = np.isnan(rho)
        if np.any(outside):
            p = points[np.argmax(outside)]
            lo, hi = self.bounds
            raise DensityDomainError(
                f"{int(outside.sum())} density queries fall outside the tabulated grid "
                f"[{lo.tolist()}, {hi.tolist()}], first at {p.tolist()}"
            )
        return rho


DensityModel = Annotated[
    Union[UniformDensity, RadialShellsDensity, HalfSpaceDensity, TabulatedDensity],
    Field(discriminator="type"),
]
_DENSITY_ADAPTER = TypeAdapter(DensityModel)


def density_at(model: DensityModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise DensityDomainError(f"density query must be a finite 3-vector, got {x.tolist()}")
    return float(model.evaluate(x[None, :])[0])


def parse_density(data: Union[str, dict]) -> DensityModel:
    """Validate a density spec given as a JSON string or an already-decoded dict."""
    try:
        if isinstance(data, str):
            return _DENSITY_ADAPTER.validate_json(data)
        return _DENSITY_ADAPTER.validate_python(data)
    except ValidationError as e:
        errors = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise DensityError(f"invalid density spec: {errors}")


def load_density(spec: str) -> DensityModel:
    """Accept an inline JSON object or the path of a JSON file."""
    text = spec.strip()
    if not text.startswith("{"):
        if not os.path.isfile(spec):
            raise InputError(f"density spec is neither inline JSON nor a readable file: {spec}")
        try:
            with open(spec, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InputError(f"cannot read density file {spec}: {e}")
    model = parse_density(text)
    logger.info(f"Density model: {model.type} ({short_description(model)})")
    return model


def canonical_json(model: DensityModel) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def density_digest(model: DensityModel) -> str:
    return compute_text_hash(canonical_json(model))


def short_description(model: DensityModel) -> str:
    if isinstance(model, UniformDensity):
        return f"rho={model.rho:g}"
    if isinstance(model, RadialShellsDensity):
        return f"breaks={model.breaks_m}, values={model.values_kgm3}"
    if isinstance(model, HalfSpaceDensity):
        return f"normal={list(model.normal)}, offset={model.offset_m:g}, {model.rho_pos:g}/{model.rho_neg:g}"
    table = np.array(model.values_kgm3)
    return f"grid {table.shape}, spacing {list(model.spacing_m)}"
