"""Request/response models for the HTTP service (and the thin CLI client)."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetInfo(BaseModel):
    name: str
    kind: str
    config: dict


class GridOverride(BaseModel):
    tmin: float = Field(gt=0)
    tmax: float
    points_per_decade: int = Field(ge=1, le=200)

    def as_tuple(self) -> tuple[float, float, int]:
        return (self.tmin, self.tmax, self.points_per_decade)


class ExperimentOverrides(BaseModel):
    L: int | None = None
    L_list: list[int] | None = None
    D: float | None = None
    D_list: list[float] | None = None
    g: float | None = None
    g_list: list[float] | None = None
    h: float | None = None
    h_list: list[float] | None = None
    J: float | None = None
    boundary: Literal["open", "periodic"] | None = None
    samples: int | None = Field(default=None, ge=1)
    seed: int | None = None
    n_draws: int | None = Field(default=None, ge=1)
    dim_cap: int | None = Field(default=None, ge=4)
    grid: GridOverride | None = None
    observables: list[str] | None = None

    @model_validator(mode="after")
    def _forbid_scalar_list_conflicts(self):
        for scalar, listed in (
            ("L", "L_list"),
            ("D", "D_list"),
            ("g", "g_list"),
            ("h", "h_list"),
        ):
            if getattr(self, scalar) is not None and getattr(self, listed) is not None:
                raise ValueError(f"give either {scalar} or {listed}, not both")
        return self

    def as_kwargs(self) -> dict:
        kwargs = self.model_dump(exclude_none=True)
        if self.grid is not None:
            kwargs["grid"] = self.grid.as_tuple()
        return kwargs


class ExperimentRequest(BaseModel):
    preset: str
    overrides: ExperimentOverrides = ExperimentOverrides()
    workers: int | None = Field(default=None, ge=1)


class TableModel(BaseModel):
    name: str
    columns: list[str]
    rows: list[list[float]]


class ExperimentResponse(BaseModel):
    preset: str
    manifest: dict
    tables: list[TableModel]


class DualityRequest(BaseModel):
    L: int = Field(ge=2, le=10)
    J: float = 1.0
    g: float = 1.0
    D: float = Field(default=1.0, ge=0)
    n_draws: int = Field(default=1, ge=1, le=200)
    seed: int = 20240
    fields: list[float] | None = None  # explicit h_i beats the (D, seed) draws


class DualityReportModel(BaseModel):
    L: int
    J: float
    g: float
    fields: list[float]
    dim: int
    max_mismatch: float
    dims_match: bool
    multiplicities_agree: bool
    multiplicity_table: list[dict]


class DualityResponse(BaseModel):
    reports: list[DualityReportModel]
    worst_mismatch: float


class GapRatioRequest(BaseModel):
    L: int = Field(ge=4, le=16)
    D: float = Field(ge=0)
    J: float = 1.0
    g: float = 1.0
    boundary: Literal["open", "periodic"] = "periodic"
    samples: int = Field(default=50, ge=1)
    seed: int = 20240
    workers: int | None = Field(default=None, ge=1)


class GapRatioResponse(BaseModel):
    L: int
    D: float
    n_samples: int
    mean_r: float
    stderr_r: float
    dropped_fraction: float
    reference_poisson: float
    reference_goe: float
