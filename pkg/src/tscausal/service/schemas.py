"""Pydantic request / response models for the HTTP service."""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..timeseries import TimeSeries
from ..tsci import PipelineConfig


class SeriesPayload(BaseModel):
    """A uniformly sampled scalar series as plain JSON."""

    values: list[float] = Field(min_length=2)
    dt: float = Field(gt=0)
    name: str = ""

    @field_validator("values")
    @classmethod
    def _finite(cls, v: list[float]) -> list[float]:
        if not all(math.isfinite(s) for s in v):
            raise ValueError("values must be finite")
        return v

    def to_timeseries(self) -> TimeSeries:
        return TimeSeries(self.values, self.dt, name=self.name)


class PipelineOptions(BaseModel):
    """Mirror of the pipeline settings; omitted fields keep their defaults."""

    lag_x: int | None = None
    lag_y: int | None = None
    dim_x: int | None = None
    dim_y: int | None = None
    acf_threshold: float = 1.0 / math.e
    fnn_tolerance: float = 0.005
    max_dim: int = 8
    derivative: str = "central"
    savgol_window: int = 5
    savgol_polyorder: int = 2
    method: str = "knn"
    k: int | None = None
    theiler_window: int = 0
    kr_bandwidth: float | None = None
    kr_bandwidth_factor: float = 0.2
    kr_ridge: float = 1e-6
    kr_train_size: int = 4000
    include_flat_pearson: bool = False

    def to_config(self) -> PipelineConfig:
        return PipelineConfig(**self.model_dump())


class EmbeddingInfo(BaseModel):
    lag_x: int
    dim_x: int
    lag_y: int
    dim_y: int


class DirectionScore(BaseModel):
    direction: str
    r: float
    n_used: int
    n_dropped: int
    flat_pearson: float | None = None
    cosines: list[float] | None = None


class TsciRequest(BaseModel):
    x: SeriesPayload
    y: SeriesPayload
    options: PipelineOptions = Field(default_factory=PipelineOptions)
    include_cosines: bool = False


class TsciResponse(BaseModel):
    forward: DirectionScore
    reverse: DirectionScore
    embedding: EmbeddingInfo


class CcmRequest(BaseModel):
    x: SeriesPayload
    y: SeriesPayload
    library_lengths: list[int] = Field(min_length=1)
    trials: int = Field(default=10, ge=1)
    seed: int = 0
    options: PipelineOptions = Field(default_factory=PipelineOptions)


class CcmRow(BaseModel):
    library_length: int
    direction: str
    median: float
    p5: float
    p95: float


class CcmResponse(BaseModel):
    rows: list[CcmRow]
    trials: int
    embedding: EmbeddingInfo


class GrangerRequest(BaseModel):
    x: SeriesPayload
    y: SeriesPayload
    max_lag: int = Field(default=5, ge=1)


class GrangerResponse(BaseModel):
    p_xy: float
    p_yx: float
    f_xy: float
    f_yx: float
    lag_order: int


class MiRequest(BaseModel):
    x: SeriesPayload
    y: SeriesPayload
    k: int = Field(default=4, ge=1)
    sample_cap: int = Field(default=2000, ge=16)
    options: PipelineOptions = Field(default_factory=PipelineOptions)


class MiResponse(BaseModel):
    mi_xy: float
    mi_yx: float
    embedding: EmbeddingInfo


class SimulateRequest(BaseModel):
    coupling: float = Field(default=1.0, ge=0)
    n_samples: int = Field(default=10_000, ge=2)
    dt_sample: float = Field(default=0.05, gt=0)
    dt_integrate: float = Field(default=0.001, gt=0)
    transient_time: float = Field(default=50.0, ge=0)
    seed: int = 0
    initial_state: list[float] | None = None

    @field_validator("initial_state")
    @classmethod
    def _six(cls, v):
        if v is not None and len(v) != 6:
            raise ValueError("initial_state must have 6 components")
        return v


class SimulateResponse(BaseModel):
    dt: float
    names: list[str]
    values: dict[str, list[float]]


class EmbedParamsRequest(BaseModel):
    series: list[SeriesPayload] = Field(min_length=1)
    acf_threshold: float = 1.0 / math.e
    fnn_tolerance: float = 0.005
    max_dim: int = Field(default=8, ge=1)


class EmbedParamsRow(BaseModel):
    name: str
    lag: int
    dim: int
    lag_capped: bool
    dim_saturated: bool


class EmbedParamsResponse(BaseModel):
    rows: list[EmbedParamsRow]


class SweepRequest(BaseModel):
    kind: str
    grid: list[float] = Field(min_length=1)
    trials: int = Field(default=10, ge=1)
    methods: list[str] = Field(default=["tsci_knn"], min_length=1)
    seed: int = 0
    coupling: float = Field(default=1.0, ge=0)
    n_samples: int = Field(default=10_000, ge=2)
    dt_sample: float = Field(default=0.05, gt=0)
    dt_integrate: float = Field(default=0.001, gt=0)
    transient_time: float = Field(default=50.0, ge=0)
    x_name: str = "z2"
    y_name: str = "z4"
    ccm_library_length: int | None = None
    granger_max_lag: int = Field(default=5, ge=1)
    mi_neighbors: int = Field(default=4, ge=1)
    mi_sample_cap: int = Field(default=2000, ge=16)
    sine_period: float = Field(default=2.0 * np.pi, gt=0)
    options: PipelineOptions | None = None


class SweepRow(BaseModel):
    sweep_value: float
    method: str
    direction: str
    median: float
    p5: float
    p95: float
    trials: int


class SweepResponse(BaseModel):
    rows: list[SweepRow]


class ErrorPayload(BaseModel):
    error: str
    category: str
    detail: str
