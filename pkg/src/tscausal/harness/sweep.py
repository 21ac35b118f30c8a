"""Deterministic experiment sweeps over the benchmark system.

A sweep varies one axis (coupling strength, library length, additive-noise
SNR, additive-sine power, or embedding dimension of the putative effect),
runs every requested method on freshly simulated data for each
(grid value, trial) cell, and aggregates each method/direction series of
trial statistics into median and 5th/95th percentiles.

Per-cell randomness comes from seed streams derived from
(seed, grid_index, trial_index), so appending grid values or trials never
changes existing cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..baselines import granger_f_test, mi_pushforward_score
from ..ccm import _skill_from_pair
from ..crossmap import KnnConfig
from ..errors import DataError, EmptyInput, TscausalError
from ..systems import SimulationConfig, corrupt_additive_noise, corrupt_sine, rk4_integrate
from ..timeseries import TimeSeries
from ..tsci import (
    AlignedPair,
    PipelineConfig,
    _score_direction,
    prepare_aligned,
    pushforward_knn,
    tsci_score_knn,
)

SWEEP_KINDS = ("coupling", "library_length", "snr", "sine_power", "embed_dim")
METHODS = ("tsci_knn", "tsci_model", "ccm", "granger", "mi")
DIRECTIONS = ("X->Y", "Y->X")


@dataclass
class SweepSpec:
    """One sweep: axis, grid, replication, methods, and fixed settings.

    ``coupling`` is the fixed coupling for non-coupling sweeps.
    ``pipeline=None`` picks a per-kind default (Savitzky-Golay derivatives
    for the corruption sweeps, central differences otherwise).
    ``ccm_library_length=None`` uses half the embedded length.
    """

    kind: str
    grid: tuple[float, ...]
    trials: int = 10
    methods: tuple[str, ...] = ("tsci_knn",)
    seed: int = 0
    coupling: float = 1.0
    n_samples: int = 10_000
    dt_sample: float = 0.05
    dt_integrate: float = 0.001
    transient_time: float = 50.0
    x_name: str = "z2"
    y_name: str = "z4"
    ccm_library_length: int | None = None
    granger_max_lag: int = 5
    mi_neighbors: int = 4
    mi_sample_cap: int = 2000
    sine_period: float = 2.0 * np.pi
    pipeline: PipelineConfig | None = None

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise DataError(f"unknown sweep kind {self.kind!r}; expected one of {SWEEP_KINDS}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise DataError("grid must be non-empty")
        self.grid = grid
        if self.trials < 1:
            raise DataError(f"trials must be >= 1, got {self.trials}")
        methods = tuple(self.methods)
        if not methods:
            raise DataError("methods must be non-empty")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise DataError(f"unknown methods {unknown}; expected a subset of {METHODS}")
        self.methods = methods
        if self.kind == "embed_dim" and any(v != int(v) or v < 1 for v in grid):
            raise DataError("embed_dim grid values must be positive integers")
        if self.kind == "library_length" and any(v != int(v) or v < 1 for v in grid):
            raise DataError("library_length grid values must be positive integers")

    def resolve_pipeline(self) -> PipelineConfig:
        if self.pipeline is not None:
            return self.pipeline
        if self.kind in ("snr", "sine_power"):
            return PipelineConfig(derivative="savgol")
        return PipelineConfig()


@dataclass
class ResultRow:
    sweep_value: float
    direction: str
    method: str
    median: float
    p5: float
    p95: float
    trials: int


class SweepExecutionError(TscausalError):
    """A method failed inside a sweep; carries the failing cell."""

    def __init__(self, sweep_value, trial, method, cause: BaseException):
        self.sweep_value = sweep_value
        self.trial = trial
        self.method = method
        self.cause = cause
        super().__init__(
            f"sweep_value={sweep_value} trial={trial} method={method}: {cause}"
        )


def aggregate_trials(values, percentiles=(5.0, 50.0, 95.0)) -> tuple[float, float, float]:
    """(p5, median, p95) with linear-interpolation percentile estimates."""
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("no trial values to aggregate")
    p5, median, p95 = np.percentile(values, list(percentiles), method="linear")
    return float(p5), float(median), float(p95)


def _cell_seed(seed: int, grid_index: int, trial: int, role: int) -> int:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(grid_index, trial, role))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _simulate_pair(spec: SweepSpec, coupling: float, sim_seed: int):
    cfg = SimulationConfig(
        coupling=coupling,
        dt_integrate=spec.dt_integrate,
        dt_sample=spec.dt_sample,
        n_samples=spec.n_samples,
        transient_time=spec.transient_time,
        seed=sim_seed,
    )
    series = rk4_integrate(cfg)
    return series[spec.x_name], series[spec.y_name]


def _tsci_library_direction(A, dA, B, dB, pipeline, length: int, rng) -> float:
    """Tangent score with neighbor candidates restricted to a random window."""
    t_total = A.shape[0]
    length = min(length, t_total)
    if length == t_total:
        library, queries = np.arange(t_total), None
    else:
        start = int(rng.integers(0, t_total - length + 1))
        library = np.arange(start, start + length)
        queries = np.concatenate(
            [np.arange(0, start), np.arange(start + length, t_total)]
        )
    cfg = KnnConfig(k=pipeline.k, theiler_window=pipeline.theiler_window)
    return tsci_score_knn(A, dA, B, dB, cfg, library=library, queries=queries).r


def _mi_direction(A, dA, B, dB, pipeline, k: int, cap: int) -> float:
    """k-NN mutual information between native and pushed-forward tangents."""
    cfg = KnnConfig(k=pipeline.k, theiler_window=pipeline.theiler_window)
    sub = np.linspace(0, A.shape[0] - 1, min(cap, A.shape[0])).astype(np.intp)
    u_hat = pushforward_knn(A, dA, B, dB, cfg, queries=sub)
    return mi_pushforward_score(dA[sub], u_hat, k)


def _direction_matrices(pair: AlignedPair, direction: str):
    """(A, dA, B, dB, lag of the searched embedding, scalar target column)."""
    if direction == "X->Y":
        return pair.X, pair.U, pair.Y, pair.V, pair.params_y.lag
    return pair.Y, pair.V, pair.X, pair.U, pair.params_x.lag


def _run_cell(spec: SweepSpec, value: float, grid_index: int, trial: int) -> dict:
    """All requested method scores for one (grid value, trial) cell."""
    pipeline = spec.resolve_pipeline()
    coupling = value if spec.kind == "coupling" else spec.coupling
    sim_seed = _cell_seed(spec.seed, grid_index, trial, 0)
    x, y = _simulate_pair(spec, coupling, sim_seed)

    if spec.kind == "snr":
        x = corrupt_additive_noise(x, value, seed=_cell_seed(spec.seed, grid_index, trial, 1))
        y = corrupt_additive_noise(y, value, seed=_cell_seed(spec.seed, grid_index, trial, 2))
    elif spec.kind == "sine_power":
        x = corrupt_sine(x, value, period=spec.sine_period)
        y = corrupt_sine(y, value, period=spec.sine_period)

    # one aligned pair per direction: the embed_dim sweep pins the grid value
    # to the putative effect's embedding (dim_y when testing X->Y, dim_x when
    # testing Y->X); every other sweep shares a single alignment
    pairs: dict[str, AlignedPair] = {}
    if any(m != "granger" for m in spec.methods):
        if spec.kind == "embed_dim":
            pairs["X->Y"] = prepare_aligned(x, y, replace(pipeline, dim_y=int(value)))
            pairs["Y->X"] = prepare_aligned(x, y, replace(pipeline, dim_x=int(value)))
        else:
            pairs["X->Y"] = pairs["Y->X"] = prepare_aligned(x, y, pipeline)

    out: dict[tuple[str, str], float] = {}
    for method in spec.methods:
        try:
            if method == "granger":
                g = granger_f_test(x, y, spec.granger_max_lag)
                out[(method, "X->Y")] = g.p_xy
                out[(method, "Y->X")] = g.p_yx
                continue
            rng = np.random.default_rng(
                _cell_seed(spec.seed, grid_index, trial, 4 + METHODS.index(method))
            )
            for direction in DIRECTIONS:
                pair = pairs[direction]
                A, dA, B, dB, lag_b = _direction_matrices(pair, direction)
                if method == "tsci_knn":
                    if spec.kind == "library_length":
                        score = _tsci_library_direction(
                            A, dA, B, dB, pipeline, int(value), rng
                        )
                    else:
                        cfg = KnnConfig(k=pipeline.k, theiler_window=pipeline.theiler_window)
                        score = tsci_score_knn(A, dA, B, dB, cfg, direction).r
                elif method == "tsci_model":
                    score = _score_direction(
                        A, dA, B, dB, replace(pipeline, method="kernel_ridge"), direction
                    ).r
                elif method == "ccm":
                    length = int(value) if spec.kind == "library_length" else spec.ccm_library_length
                    if length is None:
                        length = A.shape[0] // 2
                    score = _skill_from_pair(
                        B, A[:, 0], lag_b, min(length, A.shape[0]), rng
                    )
                elif method == "mi":
                    score = _mi_direction(
                        A, dA, B, dB, pipeline, spec.mi_neighbors, spec.mi_sample_cap
                    )
                else:  # pragma: no cover - guarded by validation
                    raise DataError(f"unknown method {method!r}")
                out[(method, direction)] = float(score)
        except SweepExecutionError:
            raise
        except Exception as exc:
            raise SweepExecutionError(value, trial, method, exc) from exc
    return out


def run_sweep(spec: SweepSpec) -> list[ResultRow]:
    """Execute a sweep; one ResultRow per (grid value, method, direction).

    Rows come out in grid order, then method order as requested, then
    direction order (X->Y, Y->X). Fully deterministic given spec.seed.
    """
    rows: list[ResultRow] = []
    for grid_index, value in enumerate(spec.grid):
        cells = [
            _run_cell(spec, value, grid_index, trial) for trial in range(spec.trials)
        ]
        for method in spec.methods:
            for direction in DIRECTIONS:
                trial_values = [cell[(method, direction)] for cell in cells]
                p5, median, p95 = aggregate_trials(trial_values)
                rows.append(ResultRow(
                    sweep_value=value,
                    direction=direction,
                    method=method,
                    median=median,
                    p5=p5,
                    p95=p95,
                    trials=spec.trials,
                ))
    return rows
