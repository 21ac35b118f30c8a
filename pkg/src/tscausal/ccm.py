"""Convergent cross mapping: cross-map skill and library-length convergence.

The skill of mapping the Y shadow manifold onto the scalar x is measured as
the Pearson correlation between simplex k-NN predictions x_hat(t) (built
from a contiguous library of embedded points) and the truth x(t) over the
held-out rows. Convergence of the skill with growing library length is the
classical evidence that a cross map exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossmap import KnnConfig, ccm_predict
from .errors import DataError, LibraryTooLong
from .timeseries import TimeSeries
from .tsci import AlignedPair, PipelineConfig, prepare_aligned


@dataclass
class CcmConfig:
    """Replicated convergence-sweep settings."""

    library_lengths: tuple[int, ...]
    trials: int = 100
    seed: int = 0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        lengths = tuple(int(v) for v in self.library_lengths)
        if not lengths:
            raise DataError("library_lengths must be non-empty")
        if any(b <= a for a, b in zip(lengths, lengths[1:])):
            raise DataError(f"library_lengths must be strictly increasing, got {lengths}")
        if lengths[0] < 1:
            raise DataError("library lengths must be positive")
        self.library_lengths = lengths
        if self.trials < 1:
            raise DataError(f"trials must be >= 1, got {self.trials}")


def _skill_from_pair(
    Y: np.ndarray,
    x_scalar: np.ndarray,
    lag_y: int,
    library_length: int,
    rng: np.random.Generator,
    theiler_window: int | None = None,
) -> float:
    t_total = Y.shape[0]
    if library_length > t_total:
        raise LibraryTooLong(
            f"library length {library_length} exceeds embedded length {t_total}"
        )
    if library_length == t_total:
        start = 0
        queries = np.arange(t_total)  # no held-out rows; predict in-library
    else:
        start = int(rng.integers(0, t_total - library_length + 1))
        queries = np.concatenate(
            [np.arange(0, start), np.arange(start + library_length, t_total)]
        )
    library = np.arange(start, start + library_length)
    theiler = lag_y if theiler_window is None else theiler_window
    cfg = KnnConfig(k=Y.shape[1] + 1, theiler_window=theiler)
    x_hat = ccm_predict(Y, x_scalar, library, queries, cfg)[:, 0]
    truth = x_scalar[queries]
    if np.std(x_hat) == 0.0 or np.std(truth) == 0.0:
        return 0.0
    return float(np.corrcoef(x_hat, truth)[0, 1])


def ccm_skill(
    x: TimeSeries,
    y: TimeSeries,
    library_length: int,
    seed: int = 0,
    config: PipelineConfig | None = None,
    aligned: AlignedPair | None = None,
) -> float:
    """Cross-map skill corr(x_hat, x) for the direction "x drives y".

    Predicts the scalar x from the Y-embedding using a contiguous library of
    ``library_length`` rows whose start is drawn from the seeded RNG; all
    remaining rows are the prediction queries.
    """
    config = config or PipelineConfig()
    pair = aligned if aligned is not None else prepare_aligned(x, y, config)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0xCC,)))
    return _skill_from_pair(
        pair.Y, pair.X[:, 0], pair.params_y.lag, library_length, rng
    )


def ccm_convergence(
    x: TimeSeries, y: TimeSeries, cfg: CcmConfig
) -> list[dict]:
    """Median and 5th/95th-percentile skill per library length and direction.

    Each trial redraws the library start from an RNG stream derived from
    (seed, trial index); the same embedded data is reused throughout.
    """
    pair = prepare_aligned(x, y, cfg.pipeline)
    rows = []
    for length in cfg.library_lengths:
        for direction, (emb, scalar, lag) in {
            "X->Y": (pair.Y, pair.X[:, 0], pair.params_y.lag),
            "Y->X": (pair.X, pair.Y[:, 0], pair.params_x.lag),
        }.items():
            skills = []
            for trial in range(cfg.trials):
                rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0xCC, trial))
                )
                skills.append(
                    _skill_from_pair(emb, scalar, lag, length, rng)
                )
            p5, median, p95 = np.percentile(skills, [5.0, 50.0, 95.0])
            rows.append({
                "library_length": length,
                "direction": direction,
                "median": float(median),
                "p5": float(p5),
                "p95": float(p95),
            })
    return rows
