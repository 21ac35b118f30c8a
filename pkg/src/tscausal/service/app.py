"""FastAPI application exposing the analysis operations.

Domain failures map onto two HTTP classes: invalid/insufficient data is 400
with ``category: data`` and numerical failures (divergence, degeneracy,
singular systems) are 500 with ``category: numerical``. Request-shape
problems are FastAPI's usual 422.
"""

from __future__ import annotations

import warnings

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..baselines import granger_f_test, mi_pushforward_score
from ..ccm import CcmConfig, ccm_convergence
from ..crossmap import KnnConfig
from ..embedding import select_dimension_fnn, select_lag
from ..errors import (
    DataError,
    DimensionSaturationWarning,
    LagCapWarning,
    TscausalError,
)
from ..harness.sweep import SweepSpec, run_sweep
from ..systems import COORDINATE_NAMES, SimulationConfig, rk4_integrate
from ..tsci import (
    PipelineConfig,
    ScoreResult,
    prepare_aligned,
    pushforward_knn,
    tsci_bidirectional,
)
from . import schemas


def _score_payload(score: ScoreResult, include_cosines: bool) -> schemas.DirectionScore:
    return schemas.DirectionScore(
        direction=score.direction_label,
        r=score.r,
        n_used=score.n_used,
        n_dropped=score.n_dropped,
        flat_pearson=score.flat_pearson,
        cosines=[float(c) for c in score.cosines] if include_cosines else None,
    )


def _embedding_info(pair) -> schemas.EmbeddingInfo:
    return schemas.EmbeddingInfo(
        lag_x=pair.params_x.lag, dim_x=pair.params_x.dim,
        lag_y=pair.params_y.lag, dim_y=pair.params_y.dim,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="tscausal",
        description="Causal direction detection for coupled dynamical systems",
    )

    @app.exception_handler(TscausalError)
    async def _domain_error(request: Request, exc: TscausalError):
        category = "data" if isinstance(exc, DataError) else "numerical"
        cause = getattr(exc, "cause", None)
        if cause is not None and isinstance(cause, DataError):
            category = "data"
        status = 400 if category == "data" else 500
        payload = schemas.ErrorPayload(
            error=type(exc).__name__, category=category, detail=str(exc)
        )
        return JSONResponse(status_code=status, content=payload.model_dump())

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/tsci", response_model=schemas.TsciResponse)
    def tsci(req: schemas.TsciRequest):
        config = req.options.to_config()
        x, y = req.x.to_timeseries(), req.y.to_timeseries()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pair = prepare_aligned(x, y, config)
            forward, reverse = tsci_bidirectional(x, y, config, aligned=pair)
        return schemas.TsciResponse(
            forward=_score_payload(forward, req.include_cosines),
            reverse=_score_payload(reverse, req.include_cosines),
            embedding=_embedding_info(pair),
        )

    @app.post("/ccm", response_model=schemas.CcmResponse)
    def ccm(req: schemas.CcmRequest):
        config = req.options.to_config()
        x, y = req.x.to_timeseries(), req.y.to_timeseries()
        cfg = CcmConfig(
            library_lengths=tuple(req.library_lengths),
            trials=req.trials,
            seed=req.seed,
            pipeline=config,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pair = prepare_aligned(x, y, config)
            rows = ccm_convergence(x, y, cfg)
        return schemas.CcmResponse(
            rows=[schemas.CcmRow(**row) for row in rows],
            trials=req.trials,
            embedding=_embedding_info(pair),
        )

    @app.post("/granger", response_model=schemas.GrangerResponse)
    def granger(req: schemas.GrangerRequest):
        result = granger_f_test(
            req.x.to_timeseries(), req.y.to_timeseries(), req.max_lag
        )
        return schemas.GrangerResponse(
            p_xy=result.p_xy, p_yx=result.p_yx,
            f_xy=result.f_xy, f_yx=result.f_yx,
            lag_order=result.lag_order,
        )

    @app.post("/mi", response_model=schemas.MiResponse)
    def mi(req: schemas.MiRequest):
        config = req.options.to_config()
        x, y = req.x.to_timeseries(), req.y.to_timeseries()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pair = prepare_aligned(x, y, config)
            cfg = KnnConfig(k=config.k, theiler_window=config.theiler_window)
            sub = np.linspace(
                0, pair.X.shape[0] - 1, min(req.sample_cap, pair.X.shape[0])
            ).astype(np.intp)
            u_hat = pushforward_knn(pair.X, pair.U, pair.Y, pair.V, cfg, queries=sub)
            mi_xy = mi_pushforward_score(pair.U[sub], u_hat, req.k)
            v_hat = pushforward_knn(pair.Y, pair.V, pair.X, pair.U, cfg, queries=sub)
            mi_yx = mi_pushforward_score(pair.V[sub], v_hat, req.k)
        return schemas.MiResponse(
            mi_xy=mi_xy, mi_yx=mi_yx, embedding=_embedding_info(pair)
        )

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        cfg = SimulationConfig(
            coupling=req.coupling,
            dt_integrate=req.dt_integrate,
            dt_sample=req.dt_sample,
            n_samples=req.n_samples,
            transient_time=req.transient_time,
            seed=req.seed,
            initial_state=None if req.initial_state is None else np.asarray(req.initial_state),
        )
        series = rk4_integrate(cfg)
        return schemas.SimulateResponse(
            dt=req.dt_sample,
            names=list(COORDINATE_NAMES),
            values={name: [float(v) for v in s.values] for name, s in series.items()},
        )

    @app.post("/embed-params", response_model=schemas.EmbedParamsResponse)
    def embed_params(req: schemas.EmbedParamsRequest):
        rows = []
        for payload in req.series:
            series = payload.to_timeseries()
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                lag = select_lag(series, req.acf_threshold)
                dim = select_dimension_fnn(
                    series, lag, tolerance=req.fnn_tolerance, max_dim=req.max_dim
                )
            categories = {type(w.message) for w in caught}
            rows.append(schemas.EmbedParamsRow(
                name=payload.name,
                lag=lag,
                dim=dim,
                lag_capped=LagCapWarning in categories,
                dim_saturated=DimensionSaturationWarning in categories,
            ))
        return schemas.EmbedParamsResponse(rows=rows)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        spec = SweepSpec(
            kind=req.kind,
            grid=tuple(req.grid),
            trials=req.trials,
            methods=tuple(req.methods),
            seed=req.seed,
            coupling=req.coupling,
            n_samples=req.n_samples,
            dt_sample=req.dt_sample,
            dt_integrate=req.dt_integrate,
            transient_time=req.transient_time,
            x_name=req.x_name,
            y_name=req.y_name,
            ccm_library_length=req.ccm_library_length,
            granger_max_lag=req.granger_max_lag,
            mi_neighbors=req.mi_neighbors,
            mi_sample_cap=req.mi_sample_cap,
            sine_period=req.sine_period,
            pipeline=None if req.options is None else req.options.to_config(),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rows = run_sweep(spec)
        return schemas.SweepResponse(rows=[
            schemas.SweepRow(
                sweep_value=r.sweep_value, method=r.method, direction=r.direction,
                median=r.median, p5=r.p5, p95=r.p95, trials=r.trials,
            )
            for r in rows
        ])

    return app
