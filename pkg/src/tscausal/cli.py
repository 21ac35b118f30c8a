"""Command-line client for the analysis service.

Every subcommand builds a JSON request and posts it to the HTTP service; by
default the service runs in-process (no server needed, nothing leaves the
process), while ``--server URL`` targets a running instance instead. Floats
survive the JSON hop exactly (shortest round-trip representation), so CLI
output is byte-identical across repeat runs with the same seed.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from .harness.io import RESULT_COLUMNS, read_csv
from .errors import DataError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        raise CliError(message, EXIT_USAGE)


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous bridge to an ASGI app (httpx's ASGITransport is async-only)."""

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def _call():
            response = await self._asgi.handle_async_request(request)
            body = await response.aread()
            return httpx.Response(
                response.status_code, headers=response.headers, content=body
            )

        return asyncio.run(_call())


class ServiceClient:
    """Thin HTTP client; in-process ASGI transport unless a URL is given."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from .service import create_app

            self._client = httpx.Client(
                transport=_InProcessTransport(create_app()),
                base_url="http://tscausal.internal",
                timeout=None,
            )

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise CliError(f"cannot reach service: {exc}", EXIT_USAGE) from exc
        if response.status_code == 200:
            return response.json()
        try:
            body = response.json()
        except ValueError:
            raise CliError(
                f"service error {response.status_code}: {response.text[:200]}",
                EXIT_NUMERICAL,
            ) from None
        if response.status_code == 422:
            raise CliError(f"invalid request: {body.get('detail')}", EXIT_USAGE)
        category = body.get("category", "numerical")
        code = EXIT_DATA if category == "data" else EXIT_NUMERICAL
        raise CliError(f"{body.get('error', 'error')}: {body.get('detail', '')}", code)

    def close(self):
        self._client.close()


def _write_output(text: str, output: str | None):
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _load_series_payloads(args) -> tuple[dict, dict]:
    try:
        collection = read_csv(args.input)
    except DataError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    names = list(collection)
    x_name = args.x or names[0]
    y_name = args.y or (names[1] if len(names) > 1 else None)
    if y_name is None:
        raise CliError("input file has a single column; need two series", EXIT_DATA)
    for wanted in (x_name, y_name):
        if wanted not in collection:
            raise CliError(
                f"no column {wanted!r} in {args.input} (have {names})", EXIT_DATA
            )
    def payload(name):
        s = collection[name]
        return {"values": [float(v) for v in s.values], "dt": s.dt, "name": name}
    return payload(x_name), payload(y_name)


def _pipeline_options(args) -> dict:
    options = {}
    for field in (
        "lag_x", "lag_y", "dim_x", "dim_y", "derivative", "method", "k",
        "theiler_window", "max_dim", "savgol_window", "savgol_polyorder",
    ):
        value = getattr(args, field, None)
        if value is not None:
            options[field] = value
    return options


def _csv_table(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            repr(float(c)) if isinstance(c, float) else str(c) for c in row
        ))
    return "\n".join(lines) + "\n"


def _emit(args, as_json: dict, header: list[str], rows: list[list]):
    if args.format == "json":
        _write_output(json.dumps(as_json, indent=2) + "\n", args.output)
    else:
        _write_output(_csv_table(header, rows), args.output)


# -- subcommand handlers ---------------------------------------------------------

def _cmd_simulate(client: ServiceClient, args) -> int:
    payload = {
        "coupling": args.coupling,
        "n_samples": args.n_samples,
        "dt_sample": args.dt_sample,
        "dt_integrate": args.dt_integrate,
        "transient_time": args.transient,
        "seed": args.seed,
    }
    if args.initial_state:
        try:
            payload["initial_state"] = [float(v) for v in args.initial_state.split(",")]
        except ValueError:
            raise CliError("--initial-state must be 6 comma-separated numbers", EXIT_USAGE)
    body = client.post("/simulate", payload)
    names = body["names"]
    dt = body["dt"]
    lines = ["time," + ",".join(names)]
    columns = [body["values"][n] for n in names]
    for i in range(len(columns[0])):
        lines.append(",".join([repr(i * dt)] + [repr(col[i]) for col in columns]))
    _write_output("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_embed_params(client: ServiceClient, args) -> int:
    try:
        collection = read_csv(args.input)
    except DataError as exc:
        raise CliError(str(exc), EXIT_DATA) from exc
    wanted = args.series.split(",") if args.series else list(collection)
    missing = [n for n in wanted if n not in collection]
    if missing:
        raise CliError(f"no columns {missing} in {args.input}", EXIT_DATA)
    payload = {
        "series": [
            {"values": [float(v) for v in collection[n].values],
             "dt": collection[n].dt, "name": n}
            for n in wanted
        ],
        "fnn_tolerance": args.fnn_tolerance,
        "max_dim": args.max_dim,
    }
    if args.acf_threshold is not None:
        payload["acf_threshold"] = args.acf_threshold
    body = client.post("/embed-params", payload)
    rows = [
        [r["name"], r["lag"], r["dim"], r["lag_capped"], r["dim_saturated"]]
        for r in body["rows"]
    ]
    _emit(args, body, ["name", "lag", "dim", "lag_capped", "dim_saturated"], rows)
    return EXIT_OK


def _cmd_tsci(client: ServiceClient, args) -> int:
    x, y = _load_series_payloads(args)
    payload = {"x": x, "y": y, "options": _pipeline_options(args)}
    body = client.post("/tsci", payload)
    rows = [
        [s["direction"], s["r"], s["n_used"], s["n_dropped"]]
        for s in (body["forward"], body["reverse"])
    ]
    _emit(args, body, ["direction", "r", "n_used", "n_dropped"], rows)
    return EXIT_OK


def _cmd_ccm(client: ServiceClient, args) -> int:
    x, y = _load_series_payloads(args)
    try:
        lengths = [int(v) for v in args.library_lengths.split(",")]
    except ValueError:
        raise CliError("--library-lengths must be comma-separated integers", EXIT_USAGE)
    payload = {
        "x": x, "y": y, "library_lengths": lengths,
        "trials": args.trials, "seed": args.seed,
        "options": _pipeline_options(args),
    }
    body = client.post("/ccm", payload)
    rows = [
        [r["library_length"], r["direction"], r["median"], r["p5"], r["p95"], body["trials"]]
        for r in body["rows"]
    ]
    _emit(args, body, ["library_length", "direction", "median", "p5", "p95", "trials"], rows)
    return EXIT_OK


def _cmd_granger(client: ServiceClient, args) -> int:
    x, y = _load_series_payloads(args)
    body = client.post("/granger", {"x": x, "y": y, "max_lag": args.max_lag})
    rows = [
        ["X->Y", body["p_xy"], body["f_xy"], body["lag_order"]],
        ["Y->X", body["p_yx"], body["f_yx"], body["lag_order"]],
    ]
    _emit(args, body, ["direction", "p_value", "f_statistic", "lag_order"], rows)
    return EXIT_OK


def _cmd_mi(client: ServiceClient, args) -> int:
    x, y = _load_series_payloads(args)
    payload = {
        "x": x, "y": y, "k": args.mi_k, "sample_cap": args.sample_cap,
        "options": _pipeline_options(args),
    }
    body = client.post("/mi", payload)
    rows = [["X->Y", body["mi_xy"]], ["Y->X", body["mi_yx"]]]
    _emit(args, body, ["direction", "mi_nats"], rows)
    return EXIT_OK


def _cmd_sweep(client: ServiceClient, args) -> int:
    payload: dict = {}
    if args.config:
        try:
            payload = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise CliError(f"no such config file: {args.config}", EXIT_USAGE)
        except json.JSONDecodeError as exc:
            raise CliError(f"bad config JSON: {exc}", EXIT_DATA)
        if not isinstance(payload, dict):
            raise CliError("config must be a JSON object", EXIT_DATA)
    # flags override config-file values
    if args.kind is not None:
        payload["kind"] = args.kind
    if args.grid is not None:
        try:
            payload["grid"] = [float(v) for v in args.grid.split(",")]
        except ValueError:
            raise CliError("--grid must be comma-separated numbers", EXIT_USAGE)
    if args.trials is not None:
        payload["trials"] = args.trials
    if args.methods is not None:
        payload["methods"] = args.methods.split(",")
    if args.seed is not None:
        payload["seed"] = args.seed
    if args.coupling is not None:
        payload["coupling"] = args.coupling
    if args.n_samples is not None:
        payload["n_samples"] = args.n_samples
    if "kind" not in payload:
        raise CliError("sweep needs --kind or a config file with 'kind'", EXIT_USAGE)
    if "grid" not in payload:
        raise CliError("sweep needs --grid or a config file with 'grid'", EXIT_USAGE)
    body = client.post("/sweep", payload)
    rows = [
        [r["sweep_value"], r["method"], r["direction"],
         r["median"], r["p5"], r["p95"], r["trials"]]
        for r in body["rows"]
    ]
    _emit(args, body, list(RESULT_COLUMNS), rows)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def _add_common(sub, with_input=True):
    sub.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    if with_input:
        sub.add_argument("--input", "-i", required=True, help="trajectory CSV file")
        sub.add_argument("--x", default=None, help="column for the putative cause")
        sub.add_argument("--y", default=None, help="column for the putative effect")


def _add_pipeline_flags(sub):
    sub.add_argument("--method", choices=("knn", "kernel_ridge"), default=None)
    sub.add_argument("--derivative", choices=("forward", "central", "savgol"), default=None)
    sub.add_argument("--lag-x", dest="lag_x", type=int, default=None)
    sub.add_argument("--lag-y", dest="lag_y", type=int, default=None)
    sub.add_argument("--dim-x", dest="dim_x", type=int, default=None)
    sub.add_argument("--dim-y", dest="dim_y", type=int, default=None)
    sub.add_argument("--k", type=int, default=None, help="neighbors for local Jacobians")
    sub.add_argument("--theiler-window", dest="theiler_window", type=int, default=None)
    sub.add_argument("--max-dim", dest="max_dim", type=int, default=None)
    sub.add_argument("--savgol-window", dest="savgol_window", type=int, default=None)
    sub.add_argument("--savgol-polyorder", dest="savgol_polyorder", type=int, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="tscausal", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="integrate the benchmark system to CSV")
    _add_common(sim, with_input=False)
    sim.add_argument("--coupling", "-C", type=float, default=1.0)
    sim.add_argument("--n-samples", dest="n_samples", type=int, default=10_000)
    sim.add_argument("--dt-sample", dest="dt_sample", type=float, default=0.05)
    sim.add_argument("--dt-integrate", dest="dt_integrate", type=float, default=0.001)
    sim.add_argument("--transient", type=float, default=50.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--initial-state", dest="initial_state", default=None,
                     help="6 comma-separated numbers (default: seeded random)")
    sim.set_defaults(handler=_cmd_simulate)

    emb = commands.add_parser("embed-params", help="report selected lag and dimension")
    _add_common(emb, with_input=False)
    emb.add_argument("--input", "-i", required=True)
    emb.add_argument("--series", default=None, help="comma-separated column names (default all)")
    emb.add_argument("--acf-threshold", dest="acf_threshold", type=float, default=None)
    emb.add_argument("--fnn-tolerance", dest="fnn_tolerance", type=float, default=0.005)
    emb.add_argument("--max-dim", dest="max_dim", type=int, default=8)
    emb.set_defaults(handler=_cmd_embed_params)

    tsci = commands.add_parser("tsci", help="tangent-space score, both directions")
    _add_common(tsci)
    _add_pipeline_flags(tsci)
    tsci.set_defaults(handler=_cmd_tsci)

    ccm = commands.add_parser("ccm", help="cross-map skill over library lengths")
    _add_common(ccm)
    _add_pipeline_flags(ccm)
    ccm.add_argument("--library-lengths", dest="library_lengths", default="1000",
                     help="comma-separated library lengths")
    ccm.add_argument("--trials", type=int, default=10)
    ccm.add_argument("--seed", type=int, default=0)
    ccm.set_defaults(handler=_cmd_ccm)

    gr = commands.add_parser("granger", help="bivariate Granger F-test")
    _add_common(gr)
    gr.add_argument("--max-lag", dest="max_lag", type=int, default=5)
    gr.set_defaults(handler=_cmd_granger)

    mi = commands.add_parser("mi", help="mutual information of the tangent pushforward")
    _add_common(mi)
    _add_pipeline_flags(mi)
    mi.add_argument("--mi-k", dest="mi_k", type=int, default=4,
                    help="neighbors for the information estimator")
    mi.add_argument("--sample-cap", dest="sample_cap", type=int, default=2000)
    mi.set_defaults(handler=_cmd_mi)

    sw = commands.add_parser("sweep", help="run a full experiment sweep")
    _add_common(sw, with_input=False)
    sw.add_argument("--config", default=None, help="JSON file mirroring the sweep spec")
    sw.add_argument("--kind", choices=("coupling", "library_length", "snr", "sine_power", "embed_dim"),
                    default=None)
    sw.add_argument("--grid", default=None, help="comma-separated grid values")
    sw.add_argument("--trials", type=int, default=None)
    sw.add_argument("--methods", default=None,
                    help="comma-separated subset of tsci_knn,tsci_model,ccm,granger,mi")
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--coupling", "-C", type=float, default=None)
    sw.add_argument("--n-samples", dest="n_samples", type=int, default=None)
    sw.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    client = ServiceClient(args.server)
    try:
        return args.handler(client, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
