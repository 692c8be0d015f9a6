"""Command-line front end: a thin client over the service handlers.

Commands read a JSON config, call the same handlers the HTTP service uses,
and write CSV/JSON artifacts.  Exit codes: 0 success, 1 bad config or
usage, 2 integration divergence, 3 validation failures.
"""

import argparse
import json
import sys
from typing import List, Optional

from pydantic import ValidationError

from .errors import DelayQError, IntegrationDivergedError
from .ndde import trajectory_to_csv
from .service import handlers
from .service.schemas import (AnalyzeRequest, SimulateRequest, SweepRequest,
                              SweepResponse, ValidateRequest)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_VALIDATION = 3


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValueError("config must be a single JSON object")
    return config


def _emit(text: str, out: Optional[str]) -> None:
    """Write a fully built artifact in one shot so failures never leave
    partial files behind."""
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _sweep_csv(resp: SweepResponse) -> str:
    def cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, int):
            return str(value)
        if isinstance(value, float):
            return f"{value:.17g}"
        return str(value)

    lines = [",".join(resp.columns)]
    for row in resp.rows:
        data = row.model_dump()
        lines.append(",".join(cell(data[c]) for c in resp.columns))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    try:
        req = SimulateRequest(**_load_config(args.config))
    except (OSError, ValueError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        response, traj = handlers.run_simulate(req)
    except IntegrationDivergedError as exc:
        print(_json_dumps({"error": "integration-diverged",
                           "last_time": exc.last_time}), end="")
        return EXIT_DIVERGED
    except DelayQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        if args.format == "json":
            payload = {"times": traj.times.tolist(),
                       "values": traj.values.tolist(),
                       "derivatives": traj.derivatives.tolist()}
            _emit(_json_dumps(payload), args.out)
        else:
            _emit(trajectory_to_csv(traj), args.out)
    print(_json_dumps(response.summary.model_dump(exclude_none=True)), end="")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        req = AnalyzeRequest(**_load_config(args.config))
    except (OSError, ValueError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        response = handlers.run_analyze(req)
    except DelayQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = _json_dumps(response.model_dump(exclude_none=True))
    if args.out:
        _emit(text, args.out)
    print(text, end="")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        config = _load_config(args.config)
        req = SweepRequest(**config)
        if args.threads != 1:
            req = req.model_copy(update={"threads": args.threads})
    except (OSError, ValueError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        response = handlers.run_sweep(req)
    except DelayQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.format == "json":
        text = _json_dumps({"columns": response.columns,
                            "rows": [r.model_dump() for r in response.rows]})
    else:
        text = _sweep_csv(response)
    _emit(text, args.out)
    if args.out:
        print(_json_dumps({"rows": len(response.rows), "out": args.out}), end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        req = ValidateRequest(**_load_config(args.config))
    except (OSError, ValueError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    response = handlers.run_validate(req)
    text = _json_dumps(response.model_dump())
    if args.out:
        _emit(text, args.out)
    print(text, end="")
    return EXIT_OK if response.all_passed else EXIT_VALIDATION


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayq",
        description="Parallel queues with delayed announcements: simulate, "
                    "analyze stability, sweep parameters, validate.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a JSON config object")
    common.add_argument("--out", help="output file path")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output file format (default csv)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for sweeps (outputs unchanged)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="integrate one configuration, write the trajectory, "
                        "print an amplitude/period summary").set_defaults(fn=cmd_simulate)
    sub.add_parser("analyze", parents=[common],
                   help="region, critical delays, crossing rates, and the "
                        "weight-design summary").set_defaults(fn=cmd_analyze)
    sub.add_parser("sweep", parents=[common],
                   help="evaluate a parameter grid into a CSV/JSON table").set_defaults(fn=cmd_sweep)
    sub.add_parser("validate", parents=[common],
                   help="run the acceptance criteria and report verdicts").set_defaults(fn=cmd_validate)
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
