"""Command-line interface.

Runs in-process by default; with ``--server URL`` the resolved config is
posted to a running ``hybridqc serve`` instance instead.

Exit codes: 0 success, 2 bad input, 3 resource cap, 4 solver failure
(the partial record is still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .runner import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RESOURCE,
    EXIT_SOLVER,
    RunFailure,
    dump_record,
    execute,
    record_to_csv,
    rows_to_csv,
    run_sweep,
    write_atomic,
)
from .schemas import SCHEMA_VERSION, RunConfig, RunRecord, SweepConfig
from .statevector import ResourceLimitError


def parse_sizes(text: str) -> list[int]:
    """``"7..10"``, ``"4,6,8"`` or a mix; an inverted range is empty."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def read_angles(path: str) -> list[float]:
    """Angle file: JSON ``{"betas": [...], "gammas": [...]}`` or whitespace-separated betas then gammas."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [float(t) for t in text.split()]
    if isinstance(data, dict):
        return [*map(float, data["betas"]), *map(float, data["gammas"])]
    return [float(v) for v in data]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o", help="result file (stdout if omitted)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--server", help="base URL of a running service; run remotely")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical reruns)")


def _optimizer(p: argparse.ArgumentParser) -> None:
    p.add_argument("--optimizer", choices=["simplex", "bfgs"])
    p.add_argument("--max-evals", type=int)
    p.add_argument("--ftol", type=float, default=1e-8)
    p.add_argument("--gtol", type=float, default=1e-6)


def _cover_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="exact-cover file")
    p.add_argument("--routes", type=int, help="generate a planted instance with this many routes")
    p.add_argument("--flights", type=int, help="flights for a generated instance (default: routes)")
    p.add_argument("--instance-seed", type=int, help="generator seed (default: --seed)")


def _spin_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="Heisenberg edge-list file")
    p.add_argument("--size", type=int, help="isotropic ring size")
    p.add_argument("--open", dest="open_chain", action="store_true", help="open chain instead of a ring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridqc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qaoa", help="optimise QAOA angles on an exact-cover instance")
    _cover_source(q)
    q.add_argument("--p", type=int, default=5)
    q.add_argument("--tau", type=float, default=0.4, help="AQA step used for initial angles")
    q.add_argument("--n", type=int, help="AQA steps for initial angles (default p-1)")
    q.add_argument("--schedule", default="linear")
    q.add_argument("--init", choices=["aqa", "random", "file"], default="aqa")
    q.add_argument("--angles-file", help="angles for --init file")
    q.add_argument("--budget", type=int, help="objective evaluations (default 200)")
    q.add_argument("--gradient", choices=["finite-difference", "parameter-shift"], default="finite-difference")
    _optimizer(q)
    _common(q)

    a = sub.add_parser("aqa", help="single approximate-annealing evolution")
    _cover_source(a)
    a.add_argument("--tau", type=float, default=0.8)
    a.add_argument("--n", type=int, default=5)
    a.add_argument("--schedule", default="linear")
    _common(a)

    for name, helptext in (("vqe", "single-round VQE on a Heisenberg model"),
                           ("quasi", "quasi-dynamics VQE rounds")):
        v = sub.add_parser(name, help=helptext)
        _spin_source(v)
        choices = ["neel", "random", "bits"] if name == "vqe" else ["neel", "bits"]
        v.add_argument("--init", choices=choices, default="neel")
        v.add_argument("--bits", help="initial basis state, qubit 0 first")
        if name == "vqe":
            v.add_argument("--restarts", type=int, default=1)
        else:
            v.add_argument("--threshold", type=float, default=1e-4)
            v.add_argument("--max-rounds", type=int, default=20)
        _optimizer(v)
        _common(v)

    e = sub.add_parser("exact", help="Lanczos ground-state energy")
    _spin_source(e)
    e.add_argument("--tol", type=float, default=1e-8)
    e.add_argument("--max-iter", type=int, default=500)
    _common(e)

    b = sub.add_parser("bench", help="partitioned vs monolithic random circuit")
    b.add_argument("--qubits", type=int, default=10)
    b.add_argument("--local", type=int, help="local qubits per rank (default all)")
    b.add_argument("--gates", type=int, default=100)
    b.add_argument("--two-qubit-fraction", type=float, default=0.0)
    _common(b)

    s = sub.add_parser("sweep", help="CSV table over sizes and algorithms")
    s.add_argument("--algorithms", default="qaoa", help="comma list of qaoa,aqa,vqe,quasi")
    s.add_argument("--sizes", required=True, help='e.g. "7..10" or "4,6,8"')
    s.add_argument("--replicates", type=int, default=1)
    s.add_argument("--flights-per-route", type=float, default=1.0)
    s.add_argument("--p", type=int, default=5)
    s.add_argument("--tau", type=float, default=0.4)
    s.add_argument("--aqa-tau", type=float, default=0.8)
    s.add_argument("--aqa-n", type=int, default=5)
    s.add_argument("--budget", type=int, default=200)
    s.add_argument("--optimizer", choices=["simplex", "bfgs"])
    s.add_argument("--threshold", type=float, default=1e-4)
    s.add_argument("--max-rounds", type=int, default=20)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", "-o")
    s.add_argument("--server")
    s.add_argument("--timing", action="store_true", help="fill the seconds column")

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    return parser


_RUN_FIELDS = set(RunConfig.model_fields)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = {k: v for k, v in vars(args).items() if k in _RUN_FIELDS and v is not None}
    if getattr(args, "instance", None):
        data["instance_text"] = Path(args.instance).read_text()
    if getattr(args, "angles_file", None):
        data["angles"] = read_angles(args.angles_file)
    if args.command in ("vqe", "quasi") and args.bits and args.init == "neel":
        data["init"] = "bits"
    return RunConfig(**data)


def sweep_from_args(args: argparse.Namespace) -> SweepConfig:
    return SweepConfig(
        algorithms=[a.strip() for a in args.algorithms.split(",") if a.strip()],
        sizes=parse_sizes(args.sizes),
        replicates=args.replicates,
        seed=args.seed,
        flights_per_route=args.flights_per_route,
        p=args.p,
        tau=args.tau,
        aqa_tau=args.aqa_tau,
        aqa_n=args.aqa_n,
        budget=args.budget,
        optimizer=args.optimizer,
        threshold=args.threshold,
        max_rounds=args.max_rounds,
        jobs=args.jobs,
        timing=args.timing,
    )


def _emit(text: str, output: str | None) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _render(record: RunRecord, fmt: str) -> str:
    return record_to_csv(record) if fmt == "csv" else dump_record(record)


def _remote(url: str, path: str, payload: dict):
    import httpx

    return httpx.post(url.rstrip("/") + path, json=payload, timeout=None)


def _run(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    if args.server:
        resp = _remote(args.server, "/runs", cfg.model_dump(mode="json"))
        if resp.status_code == 413:
            print(f"error: {resp.json()['detail']}", file=sys.stderr)
            return EXIT_RESOURCE
        if resp.status_code in (400, 422):
            print(f"error: {resp.text}", file=sys.stderr)
            return EXIT_PARSE
        record = RunRecord.model_validate(resp.json())
        _emit(_render(record, args.format), args.output)
        if resp.status_code != 200:
            print(f"error: {record.message}", file=sys.stderr)
            return EXIT_SOLVER
        return EXIT_OK
    try:
        record = execute(cfg)
    except RunFailure as exc:
        _emit(_render(exc.record, args.format), args.output)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    _emit(_render(record, args.format), args.output)
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    cfg = sweep_from_args(args)
    if args.server:
        resp = _remote(args.server, "/sweeps", cfg.model_dump(mode="json"))
        if resp.status_code != 200:
            print(f"error: {resp.text}", file=sys.stderr)
            return EXIT_PARSE
        text = resp.text
    else:
        text = rows_to_csv(run_sweep(cfg))
    _emit(text, args.output)
    if args.output:
        # the CSV stays a plain table; its config echo goes alongside
        echo = {"schema_version": SCHEMA_VERSION, "config": cfg.model_dump(mode="json")}
        write_atomic(args.output + ".config.json", json.dumps(echo, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        import uvicorn

        uvicorn.run("hybridqc.service:app", host=args.host, port=args.port)
        return EXIT_OK
    try:
        return _sweep(args) if args.command == "sweep" else _run(args)
    except ValidationError as exc:
        print(f"error: invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
