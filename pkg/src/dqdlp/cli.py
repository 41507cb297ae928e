"""Command-line front end: ``dqdlp <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error or invalid instance, 2 search failed
after all restarts. Every JSON document carries ``"schema": "dqdlp/1"``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from collections import Counter
from dataclasses import asdict

import numpy as np

from . import analytics, baseline, membership
from .cluster import Coordinator, WorkerPool
from .membership import SetDescriptor
from .numt import ProblemInstance, default_register_size
from .search import SearchConfig, solve

SCHEMA = "dqdlp/1"
EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_instance(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--a", type=int, required=required)
    p.add_argument("--b", type=int, required=required)
    p.add_argument("--modulus", "--N", dest="N", type=int, required=required)
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float, default=0.5)


def _add_run(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n0", type=int)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--mode", choices=["serial", "parallel"])
    p.add_argument("--max-restarts", type=int, default=0)
    p.add_argument("--max-attempts", type=int)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dqdlp", description="Distributed set-membership discrete-log simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the dichotomy search")
    _add_instance(p)
    _add_run(p)
    _add_output(p)

    p = sub.add_parser("membership", help="sample one membership verdict")
    _add_instance(p)
    _add_run(p)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--n", type=int)
    _add_output(p)

    p = sub.add_parser("probe", help="exact phi9 probabilities for one set")
    _add_instance(p)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--full", action="store_true", help="include the register-3 distribution given anc = 1")
    _add_output(p)

    p = sub.add_parser("bounds", help="evaluate every closed form")
    _add_instance(p, required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int, default=2)
    _add_output(p)

    p = sub.add_parser("experiment", help="repeat solve over derived seeds")
    _add_instance(p)
    _add_run(p)
    p.add_argument("--shots", type=int, default=100)
    _add_output(p)

    p = sub.add_parser("baseline-shor", help="sample the three-register baseline circuit")
    _add_instance(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int, default=100)
    p.add_argument("--n", type=int)
    _add_output(p)
    return parser


def resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("DQDLP_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"DQDLP_SEED must be an integer, got {env!r}") from None


def default_n0(r: int, m: int) -> int:
    n0 = max(0, min(3, m - 2))
    while n0 > 0 and 2**n0 >= r:
        n0 -= 1
    return n0


def resolve_instance(args) -> ProblemInstance:
    return ProblemInstance.create(args.a, args.b, args.N, r=args.r, m=args.m, epsilon=args.epsilon)


def resolve_config(args, instance: ProblemInstance) -> SearchConfig:
    n0 = args.n0 if args.n0 is not None else default_n0(instance.r, instance.m)
    return SearchConfig(
        n0=n0,
        p=args.p,
        epsilon=instance.epsilon,
        max_restarts=args.max_restarts,
        seed=resolve_seed(args.seed),
        max_attempts=args.max_attempts,
    )


def make_coordinator(args, instance: ProblemInstance, config: SearchConfig) -> Coordinator:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    mode = args.mode or ("parallel" if args.workers > 1 else "serial")
    pool = WorkerPool(K=args.workers, seed_base=config.seed, mode=mode)
    return Coordinator(instance, pool, max_attempts=config.max_attempts)


def _instance_dict(instance: ProblemInstance) -> dict:
    return asdict(instance)


def cmd_solve(args) -> tuple[dict, list[list], int]:
    instance = resolve_instance(args)
    config = resolve_config(args, instance)
    with make_coordinator(args, instance, config) as coord:
        trace = solve(instance, config, coord)
    doc = {"instance": _instance_dict(instance), "n0": config.n0, "p": config.p, "seed": config.seed, **trace.to_dict()}
    rows = [["tau", "n", "verdict", "worker", "restart", "note"]]
    rows += [[s.desc.tau, s.desc.n, s.verdict.value, s.worker, s.restart, s.note] for s in trace.steps]
    return doc, rows, EXIT_OK if trace.solved else EXIT_FAILED


def _set_from_args(args, instance: ProblemInstance) -> SetDescriptor:
    n = args.n if args.n is not None else default_n0(instance.r, instance.m)
    desc = SetDescriptor(args.tau, n)
    desc.validate(instance)
    return desc


def cmd_membership(args) -> tuple[dict, list[list], int]:
    instance = resolve_instance(args)
    config = resolve_config(args, instance)
    desc = _set_from_args(args, instance)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    result = membership.membership_verdict(instance, desc, config.p, rng, config.max_attempts)
    doc = {
        "instance": _instance_dict(instance),
        "tau": desc.tau,
        "n": desc.n,
        "p": config.p,
        "seed": config.seed,
        "verdict": result.verdict.value,
        "trials": [json.loads(line) for line in result.log_lines()],
    }
    rows = [["tau", "n", "attempt", "fourth", "third", "marker_hit"]]
    rows += [[t["tau"], t["n"], t["attempt"], t["fourth"], t["third"], t["marker_hit"]] for t in doc["trials"]]
    return doc, rows, EXIT_OK


def cmd_probe(args) -> tuple[dict, list[list], int]:
    instance = resolve_instance(args)
    desc = _set_from_args(args, instance)
    pr = membership.probe(instance, desc)
    doc = {"instance": _instance_dict(instance), "tau": desc.tau, "n": desc.n, **asdict(pr)}
    rows = [["quantity", "value"]] + [[k, v] for k, v in asdict(pr).items()]
    if args.full:
        dist = membership.third_register_distribution(instance, desc)
        doc["third_register_given_fourth_1"] = {str(z): p for z, p in dist.items()}
        rows = [["z", "probability"]] + [[z, p] for z, p in dist.items()]
    return doc, rows, EXIT_OK


def cmd_bounds(args) -> tuple[dict, list[list], int]:
    if args.a is not None or args.b is not None or args.N is not None:
        if None in (args.a, args.b, args.N):
            raise UsageError("--a, --b and --modulus must be given together")
        instance = resolve_instance(args)
        r, m = instance.r, instance.m
    else:
        if args.r is None:
            raise UsageError("bounds needs --r or a full instance")
        r = args.r
        if r < 2:
            raise UsageError("--r must be >= 2")
        m = args.m if args.m is not None else default_register_size(r, 1, args.epsilon)
    n = args.n if args.n is not None else default_n0(r, m)
    rep = analytics.bound_report(r, n, m, args.p)
    doc = {"r": r, "n": n, "m": m, "p": args.p, "d": rep.d, "values": rep.values, "errors": rep.errors}
    rows = [["name", "value"]] + [[k, v] for k, v in rep.values.items()]
    rows += [[k, f"error: {v}"] for k, v in rep.errors.items()]
    return doc, rows, EXIT_OK


def cmd_experiment(args) -> tuple[dict, list[list], int]:
    instance = resolve_instance(args)
    config = resolve_config(args, instance)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    hist: Counter[str] = Counter()
    attempts = 0
    successes = 0
    with make_coordinator(args, instance, config) as coord:
        for shot in range(args.shots):
            trace = solve(instance, config, coord, stream=(shot,))
            hist[str(trace.result.t) if trace.solved else "failure"] += 1
            successes += trace.solved
            attempts += trace.total_postselect_attempts
        ledger = coord.ledger.to_dict(instance.r)
    doc = {
        "instance": _instance_dict(instance),
        "n0": config.n0,
        "p": config.p,
        "seed": config.seed,
        "shots": args.shots,
        "histogram": dict(sorted(hist.items())),
        "success_rate": successes / args.shots,
        "mean_postselect_attempts": attempts / args.shots,
        "ledger": ledger,
    }
    rows = [["kind", "key", "value"]] + [["histogram", k, v] for k, v in doc["histogram"].items()]
    rows += [["summary", "success_rate", doc["success_rate"]], ["summary", "mean_postselect_attempts", doc["mean_postselect_attempts"]]]
    return doc, rows, EXIT_OK


def cmd_baseline(args) -> tuple[dict, list[list], int]:
    instance = resolve_instance(args)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    seed = resolve_seed(args.seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    outcomes = [baseline.shor_dlp_run(instance, rng) for _ in range(args.shots)]
    n = args.n if args.n is not None else default_n0(instance.r, instance.m)
    base_q, dq_q = baseline.qubit_report(instance.m, n)
    accepted = sum(o.accepted for o in outcomes)
    doc = {
        "instance": _instance_dict(instance),
        "seed": seed,
        "shots": args.shots,
        "outcomes": [asdict(o) for o in outcomes],
        "acceptance_rate": accepted / args.shots,
        "qubits": {"baseline": base_q, "dqdlp": dq_q, "n": n},
    }
    rows = [["x_out", "y_out", "t_candidate"]] + [[o.x_out, o.y_out, o.t_candidate] for o in outcomes]
    return doc, rows, EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "membership": cmd_membership,
    "probe": cmd_probe,
    "bounds": cmd_bounds,
    "experiment": cmd_experiment,
    "baseline-shor": cmd_baseline,
}


def render(doc: dict, rows: list[list], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(["" if v is None else v for v in row] for row in rows)
        return buf.getvalue()
    return json.dumps({"schema": SCHEMA, **doc}, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc, rows, code = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"dqdlp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(doc, rows, args.output))
    return code


if __name__ == "__main__":
    sys.exit(main())
