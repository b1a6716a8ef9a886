"""Command-line interface: ``treecvrp <command> ...``.

Exit codes: 0 success, 1 input error (or a solution failing verification),
2 certificate violation. ``TREECVRP_LOG=debug`` turns on logging.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

from .generate import SHAPES, GenParams, generate, suite_params
from .instance import (
    InstanceError,
    lower_bound,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
    verify_solution,
)
from .oracle import DEFAULT_LIMIT, OracleLimitError, exact_solution, itp_baseline
from .solver import SolverInvariantError, solve
from .strategies import CertificateViolation

log = logging.getLogger("treecvrp")

EXIT_OK, EXIT_INPUT, EXIT_CERT = 0, 1, 2

BATCH_HELP = """\
CSV columns:
  id             instance file name or gen:<seed>
  n              vertex count
  q              capacity
  lb             edge-traffic lower bound
  cost           solver cost
  ratio          cost/lb as an unreduced exact fraction
  ratio_decimal  the same, rounded to 6 places
  margin         4*lb - 3*cost (never negative on success)
  itp_cost       tour-partitioning baseline cost
  oracle_cost    exact integral optimum (with --with-oracle, small instances only)
  iterations     solver iterations
  wall_ms        solve wall time in milliseconds
  status         ok, certificate, or error:<reason>
"""


@dataclass
class BatchRow:
    id: str
    n: int = 0
    q: int = 0
    lb: int = 0
    cost: int = 0
    ratio: str = ""
    ratio_decimal: str = ""
    margin: int = 0
    itp_cost: int = 0
    oracle_cost: str = ""
    iterations: int = 0
    wall_ms: float = 0.0
    status: str = "ok"


COLUMNS = [f.name for f in fields(BatchRow)]


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str):
    try:
        return parse_instance(_read(path))
    except (OSError, InstanceError) as exc:
        raise InstanceError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    try:
        rep = solve(inst)
    except (CertificateViolation, SolverInvariantError) as exc:
        print(f"certificate violation: {exc}", file=sys.stderr)
        return EXIT_CERT
    _write(serialize_solution(rep.solution), args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for row in rep.traces:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    if args.oplog:
        with open(args.oplog, "w", encoding="utf-8") as fh:
            for rec in rep.oplog:
                fh.write(rec.to_json() + "\n")
    sol = rep.solution
    print(f"cost={sol.cost} lb={sol.lower_bound} ratio={sol.ratio_text} "
          f"certified={str(sol.certified).lower()} iterations={rep.iterations}", file=sys.stderr)
    return EXIT_OK if sol.certified else EXIT_CERT


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    try:
        sol = parse_solution(_read(args.solution))
    except (OSError, InstanceError) as exc:
        raise InstanceError(f"{args.solution}: {exc}") from exc
    rep = verify_solution(inst, sol)
    doc = {
        "load_ok": rep.load_ok,
        "coverage_ok": rep.coverage_ok,
        "cost_ok": rep.cost_ok,
        "ratio_ok": rep.ratio_ok,
        "violations": rep.violations,
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return EXIT_OK if rep.ok else EXIT_INPUT


def cmd_lb(args) -> int:
    print(lower_bound(_load(args.instance)))
    return EXIT_OK


def _gen_params(args, seed: int) -> GenParams:
    return GenParams(
        n=args.n, max_len=args.max_len, max_demand=args.max_demand,
        q=args.q, seed=seed, shape=args.shape,
    )


def cmd_gen(args) -> int:
    _write(serialize_instance(generate(_gen_params(args, args.seed))), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    try:
        sol = exact_solution(inst, args.limit)
    except OracleLimitError as exc:
        raise InstanceError(str(exc)) from exc
    _write(serialize_solution(sol), args.out)
    print(f"oracle cost={sol.cost} lb={sol.lower_bound}", file=sys.stderr)
    return EXIT_OK


def cmd_baseline(args) -> int:
    sol = itp_baseline(_load(args.instance))
    _write(serialize_solution(sol), args.out)
    print(f"baseline cost={sol.cost} lb={sol.lower_bound} ratio={sol.ratio_text}", file=sys.stderr)
    return EXIT_OK


def _batch_one(job) -> BatchRow:
    name, source, with_oracle, limit = job
    try:
        inst = generate(source) if isinstance(source, GenParams) else _load(source)
    except (InstanceError, OSError) as exc:
        return BatchRow(name, status=f"error:{exc}")
    row = BatchRow(name, n=len(inst.vertex_set), q=inst.capacity)
    t0 = time.perf_counter()
    try:
        rep = solve(inst)
    except (CertificateViolation, SolverInvariantError) as exc:
        row.status = f"certificate:{exc}"
        return row
    row.wall_ms = round(1000 * (time.perf_counter() - t0), 3)
    sol = rep.solution
    row.lb, row.cost, row.iterations = sol.lower_bound, sol.cost, rep.iterations
    row.ratio = sol.ratio_text
    row.ratio_decimal = f"{float(sol.ratio):.6f}" if sol.ratio is not None else ""
    row.margin = sol.margin
    if not verify_solution(inst, sol).ok or not sol.certified:
        row.status = "certificate"
    row.itp_cost = itp_baseline(inst).cost
    if with_oracle and inst.total_demand <= limit:
        opt = exact_solution(inst, limit).cost
        row.oracle_cost = str(opt)
        if not sol.lower_bound <= opt <= sol.cost:
            row.status = "certificate"
    return row


def _summary(rows: list[BatchRow]) -> str:
    good = [r for r in rows if r.status == "ok"]
    ratios = [Fraction(r.cost, r.lb) for r in good if r.lb]
    times = sorted(r.wall_ms for r in good)
    parts = [f"instances={len(rows)}", f"ok={len(good)}"]
    if ratios:
        worst = max(ratios)
        parts.append(f"max_ratio={worst.numerator}/{worst.denominator}")
        parts.append(f"mean_ratio={float(statistics.fmean(ratios)):.6f}")
    if times:
        q = statistics.quantiles(times, n=100) if len(times) > 1 else [times[0]] * 99
        parts.append(f"p50_ms={q[49]:.3f} p95_ms={q[94]:.3f} max_ms={times[-1]:.3f}")
    return "# " + " ".join(parts)


def cmd_batch(args) -> int:
    jobs = []
    if args.gen:
        explicit = args.n is not None
        for k in range(args.gen):
            seed = args.seed + k
            if explicit:
                src = _gen_params(args, seed)
            else:
                src = suite_params(seed, args.shape)
            jobs.append((f"gen:{seed}", src, args.with_oracle, args.limit))
    else:
        if not args.source:
            raise InstanceError("batch needs a directory of instances or --gen N")
        paths = sorted(Path(args.source).glob("*.json"))
        jobs = [(p.name, str(p), args.with_oracle, args.limit) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_batch_one, jobs, chunksize=8))
    else:
        rows = [_batch_one(j) for j in jobs]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow(asdict(r))
    finally:
        if args.out:
            fh.close()
    print(_summary(rows), file=sys.stderr)
    for r in rows:
        if r.status.startswith("error"):
            print(f"unreadable: {r.id}: {r.status[6:]}", file=sys.stderr)
    if any(r.status.startswith("certificate") for r in rows):
        return EXIT_CERT
    if any(r.status.startswith("error") for r in rows):
        return EXIT_INPUT
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_gen_flags(p: argparse.ArgumentParser, n_default) -> None:
    p.add_argument("--shape", choices=SHAPES, default="random-tree")
    p.add_argument("--n", type=int, default=n_default, help="vertex count including the depot")
    p.add_argument("--q", type=int, default=10, help="vehicle capacity")
    p.add_argument("--max-len", type=int, default=10, help="maximum edge length")
    p.add_argument("--max-demand", type=int, default=10, help="maximum client demand (<= 3q)")
    p.add_argument("--seed", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treecvrp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance document")
    p.add_argument("instance")
    p.add_argument("--out")
    p.add_argument("--trace", help="write per-tour-set JSON lines here")
    p.add_argument("--oplog", help="write applied operations as JSON lines here")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("verify", help="check a solution against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("lb", help="print the lower bound")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_lb)

    p = sub.add_parser("gen", help="generate a random instance")
    _add_gen_flags(p, 20)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    for name, fn, text in (
        ("oracle", cmd_oracle, "exact optimum over integral splits (small instances)"),
        ("baseline", cmd_baseline, "iterated tour partitioning baseline"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("instance")
        p.add_argument("--out")
        if name == "oracle":
            p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="granule limit")
        p.set_defaults(fn=fn)

    p = sub.add_parser(
        "batch",
        help="solve many instances and write a CSV report",
        epilog=BATCH_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("source", nargs="?", help="directory of *.json instances")
    p.add_argument("--gen", type=int, default=0, metavar="N", help="generate N instances instead")
    _add_gen_flags(p, None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--with-oracle", action="store_true")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="oracle granule limit")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_batch)
    return ap


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("TREECVRP_LOG")
    if level:
        logging.basicConfig(level=level.upper(), stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
