"""Command line entry point: ``gsasched {gen,schedule,bench,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import bench, oracle
from .metrics import evaluate
from .workgen import GenSpec, generate_workload, read_workload, workload_to_dict, write_workload


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException) -> None:
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _csv(kind):
    def parse(text: str):
        return [kind(x) for x in text.split(",") if x.strip()]

    return parse


def _range(text: str) -> tuple[float, float]:
    lo, hi = text.split(",")
    return float(lo), float(hi)


def _kv(text: str) -> tuple[str, Any]:
    """Parse ``key=value``; the value is read as JSON when possible."""
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--config", type=Path, default=None, help="JSON experiment config")
    common.add_argument("--out", default=None, help="output file (gen) or directory (bench)")
    common.add_argument("--desk", action="store_true", help="use the small desk-scale preset")
    common.add_argument("--algorithms", type=_csv(str), default=None, help="comma separated list")
    common.add_argument("-v", "--log-level", default="WARNING")

    parser = argparse.ArgumentParser(prog="gsasched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="generate a workload file")
    gen.add_argument("--tasks", type=int, required=True)
    gen.add_argument("--vms", type=int, required=True)
    gen.add_argument("--time-req-range", type=_range, default=(1.0, 100.0))
    gen.add_argument("--resource-req-range", type=_range, default=(1.0, 16.0))
    gen.add_argument("--capacity-range", type=_range, default=(16.0, 64.0))
    gen.add_argument("--speed-range", type=_range, default=(1.0, 1.0))

    sched = sub.add_parser("schedule", parents=[common], help="schedule one workload file")
    sched.add_argument("workload", type=Path)
    sched.add_argument("--algorithm", default="gsa", choices=bench.ALGORITHMS)
    sched.add_argument("--olb-random", action="store_true")
    sched.add_argument("--gsa", type=_kv, action="append", default=[], metavar="KEY=VALUE")
    sched.add_argument("--pso", type=_kv, action="append", default=[], metavar="KEY=VALUE")
    sched.add_argument("--fitness", type=_kv, action="append", default=[], metavar="KEY=VALUE")

    b = sub.add_parser("bench", parents=[common], help="run an experiment sweep")
    b.add_argument("--task-counts", type=_csv(int), default=None)
    b.add_argument("--vm-counts", type=_csv(int), default=None)
    b.add_argument("--mode", choices=bench.MODES, default=None)
    b.add_argument("--seeds", type=_csv(int), default=None)
    b.add_argument("--fixed-vms", type=int, default=None)
    b.add_argument("--fixed-tasks", type=int, default=None)
    b.add_argument("--olb-random", action=argparse.BooleanOptionalAction, default=None)
    b.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None)
    b.add_argument("--verbose", action="store_true", default=None)
    b.add_argument("--workers", type=int, default=None)
    for block in ("gen", "gsa", "pso", "fitness"):
        b.add_argument(f"--{block}", type=_kv, action="append", default=[], metavar="KEY=VALUE")

    orc = sub.add_parser("oracle", parents=[common], help="exact optimum of a tiny workload")
    orc.add_argument("workload", type=Path)
    orc.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    orc.add_argument("--fitness", type=_kv, action="append", default=[], metavar="KEY=VALUE")
    return parser


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc


def cmd_gen(args: argparse.Namespace) -> int:
    spec = _stage(
        "gen spec",
        GenSpec,
        num_tasks=args.tasks,
        num_vms=args.vms,
        time_req_range=args.time_req_range,
        resource_req_range=args.resource_req_range,
        capacity_range=args.capacity_range,
        speed_range=args.speed_range,
        seed=args.seed or 0,
    )
    workload = _stage("generate", generate_workload, spec)
    if args.out is None:
        json.dump(workload_to_dict(workload), sys.stdout, indent=1)
        sys.stdout.write("\n")
    else:
        _stage("write workload", write_workload, workload, args.out)
    return 0


def cmd_schedule(args: argparse.Namespace) -> int:
    workload = _stage("read workload", read_workload, args.workload)
    seed = args.seed or 0
    config = _stage(
        "parameters",
        bench.ExperimentConfig,
        algorithms=(args.algorithm,),
        gsa=dict(args.gsa),
        pso=dict(args.pso),
        fitness=dict(args.fitness),
        olb_random=args.olb_random,
    )
    a, fparams = _stage(args.algorithm, bench.run_algorithm, args.algorithm, workload, config, seed)
    m = evaluate(workload, a, fparams)
    doc = {
        "algorithm": args.algorithm,
        "assignment": [int(x) for x in a],
        "makespan": m.makespan,
        "util_sum": m.util_sum,
        "avg_time_util": m.avg_time_util,
        "fitness": m.fitness,
    }
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


def bench_config(args: argparse.Namespace) -> bench.ExperimentConfig:
    base = (bench.desk_preset() if args.desk else bench.ExperimentConfig()).to_dict()
    if args.config is not None:
        # the file overrides the preset field by field; flags override both
        base.update(json.loads(args.config.read_text(encoding="utf-8")))

    flat = {
        "task_counts": args.task_counts,
        "vm_counts": args.vm_counts,
        "mode": args.mode,
        "fixed_vms": args.fixed_vms,
        "fixed_tasks": args.fixed_tasks,
        "olb_random": args.olb_random,
        "timing": args.timing,
        "verbose": args.verbose,
        "workers": args.workers,
        "algorithms": args.algorithms,
        "out": args.out,
    }
    base.update({k: v for k, v in flat.items() if v is not None})
    if args.seeds is not None:
        base["seeds"] = args.seeds
    elif args.seed is not None:
        base["seeds"] = [args.seed]
    for block in ("gen", "gsa", "pso", "fitness"):
        base[block] = {**base.get(block, {}), **dict(getattr(args, block))}
    return bench.ExperimentConfig.from_dict(base)


def cmd_bench(args: argparse.Namespace) -> int:
    config = _stage("config", bench_config, args)
    rows = _stage("run", bench.run_experiment, config)
    summary = _stage("summarize", bench.summarize, rows)
    written = _stage("write outputs", bench.emit_outputs, rows, summary, config.out, config)
    for g in summary.gains:
        print(
            f"gsa vs {g.baseline:<10} makespan gain {g.makespan_gain_pct:7.2f}%   "
            f"utilisation gain {g.util_gain_pct:7.2f}%"
        )
    print(f"wrote {len(rows)} rows to {written['results.csv']}")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    workload = _stage("read workload", read_workload, args.workload)
    config = _stage("parameters", bench.ExperimentConfig, fitness=dict(args.fitness))
    fparams = bench.FitnessOverrides(**config.fitness).resolve(workload)
    res = _stage("oracle", oracle.brute_force_optimum, workload, fparams, budget=args.budget)
    doc = {
        "assignment": [int(x) for x in res.best_assignment],
        "fitness": res.best_fitness,
        "makespan": res.best_makespan,
        "enumerated": res.enumerated_count,
    }
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


COMMANDS = {"gen": cmd_gen, "schedule": cmd_schedule, "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"gsasched {args.command} failed at stage {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
