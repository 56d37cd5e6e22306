"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 time limit
reached (partial results were written), 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import driver
from .errors import CgschedError, InvariantViolation, MalformedNameError
from .instance import (
    INSTANCE_SUFFIX,
    generate_uniform,
    generate_weibull,
    parse_instance_name,
    read_instance,
    write_instance,
)
from .nn.config import ModelConfig, count_parameters
from .nn.weights_io import init_random_weights, load_weights, save_weights

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_TIME_LIMIT = 3
EXIT_INVARIANT = 4

SOLVERS_HELP = "greedy-dp, nn-dp, or dp-<K> (e.g. dp-5, dp-20)"


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit()


def _worker_count() -> int:
    env = os.environ.get("CGSCHED_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def cmd_gen(args) -> int:
    if args.jobs < 1 or args.machines < 1 or args.count < 1:
        print("gen: --machines, --jobs, and --count must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"gen: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    generator = generate_uniform if args.dist == "uniform" else generate_weibull
    for i in range(args.count):
        seed = args.seed + i
        instance = generator(args.machines, args.jobs, seed)
        name = f"{args.machines}M{args.jobs}N_{seed}_{args.init_cols}"
        instance = instance.renamed(name)
        try:
            write_instance(instance, out / f"{name}{INSTANCE_SUFFIX}")
        except OSError as exc:
            print(f"gen: cannot write {name}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(out / f"{name}{INSTANCE_SUFFIX}")
    return EXIT_OK


def _result_payload(instance_name: str, solver: str, result: driver.CgResult) -> dict:
    return {
        "instance": instance_name,
        "solver": solver,
        "lp_obj": result.lp_objective if math.isfinite(result.lp_objective) else None,
        "int_obj": result.integer_objective,
        "totals": {k: result.totals[k] for k in ("total", "nn", "dp")},
        "terminated_by": result.terminated_by,
        "wall_ms": result.wall_ms,
        "iterations": len(result.iterations),
    }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _solve_one(instance, args, out: Path) -> tuple[driver.CgResult, Path]:
    init_cols = args.init_cols
    if init_cols is None:
        try:
            init_cols = parse_instance_name(instance.name)[3]
        except MalformedNameError:
            init_cols = 20
    config = driver.CgConfig.from_solver_string(
        args.solver,
        epsilon=1e-6,
        time_limit=args.time_limit,
        runs_per_machine=init_cols,
        seed=args.seed,
        finalize=args.finalize,
    )
    weights = model_config = None
    if config.mode == driver.MODE_NN_DP:
        model_config, weights = load_weights(args.weights)
    result = driver.run_cg(instance, config, weights=weights, model_config=model_config)
    stem = f"{instance.name}__{args.solver}"
    csv_tmp = out / f"{stem}.csv.tmp"
    driver.write_log_csv(result, csv_tmp)
    os.replace(csv_tmp, out / f"{stem}.csv")
    _atomic_write(
        out / f"{stem}.json",
        json.dumps(_result_payload(instance.name, args.solver, result), indent=1) + "\n",
    )
    return result, out / f"{stem}.json"


def cmd_solve(args) -> int:
    if args.solver == driver.MODE_NN_DP and not args.weights:
        print("solve: nn-dp requires --weights", file=sys.stderr)
        return EXIT_USAGE
    try:
        driver.CgConfig.from_solver_string(args.solver)
    except ValueError:
        print(f"solve: unknown solver {args.solver!r}; expected {SOLVERS_HELP}", file=sys.stderr)
        return EXIT_USAGE
    if bool(args.instance) == bool(args.batch):
        print("solve: exactly one of --instance or --batch is required", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [args.instance] if args.instance else sorted(glob.glob(args.batch))
    if not paths:
        print(f"solve: no instances match {args.batch!r}", file=sys.stderr)
        return EXIT_INPUT
    try:
        instances = [read_instance(p) for p in paths]
    except (OSError, CgschedError) as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return EXIT_INPUT
    with ThreadPoolExecutor(max_workers=_worker_count() if args.batch else 1) as pool:
        results = list(pool.map(lambda inst: _solve_one(inst, args, out), instances))
    timed_out = False
    for result, path in results:
        print(path)
        timed_out |= result.terminated_by == driver.TERMINATED_TIME_LIMIT
    return EXIT_TIME_LIMIT if timed_out else EXIT_OK


def cmd_dataset(args) -> int:
    paths = sorted(glob.glob(args.instances))
    if not paths:
        print(f"dataset: no instances match {args.instances!r}", file=sys.stderr)
        return EXIT_INPUT
    try:
        instances = [read_instance(p) for p in paths]
    except (OSError, CgschedError) as exc:
        print(f"dataset: {exc}", file=sys.stderr)
        return EXIT_INPUT

    def run(instance):
        config = driver.CgConfig(
            mode=driver.MODE_GREEDY_DP,
            runs_per_machine=args.init_cols or 20,
            seed=args.seed,
            collect_dataset=True,
            time_limit=args.time_limit,
        )
        return driver.run_cg(instance, config)

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        results = list(pool.map(run, instances))
    count = 0
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "a", encoding="utf-8") as fh:
        for result in results:  # instance order, not completion order
            count += driver.emit_dataset(result, fh)
    print(count)
    return EXIT_OK


def time_reduction_pct(t_dp: float, t_nn: float) -> float:
    """Percent reduction of the nn-dp time relative to the greedy-dp time."""
    if t_dp <= 0:
        return 0.0
    return (t_dp - t_nn) / t_dp * 100.0


def _class_of(instance_name: str) -> str:
    try:
        m, n, _, _ = parse_instance_name(instance_name)
        return f"{m}M{n}N"
    except MalformedNameError:
        return instance_name.split("_")[0]


def build_report(results: list[dict]) -> tuple[list[dict], list[dict]]:
    """Pair greedy-dp and nn-dp results per instance; per-class average rows."""
    by_instance: dict[str, dict[str, dict]] = {}
    for res in results:
        by_instance.setdefault(res["instance"], {})[res["solver"]] = res
    rows = []
    for name in sorted(by_instance):
        pair = by_instance[name]
        if driver.MODE_GREEDY_DP not in pair or driver.MODE_NN_DP not in pair:
            raise CgschedError(f"instance {name} lacks a greedy-dp/nn-dp result pair")
        dp, nn = pair[driver.MODE_GREEDY_DP], pair[driver.MODE_NN_DP]
        t_dp = dp["wall_ms"] / 1000.0
        t_nn = nn["wall_ms"] / 1000.0
        rows.append(
            {
                "instance": name,
                "class": _class_of(name),
                "t_dp_s": t_dp,
                "t_nn_s": t_nn,
                "reduction_pct": time_reduction_pct(t_dp, t_nn),
                "cols_dp_total": dp["totals"]["total"],
                "cols_nn_total": nn["totals"]["total"],
                "cols_nn_nn": nn["totals"]["nn"],
                "cols_nn_dp": nn["totals"]["dp"],
            }
        )
    averages = []
    for cls in sorted({row["class"] for row in rows}):
        group = [row for row in rows if row["class"] == cls]
        averages.append(
            {
                "class": cls,
                "count": len(group),
                **{
                    key: sum(row[key] for row in group) / len(group)
                    for key in (
                        "t_dp_s",
                        "t_nn_s",
                        "reduction_pct",
                        "cols_dp_total",
                        "cols_nn_total",
                        "cols_nn_nn",
                        "cols_nn_dp",
                    )
                },
            }
        )
    return rows, averages


def format_report_text(rows: list[dict], averages: list[dict]) -> str:
    header = (
        f"{'Instance':<18} {'DP (s)':>8} {'NN-DP (s)':>10} {'Reduction':>10} "
        f"{'DP cols':>8} {'Total':>7} {'NN':>6} {'DP':>6}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        lines.append(
            f"{row['instance']:<18} {row['t_dp_s']:>8.1f} {row['t_nn_s']:>10.1f} "
            f"{row['reduction_pct']:>9.0f}% {row['cols_dp_total']:>8.0f} "
            f"{row['cols_nn_total']:>7.0f} {row['cols_nn_nn']:>6.0f} {row['cols_nn_dp']:>6.0f}"
        )
    for avg in averages:
        lines.append("-" * len(header))
        lines.append(
            f"{'Average ' + avg['class']:<18} {avg['t_dp_s']:>8.1f} {avg['t_nn_s']:>10.1f} "
            f"{avg['reduction_pct']:>9.1f}% {avg['cols_dp_total']:>8.1f} "
            f"{avg['cols_nn_total']:>7.1f} {avg['cols_nn_nn']:>6.1f} {avg['cols_nn_dp']:>6.1f}"
        )
    return "\n".join(lines) + "\n"


def report_csv_rows(rows: list[dict], averages: list[dict]) -> list[list]:
    out = [
        [
            "instance",
            "class",
            "t_dp_s",
            "t_nn_s",
            "reduction_pct",
            "cols_dp_total",
            "cols_nn_total",
            "cols_nn_nn",
            "cols_nn_dp",
        ]
    ]
    for row in rows:
        out.append([row[key] for key in out[0]])
    for avg in averages:
        out.append(
            [
                f"AVERAGE_{avg['class']}",
                avg["class"],
                avg["t_dp_s"],
                avg["t_nn_s"],
                avg["reduction_pct"],
                avg["cols_dp_total"],
                avg["cols_nn_total"],
                avg["cols_nn_nn"],
                avg["cols_nn_dp"],
            ]
        )
    return out


def cmd_report(args) -> int:
    results_dir = Path(args.results)
    files = sorted(results_dir.glob("*.json"))
    if not files:
        print(f"report: no result JSONs in {results_dir}", file=sys.stderr)
        return EXIT_INPUT
    results = []
    for path in files:
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(f"report: {path}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        if {"instance", "solver", "wall_ms", "totals"} <= doc.keys():
            results.append(doc)
    try:
        rows, averages = build_report(results)
    except CgschedError as exc:
        print(f"report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = format_report_text(rows, averages)
    sys.stdout.write(text)
    out_dir = Path(args.out) if args.out else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(report_csv_rows(rows, averages))
    (out_dir / "report.txt").write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_weights(args) -> int:
    if args.weights_cmd == "init":
        try:
            config = ModelConfig(
                d=args.d, h=args.heads, n_enc=args.enc_layers, n_dec=args.dec_layers
            )
        except ValueError as exc:
            print(f"weights init: {exc}", file=sys.stderr)
            return EXIT_USAGE
        save_weights(args.out, config, init_random_weights(config, args.seed))
        print(args.out)
        return EXIT_OK
    try:
        config, weights = load_weights(args.file)
    except (OSError, CgschedError) as exc:
        print(f"weights: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(
        f"config: d={config.d} h={config.h} n_enc={config.n_enc} "
        f"n_dec={config.n_dec} input_dim={config.input_dim} ln_epsilon={config.ln_epsilon}"
    )
    print(f"divisors: {list(config.feature_divisors)}")
    for name, tensor in weights.tensors.items():
        print(f"  {name:<16} {list(tensor.shape)}")
    print(f"total parameters: {count_parameters(config)}")
    print("crc: ok")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="cgsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate random instances")
    gen.add_argument("--machines", type=int, required=True)
    gen.add_argument("--jobs", type=int, required=True)
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--dist", choices=["uniform", "weibull"], default="uniform")
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--init-cols", type=int, default=20, help="encoded in the instance name")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="run column generation")
    solve.add_argument("--instance", help="one instance file")
    solve.add_argument("--batch", help="glob of instance files, solved in parallel")
    solve.add_argument("--solver", required=True, help=SOLVERS_HELP)
    solve.add_argument("--weights", help="NNCG1 file (required for nn-dp)")
    solve.add_argument("--time-limit", type=float, default=None)
    solve.add_argument("--init-cols", type=int, default=None,
                       help="initial columns per machine (default: from instance name)")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--finalize", action="store_true",
                       help="solve the pool to integrality after the certificate")
    solve.add_argument("--out", required=True)
    solve.set_defaults(func=cmd_solve)

    dataset = sub.add_parser("dataset", help="emit pricing records from greedy-dp runs")
    dataset.add_argument("--instances", required=True, help="glob of instance files")
    dataset.add_argument("--out", required=True, help="JSONL output (appended)")
    dataset.add_argument("--seed", type=int, default=0)
    dataset.add_argument("--init-cols", type=int, default=None)
    dataset.add_argument("--time-limit", type=float, default=None)
    dataset.set_defaults(func=cmd_dataset)

    report = sub.add_parser("report", help="tabulate paired greedy-dp vs nn-dp results")
    report.add_argument("--results", required=True)
    report.add_argument("--out", default=None)
    report.set_defaults(func=cmd_report)

    weights = sub.add_parser("weights", help="inspect or initialize weight files")
    wsub = weights.add_subparsers(dest="weights_cmd", required=True)
    inspect = wsub.add_parser("inspect", help="dump header, shapes, and verify CRC")
    inspect.add_argument("file")
    init = wsub.add_parser("init", help="write randomly initialized weights")
    init.add_argument("--out", required=True)
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--d", type=int, default=64)
    init.add_argument("--heads", type=int, default=8)
    init.add_argument("--enc-layers", type=int, default=2)
    init.add_argument("--dec-layers", type=int, default=2)
    weights.set_defaults(func=cmd_weights)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return EXIT_USAGE
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"cgsched: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CgschedError as exc:
        print(f"cgsched: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
