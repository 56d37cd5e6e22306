#!/usr/bin/env python3
"""Generate a batch of instances, solve each with CG-Greedy-DP and CG-NN-DP,
and print the paired comparison table (plus normalized convergence curves).

Without --weights the network is randomly initialized, which exercises the
certificate path: the final LP values still match the DP-only runs, only the
work split between NN and DP differs.

Example:
    python scripts/run_comparison.py --machines 2 --jobs 20 --count 5 --out /tmp/cmp
"""

import argparse
import csv
import json
from pathlib import Path

from cgsched import CgConfig, generate_uniform, generate_weibull, normalize_curve, run_cg
from cgsched.cli import _result_payload, build_report, format_report_text, report_csv_rows
from cgsched.driver import MODE_GREEDY_DP, MODE_NN_DP, write_log_csv
from cgsched.nn import ModelConfig, init_random_weights, load_weights


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--machines", type=int, default=2)
    parser.add_argument("--jobs", type=int, default=20)
    parser.add_argument("--count", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--init-cols", type=int, default=20)
    parser.add_argument("--dist", choices=["uniform", "weibull"], default="uniform")
    parser.add_argument("--weights", default=None, help="NNCG1 file; random init if omitted")
    parser.add_argument("--time-limit", type=float, default=None)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.weights:
        model_config, weights = load_weights(args.weights)
    else:
        model_config = ModelConfig()
        weights = init_random_weights(model_config, args.seed)

    generator = generate_uniform if args.dist == "uniform" else generate_weibull
    results = []
    curves = []
    for i in range(args.count):
        seed = args.seed + i
        name = f"{args.machines}M{args.jobs}N_{seed}_{args.init_cols}"
        instance = generator(args.machines, args.jobs, seed).renamed(name)
        for solver, mode in ((MODE_GREEDY_DP, {}), (MODE_NN_DP, {})):
            config = CgConfig(
                mode=solver,
                runs_per_machine=args.init_cols,
                seed=seed,
                time_limit=args.time_limit,
            )
            kwargs = (
                {"weights": weights, "model_config": model_config}
                if solver == MODE_NN_DP
                else {}
            )
            result = run_cg(instance, config, **kwargs)
            results.append(_result_payload(name, solver, result))
            write_log_csv(result, out / f"{name}__{solver}.csv")
            curves.append((name, solver, normalize_curve(result.iterations)))
            print(
                f"{name} {solver:>9}: lp={result.lp_objective:.1f} "
                f"iters={len(result.iterations)} cols={result.totals}"
            )

    for payload in results:
        path = out / f"{payload['instance']}__{payload['solver']}.json"
        path.write_text(json.dumps(payload, indent=1) + "\n")

    rows, averages = build_report(results)
    text = format_report_text(rows, averages)
    print()
    print(text)
    (out / "report.txt").write_text(text)
    with open(out / "report.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(report_csv_rows(rows, averages))
    with open(out / "curves.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "solver", "iteration", "normalized_obj"])
        for name, solver, curve in curves:
            for i, value in enumerate(curve, start=1):
                writer.writerow([name, solver, i, f"{value:.6f}"])
    print(f"wrote {out}/report.csv, report.txt, curves.csv")


if __name__ == "__main__":
    main()
