"""A small Monte Carlo study of size and power.

Size is the rejection rate when the null holds, power the rate when it
does not. Rates are reported with their binomial standard errors. Pass a
larger ``RUNS`` for tighter estimates.
"""
import sys

import numpy as np

from fasthsic import Sim2AltSpec, Sim2NullSpec, Sim3Spec, run_study

RUNS = int(sys.argv[1]) if len(sys.argv) > 1 else 300


def show(report):
    for rec in report.records:
        r = rec.empirical_rate
        se = np.sqrt(r * (1 - r) / rec.runs)
        params = {k: v for k, v in rec.scenario.items() if k != "design"}
        print(f"  {rec.scenario['design']:9} {rec.method:6} {100 * r:6.2f}% +/- {100 * se:4.2f}  {params}")
    if report.are is not None:
        print("  average relative error of sizes:",
              {m: round(v, 1) for m, v in report.are.items()})


print(f"size, {RUNS} runs per scenario, nominal 5%")
nulls = [Sim2NullSpec(50, 100, 0.5, model) for model in ("normal", "t4_scaled", "chisq1_scaled")]
show(run_study(nulls, ["new", "gamma"], runs=RUNS, master_seed=7))

print(f"\npower against y = delta (x + x^2) + noise, {RUNS} runs")
alts = [Sim2AltSpec(50, 10, 0.5, d) for d in (0.2, 0.4, 0.6)]
show(run_study(alts, ["new", "gamma"], runs=RUNS, master_seed=7))

print(f"\nfunctional data, y scores = x scores squared on the first m modes, {RUNS} runs")
show(run_study([Sim3Spec("square", m, 50, 101) for m in (0, 5, 15)], "new",
               runs=RUNS, master_seed=7))
