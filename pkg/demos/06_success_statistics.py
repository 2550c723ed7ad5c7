"""
Success rates, subsets and a paired t-test
==========================================

Two made-up result tables for the same cases: one method is better on a
subset that the audit would flag as near-neighbors.
"""

from pathlib import Path

import numpy as np

from dockaudit.evalstats import (
    ResultRow, ResultTable, cumulative_curve, curves_svg, paired_t_test, subset_stats, success_rate,
)

rng = np.random.default_rng(6)
ids = [f"c{k:03d}" for k in range(120)]
near = set(ids[:80])


def make(method, near_scale, hard_scale):
    rows = []
    for cid in ids:
        top1 = rng.gamma(1.5, near_scale if cid in near else hard_scale)
        rows.append(ResultRow(cid, method, min(top1, 20.0), min(top1, 20.0) * rng.uniform(0.4, 1.0)))
    return ResultTable(tuple(rows), method)


a, b = make("memorizer", 0.8, 4.0), make("physics", 2.0, 2.0)
classes = {cid: ("near_neighbor" if cid in near else "hard") for cid in ids}

for tab in (a, b):
    sub = subset_stats(tab, classes)
    print(f"{tab.method:10s} overall {100 * success_rate(tab):5.1f}%  "
          f"near {sub.percent('near_neighbor', 'top1', 2.0):5.1f}%  hard {sub.percent('hard', 'top1', 2.0):5.1f}%")

res = paired_t_test(a.values("top1"), b.values("top1"))
print("paired t = %.3f, p = %.4g (n = %d)" % (res.t, res.p, res.n))

# %%
out = Path("demo_curves.svg")
out.write_text(curves_svg([cumulative_curve(t, name=t.method) for t in (a, b)], "Top-1"))
print("wrote", out)
