"""Freeze scipy correlation results for the C++ statistics tests.

Run from the repository root:  python3 tests/scripts/make_correlation_reference.py
"""
import json

import numpy as np
from scipy import stats

rng = np.random.default_rng(20170825)
cases = []
for i in range(20):
    n = int(rng.integers(3, 201))
    x = rng.normal(size=n)
    y = 0.6 * x + rng.normal(size=n) * rng.uniform(0.2, 2.0)
    if i % 3 == 1:  # heavy ties on both sides
        x = np.round(x * 2) / 2
        y = np.round(y * 2) / 2
    elif i % 3 == 2:  # log-scale values like place surfaces/counts
        x = 10 ** rng.uniform(-2, 6, size=n)
        y = np.round(10 ** (0.4 * np.log10(x) + rng.normal(size=n))) + 1
    if np.all(x == x[0]) or np.all(y == y[0]):
        y = y + np.arange(n)
    r, pr = stats.pearsonr(x, y)
    tau, ptau = stats.kendalltau(x, y, variant="b", method="asymptotic")
    cases.append({
        "x": x.tolist(),
        "y": y.tolist(),
        "pearson_r": float(r),
        "pearson_p": float(pr),
        "kendall_tau": float(tau),
        "kendall_p": float(ptau),
    })

t_points = []
for t, df in [(0.5, 3), (1.7, 10), (2.3, 41), (-3.1, 7), (0.01, 198), (6.0, 50)]:
    t_points.append({"t": t, "df": df, "p": float(2 * stats.t.sf(abs(t), df))})

beta_points = []
for a, b, x in [(0.5, 0.5, 0.3), (2.0, 3.0, 0.4), (10.0, 0.5, 0.9), (25.0, 0.5, 0.99), (1.5, 7.0, 0.05)]:
    beta_points.append({"a": a, "b": b, "x": x, "value": float(stats.beta.cdf(x, a, b))})

with open("tests/data/correlation_reference.json", "w") as f:
    json.dump({"cases": cases, "student_t": t_points, "incomplete_beta": beta_points}, f)
    f.write("\n")
