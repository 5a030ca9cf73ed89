#!/usr/bin/env python3
"""Regenerates reference.json with scipy, statsmodels and mpmath.

Run from this directory:  python3 generate.py
"""
import json

import mpmath
import numpy as np
import statsmodels.api as sm
from scipy import stats
from statsmodels.stats.outliers_influence import variance_inflation_factor

rng = np.random.default_rng(20240611)
mpmath.mp.dps = 40
out = {}

beta = []
for a, b, x in [(0.5, 0.5, 0.2), (1, 1, 0.3), (2, 3, 0.4), (5, 2, 0.9), (10, 10, 0.5),
                (0.1, 3, 0.05), (3, 0.1, 0.95), (50, 60, 0.45), (100, 5, 0.97),
                (0.7, 1.3, 0.001), (2.5, 2.5, 0.999), (7, 0.5, 0.3), (1.5, 30, 0.02),
                (200, 200, 0.51), (0.01, 0.01, 0.5), (4, 9, 0.0), (4, 9, 1.0),
                (12.5, 0.5, 0.75), (0.5, 12.5, 0.25), (30, 1, 0.99)]:
    v = mpmath.betainc(a, b, 0, x, regularized=True)
    beta.append({"a": a, "b": b, "x": x, "value": float(v)})
out["incomplete_beta"] = beta

tq = []
for p, df in [(0.975, 1), (0.975, 5), (0.975, 30), (0.995, 12.5), (0.9, 3), (0.5, 7),
              (0.025, 8), (0.999, 100)]:
    tq.append({"p": p, "df": df, "value": float(stats.t.ppf(p, df))})
out["t_quantile"] = tq


def ttest_case(kind, x, y):
    if kind == "paired":
        r = stats.ttest_rel(x, y)
        diff = float(np.mean(np.asarray(x) - np.asarray(y)))
    else:
        r = stats.ttest_ind(x, y, equal_var=False)
        diff = float(np.mean(x) - np.mean(y))
    ci = r.confidence_interval(0.95)
    return {"kind": kind, "x": list(map(float, x)), "y": list(map(float, y)),
            "mean_diff": diff, "t": float(r.statistic), "df": float(r.df),
            "p": float(r.pvalue), "ci_low": float(ci.low), "ci_high": float(ci.high)}


tt = []
for n, shift in [(8, 0.3), (25, 0.05), (60, -0.4), (12, 1.5)]:
    x = rng.normal(0.2, 1.0, n)
    y = x * 0.5 + rng.normal(0.0, 0.8, n) - shift
    tt.append(ttest_case("paired", x, y))
for nx, ny, sx, sy in [(10, 14, 1.0, 2.0), (40, 25, 0.3, 0.9), (7, 7, 1.0, 1.0), (100, 60, 2.0, 0.5)]:
    x = rng.normal(0.5, sx, nx)
    y = rng.normal(0.0, sy, ny)
    tt.append(ttest_case("welch", x, y))
out["t_tests"] = tt


def ols_case(X, y, names):
    m = sm.OLS(y, X).fit()
    return {"X": X.tolist(), "y": y.tolist(), "names": names,
            "params": m.params.tolist(), "bse": m.bse.tolist(), "tvalues": m.tvalues.tolist(),
            "pvalues": m.pvalues.tolist(), "rsquared": float(m.rsquared),
            "rsquared_adj": float(m.rsquared_adj), "sigma": float(np.sqrt(m.scale))}


ols = []
n = 50
Z = rng.normal(size=(n, 3))
y = 1.0 + Z @ np.array([0.5, -1.2, 0.0]) + rng.normal(0, 0.7, n)
ols.append(ols_case(sm.add_constant(Z), y, ["(Intercept)", "x1", "x2", "x3"]))
# no intercept: three group indicators plus a covariate
g = rng.integers(0, 3, 80)
D = np.stack([(g == k).astype(float) for k in range(3)], axis=1)
c = rng.normal(size=80)
X = np.column_stack([D, c])
y = D @ np.array([0.1, 0.3, -0.2]) + 0.05 * c + rng.normal(0, 0.1, 80)
ols.append(ols_case(X, y, ["g0", "g1", "g2", "c"]))
# small, nearly collinear
n = 15
a = rng.normal(size=n)
b = a + rng.normal(0, 0.05, n)
y = 2 * a - b + rng.normal(0, 0.3, n)
ols.append(ols_case(sm.add_constant(np.column_stack([a, b])), y, ["(Intercept)", "a", "b"]))
out["ols"] = ols


def logit_case(X, y, names):
    m = sm.Logit(y, X).fit(disp=0, method="newton", tol=1e-12, maxiter=100)
    return {"X": X.tolist(), "y": y.tolist(), "names": names,
            "params": m.params.tolist(), "bse": m.bse.tolist(), "zvalues": m.tvalues.tolist(),
            "pvalues": m.pvalues.tolist(), "llf": float(m.llf), "llnull": float(m.llnull)}


logit = []
for n, beta_true in [(200, [0.3, 1.0, -0.5]), (1000, [-1.0, 0.4, 0.8, 0.0]), (60, [0.0, 1.5])]:
    k = len(beta_true) - 1
    Z = rng.normal(size=(n, k))
    X = sm.add_constant(Z)
    p = 1 / (1 + np.exp(-(X @ np.array(beta_true))))
    y = (rng.uniform(size=n) < p).astype(float)
    logit.append(logit_case(X, y, ["(Intercept)"] + [f"x{i + 1}" for i in range(k)]))
out["logistic"] = logit

vifs = []
n = 120
a = rng.normal(size=n)
b = 0.6 * a + rng.normal(0, 0.8, n)
c = rng.normal(size=n)
d = a - 0.5 * c + rng.normal(0, 0.5, n)
Z = np.column_stack([a, b, c, d])
Xc = sm.add_constant(Z)
vifs.append({"X": Z.tolist(), "names": ["a", "b", "c", "d"],
             "vif": [float(variance_inflation_factor(Xc, j)) for j in range(1, 5)]})
out["vif"] = vifs

with open("reference.json", "w") as f:
    json.dump(out, f, indent=1)
