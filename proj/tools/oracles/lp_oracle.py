"""Freeze random LPs with objectives from scipy's HiGHS for the LP unit tests."""
import json
import numpy as np
from scipy.optimize import linprog

rng = np.random.default_rng(2024)
cases = []
while len(cases) < 120:
    n = int(rng.integers(2, 12))
    m = int(rng.integers(1, 10))
    A = np.round(rng.uniform(-4, 4, (m, n))) * (rng.uniform(size=(m, n)) < 0.6)
    x0 = rng.uniform(-2, 2, n)
    act = A @ x0
    senses = rng.integers(0, 3, m)  # 0 <=, 1 =, 2 >=
    b = np.where(senses == 0, act + rng.uniform(0, 1, m), np.where(senses == 2, act - rng.uniform(0, 1, m), act))
    b = np.round(b, 3)
    lo = np.where(rng.uniform(size=n) < 0.2, -np.inf, -3.0)
    hi = np.where(rng.uniform(size=n) < 0.2, np.inf, 3.0)
    c = np.round(rng.uniform(-2, 2, n), 3)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i in range(m):
        if senses[i] == 0:
            A_ub.append(A[i]); b_ub.append(b[i])
        elif senses[i] == 2:
            A_ub.append(-A[i]); b_ub.append(-b[i])
        else:
            A_eq.append(A[i]); b_eq.append(b[i])
    r = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                bounds=list(zip(lo, hi)), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(r.status)
    if status is None:
        continue
    cases.append({
        "cost": c.tolist(),
        "lower": [None if not np.isfinite(v) else v for v in lo],
        "upper": [None if not np.isfinite(v) else v for v in hi],
        "rows": [{"sense": int(senses[i]), "rhs": float(b[i]),
                  "coef": [[j, float(A[i, j])] for j in range(n) if A[i, j] != 0]} for i in range(m)],
        "status": status,
        "objective": float(r.fun) if status == "optimal" else None,
    })
print(json.dumps({"cases": cases}, indent=1))
