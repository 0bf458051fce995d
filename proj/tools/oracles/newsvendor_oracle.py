"""Freeze brute-force pre-commitment values from an LP-based risk evaluation.

Lower-tail means come from scipy's HiGHS (min sum nu Z / b, 0 <= nu <= P,
sum nu = b), independent of the C++ sort-and-split code.  Writes
tests/data/newsvendor_oracle.json.
"""
import json
import pathlib
import random

import numpy as np
from scipy.optimize import linprog


def lower_tail_mean(z, p, b):
    res = linprog(z / b, A_eq=np.ones((1, len(z))), b_eq=[b], bounds=list(zip([0.0] * len(z), p)), method="highs")
    assert res.status == 0
    return res.fun


def rho(z, p, kappa, spectrum):
    z = np.asarray(z, float)
    p = np.asarray(p, float)
    mean = float(p @ z)
    q = sum(w * b * (mean - lower_tail_mean(z, p, b)) for b, w in spectrum)
    return -mean + kappa * q


def disutility(x, support, probs, ru, rv, kappa, spectrum, mode):
    m = ru + rv
    prof = []
    for X in support:
        dev = ru * max(0.0, X - x) + rv * max(0.0, x - X)
        prof.append(m * X - dev if mode == "no_trading" else -(m * X + dev))
    return rho(prof, probs, kappa, spectrum)


def quantile(mode, ru, rv, kappa, bbar):
    k = kappa * (1 - bbar)
    if mode == "no_trading":
        return ru / ((ru + rv) * (1 + k))
    return (ru + (ru + rv) * k) / ((ru + rv) * (1 + k))


def pinv(support, probs, q):
    f = 0.0
    for s, pr in zip(support, probs):
        f += pr
        if f >= q - 1e-12:
            return s
    return support[-1]


def case(support, probs, ru, rv, kappa, spectrum, mode):
    cands = []
    for k, s in enumerate(support):
        cands.append(s)
        if k + 1 < len(support):
            cands.append(0.5 * (s + support[k + 1]))
    vals = [disutility(x, support, probs, ru, rv, kappa, spectrum, mode) for x in cands]
    best = min(vals)
    arg = [x for x, v in zip(cands, vals) if v <= best + 1e-9 * (1 + abs(best))]
    bbar = sum(b * w for b, w in spectrum)
    xq = pinv(support, probs, quantile(mode, ru, rv, kappa, bbar))
    vq = disutility(xq, support, probs, ru, rv, kappa, spectrum, mode)
    return {
        "support": support, "probs": probs, "r_u": ru, "r_v": rv, "kappa": kappa,
        "spectrum": [[b, w] for b, w in spectrum], "mode": mode,
        "candidates": cands, "values": vals, "value": best, "argmin": arg,
        "closed_form_x": xq, "closed_form_agrees": vq <= best + 1e-9 * (1 + abs(best)),
    }


def main():
    rng = random.Random(2024)
    cases = []
    m1 = ([10.0, 20.0, 30.0, 40.0, 50.0], [0.2] * 5)
    for mode in ("no_trading", "with_trading"):
        cases.append(case(*m1, 3.0, 1.0, 0.0, [(1.0, 1.0)], mode))
        cases.append(case(*m1, 3.0, 1.0, 1.0, [(0.5, 1.0)], mode))
    for _ in range(40):
        n = rng.randint(3, 12)
        support = sorted(rng.sample(range(0, 200), n))
        raw = [rng.random() + 0.05 for _ in range(n)]
        probs = [r / sum(raw) for r in raw]
        ru = round(rng.uniform(0.5, 100), 3)
        rv = round(rng.uniform(0.5, 100), 3)
        if rng.random() < 0.5:
            spectrum = [(rng.choice([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]), 1.0)]
        else:
            b1, b2 = sorted(rng.sample([0.1, 0.3, 0.5, 0.7, 0.9], 2))
            w = round(rng.uniform(0.2, 0.8), 3)
            spectrum = [(b1, w), (b2, 1 - w)]
        bbar = sum(b * w for b, w in spectrum)
        kappa = round(rng.uniform(0, 1 / bbar), 4)
        mode = rng.choice(["no_trading", "with_trading"])
        cases.append(case([float(s) for s in support], probs, ru, rv, kappa, spectrum, mode))
    out = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data" / "newsvendor_oracle.json"
    out.write_text(json.dumps({"cases": cases}, indent=1))
    print(f"{len(cases)} cases, closed form agrees in {sum(c['closed_form_agrees'] for c in cases)}")


if __name__ == "__main__":
    main()
