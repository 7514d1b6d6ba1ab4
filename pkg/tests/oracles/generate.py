"""Regenerate ``values.json``: reference values computed with scipy only.

Nothing here imports levylab, so these numbers are independent of the code
under test.  Run from the repository root:

    python3 tests/oracles/generate.py
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from scipy import integrate, special

OUT = Path(__file__).with_name("values.json")


def quad(fn, a, b, **kw):
    val, _ = integrate.quad(fn, a, b, limit=500, epsabs=1e-14, epsrel=1e-12, **kw)
    return val


def quad_split(fn, lo, hi, points=(1e-12, 1e-9, 1e-6, 1e-3, 1.0)):
    """Integrate across decades so singular ends are resolved."""
    edges = [lo] + [p for p in points if lo < p < hi] + [hi]
    return sum(quad(fn, a, b) for a, b in zip(edges, edges[1:]))


DENSITY = {
    "gamma": lambda s, a: math.exp(-s) / s,
    "stable-sub": lambda s, a: a / special.gamma(1 - a) * s ** (-1 - a),
    "tss": lambda s, a: math.exp(-s) * s ** (-1 - a) / special.gamma(1 - a),
    "stable": lambda s, a: s ** (-1 - a),
    "ts": lambda s, a: math.exp(-s) * s ** (-1 - a),
    "mts": lambda s, a: special.kv(a + 0.5, s) / s ** (a + 0.5) / math.pi,
    "nig": lambda s, a: special.kv(1.0, s) / (math.pi * s),
}


def laplace_quad(kind, a, u):
    rho = DENSITY[kind]
    return quad_split(lambda s: math.expm1(-u * s) * rho(s, a), 0.0, 1.0) + quad(
        lambda s: math.expm1(-u * s) * rho(s, a), 1.0, np.inf
    )


def char_quad(kind, a, u):
    """2 int_0^inf (cos(us) - 1) rho(s) ds for an even density."""
    rho = DENSITY[kind]
    head = quad_split(lambda s: -2.0 * math.sin(0.5 * u * s) ** 2 * rho(s, a), 0.0, 1.0)
    if kind == "stable":
        # int_1^inf cos(us) s^(-1-a) ds via the oscillatory weight, minus int_1^inf s^(-1-a) = 1/a
        osc, _ = integrate.quad(lambda s: rho(s, a), 1.0, np.inf, weight="cos", wvar=u)
        return 2.0 * (head + osc - 1.0 / a)
    return 2.0 * (head + quad(lambda s: -2.0 * math.sin(0.5 * u * s) ** 2 * rho(s, a), 1.0, 80.0))


def moment(kind, a, k, lo, hi):
    rho = DENSITY[kind]
    return quad_split(lambda s: s**k * rho(s, a), lo, hi)


def main():
    out = {}
    xs = [-4.5, -2.5, -1.5, -0.5, 0.1, 0.5, 1.0, 1.5, 2.5, 3.7, 7.0, 12.3, 20.0, 29.5]
    out["gamma"] = [[x, float(special.gamma(x))] for x in xs]
    out["bessel_k"] = [
        [nu, s, float(special.kv(nu, s))]
        for nu in (0.0, 0.5, 0.75, 1.0, 1.5, 2.3)
        for s in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0)
    ]
    out["laplace_quad"] = [
        [kind, a, u, laplace_quad(kind, a, u)]
        for kind, a in (("gamma", None), ("stable-sub", 0.5), ("tss", 0.3), ("tss", 0.5))
        for u in (0.5, 1.0, 2.0)
    ]
    out["char_quad"] = [
        [kind, a, u, char_quad(kind, a, u)]
        for kind, a in (("stable", 1.0), ("stable", 0.5), ("ts", 0.5), ("mts", 0.25), ("mts", 0.45), ("nig", None))
        for u in (0.5, 1.0, 2.0)
    ]
    out["mu_eps"] = [
        [kind, a, eps, moment(kind, a, 1.0, 0.0, eps)]
        for kind, a in (("gamma", None), ("stable-sub", 0.5), ("tss", 0.3))
        for eps in (0.1, 0.01, 1e-4)
    ]
    out["sigma_eps"] = [
        [kind, a, eps, math.sqrt(2.0 * moment(kind, a, 2.0, 0.0, eps)) if DENSITY_SYMMETRIC[kind]
         else math.sqrt(moment(kind, a, 2.0, 0.0, eps))]
        for kind, a in (("gamma", None), ("stable-sub", 0.5), ("stable", 1.0), ("ts", 0.5), ("mts", 0.25), ("nig", None))
        for eps in (0.1, 0.01, 1e-3)
    ]
    s05 = math.sqrt(moment("gamma", None, 2.0, 0.0, 0.5))
    out["b_eps_gamma_0.5"] = -quad(lambda s: math.exp(-s), s05, 0.5) / s05 if s05 < 0.5 else 0.0
    out["mts_tail_bound_integral"] = quad(lambda t: math.exp(-(t + 0.25 / t)), 0.25, np.inf)
    out["mts_moments"] = [
        [a, 2.0 * moment("mts", a, 2.0, 0.0, 1.0), 2.0 * quad(lambda s: s * DENSITY["mts"](s, a), 1.0, 80.0)]
        for a in (0.05, 0.25, 0.45)
    ]
    out["tss_moments"] = [
        [a, moment("tss", a, 2.0, 0.0, 1.0), moment("tss", a, 1.0, 0.0, 1.0) + quad(lambda s: s * DENSITY["tss"](s, a), 1.0, np.inf)]
        for a in (0.05, 0.25, 0.45)
    ]
    OUT.write_text(json.dumps(out, indent=1) + "\n")


DENSITY_SYMMETRIC = {"gamma": False, "stable-sub": False, "tss": False, "stable": True, "ts": True, "mts": True, "nig": True}

if __name__ == "__main__":
    main()
