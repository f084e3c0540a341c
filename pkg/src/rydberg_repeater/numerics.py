"""Small numerical helpers shared by the error model and the physics calculators."""
from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = 1e-9,
    xtol: float = 0.0,
    maxiter: int = 500,
) -> float:
    """Minimize a unimodal ``f`` on ``[lo, hi]``.

    Stops once the bracket is narrower than ``xtol + rtol * |midpoint|``.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(maxiter):
        if hi - lo <= xtol + rtol * abs(0.5 * (lo + hi)):
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def golden_section_log(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-9) -> float:
    """Golden section over ``log x``; a log-bracket of width w is a relative width of ~w in x."""
    u = golden_section(lambda v: f(math.exp(v)), math.log(lo), math.log(hi), rtol=0.0, xtol=rtol)
    return math.exp(u)
