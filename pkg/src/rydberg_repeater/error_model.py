"""Intrinsic error estimates for local Bell generation and the Rydberg CNOT.

Frequencies are angular (rad/s).  The decay rate follows ``tau = 1/(2 pi gamma)``.
Inputs quoted in MHz are turned into rad/s by :func:`mhz_to_rad_s`, whose
factor defaults to 2 pi and can be set to 1 for the ordinary-frequency reading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import golden_section_log

TWO_PI = 2.0 * math.pi
ANGULAR_FACTORS = {"2pi": TWO_PI, "1": 1.0}


def angular_factor(convention: str | float) -> float:
    if isinstance(convention, (int, float)):
        return float(convention)
    try:
        return ANGULAR_FACTORS[str(convention)]
    except KeyError:
        raise ValueError(f"angular convention must be one of {sorted(ANGULAR_FACTORS)}") from None


def mhz_to_rad_s(mhz: float, convention: str | float = "2pi") -> float:
    return angular_factor(convention) * mhz * 1e6


def gamma_from_tau(tau: float) -> float:
    return 1.0 / (TWO_PI * tau)


@dataclass(frozen=True)
class ErrorParams:
    tau: float  # s
    omega_N: float  # rad/s
    omega_s: float  # rad/s
    delta_dd: float  # rad/s
    N: float = 240.0

    def __post_init__(self):
        for name in ("tau", "omega_N", "omega_s", "delta_dd", "N"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def gamma(self) -> float:
        return gamma_from_tau(self.tau)


def e_loc(p: ErrorParams) -> float:
    """Error of the local Bell-state generation: two decay terms plus two blockade-leak terms."""
    g = p.gamma
    d2 = p.delta_dd**2
    return (
        2 * g * math.pi / p.omega_N
        + g * math.pi / p.omega_s
        + 4 * p.omega_N**2 / d2
        + 2 * p.omega_s**2 / d2
    )


def e_cnot(p: ErrorParams) -> float:
    """Average error of the five-pulse CNOT; it uses no collective pulses, so omega_N drops out."""
    return 2 * p.gamma * math.pi / p.omega_s + 1.5 * p.omega_s**2 / p.delta_dd**2


def _coefficients(tau: float, delta_dd: float, which: str) -> tuple[float, float]:
    """(A, B) of the reduced cost A/omega + B omega^2."""
    g = gamma_from_tau(tau)
    if which == "loc_equal_omegas":
        return 3 * g * math.pi, 6.0 / delta_dd**2
    if which == "cnot":
        return 2 * g * math.pi, 1.5 / delta_dd**2
    raise ValueError(f"unknown error kind {which!r}")


def optimize_rabi(tau: float, delta_dd: float, which: str = "cnot") -> tuple[float, float]:
    """Closed-form minimum of A/omega + B omega^2 -> (omega_opt, error_min)."""
    if tau <= 0 or delta_dd <= 0:
        raise ValueError("tau and delta_dd must be positive")
    A, B = _coefficients(tau, delta_dd, which)
    omega = (A / (2 * B)) ** (1 / 3)
    return omega, 3 * (A * A * B / 4) ** (1 / 3)


def optimize_rabi_numeric(tau: float, delta_dd: float, which: str = "cnot", rtol: float = 1e-9) -> tuple[float, float]:
    """Golden-section minimization of the full formula (independent of the closed form)."""
    if which == "loc_equal_omegas":
        cost = lambda w: e_loc(ErrorParams(tau, w, w, delta_dd))  # noqa: E731
    elif which == "cnot":
        cost = lambda w: e_cnot(ErrorParams(tau, w, w, delta_dd))  # noqa: E731
    else:
        raise ValueError(f"unknown error kind {which!r}")
    # the optimum lies far inside [delta*1e-6, delta]
    omega = golden_section_log(cost, delta_dd * 1e-6, delta_dd, rtol=rtol)
    return omega, cost(omega)


def collective_pulse_imprecision(N: float) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return 1.0 / N


def excitation_leak_probs(p: ErrorParams, c1: float = 1.0, c0: float = 1.0) -> tuple[float, float]:
    """(p1, p0): weights of single-excitation and vacuum leakage from imperfect blockade."""
    return c1 * (p.omega_N / p.delta_dd) ** 2, c0 * (p.omega_s / p.delta_dd) ** 2


@dataclass(frozen=True)
class SweepRow:
    delta_dd_MHz: float
    tau_us: float
    omega_opt_rad_s: float
    e_loc_min: float
    e_cnot_min: float
    omega_cnot_rad_s: float
    e_loc_numeric: float
    e_cnot_numeric: float


def error_sweep(delta_dd_MHz: list[float], tau_us: list[float], convention: str | float = "2pi") -> list[SweepRow]:
    rows = []
    for tau in tau_us:
        for d in delta_dd_MHz:
            delta = mhz_to_rad_s(d, convention)
            w_loc, el = optimize_rabi(tau * 1e-6, delta, "loc_equal_omegas")
            w_cn, ec = optimize_rabi(tau * 1e-6, delta, "cnot")
            _, el_num = optimize_rabi_numeric(tau * 1e-6, delta, "loc_equal_omegas")
            _, ec_num = optimize_rabi_numeric(tau * 1e-6, delta, "cnot")
            rows.append(SweepRow(d, tau, w_loc, el, ec, w_cn, el_num, ec_num))
    return rows
