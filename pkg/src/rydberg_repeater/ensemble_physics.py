"""Atomic-physics calculators for the ensemble memory.

Energies are in Hartree and lengths in Bohr internally; the public functions
take and return micrometres and MHz.  The pair potential is

    V(r) = |c1| n^12 / r^6 - c1' n^16 / r^8        (default "repulsive_r6")

which is repulsive at large r and attractive at small r.  The signs as
literally printed for Rb (c1 = -0.85 in ``-c1 n^12/r^6``) would make both terms
repulsive; that reading is available as ``sign_convention="verbatim"`` and has
no maximum.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from . import error_model
from .numerics import golden_section_log

BOHR_UM = 0.0529177e-3  # Bohr radius in micrometres
HARTREE_HZ = 6.579684e15  # Hartree energy / h in Hz
UM3_PER_CM3 = 1e12

SIGN_CONVENTIONS = ("repulsive_r6", "verbatim")


class NoExtremum(ValueError):
    """The potential has no interior maximum under the chosen sign convention."""


def um_to_bohr(r_um: float) -> float:
    return r_um / BOHR_UM


def bohr_to_um(r_bohr: float) -> float:
    return r_bohr * BOHR_UM


def mhz_to_hartree(mhz: float, convention: str | float = "2pi") -> float:
    """Energy hbar * omega of a shift quoted in MHz.

    With the 2pi convention the quoted number is an ordinary frequency, so the
    energy is h * f; with the "1" convention it is read as rad/s.
    """
    omega = error_model.mhz_to_rad_s(mhz, convention)
    return omega / (2 * math.pi) / HARTREE_HZ


def hartree_to_mhz(energy: float) -> float:
    return energy * HARTREE_HZ / 1e6


@dataclass(frozen=True)
class PhysicsParams:
    n_principal: int = 70
    c1: float = -0.85
    c1_prime: float = 0.8
    k: float = 2 * math.pi  # rad/um
    w0: float = 5.0  # um
    finesse: float = 100.0
    c_r: float = 1 / 3
    N_atoms: float = 240.0
    delta_dd_MHz: float = 20.0
    density_cm3: float = 3e13
    diameter_um: float = 2.0
    tau_us: float = 300.0
    sign_convention: str = "repulsive_r6"
    angular_convention: str = "2pi"

    def __post_init__(self):
        if self.n_principal < 1:
            raise ValueError("n_principal must be >= 1")
        if self.finesse <= 0 or self.w0 <= 0 or self.k <= 0:
            raise ValueError("finesse, w0 and k must be positive")
        if not 0 < self.c_r <= 1:
            raise ValueError("c_r must lie in (0, 1]")
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ValueError(f"sign_convention must be one of {SIGN_CONVENTIONS}")

    def _coeffs(self) -> tuple[float, float]:
        """(a6, a8) with V = a6 n^12 / r^6 + a8 n^16 / r^8 in atomic units."""
        if self.sign_convention == "verbatim":
            return -self.c1, self.c1_prime
        return abs(self.c1), -abs(self.c1_prime)


def vdw_potential_au(r_bohr: float, p: PhysicsParams) -> float:
    if r_bohr <= 0:
        raise ValueError("r must be positive")
    a6, a8 = p._coeffs()
    n = float(p.n_principal)
    return a6 * n**12 / r_bohr**6 + a8 * n**16 / r_bohr**8


def vdw_potential(r_um: float, p: PhysicsParams) -> float:
    """Pair shift in MHz (ordinary frequency) at separation ``r_um``."""
    return hartree_to_mhz(vdw_potential_au(um_to_bohr(r_um), p))


def critical_distance(p: PhysicsParams) -> float:
    """Separation (um) where the repulsive shift peaks, from dV/dr = 0."""
    a6, a8 = p._coeffs()
    if not (a6 > 0 and a8 < 0):
        raise NoExtremum("both terms share a sign; V has no interior maximum")
    r_bohr = p.n_principal**2 * math.sqrt(4.0 / 3.0 * (-a8) / a6)
    return bohr_to_um(r_bohr)


def critical_distance_numeric(p: PhysicsParams) -> float:
    """Numeric maximizer of V, used to cross-check :func:`critical_distance`."""
    guess = p.n_principal**2
    r = golden_section_log(lambda x: -vdw_potential_au(x, p), guess * 1e-2, guess * 1e2, rtol=1e-11)
    return bohr_to_um(r)


def max_density(p: PhysicsParams) -> float:
    """1 / r_c^3 in atoms per cm^3."""
    return UM3_PER_CM3 / critical_distance(p) ** 3


def blockade_radius(p: PhysicsParams, delta_dd_MHz: float | None = None) -> float:
    """R_b = (|c1| n^12 / Delta_dd)^(1/6) in um."""
    d = p.delta_dd_MHz if delta_dd_MHz is None else delta_dd_MHz
    if d <= 0:
        raise ValueError("delta_dd must be positive")
    energy = mhz_to_hartree(d, p.angular_convention)
    return bohr_to_um((abs(p.c1) * float(p.n_principal) ** 12 / energy) ** (1 / 6))


def cooperativity(p: PhysicsParams, N: float | None = None) -> float:
    N = p.N_atoms if N is None else N
    return N * p.c_r**2 * 24 * p.finesse / (2 * math.pi * p.k**2 * p.w0**2)


def retrieval_efficiency(p: PhysicsParams, N: float | None = None) -> float:
    C = cooperativity(p, N)
    return C / (C + 1.0)


def atoms_in_volume(density_cm3: float, side_um: float) -> float:
    return density_cm3 * side_um**3 / UM3_PER_CM3


@dataclass
class EnsembleReport:
    r_c_um: float
    max_density_cm3: float
    density_cm3: float
    blockade_radius_um: float
    diameter_um: float
    N_atoms: float
    cooperativity: float
    eta_r: float
    collective_imprecision: float
    delta_dd_MHz: float
    tau_us: float
    e_loc_min: float
    e_cnot_min: float
    checks: dict[str, bool] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d

    def to_text(self) -> str:
        rows = [
            ("critical distance r_c", f"{self.r_c_um:.4f} um"),
            ("max density 1/r_c^3", f"{self.max_density_cm3:.4e} cm^-3"),
            ("ensemble density", f"{self.density_cm3:.4e} cm^-3"),
            ("blockade radius R_b", f"{self.blockade_radius_um:.4f} um"),
            ("ensemble diameter", f"{self.diameter_um:.4f} um"),
            ("atoms per ensemble N", f"{self.N_atoms:.1f}"),
            ("cooperativity C", f"{self.cooperativity:.4f}"),
            ("retrieval efficiency", f"{self.eta_r:.4f}"),
            ("collective pulse imprecision", f"{self.collective_imprecision:.4e}"),
            ("delta_dd", f"{self.delta_dd_MHz:g} MHz"),
            ("tau", f"{self.tau_us:g} us"),
            ("min E_loc", f"{self.e_loc_min:.4e}"),
            ("min E_cnot", f"{self.e_cnot_min:.4e}"),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k:<{width}}  {v}" for k, v in rows]
        lines.append("")
        for name, passed in self.checks.items():
            lines.append(f"[{'ok' if passed else 'FAIL'}] {name}")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def ensemble_report(p: PhysicsParams) -> EnsembleReport:
    rc = critical_distance(p)
    rho_max = UM3_PER_CM3 / rc**3
    rb = blockade_radius(p)
    N = atoms_in_volume(p.density_cm3, p.diameter_um)
    C = cooperativity(p, N)
    delta = error_model.mhz_to_rad_s(p.delta_dd_MHz, p.angular_convention)
    _, el = error_model.optimize_rabi(p.tau_us * 1e-6, delta, "loc_equal_omegas")
    _, ec = error_model.optimize_rabi(p.tau_us * 1e-6, delta, "cnot")
    imprecision = error_model.collective_pulse_imprecision(max(N, 1.0))

    checks = {
        "density below 1/r_c^3": p.density_cm3 <= rho_max,
        "diameter within blockade radius": p.diameter_um <= rb,
        "collective imprecision below 1%": imprecision < 0.01,
        "local error below 2%": el < 0.02,
    }
    warnings = []
    if not checks["diameter within blockade radius"]:
        warnings.append(f"ensemble diameter {p.diameter_um:g} um exceeds R_b = {rb:.3f} um")
    if not checks["density below 1/r_c^3"]:
        warnings.append("density exceeds the repulsive-interaction bound")
    return EnsembleReport(
        r_c_um=rc,
        max_density_cm3=rho_max,
        density_cm3=p.density_cm3,
        blockade_radius_um=rb,
        diameter_um=p.diameter_um,
        N_atoms=N,
        cooperativity=C,
        eta_r=C / (C + 1),
        collective_imprecision=imprecision,
        delta_dd_MHz=p.delta_dd_MHz,
        tau_us=p.tau_us,
        e_loc_min=el,
        e_cnot_min=ec,
        checks=checks,
        warnings=warnings,
    )
