"""Pulse programs for local Bell-state generation, the two-ensemble CNOT,
entanglement swapping and entanglement purification."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .engine import (
    COMPUTATIONAL,
    PLUSMINUS,
    Mode,
    Pulse,
    SystemState,
    apply_pulse_traced,
    apply_pulses,
    basis_state,
    collective,
    enumerate_joint,
    fidelity,
    format_component,
    half_pi,
    pi,
    superpose,
    tensor,
)

S, T, R = Mode.S, Mode.T, Mode.R


class NotCoLocated(Exception):
    """CNOT partners sit in different blockade domains."""


@dataclass(frozen=True)
class ProtocolScript:
    name: str
    pulses: tuple[Pulse, ...]
    measurements: tuple[tuple[str, str], ...] = ()
    corrections: dict[tuple[str, ...], tuple[Pulse, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class TraceStep:
    pulse: Pulse | None
    state: SystemState
    blocked: bool

    @property
    def arrow(self) -> str:
        return "=>" if self.blocked else "->"


def run_traced(state: SystemState, pulses: Sequence[Pulse]) -> list[TraceStep]:
    steps = [TraceStep(None, state, False)]
    for p in pulses:
        state, nblocked = apply_pulse_traced(state, p)
        steps.append(TraceStep(p, state, nblocked > 0))
    return steps


# --- Bell generation ---------------------------------------------------------

def bell_generation_pulses(ensemble: str = "A", corrupt: bool = False) -> tuple[Pulse, ...]:
    """Eight pulses producing (|s,s'> + |t,t'>)/sqrt2 from the empty ensemble.

    ``corrupt`` flips the sign of the pi/2 pulse (negative control).
    """
    e = ensemble
    return (
        collective(e, R),
        pi(e, R, S),
        collective(e, R),
        pi(e, R, Mode.T_PRIME),
        half_pi(e, S, R, sign=-1 if corrupt else 1),
        pi(e, Mode.T_PRIME, Mode.R_PRIME),
        pi(e, Mode.R_PRIME, Mode.S_PRIME),
        pi(e, R, T),
    )


def bell_target_local(ensemble: str = "A") -> SystemState:
    ens = (ensemble,)
    return superpose(
        [
            (1, basis_state(ens, {ensemble: [S, Mode.S_PRIME]})),
            (1, basis_state(ens, {ensemble: [T, Mode.T_PRIME]})),
        ]
    )


def bell_generation(state: SystemState, ensemble: str | None = None, corrupt: bool = False) -> SystemState:
    ensemble = ensemble or state.ensembles[0]
    return apply_pulses(state, bell_generation_pulses(ensemble, corrupt))


# --- CNOT --------------------------------------------------------------------

def cnot_pulses(control: str, target: str) -> tuple[Pulse, ...]:
    return (
        pi(control, S, R),
        pi(target, S, R),
        pi(target, R, T),
        pi(target, R, S),
        pi(control, R, S),
    )


def _check_colocated(state: SystemState, control: str, target: str) -> None:
    if target not in state.domain_of(control):
        raise NotCoLocated(f"{control} and {target} are not in one blockade domain")


def cnot_sequence(state: SystemState, control: str, target: str) -> SystemState:
    """Flip ``target`` (s <-> t) when ``control`` holds t."""
    _check_colocated(state, control, target)
    return apply_pulses(state, cnot_pulses(control, target))


def cnot_trace(state: SystemState, control: str, target: str) -> list[TraceStep]:
    _check_colocated(state, control, target)
    return run_traced(state, cnot_pulses(control, target))


CNOT_ROWS = (("s", "s"), ("s", "t"), ("t", "s"), ("t", "t"))


def cnot_pair_state(control_mode: str, target_mode: str, control: str = "Bu", target: str = "Bd") -> SystemState:
    return basis_state(
        (control, target), {control: [control_mode], target: [target_mode]}, [(control, target)]
    )


def cnot_matrix(control: str = "Bu", target: str = "Bd") -> np.ndarray:
    """4x4 matrix of the pulse sequence on the {s,t}x{s,t} basis, order ss, st, ts, tt."""
    basis = [cnot_pair_state(c, t, control, target) for c, t in CNOT_ROWS]
    mat = np.zeros((4, 4), dtype=complex)
    for j, inp in enumerate(basis):
        out = cnot_sequence(inp, control, target)
        for i, ref in enumerate(basis):
            key = next(iter(ref.amplitudes))
            mat[i, j] = out.amplitudes.get(key, 0j)
    return mat


def format_trace_row(steps: Sequence[TraceStep], ensembles: Sequence[str]) -> str:
    """One Table-1-style line, e.g. ``s_Bu s_Bd -> r_Bu s_Bd => ...``."""
    parts = [_label(steps[0].state, ensembles)]
    for st in steps[1:]:
        parts.append(st.arrow)
        parts.append(_label(st.state, ensembles))
    return " ".join(parts)


def _label(state: SystemState, ensembles: Sequence[str]) -> str:
    if len(state.amplitudes) != 1:
        return state.pretty()
    (comp,) = state.amplitudes
    return format_component(comp, ensembles)


# --- Bell pairs --------------------------------------------------------------

def bell_pair(a: str, b: str, kind: str = "phi+", domains=None) -> SystemState:
    """Two-ensemble Bell state in the s/t qubit; kind in phi+, phi-, psi+, psi-."""
    ens = (a, b)
    first, second = ((S, S), (T, T)) if kind.startswith("phi") else ((S, T), (T, S))
    sign = 1 if kind.endswith("+") else -1
    return superpose(
        [
            (1, basis_state(ens, {a: [first[0]], b: [first[1]]}, domains)),
            (sign, basis_state(ens, {a: [second[0]], b: [second[1]]}, domains)),
        ]
    )


# --- entanglement swapping ---------------------------------------------------

def _phase_flip(ensemble: str) -> tuple[Pulse, ...]:
    # two pi/2 pulses give s -> t, t -> -s; a pi swap then restores s, -t
    return (half_pi(ensemble, S, T), half_pi(ensemble, S, T), pi(ensemble, S, T))


def _bit_flip(ensemble: str) -> tuple[Pulse, ...]:
    return (pi(ensemble, S, T),)


def swap_script(a: str = "A", bu: str = "Bu", bd: str = "Bd", c: str = "C") -> ProtocolScript:
    corrections = {
        ("+", "s"): (),
        ("-", "s"): _phase_flip(c),
        ("+", "t"): _bit_flip(c),
        ("-", "t"): _bit_flip(c) + _phase_flip(c),
    }
    return ProtocolScript(
        name="entanglement-swap",
        pulses=cnot_pulses(bu, bd),
        measurements=((bu, PLUSMINUS), (bd, COMPUTATIONAL)),
        corrections=corrections,
    )


def swap_input(a: str = "A", bu: str = "Bu", bd: str = "Bd", c: str = "C") -> SystemState:
    st = tensor(bell_pair(a, bu), bell_pair(bd, c))
    return st.with_domains([(bu, bd)])


@dataclass(frozen=True)
class SwapResult:
    outcome: tuple[str, str]
    probability: float
    state: SystemState
    fidelity: float


def swap_protocol(
    state: SystemState,
    rng: np.random.Generator | None = None,
    names: tuple[str, str, str, str] = ("A", "Bu", "Bd", "C"),
) -> list[SwapResult] | SwapResult:
    """Swap A-Bu and Bd-C into A-C.

    Without ``rng`` all four outcomes are enumerated and returned as a list;
    with ``rng`` one outcome is sampled.
    """
    a, bu, bd, c = names
    script = swap_script(*names)
    _check_colocated(state, bu, bd)
    after = apply_pulses(state, script.pulses)
    target = bell_pair(a, c)
    branches = enumerate_joint(after, script.measurements, keep=False)
    results = []
    for br in branches:
        key = tuple(br.label.split(","))
        corrected = apply_pulses(br.state, script.corrections[key])
        results.append(SwapResult(key, br.probability, corrected, fidelity(corrected, target)))
    if rng is None:
        return results
    probs = np.array([r.probability for r in results])
    return results[int(rng.choice(len(results), p=probs / probs.sum()))]


# --- entanglement purification -----------------------------------------------

PURIFY_NAMES = ("Au", "Cu", "Ad", "Cd")

Mixture = list[tuple[float, SystemState]]


def purify_input_mixture(F: float, bad: str = "phi-", names=PURIFY_NAMES) -> Mixture:
    """Two independent pairs, each phi+ with weight F and ``bad`` with 1 - F."""
    au, cu, ad, cd = names
    domains = [(au, ad), (cu, cd)]
    kinds = [("phi+", F), (bad, 1.0 - F)]
    mixture = []
    for ku, wu in kinds:
        for kd, wd in kinds:
            if wu * wd == 0.0:
                continue
            st = tensor(bell_pair(au, cu, ku), bell_pair(ad, cd, kd)).with_domains(domains)
            mixture.append((wu * wd, st))
    return mixture


def purify_script(names=PURIFY_NAMES) -> ProtocolScript:
    au, cu, ad, cd = names
    # pi/2 on (s,t) on both sides of each pair: phi- -> psi+, phi+ unchanged
    basis_change = tuple(half_pi(e, S, T) for e in names)
    return ProtocolScript(
        name="entanglement-purify",
        pulses=basis_change + cnot_pulses(au, ad) + cnot_pulses(cu, cd),
        measurements=((ad, COMPUTATIONAL), (cd, COMPUTATIONAL)),
    )


@dataclass(frozen=True)
class PurifyResult:
    kept_probability: float
    fidelity: float
    branches: list[tuple[float, bool, SystemState]]


def purify_circuit(
    mixture: Mixture,
    rng: np.random.Generator | None = None,
    names=PURIFY_NAMES,
) -> PurifyResult | tuple[bool, SystemState]:
    """Run the two-CNOT purification on a weighted list of pure inputs.

    Enumerate mode (no ``rng``) returns the kept probability and the fidelity
    of the kept-branch mixture with phi+ on (Au, Cu).  Sample mode returns
    ``(kept, state)`` for one branch.
    """
    au, cu, ad, cd = names
    script = purify_script(names)
    target = bell_pair(au, cu)
    branches: list[tuple[float, bool, SystemState]] = []
    for weight, st in mixture:
        _check_colocated(st, au, ad)
        _check_colocated(st, cu, cd)
        after = apply_pulses(st, script.pulses)
        for o in enumerate_joint(after, script.measurements, keep=False):
            ra, rc = o.label.split(",")
            branches.append((weight * o.probability, ra == rc, _restrict(o.state, (au, cu))))
    if rng is not None:
        probs = np.array([b[0] for b in branches])
        w, kept, st = branches[int(rng.choice(len(branches), p=probs / probs.sum()))]
        return kept, st
    kept_p = sum(w for w, k, _ in branches if k)
    fid = sum(w * fidelity(s, target) for w, k, s in branches if k) / kept_p if kept_p > 0 else 0.0
    return PurifyResult(kept_p, fid, branches)


def _restrict(state: SystemState, ensembles: tuple[str, ...]) -> SystemState:
    domains = tuple(d for d in state.domains if d <= set(ensembles))
    if state.ensembles == ensembles:
        return SystemState(ensembles, domains, dict(state.amplitudes))
    raise ValueError("unexpected leftover ensembles")


def purify_fidelity_check(F: float) -> tuple[float, float]:
    """(kept probability, kept fidelity) from the exact circuit at input fidelity F."""
    res = purify_circuit(purify_input_mixture(F))
    return res.kept_probability, res.fidelity


def local_bell_fidelity(corrupt: bool = False) -> float:
    start = basis_state(("A",))
    return fidelity(bell_generation(start, "A", corrupt), bell_target_local("A"))


__all__ = [
    "NotCoLocated",
    "ProtocolScript",
    "TraceStep",
    "bell_generation",
    "bell_generation_pulses",
    "bell_pair",
    "cnot_matrix",
    "cnot_sequence",
    "cnot_trace",
    "purify_circuit",
    "swap_protocol",
]
