"""Sparse state-vector simulator over collective-excitation basis states.

Each ensemble holds a set of occupied collective modes.  The ground reservoir
``|g...g>`` is the empty set.  Blockade is ideal: a transfer into a Rydberg
mode is suppressed whenever another Rydberg mode is already occupied anywhere
in the target ensemble's blockade domain.

Phase convention: a pi pulse on ``(a, b)`` swaps the two modes with amplitude
+1.  A pi/2 pulse maps ``a -> (a + b)/sqrt2`` and ``b -> (-a + b)/sqrt2``
(the ``sign`` field of :class:`Pulse` flips the sign of the transferred part,
which exists only for negative-control self tests).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

PRUNE_TOL = 1e-12
SQRT1_2 = 1.0 / math.sqrt(2.0)


class EngineError(Exception):
    """Base class for state-engine errors."""


class IllDefinedPulse(EngineError):
    """A component holds both modes of a single-excitation transition."""


class InvalidQubitSubspace(EngineError):
    """A measured ensemble does not hold exactly one of {s, t}."""


class LayoutMismatch(EngineError):
    """Two states do not share the same ensemble layout."""


class Mode(str, enum.Enum):
    R = "r"
    R_PRIME = "r'"
    S = "s"
    T = "t"
    S_PRIME = "s'"
    T_PRIME = "t'"

    @property
    def is_rydberg(self) -> bool:
        return self in (Mode.R, Mode.R_PRIME)

    def __str__(self) -> str:
        return self.value


RYDBERG_MODES = frozenset({Mode.R, Mode.R_PRIME})


class PulseKind(str, enum.Enum):
    COLLECTIVE = "collective_ground_to_rydberg"
    SINGLE = "single_excitation"


class Angle(str, enum.Enum):
    PI = "pi"
    HALF_PI = "pi/2"


@dataclass(frozen=True)
class Pulse:
    kind: PulseKind
    target: str
    # (a, b); a is None for the ground reservoir of a collective pulse
    transition: tuple[Mode | None, Mode]
    angle: Angle = Angle.PI
    sign: int = 1

    def __post_init__(self):
        a, b = self.transition
        if self.kind is PulseKind.COLLECTIVE:
            if a is not None or b not in RYDBERG_MODES:
                raise ValueError("collective pulses drive the ground reservoir into r or r'")
            if self.angle is not Angle.PI:
                raise ValueError("collective pulses are pi pulses")
        elif a is None or a == b:
            raise ValueError("single-excitation pulse needs two distinct modes")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def label(self) -> str:
        a, b = self.transition
        name = "pi" if self.angle is Angle.PI else "pi/2"
        if self.kind is PulseKind.COLLECTIVE:
            return f"collective {name} (g->{b})@{self.target}"
        return f"{name} ({a},{b})@{self.target}"


def collective(target: str, dest: Mode = Mode.R) -> Pulse:
    return Pulse(PulseKind.COLLECTIVE, target, (None, dest))


def pi(target: str, a: Mode, b: Mode) -> Pulse:
    return Pulse(PulseKind.SINGLE, target, (a, b))


def half_pi(target: str, a: Mode, b: Mode, sign: int = 1) -> Pulse:
    return Pulse(PulseKind.SINGLE, target, (a, b), Angle.HALF_PI, sign)


Component = tuple[frozenset, ...]


@dataclass(frozen=True, eq=False)
class SystemState:
    """Immutable sparse superposition over per-ensemble mode sets."""

    ensembles: tuple[str, ...]
    domains: tuple[frozenset, ...]
    amplitudes: Mapping[Component, complex] = field(default_factory=dict)

    def index(self, ensemble: str) -> int:
        try:
            return self.ensembles.index(ensemble)
        except ValueError:
            raise KeyError(f"unknown ensemble {ensemble!r}") from None

    def domain_of(self, ensemble: str) -> frozenset:
        for d in self.domains:
            if ensemble in d:
                return d
        return frozenset({ensemble})

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def with_amplitudes(self, amps: Mapping[Component, complex]) -> SystemState:
        pruned = {k: complex(v) for k, v in amps.items() if abs(v) >= PRUNE_TOL}
        return SystemState(self.ensembles, self.domains, pruned)

    def normalized(self) -> SystemState:
        nrm = self.norm()
        if nrm == 0.0:
            raise EngineError("cannot normalize the zero vector")
        return self.with_amplitudes({k: v / nrm for k, v in self.amplitudes.items()})

    def with_domains(self, domains: Iterable[Iterable[str]]) -> SystemState:
        return SystemState(self.ensembles, _make_domains(self.ensembles, domains), dict(self.amplitudes))

    def same_layout(self, other: SystemState) -> bool:
        return self.ensembles == other.ensembles and set(self.domains) == set(other.domains)

    def sorted_components(self) -> list[Component]:
        return sorted(self.amplitudes, key=_component_key)

    def to_json(self) -> str:
        return json.dumps(self.to_records())

    def to_records(self) -> list[dict]:
        out = []
        for comp in self.sorted_components():
            amp = self.amplitudes[comp]
            out.append(
                {
                    "component": [sorted(m.value for m in modes) for modes in comp],
                    "re": float(amp.real),
                    "im": float(amp.imag),
                }
            )
        return out

    def pretty(self, digits: int = 4) -> str:
        terms = []
        for comp in self.sorted_components():
            amp = self.amplitudes[comp]
            terms.append(f"({amp.real:+.{digits}f}{amp.imag:+.{digits}f}j)|{format_component(comp, self.ensembles)}>")
        return " ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"SystemState({self.pretty()})"


def _component_key(comp: Component) -> tuple:
    return tuple(tuple(sorted(m.value for m in modes)) for modes in comp)


def format_component(comp: Component, ensembles: Sequence[str]) -> str:
    parts = []
    for name, modes in zip(ensembles, comp):
        label = ",".join(sorted(m.value for m in modes)) or "0"
        parts.append(f"{label}_{name}")
    return " ".join(parts)


def _as_modes(modes: Iterable[Mode | str]) -> frozenset:
    return frozenset(Mode(m) for m in modes)


def basis_state(
    ensembles: Sequence[str],
    occupation: Mapping[str, Iterable[Mode | str]] | None = None,
    domains: Iterable[Iterable[str]] | None = None,
) -> SystemState:
    """Single basis component; ensembles missing from ``occupation`` are empty."""
    ensembles = tuple(ensembles)
    occupation = occupation or {}
    unknown = set(occupation) - set(ensembles)
    if unknown:
        raise KeyError(f"unknown ensembles {sorted(unknown)}")
    comp = tuple(_as_modes(occupation.get(e, ())) for e in ensembles)
    return SystemState(ensembles, _make_domains(ensembles, domains), {comp: 1.0 + 0j})


def superpose(terms: Sequence[tuple[complex, SystemState]]) -> SystemState:
    """Normalized linear combination of states sharing one layout."""
    first = terms[0][1]
    amps: dict[Component, complex] = {}
    for coeff, st in terms:
        if not st.same_layout(first):
            raise LayoutMismatch("superpose needs a common layout")
        for k, v in st.amplitudes.items():
            amps[k] = amps.get(k, 0j) + coeff * v
    return first.with_amplitudes(amps).normalized()


def tensor(left: SystemState, right: SystemState) -> SystemState:
    if set(left.ensembles) & set(right.ensembles):
        raise LayoutMismatch("tensor factors must have disjoint ensembles")
    amps = {
        kl + kr: vl * vr
        for kl, vl in left.amplitudes.items()
        for kr, vr in right.amplitudes.items()
    }
    return SystemState(left.ensembles + right.ensembles, left.domains + right.domains, amps)


def _make_domains(ensembles: tuple[str, ...], domains) -> tuple[frozenset, ...]:
    if domains is None:
        return tuple(frozenset({e}) for e in ensembles)
    groups = [frozenset(d) for d in domains]
    seen: set[str] = set()
    for g in groups:
        if g & seen:
            raise ValueError("blockade domains must be disjoint")
        seen |= g
    if not seen <= set(ensembles):
        raise KeyError("blockade domain names an unknown ensemble")
    groups += [frozenset({e}) for e in ensembles if e not in seen]
    return tuple(groups)


def _rydberg_elsewhere(comp: Component, domain_idx: Sequence[int], target: int, dest: Mode) -> bool:
    """True if a Rydberg mode other than ``dest`` in the target is occupied in the domain."""
    for i in domain_idx:
        for m in comp[i] & RYDBERG_MODES:
            if i != target or m != dest:
                return True
    return False


def apply_pulse_traced(state: SystemState, pulse: Pulse) -> tuple[SystemState, int]:
    """Apply ``pulse`` and also return how many components the blockade suppressed."""
    t = state.index(pulse.target)
    domain_idx = [state.index(e) for e in state.domain_of(pulse.target)]
    a, b = pulse.transition
    out: dict[Component, complex] = {}
    blocked = 0

    def add(comp, amp):
        out[comp] = out.get(comp, 0j) + amp

    def replaced(comp, new_modes):
        return comp[:t] + (frozenset(new_modes),) + comp[t + 1:]

    for comp, amp in state.amplitudes.items():
        modes = comp[t]
        if pulse.kind is PulseKind.COLLECTIVE:
            if b in modes:
                add(replaced(comp, modes - {b}), amp)
            elif _rydberg_elsewhere(comp, domain_idx, t, b):
                blocked += 1
                add(comp, amp)
            else:
                add(replaced(comp, modes | {b}), amp)
            continue

        has_a, has_b = a in modes, b in modes
        if has_a and has_b:
            raise IllDefinedPulse(f"{pulse.label()} on component holding both {a} and {b}")
        if not (has_a or has_b):
            add(comp, amp)
            continue
        src, dst = (a, b) if has_a else (b, a)
        if dst.is_rydberg and _rydberg_elsewhere(comp, domain_idx, t, dst):
            blocked += 1
            add(comp, amp)
            continue
        moved = replaced(comp, (modes - {src}) | {dst})
        if pulse.angle is Angle.PI:
            add(moved, amp)
        else:
            # a -> (a + b)/sqrt2, b -> (-a + b)/sqrt2
            stay = SQRT1_2 * amp
            go = SQRT1_2 * amp * pulse.sign * (1 if has_a else -1)
            add(comp, stay)
            add(moved, go)
    return state.with_amplitudes(out), blocked


def apply_pulse(state: SystemState, pulse: Pulse) -> SystemState:
    return apply_pulse_traced(state, pulse)[0]


def apply_pulses(state: SystemState, pulses: Iterable[Pulse]) -> SystemState:
    for p in pulses:
        state = apply_pulse(state, p)
    return state


def fidelity(state: SystemState, reference: SystemState) -> float:
    """|<reference|state>|^2."""
    if not state.same_layout(reference):
        raise LayoutMismatch(f"{state.ensembles} vs {reference.ensembles}")
    overlap = sum(
        reference.amplitudes[k].conjugate() * v
        for k, v in state.amplitudes.items()
        if k in reference.amplitudes
    )
    return min(1.0, abs(overlap) ** 2)


# --- measurement -------------------------------------------------------------

COMPUTATIONAL = "computational_st"
PLUSMINUS = "plusminus_st"
BASES = (COMPUTATIONAL, PLUSMINUS)


@dataclass(frozen=True)
class Outcome:
    label: str
    probability: float
    state: SystemState


def _split_qubit(state: SystemState, t: int) -> dict[Component, dict[Mode, complex]]:
    """Group amplitudes by the rest of the component, keyed by s/t of ensemble t."""
    groups: dict[Component, dict[Mode, complex]] = {}
    for comp, amp in state.amplitudes.items():
        modes = comp[t]
        q = modes & {Mode.S, Mode.T}
        if len(q) != 1:
            raise InvalidQubitSubspace(
                f"ensemble {state.ensembles[t]} holds {sorted(m.value for m in modes)}"
            )
        (m,) = q
        rest = comp[:t] + (modes - q,) + comp[t + 1:]
        groups.setdefault(rest, {})[m] = amp
    return groups


def _insert(rest: Component, t: int, mode: Mode) -> Component:
    return rest[:t] + (rest[t] | {mode},) + rest[t + 1:]


def _remove_ensemble(state: SystemState, t: int, amps: Mapping[Component, complex]) -> SystemState:
    name = state.ensembles[t]
    ens = state.ensembles[:t] + state.ensembles[t + 1:]
    domains = tuple(d - {name} for d in state.domains if d - {name})
    reduced: dict[Component, complex] = {}
    for comp, v in amps.items():
        key = comp[:t] + comp[t + 1:]
        reduced[key] = reduced.get(key, 0j) + v
    return SystemState(ens, domains, {}).with_amplitudes(reduced)


def measurement_outcomes(
    state: SystemState, ensemble: str, basis: str, keep: bool = True
) -> list[Outcome]:
    """All outcomes of a projective qubit measurement, with probabilities.

    With ``keep=False`` the measured ensemble is removed from the collapsed
    state; otherwise it is left in the projected basis state.
    """
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    t = state.index(ensemble)
    groups = _split_qubit(state, t)
    if basis == COMPUTATIONAL:
        vectors = {"s": {Mode.S: 1.0}, "t": {Mode.T: 1.0}}
    else:
        vectors = {"+": {Mode.S: SQRT1_2, Mode.T: SQRT1_2}, "-": {Mode.S: SQRT1_2, Mode.T: -SQRT1_2}}

    outcomes = []
    for label, vec in vectors.items():
        # conditional amplitude of the rest given this outcome
        proj = {
            rest: sum(c * parts.get(m, 0j) for m, c in vec.items())
            for rest, parts in groups.items()
        }
        prob = sum(abs(v) ** 2 for v in proj.values())
        if prob < PRUNE_TOL**2:
            continue
        if keep:
            amps = {
                _insert(rest, t, m): c * v
                for rest, v in proj.items()
                for m, c in vec.items()
            }
            collapsed = state.with_amplitudes(amps)
        else:
            collapsed = _remove_ensemble(state, t, proj)
        outcomes.append(Outcome(label, prob, collapsed.normalized()))
    return outcomes


def measure(
    state: SystemState,
    ensemble: str,
    basis: str,
    rng: np.random.Generator,
    keep: bool = True,
) -> tuple[str, SystemState, float]:
    """Sample one measurement outcome; returns (label, collapsed, probability)."""
    outs = measurement_outcomes(state, ensemble, basis, keep=keep)
    probs = np.array([o.probability for o in outs])
    pick = outs[int(rng.choice(len(outs), p=probs / probs.sum()))]
    return pick.label, pick.state, pick.probability


def enumerate_joint(
    state: SystemState, measurements: Sequence[tuple[str, str]], keep: bool = True
) -> list[Outcome]:
    """Enumerate sequential measurements; labels are the outcome tuple joined by ','."""
    branches = [Outcome("", 1.0, state)]
    for ensemble, basis in measurements:
        nxt = []
        for br in branches:
            for o in measurement_outcomes(br.state, ensemble, basis, keep=keep):
                label = o.label if not br.label else f"{br.label},{o.label}"
                nxt.append(Outcome(label, br.probability * o.probability, o.state))
        branches = nxt
    return branches


def rydberg_violations(state: SystemState) -> list[Component]:
    """Components with two Rydberg modes inside one blockade domain."""
    bad = []
    for comp in state.amplitudes:
        for d in state.domains:
            count = sum(len(comp[state.index(e)] & RYDBERG_MODES) for e in d)
            if count > 1:
                bad.append(comp)
                break
    return bad
