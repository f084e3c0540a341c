"""Reduced-state bookkeeping for one entangled link.

A link is summarised by the fidelity ``F`` of its two-excitation block, the
single-excitation weight ``q1`` and the vacuum weight ``q0``.  First-order
``O(x)`` terms are taken as ``multiplier * x`` with a default multiplier of 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

PHI_MIX = "phi_mix"
PSI_MIX = "psi_mix"


class NoGainWarning(UserWarning):
    """A purification round lowered the fidelity."""


@dataclass(frozen=True)
class MixedPairState:
    F: float
    q1: float = 0.0
    q0: float = 0.0
    form: str = PHI_MIX

    def __post_init__(self):
        if not 0.0 <= self.F <= 1.0:
            raise ValueError(f"F={self.F} outside [0, 1]")
        if self.q1 < 0 or self.q0 < 0 or self.q1 + self.q0 > 1.0:
            raise ValueError("leakage weights must satisfy 0 <= q1 + q0 <= 1")
        if self.form not in (PHI_MIX, PSI_MIX):
            raise ValueError(f"unknown form {self.form!r}")

    @property
    def two_excitation_weight(self) -> float:
        return 1.0 - self.q1 - self.q0


def local_state(F_loc: float, p1: float = 0.0, p0: float = 0.0) -> MixedPairState:
    return MixedPairState(F_loc, p1, p0, PHI_MIX)


def link(a: MixedPairState, b: MixedPairState, multiplier: float = 1.0) -> MixedPairState:
    """Heralded linking of two local pairs by two-photon interference.

    The two-photon coincidence removes the vacuum part; the single-excitation
    weight is carried through as the mean of the two inputs.
    """
    F = a.F * b.F + (1.0 - a.F) * (1.0 - b.F)
    q1 = multiplier * 0.5 * (a.q1 + b.q1)
    return MixedPairState(F, q1, 0.0, PHI_MIX)


def link_from_local(F_loc: float, p1: float = 0.0, multiplier: float = 1.0) -> MixedPairState:
    if not 0.5 <= F_loc <= 1.0:
        raise ValueError("F_loc must lie in [0.5, 1]")
    loc = local_state(F_loc, p1)
    return link(loc, loc, multiplier)


def swap_update(
    state: MixedPairState, F_cnot: float, eta_d: float = 1.0, multiplier: float = 1.0
) -> tuple[MixedPairState, float]:
    F = state.F
    new_F = (F * F + (1 - F) ** 2) * F_cnot
    success = (1.0 - 2.0 * multiplier * state.q1) * eta_d**2
    return replace(state, F=min(1.0, new_F)), success


def purify_update(
    state: MixedPairState, F_cnot: float, eta_d: float = 1.0, multiplier: float = 1.0
) -> tuple[MixedPairState, float]:
    F = state.F
    if F <= 0.0:
        raise ValueError("purification needs F > 0")
    keep = F * F + (1 - F) ** 2
    new_F = F * F / keep * F_cnot**2
    if new_F < F:
        warnings.warn(f"purification lowers F from {F:.6f} to {new_F:.6f}", NoGainWarning, stacklevel=2)
    q1 = min(1.0, multiplier * state.q1 / (F * F))
    form = PSI_MIX if state.form == PHI_MIX else PHI_MIX
    return MixedPairState(min(1.0, new_F), q1, 0.0, form), keep * eta_d**2


@dataclass(frozen=True)
class TrajectoryStep:
    level: int
    action: str  # link | swap | purify
    F: float
    q1: float
    success_prob: float


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[TrajectoryStep, ...]

    @property
    def final(self) -> TrajectoryStep:
        return self.steps[-1]

    @property
    def purify_rounds(self) -> int:
        return sum(1 for s in self.steps if s.action == "purify")

    def rounds_at(self, level: int) -> int:
        return sum(1 for s in self.steps if s.action == "purify" and s.level == level)

    def step(self, level: int, action: str) -> list[TrajectoryStep]:
        return [s for s in self.steps if s.level == level and s.action == action]

    def good_subspace_weight(self) -> float:
        return 1.0 - self.final.q1

    def to_rows(self) -> list[dict]:
        return [
            {"level": s.level, "action": s.action, "F": s.F, "q1": s.q1, "success_prob": s.success_prob}
            for s in self.steps
        ]


def chain_trajectory(
    F_loc: float,
    F_cnot: float,
    n: int,
    schedule: str | Sequence[int] = "auto",
    threshold: float = 0.9,
    final_target: float | None = 0.94,
    max_rounds: int = 8,
    p1: float = 0.0,
    eta_d: float = 1.0,
    multiplier: float = 1.0,
) -> Trajectory:
    """Fidelity and leakage along linking, ``n`` swap levels and purification.

    ``schedule="auto"``: after each swap level purify while F <= threshold;
    at the top level also keep purifying while F < final_target.  A sequence
    schedule lists swap levels, one entry per purification round.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    state = link_from_local(F_loc, p1, multiplier)
    steps = [TrajectoryStep(0, "link", state.F, state.q1, 1.0)]
    rounds = 0
    explicit = None if schedule == "auto" else list(schedule)

    def purify_once(level):
        nonlocal state, rounds
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoGainWarning)
            state, ps = purify_update(state, F_cnot, eta_d, multiplier)
        rounds += 1
        steps.append(TrajectoryStep(level, "purify", state.F, state.q1, ps))

    for level in range(1, n + 1):
        state, ps = swap_update(state, F_cnot, eta_d, multiplier)
        steps.append(TrajectoryStep(level, "swap", state.F, state.q1, ps))
        if explicit is not None:
            for _ in range(explicit.count(level)):
                purify_once(level)
            continue
        while state.F <= threshold and rounds < max_rounds:
            purify_once(level)
        if level == n and final_target is not None:
            while state.F < final_target and rounds < max_rounds:
                purify_once(level)
    return Trajectory(tuple(steps))
