import json
import math

import numpy as np
import pytest

from rydberg_repeater.engine import (
    COMPUTATIONAL,
    PLUSMINUS,
    IllDefinedPulse,
    InvalidQubitSubspace,
    LayoutMismatch,
    Mode,
    Pulse,
    PulseKind,
    apply_pulse,
    apply_pulse_traced,
    basis_state,
    collective,
    enumerate_joint,
    fidelity,
    half_pi,
    measure,
    measurement_outcomes,
    pi,
    superpose,
)
from rydberg_repeater.protocols import bell_pair

S, T, R, RP, SP, TP = Mode.S, Mode.T, Mode.R, Mode.R_PRIME, Mode.S_PRIME, Mode.T_PRIME
INV_SQRT2 = 1 / math.sqrt(2)


def amps(state):
    return {tuple(tuple(sorted(m.value for m in e)) for e in k): v for k, v in state.amplitudes.items()}


class TestApplyPulse:
    def test_collective_from_ground(self):
        out = apply_pulse(basis_state(["A"]), collective("A", R))
        assert amps(out) == {(("r",),): 1}

    def test_half_pi_creates_superposition(self):
        st = basis_state(["A"], {"A": [S, TP]})
        out = apply_pulse(st, half_pi("A", S, R))
        got = amps(out)
        assert got[(("s", "t'"),)] == pytest.approx(INV_SQRT2)
        assert got[(("r", "t'"),)] == pytest.approx(INV_SQRT2)

    def test_half_pi_sign_on_reverse_branch(self):
        st = basis_state(["A"], {"A": [R]})
        got = amps(apply_pulse(st, half_pi("A", S, R)))
        assert got[(("s",),)] == pytest.approx(-INV_SQRT2)
        assert got[(("r",),)] == pytest.approx(INV_SQRT2)

    def test_blockade_suppresses_second_rydberg(self):
        st = superpose(
            [(1, basis_state(["A"], {"A": [S, TP]})), (1, basis_state(["A"], {"A": [R, TP]}))]
        )
        out, blocked = apply_pulse_traced(st, pi("A", TP, RP))
        got = amps(out)
        assert blocked == 1
        assert got[(("r'", "s"),)] == pytest.approx(INV_SQRT2)
        assert got[(("r", "t'"),)] == pytest.approx(INV_SQRT2)

    def test_uncoupled_component_is_identity(self):
        st = basis_state(["A"], {"A": [T]})
        assert amps(apply_pulse(st, pi("A", S, R))) == {(("t",),): 1}

    def test_collective_removes_existing_rydberg(self):
        st = basis_state(["A"], {"A": [R]})
        assert amps(apply_pulse(st, collective("A", R))) == {((),): 1}

    def test_blockade_across_domain(self):
        st = basis_state(["A", "B"], {"A": [R], "B": [S]}, [("A", "B")])
        out, blocked = apply_pulse_traced(st, pi("B", S, R))
        assert blocked == 1
        assert amps(out) == amps(st)

    def test_no_blockade_outside_domain(self):
        st = basis_state(["A", "B"], {"A": [R], "B": [S]})
        out, blocked = apply_pulse_traced(st, pi("B", S, R))
        assert blocked == 0
        assert amps(out) == {(("r",), ("r",)): 1}

    def test_ill_defined_pulse(self):
        st = basis_state(["A"], {"A": [S, R]})
        with pytest.raises(IllDefinedPulse):
            apply_pulse(st, pi("A", S, R))

    def test_pulse_validation(self):
        with pytest.raises(ValueError):
            Pulse(PulseKind.COLLECTIVE, "A", (None, S))
        with pytest.raises(ValueError):
            Pulse(PulseKind.SINGLE, "A", (S, S))

    def test_pi_is_involution(self):
        st = superpose([(1, basis_state(["A"], {"A": [S]})), (1j, basis_state(["A"], {"A": [T]}))])
        p = pi("A", S, T)
        twice = apply_pulse(apply_pulse(st, p), p)
        assert fidelity(twice, st) == pytest.approx(1.0, abs=1e-14)


class TestMeasure:
    def test_bell_marginal(self):
        outs = measurement_outcomes(bell_pair("A", "B"), "A", COMPUTATIONAL)
        assert {o.label: o.probability for o in outs} == pytest.approx({"s": 0.5, "t": 0.5})
        s_branch = next(o for o in outs if o.label == "s")
        assert amps(s_branch.state) == pytest.approx({(("s",), ("s",)): 1})

    def test_plusminus_on_s(self):
        outs = measurement_outcomes(basis_state(["A"], {"A": [S]}), "A", PLUSMINUS)
        assert {o.label: o.probability for o in outs} == pytest.approx({"+": 0.5, "-": 0.5})

    def test_joint_enumeration_four_outcomes(self):
        outs = enumerate_joint(bell_pair("A", "B"), [("A", PLUSMINUS), ("B", COMPUTATIONAL)])
        assert sorted(o.label for o in outs) == ["+,s", "+,t", "-,s", "-,t"]
        for o in outs:
            assert o.probability == pytest.approx(0.25, abs=1e-14)

    def test_sampled_measure_is_seeded(self):
        st = bell_pair("A", "B")
        a = [measure(st, "A", COMPUTATIONAL, np.random.default_rng(5))[0] for _ in range(3)]
        b = [measure(st, "A", COMPUTATIONAL, np.random.default_rng(5))[0] for _ in range(3)]
        assert a == b

    def test_keep_false_drops_ensemble(self):
        outs = measurement_outcomes(bell_pair("A", "B"), "A", PLUSMINUS, keep=False)
        assert all(o.state.ensembles == ("B",) for o in outs)

    def test_invalid_subspace(self):
        with pytest.raises(InvalidQubitSubspace):
            measurement_outcomes(basis_state(["A"], {"A": [R]}), "A", COMPUTATIONAL)


class TestFidelity:
    def test_identical(self):
        st = bell_pair("A", "B")
        assert fidelity(st, st) == pytest.approx(1.0)

    def test_orthogonal_basis(self):
        assert fidelity(basis_state(["A"], {"A": [S]}), basis_state(["A"], {"A": [T]})) == 0.0

    def test_orthogonal_bell_pair(self):
        assert fidelity(bell_pair("A", "B", "phi+"), bell_pair("A", "B", "phi-")) == pytest.approx(0.0, abs=1e-15)

    def test_layout_mismatch(self):
        with pytest.raises(LayoutMismatch):
            fidelity(basis_state(["A"]), basis_state(["B"]))


def test_json_dump_is_ordered():
    st = bell_pair("A", "B")
    records = json.loads(st.to_json())
    assert [r["component"] for r in records] == [[["s"], ["s"]], [["t"], ["t"]]]
    assert records[0]["re"] == pytest.approx(INV_SQRT2)
    assert records[0]["im"] == 0.0
