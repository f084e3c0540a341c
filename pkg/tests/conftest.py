"""Dense-matrix oracles independent of the sparse engine (s -> |0>, t -> |1>)."""
import numpy as np
import pytest

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=float)
Z = np.diag([1.0, -1.0])
KET = {"s": np.array([1.0, 0.0]), "t": np.array([0.0, 1.0])}
PHI_PLUS = (np.kron(KET["s"], KET["s"]) + np.kron(KET["t"], KET["t"])) / np.sqrt(2)
PHI_MINUS = (np.kron(KET["s"], KET["s"]) - np.kron(KET["t"], KET["t"])) / np.sqrt(2)
PSI_PLUS = (np.kron(KET["s"], KET["t"]) + np.kron(KET["t"], KET["s"])) / np.sqrt(2)


def kron(*ops):
    out = np.array([[1.0]])
    for op in ops:
        out = np.kron(out, op)
    return out


def cnot(n, control, target):
    """Dense CNOT on n qubits."""
    dim = 2**n
    mat = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        mat[j, i] = 1.0
    return mat


def engine_to_dense(state, qubit_order):
    """Convert an engine state whose ensembles each hold one of s/t into a dense vector."""
    n = len(qubit_order)
    vec = np.zeros(2**n, dtype=complex)
    for comp, amp in state.amplitudes.items():
        idx = 0
        for name in qubit_order:
            modes = {m.value for m in comp[state.index(name)]}
            assert len(modes & {"s", "t"}) == 1
            idx = (idx << 1) | (1 if "t" in modes else 0)
        vec[idx] += amp
    return vec


@pytest.fixture
def dense():
    class Dense:
        pass

    d = Dense()
    d.I2, d.X, d.Z, d.KET = I2, X, Z, KET
    d.PHI_PLUS, d.PHI_MINUS, d.PSI_PLUS = PHI_PLUS, PHI_MINUS, PSI_PLUS
    d.kron, d.cnot, d.to_dense = kron, cnot, engine_to_dense
    return d
