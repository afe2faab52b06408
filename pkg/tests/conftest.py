"""Shared brute-force oracles and random-circuit generators."""
import numpy as np
import pytest

import qregress as q


def selector_diagonal(width, target, control_qubits, angles_by_state):
    """Dense matrix of prod_j exp(-i (a_j / 2) Z_target (x) |j><j|) where j
    is the little-endian value of the control qubits."""
    dim = 2**width
    idx = np.arange(dim)
    j_val = np.zeros(dim, dtype=int)
    for b, qubit in enumerate(control_qubits):
        j_val |= ((idx >> qubit) & 1) << b
    t_bit = (idx >> target) & 1
    diag = np.ones(dim, dtype=complex)
    for j, angle in enumerate(angles_by_state):
        sel = j_val == j
        diag[sel] *= np.exp(-0.5j * angle * (1.0 - 2.0 * t_bit[sel]))
    return np.diag(diag)


def max_unitary_distance(a, b):
    """Entrywise distance after aligning the global phase at b's largest entry."""
    flat = int(np.argmax(np.abs(b)))
    ref = b.reshape(-1)[flat]
    c = a.reshape(-1)[flat] / ref
    c /= abs(c)
    return float(np.abs(a - c * b).max())


def random_circuit(width, n_gates, rng, kinds=("x", "h", "cnot", "rz", "rx")):
    circ = q.new_circuit(width)
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "cnot" and width >= 2:
            c, t = rng.choice(width, size=2, replace=False)
            circ = circ.append(q.cnot(int(c), int(t)))
        elif kind in ("rz", "rx"):
            gate = q.rz if kind == "rz" else q.rx
            circ = circ.append(gate(int(rng.integers(width)), float(rng.uniform(-np.pi, np.pi))))
        elif kind in ("x", "h"):
            gate = q.x if kind == "x" else q.h
            circ = circ.append(gate(int(rng.integers(width))))
    return circ


def random_normalized_table(n_rows, n_features, rng):
    return q.DataTable(rng.normal(size=(n_rows, n_features + 1))).normalized()


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)
