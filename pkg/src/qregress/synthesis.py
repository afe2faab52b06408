"""Circuit construction: Gray-code multiplexors, naive and folded encoders.

The key primitive is the uniformly controlled Z rotation.  A block of
2**n rotations on one target, interleaved with CNOTs whose controls walk
a closed Gray-code cycle, realizes prod_j exp(-i (a_j / 2) Z_target (x) |j><j|)
when the rotation angles are the scaled Walsh-Hadamard transform of the
per-selector angles a_j.  Everything here reduces to that identity.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from . import circuit as cir
from .circuit import Circuit, CountReport, Gate
from .data import DataTable, RegisterLayout, flatten_padded, layout_for
from .errors import CapacityError

_GRAY_LIMIT = 20
_DECOMPOSE_LIMIT = 12
_STATE_PREP_LIMIT = 1024


def gray_sequence(n: int) -> list[int]:
    """Control-bit flip order of the closed Gray-code walk on n bits.

    Element i is the bit that flips between consecutive Gray codes; the
    final element returns the top bit so the CNOT parity telescopes back
    to identity over the full cycle.
    """
    if n < 1:
        raise ValueError("gray_sequence needs n >= 1")
    if n > _GRAY_LIMIT:
        raise CapacityError(f"gray_sequence supports n <= {_GRAY_LIMIT}")
    out = []
    for i in range(2**n):
        k = i + 1
        out.append((k & -k).bit_length() - 1 if k < 2**n else n - 1)
    return out


def walsh_angles(alphas) -> np.ndarray:
    """Scaled Walsh-Hadamard transform of per-selector angles.

    out[y] = 2**-n * sum_j (-1)**popcount(y & j) * alphas[j], indexed by
    parity mask y.  Applying the map twice returns the input divided by
    2**n.  The accumulation is plain left-to-right so rebuilding a folded
    circuit reproduces these floats bit for bit.
    """
    a = np.asarray(alphas, dtype=float)
    n_sel = a.shape[0]
    if n_sel == 0 or n_sel & (n_sel - 1):
        raise ValueError("alphas length must be a power of two")
    out = np.empty(n_sel, dtype=float)
    for y in range(n_sel):
        acc = 0.0
        for j in range(n_sel):
            term = a[j]
            acc += -term if (y & j).bit_count() & 1 else term
        out[y] = acc / n_sel
    return out


def _gray_codes(n: int) -> list[int]:
    return [i ^ (i >> 1) for i in range(2**n)]


def _uniform_block(controls, target: int, angles_by_mask, pushed: bool) -> list[Gate]:
    """Gate list of one uniformly controlled rotation cycle.

    ``angles_by_mask[y]`` is the rotation angle for parity mask y over the
    control list.  ``pushed=False`` emits the plain form (RZ on the target,
    CNOTs control -> target); ``pushed=True`` emits the basis-changed form
    with RX rotations and CNOT direction reversed.
    """
    controls = list(controls)
    n = len(controls)
    rot = cir.rx if pushed else cir.rz
    if n == 0:
        return [rot(target, float(angles_by_mask[0]))]
    seq = gray_sequence(n)
    codes = _gray_codes(n)
    gates: list[Gate] = []
    for k in range(2**n):
        gates.append(rot(target, float(angles_by_mask[codes[k]])))
        c = controls[seq[k]]
        gates.append(cir.cnot(target, c) if pushed else cir.cnot(c, target))
    return gates


def synthesize_uniform_z(control_qubits, target: int, alphas) -> Circuit:
    """Folded realization of prod_j exp(-i (a_j / 2) Z_target (x) |j><j|).

    Control state j is read little-endian over ``control_qubits``.  The
    identity is exact, including global phase.
    """
    controls = list(control_qubits)
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape[0] != 2 ** len(controls):
        raise ValueError("need exactly 2**len(controls) angles")
    width = max([target, *controls]) + 1
    gates = _uniform_block(controls, target, walsh_angles(alphas), pushed=False)
    return Circuit(width, tuple(gates))


def decompose_mcrz(gate: Gate) -> Circuit:
    """Expand one multi-controlled RZ into its Gray-cycle of elementary
    gates: 2**n RZ on the target alternating with 2**n CNOTs."""
    if gate.kind != "mcrz":
        raise ValueError("decompose_mcrz takes an mcrz gate")
    controls = gate.controls
    n = len(controls)
    if n > _DECOMPOSE_LIMIT:
        raise CapacityError(f"decompose_mcrz supports up to {_DECOMPOSE_LIMIT} controls")
    width = max(gate.qubits) + 1
    if n == 0:
        return Circuit(width, (cir.rz(gate.target, gate.angle),))
    base = gate.angle / 2**n
    seq = gray_sequence(n)
    codes = _gray_codes(n)
    gates = []
    for k in range(2**n):
        angle = -base if codes[k].bit_count() & 1 else base
        gates.append(cir.rz(gate.target, angle))
        gates.append(cir.cnot(controls[seq[k]], gate.target))
    return Circuit(width, tuple(gates))


def decompose_all_mcrz(circ: Circuit) -> Circuit:
    """Replace every mcrz node in ``circ`` by its elementary expansion."""
    gates: list[Gate] = []
    for g in circ:
        if g.kind == "mcrz":
            gates.extend(decompose_mcrz(g).gates)
        else:
            gates.append(g)
    return Circuit(circ.width, tuple(gates))


# --- encoded-table circuits -------------------------------------------------

def _require_normalized(table: DataTable) -> None:
    if not table.is_normalized:
        raise ValueError("table must be unit-normalized; call DataTable.normalized()")


def _selector_gates(selector: int, qubits, width_bits: int) -> list[Gate]:
    """X gates flipping the zero bits of ``selector`` over ``qubits``."""
    return [cir.x(qubits[b]) for b in range(width_bits) if not (selector >> b) & 1]


def build_ud_naive(table: DataTable, layout: RegisterLayout) -> Circuit:
    """Phase-encode the flattened table onto the data-prep ancilla.

    Emits the superposition layer, then one X-conjugated multi-controlled
    RZ per padded table entry k with angle 2 * x_k.
    """
    _require_normalized(table)
    flat = flatten_padded(table, layout)
    gates: list[Gate] = [cir.h(layout.anc1)]
    gates += [cir.h(q) for q in layout.data_qubits]
    data = layout.data_qubits
    for k in range(layout.k_pad):
        pattern = _selector_gates(k, data, layout.n_data)
        gates += pattern
        gates.append(cir.mcrz(data, layout.anc1, 2.0 * flat[k]))
        gates += pattern
    return Circuit(layout.width, tuple(gates))


def build_uc_naive(phis, layout: RegisterLayout) -> Circuit:
    """Apply the per-column coefficient gadgets on the second ancilla.

    Column m gets exp(+i phi_m Z (x) 1 (x) |m><m|), realized as an
    X-conjugated multi-controlled RZ with angle -2 * phi_m; padded columns
    keep their zero-angle rotation.
    """
    phis = np.asarray(phis, dtype=float)
    gates: list[Gate] = [cir.h(layout.anc2)]
    cols = layout.column_qubits
    for m in range(layout.m_pad):
        angle = -2.0 * phis[m] if m < phis.shape[0] else 0.0
        pattern = _selector_gates(m, cols, layout.n_m)
        gates += pattern
        gates.append(cir.mcrz(cols, layout.anc2, angle))
        gates += pattern
    return Circuit(layout.width, tuple(gates))


def _padded_phi_angles(phis, layout: RegisterLayout) -> np.ndarray:
    out = np.zeros(layout.m_pad, dtype=float)
    out[: len(phis)] = [-2.0 * p for p in phis]
    return out


def build_regression_circuit(table: DataTable, phis, mode: str = "optimized"):
    """Full encode-weight-measure circuit for one (table, phis) instance.

    naive mode: superposition layers, X-conjugated multi-controlled RZ
    gadgets and a closing H on every qubit so a computational measurement
    reads the X basis.  optimized mode: the folded form with RX rotations
    and ancilla-to-data CNOTs, measured computationally.  Both define the
    same measurement distribution.  Returns (circuit, layout).
    """
    layout = layout_for(table.n_rows, table.n_features)
    phis = np.asarray(phis, dtype=float)
    if phis.shape != (table.n_features + 1,):
        raise ValueError(
            f"need {table.n_features + 1} angles, got {phis.shape}"
        )
    _require_normalized(table)
    if mode == "naive":
        ud = build_ud_naive(table, layout)
        uc = build_uc_naive(phis, layout)
        closing = [cir.h(q) for q in range(layout.width)]
        return Circuit(layout.width, ud.gates + uc.gates + tuple(closing)), layout
    if mode == "optimized":
        flat = flatten_padded(table, layout)
        ud = _uniform_block(
            layout.data_qubits, layout.anc1, walsh_angles(2.0 * flat), pushed=True
        )
        uc = _uniform_block(
            layout.column_qubits,
            layout.anc2,
            walsh_angles(_padded_phi_angles(phis, layout)),
            pushed=True,
        )
        return Circuit(layout.width, tuple(ud + uc)), layout
    raise ValueError(f"mode must be 'naive' or 'optimized', got {mode!r}")


# --- standalone state preparation -------------------------------------------

class PostSelectionRule:
    """Which ancilla outcome keeps a shot after running a prep circuit."""

    def __init__(self, qubit: int, basis: str, outcome: int):
        self.qubit = qubit
        self.basis = basis
        self.outcome = outcome

    def __repr__(self):
        return f"PostSelectionRule(qubit={self.qubit}, basis={self.basis!r}, outcome={self.outcome})"


def build_state_prep(x, normalize: bool = True):
    """Ancilla-assisted preparation of amplitudes proportional to sin(x_k).

    Returns (circuit, rule, angles): the circuit puts the data register and
    the ancilla in uniform superposition, phase-encodes the (optionally
    unit-normalized) input through one folded rotation cycle, and the rule
    says to keep shots where the ancilla reads 1 in the X basis.  The
    post-selected register then carries sin(x_k) / ||sin(x)|| with success
    probability sum_k sin(x_k)**2 / 2**p.
    """
    v = np.asarray(x, dtype=float).ravel()
    if v.size == 0 or v.size > _STATE_PREP_LIMIT:
        raise ValueError(f"input length must be in [1, {_STATE_PREP_LIMIT}]")
    if not np.all(np.isfinite(v)):
        raise ValueError("input must be finite")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot encode the zero vector")
    if normalize:
        v = v / norm
    p = (v.size - 1).bit_length()
    padded = np.zeros(2**p, dtype=float)
    padded[: v.size] = v
    anc = p
    gates: list[Gate] = [cir.h(anc)]
    gates += [cir.h(q) for q in range(p)]
    gates += _uniform_block(range(p), anc, walsh_angles(2.0 * padded), pushed=False)
    rule = PostSelectionRule(qubit=anc, basis="x", outcome=1)
    return Circuit(p + 1, tuple(gates)), rule, padded


# --- gate-count formula ------------------------------------------------------

def naive_gate_count_formula(K: int, M: int) -> CountReport:
    """Closed-form tally of the naive construction after expanding every
    multi-controlled RZ: 2**(n_l + n_m) selectors of 2**(n_l + n_m) CNOT and
    RZ gates each, plus the X conjugation patterns and the two H layers.
    """
    if K < 1 or M < 1:
        raise ValueError("K and M must be at least 1")
    cols = M + 1
    if K < cols or K % cols:
        warnings.warn(
            f"K={K} is not a multiple of M+1={cols}; counting the padded register",
            stacklevel=2,
        )
    rows = max(1, -(-K // cols))
    layout = layout_for(rows, M)
    k_pad, m_pad = layout.k_pad, layout.m_pad
    cnot_rz = k_pad * k_pad + m_pad * m_pad
    return CountReport(
        x=k_pad * layout.n_data + m_pad * layout.n_m,
        h=2 * (layout.n_data + 2),
        cnot=cnot_rz,
        rz=cnot_rz,
    )


def optimized_gate_count(K: int, M: int) -> CountReport:
    """Gate tally of the folded circuit: one rotation and one CNOT per
    padded selector of each register."""
    cols = M + 1
    rows = max(1, -(-K // cols))
    layout = layout_for(rows, M)
    n = layout.k_pad + layout.m_pad
    return CountReport(rx=n, cnot=n)


# --- reference cascade baseline ----------------------------------------------

def _cascade_levels(amps: np.ndarray) -> list[np.ndarray]:
    """Rotation angles per cascade stage for a real amplitude vector.

    Level c holds 2**c angles; theta = 2*atan2(odd child, even child) of the
    running magnitude tree, which places every sign at the leaves.
    """
    p = (amps.size - 1).bit_length()
    w = amps.astype(float)
    stages: list[np.ndarray] = []
    for _ in range(p):
        even, odd = w[0::2], w[1::2]
        stages.append(2.0 * np.arctan2(odd, even))
        w = np.sqrt(even**2 + odd**2)
    stages.reverse()
    return stages


def synthesize_reference_real_state(x) -> Circuit:
    """Comparison baseline: a plain multiplexed-rotation cascade preparing
    sum_k x_k |k> with no ancilla and no post-selection.

    Each multiplexor element is a generic Y-axis rotation spelled in the
    native gate set as RZ(-pi/2) RX(theta) RZ(pi/2); the frame rotations are
    kept per element, zero angles included, so the emitted totals reflect a
    generic cascade rather than a hand-specialized one.
    """
    v = np.asarray(x, dtype=float).ravel()
    n_amp = v.size
    if n_amp < 2 or n_amp & (n_amp - 1):
        raise ValueError("amplitude count must be a power of two >= 2")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
        raise ValueError("input must have unit norm")
    p = n_amp.bit_length() - 1
    stages = _cascade_levels(v)
    gates: list[Gate] = []
    half_pi = math.pi / 2.0
    for c, thetas in enumerate(stages):
        target = p - 1 - c
        controls = list(range(p - c, p))
        if not controls:
            gates += [
                cir.rz(target, -half_pi),
                cir.rx(target, float(thetas[0])),
                cir.rz(target, half_pi),
            ]
            continue
        seq = gray_sequence(c)
        codes = _gray_codes(c)
        w = walsh_angles(thetas)
        for k in range(2**c):
            gates += [
                cir.rz(target, -half_pi),
                cir.rx(target, float(w[codes[k]])),
                cir.rz(target, half_pi),
            ]
            gates.append(cir.cnot(controls[seq[k]], target))
    return Circuit(p, tuple(gates))
