"""Gate-level circuit IR and brute-force unitary oracles.

The gate set is {X, H, CNOT, RZ, RX, MCRZ} with the rotation convention
RZ(t) = exp(-i t Z / 2), RX(t) = exp(-i t X / 2).  Basis ordering is
little-endian throughout: qubit 0 is the least significant bit of a
basis-state index.  Circuits are immutable; every operation that changes
a circuit returns a new one.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

GATE_KINDS = ("x", "h", "cnot", "rz", "rx", "mcrz")

_UNITARY_WIDTH_LIMIT = 10


@dataclass(frozen=True)
class Gate:
    """One gate instance.

    ``qubits`` holds (q,) for 1-qubit kinds, (control, target) for cnot and
    (*controls, target) for mcrz.  Angles are radians and are stored as
    given, never reduced mod 2*pi.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    @property
    def qubit(self) -> int:
        return self.qubits[0]

    @property
    def control(self) -> int:
        return self.qubits[0]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    def shifted(self, angle: float) -> "Gate":
        return Gate(self.kind, self.qubits, angle)


def x(q: int) -> Gate:
    return Gate("x", (int(q),))


def h(q: int) -> Gate:
    return Gate("h", (int(q),))


def cnot(control: int, target: int) -> Gate:
    if control == target:
        raise ValueError("cnot control and target must differ")
    return Gate("cnot", (int(control), int(target)))


def rz(q: int, angle: float) -> Gate:
    return Gate("rz", (int(q),), _checked_angle(angle))


def rx(q: int, angle: float) -> Gate:
    return Gate("rx", (int(q),), _checked_angle(angle))


def mcrz(controls, target: int, angle: float) -> Gate:
    ctrls = tuple(int(c) for c in controls)
    if len(set(ctrls)) != len(ctrls):
        raise ValueError("mcrz controls must be distinct")
    if target in ctrls:
        raise ValueError("mcrz controls must exclude the target")
    return Gate("mcrz", ctrls + (int(target),), _checked_angle(angle))


def _checked_angle(angle: float) -> float:
    a = float(angle)
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {angle!r}")
    return a


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over a fixed number of qubits."""

    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("circuit width must be at least 1")
        for g in self.gates:
            _validate_gate(g, self.width)

    def append(self, gate: Gate) -> "Circuit":
        """Return a new circuit with ``gate`` appended."""
        _validate_gate(gate, self.width)
        return Circuit(self.width, self.gates + (gate,))

    def extended(self, gates) -> "Circuit":
        return Circuit(self.width, self.gates + tuple(gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def new_circuit(width: int) -> Circuit:
    """Create an empty circuit on ``width`` qubits (width >= 1)."""
    return Circuit(int(width))


def _validate_gate(gate: Gate, width: int) -> None:
    if gate.kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    expected = {"x": 1, "h": 1, "rz": 1, "rx": 1, "cnot": 2}.get(gate.kind)
    if expected is not None and len(gate.qubits) != expected:
        raise ValueError(f"{gate.kind} takes {expected} qubit(s)")
    if gate.kind == "mcrz" and len(gate.qubits) < 1:
        raise ValueError("mcrz needs a target qubit")
    for q in gate.qubits:
        if not 0 <= q < width:
            raise ValueError(f"qubit {q} out of range for width {width}")
    if gate.kind == "cnot" and gate.qubits[0] == gate.qubits[1]:
        raise ValueError("cnot control and target must differ")
    if gate.kind == "mcrz":
        ctrls = gate.qubits[:-1]
        if len(set(ctrls)) != len(ctrls) or gate.qubits[-1] in ctrls:
            raise ValueError("mcrz controls must be distinct and exclude the target")
    if not math.isfinite(gate.angle):
        raise ValueError("gate angle must be finite")


@dataclass(frozen=True)
class CountReport:
    """Per-kind gate tally.  ``total`` sums every kind; mcrz nodes are
    flagged because they are not elementary."""

    x: int = 0
    h: int = 0
    cnot: int = 0
    rz: int = 0
    rx: int = 0
    mcrz: int = 0

    @property
    def total(self) -> int:
        return self.x + self.h + self.cnot + self.rz + self.rx + self.mcrz

    @property
    def non_elementary(self) -> bool:
        return self.mcrz > 0

    def __add__(self, other: "CountReport") -> "CountReport":
        return CountReport(
            self.x + other.x,
            self.h + other.h,
            self.cnot + other.cnot,
            self.rz + other.rz,
            self.rx + other.rx,
            self.mcrz + other.mcrz,
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "x": self.x,
            "h": self.h,
            "cnot": self.cnot,
            "rz": self.rz,
            "rx": self.rx,
            "mcrz": self.mcrz,
            "total": self.total,
        }


def gate_counts(circuit: Circuit) -> CountReport:
    """Exact per-kind gate tally of ``circuit``."""
    tally = dict.fromkeys(GATE_KINDS, 0)
    for g in circuit:
        tally[g.kind] += 1
    return CountReport(**tally)


# --- dense linear algebra -------------------------------------------------
#
# States are arrays whose FIRST axis is the 2**width basis index; extra
# trailing axes are batch dimensions, which is how unitary_of evolves all
# basis columns at once.

_SQ2 = 1.0 / math.sqrt(2.0)
_H_MAT = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_X_MAT = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _rz_mat(angle: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * angle), 0.0], [0.0, cmath.exp(0.5j * angle)]])


def _rx_mat(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _apply_1q(state: np.ndarray, mat: np.ndarray, q: int, width: int) -> np.ndarray:
    batch = state.shape[1:]
    view = state.reshape((2 ** (width - 1 - q), 2, 2**q) + batch)
    a, b = view[:, 0], view[:, 1]
    out = np.empty_like(view)
    out[:, 0] = mat[0, 0] * a + mat[0, 1] * b
    out[:, 1] = mat[1, 0] * a + mat[1, 1] * b
    return out.reshape(state.shape)


def _apply_cnot(state: np.ndarray, control: int, target: int, width: int) -> np.ndarray:
    idx = np.arange(2**width)
    src = np.where((idx >> control) & 1 == 1, idx ^ (1 << target), idx)
    return state[src]


def _mcrz_diagonal(gate: Gate, width: int) -> np.ndarray:
    idx = np.arange(2**width)
    selected = np.ones(2**width, dtype=bool)
    for c in gate.controls:
        selected &= ((idx >> c) & 1) == 1
    tgt_bit = (idx >> gate.target) & 1
    diag = np.ones(2**width, dtype=complex)
    diag[selected] = np.exp(-0.5j * gate.angle * (1.0 - 2.0 * tgt_bit[selected]))
    return diag


def apply_gate(state: np.ndarray, gate: Gate, width: int) -> np.ndarray:
    """Apply one gate to a state (first axis = basis index)."""
    if gate.kind == "x":
        return _apply_1q(state, _X_MAT, gate.qubit, width)
    if gate.kind == "h":
        return _apply_1q(state, _H_MAT, gate.qubit, width)
    if gate.kind == "rz":
        return _apply_1q(state, _rz_mat(gate.angle), gate.qubit, width)
    if gate.kind == "rx":
        return _apply_1q(state, _rx_mat(gate.angle), gate.qubit, width)
    if gate.kind == "cnot":
        return _apply_cnot(state, gate.control, gate.target, width)
    if gate.kind == "mcrz":
        diag = _mcrz_diagonal(gate, width)
        return state * diag.reshape((-1,) + (1,) * (state.ndim - 1))
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Dense unitary of the whole circuit, gates applied in list order.

    Column j is the image of basis state |j>.  Guarded to width <= 10.
    """
    if circuit.width > _UNITARY_WIDTH_LIMIT:
        raise CapacityError(
            f"unitary_of supports width <= {_UNITARY_WIDTH_LIMIT}, got {circuit.width}"
        )
    mat = np.eye(2**circuit.width, dtype=complex)
    for g in circuit:
        mat = apply_gate(mat, g, circuit.width)
    return mat


def equivalent_up_to_phase(a: Circuit, b: Circuit, tol: float = 1e-9) -> bool:
    """True iff the two unitaries agree up to one global phase factor.

    The phase is read off at the largest-magnitude entry of ``b``'s matrix.
    """
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    ua, ub = unitary_of(a), unitary_of(b)
    flat = np.argmax(np.abs(ub))
    ref = ub.reshape(-1)[flat]
    if abs(ref) < 1e-12:
        return bool(np.abs(ua - ub).max() <= tol)
    c = ua.reshape(-1)[flat] / ref
    mag = abs(c)
    if mag < 1e-12:
        return False
    c /= mag
    return bool(np.abs(ua - c * ub).max() <= tol)


# --- JSON interchange -----------------------------------------------------

def gate_to_obj(gate: Gate) -> dict:
    if gate.kind in ("x", "h"):
        return {"kind": gate.kind, "qubit": gate.qubit}
    if gate.kind in ("rz", "rx"):
        return {"kind": gate.kind, "qubit": gate.qubit, "angle": gate.angle}
    if gate.kind == "cnot":
        return {"kind": "cnot", "control": gate.control, "target": gate.target}
    return {
        "kind": "mcrz",
        "controls": list(gate.controls),
        "target": gate.target,
        "angle": gate.angle,
    }


def gate_from_obj(obj: dict) -> Gate:
    kind = obj["kind"]
    if kind == "x":
        return x(obj["qubit"])
    if kind == "h":
        return h(obj["qubit"])
    if kind == "rz":
        return rz(obj["qubit"], obj["angle"])
    if kind == "rx":
        return rx(obj["qubit"], obj["angle"])
    if kind == "cnot":
        return cnot(obj["control"], obj["target"])
    if kind == "mcrz":
        return mcrz(obj["controls"], obj["target"], obj["angle"])
    raise ValueError(f"unknown gate kind {kind!r}")


def circuit_to_json(circuit: Circuit, indent: int | None = None) -> str:
    payload = {"width": circuit.width, "gates": [gate_to_obj(g) for g in circuit]}
    return json.dumps(payload, indent=indent)


def circuit_from_json(text: str) -> Circuit:
    payload = json.loads(text)
    gates = tuple(gate_from_obj(o) for o in payload["gates"])
    return Circuit(int(payload["width"]), gates)
