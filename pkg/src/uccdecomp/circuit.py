"""Gate-level circuit IR: composition, adjoint, counting, text export.

Gates apply left to right. ``unitary`` is an oracle path built from
per-gate tensor contractions and is independent of the simulator kernels.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .pauli import _check_cap

GATE_KINDS = ("H", "X", "RX", "RZ", "CNOT", "MCRZ")
_HALF_PI = math.pi / 2


class CircuitError(ValueError):
    """Malformed circuit or gate."""


@dataclass(frozen=True)
class Gate:
    """One gate. ``qubits`` lists controls first and the target last."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = {"H": 1, "X": 1, "RX": 1, "RZ": 1, "CNOT": 2}
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind in arity and len(self.qubits) != arity[self.kind]:
            raise CircuitError(f"{self.kind} takes {arity[self.kind]} operand(s)")
        if self.kind == "MCRZ" and len(self.qubits) < 2:
            raise CircuitError("MCRZ needs at least one control")
        if len(set(self.qubits)) != len(self.qubits) or min(self.qubits) < 0:
            raise CircuitError(f"bad operands {self.qubits} for {self.kind}")
        parametric = self.kind in ("RX", "RZ", "MCRZ")
        if parametric:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    def inverse(self) -> "Gate":
        if self.angle is None:
            return self
        return Gate(self.kind, self.qubits, -self.angle)

    def matrix(self) -> np.ndarray:
        """Dense matrix; tensor factors follow ``qubits`` order, first = most significant."""
        if self.kind == "H":
            return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind == "RX":
            c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
            return np.array([[c, -1j * s], [-1j * s, c]])
        if self.kind == "RZ":
            return np.diag([np.exp(-0.5j * self.angle), np.exp(0.5j * self.angle)])
        if self.kind == "CNOT":
            return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        dim = 2 ** len(self.qubits)
        diag = np.ones(dim, dtype=complex)
        diag[-2] = np.exp(-0.5j * self.angle)
        diag[-1] = np.exp(0.5j * self.angle)
        return np.diag(diag)


def H(q: int) -> Gate:
    return Gate("H", (q,))


def X(q: int) -> Gate:
    return Gate("X", (q,))


def RX(q: int, angle: float) -> Gate:
    return Gate("RX", (q,), angle)


def RZ(q: int, angle: float) -> Gate:
    return Gate("RZ", (q,), angle)


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def MCRZ(controls: Sequence[int], target: int, angle: float) -> Gate:
    return Gate("MCRZ", tuple(controls) + (target,), angle)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if max(g.qubits) >= self.n_qubits:
                raise CircuitError(f"{g.kind} on {g.qubits} exceeds {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        return compose(self, other)

    def widen(self, n_qubits: int) -> "Circuit":
        return Circuit(n_qubits, self.gates)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """``a`` then ``b``."""
    if a.n_qubits != b.n_qubits:
        raise CircuitError(f"qubit-count mismatch: {a.n_qubits} vs {b.n_qubits}")
    return Circuit(a.n_qubits, a.gates + b.gates)


def concat(n_qubits: int, parts: Iterable[Circuit]) -> Circuit:
    gates: list[Gate] = []
    for p in parts:
        if p.n_qubits != n_qubits:
            raise CircuitError(f"qubit-count mismatch: {p.n_qubits} vs {n_qubits}")
        gates.extend(p.gates)
    return Circuit(n_qubits, tuple(gates))


def adjoint(c: Circuit) -> Circuit:
    return Circuit(c.n_qubits, tuple(g.inverse() for g in reversed(c.gates)))


@dataclass(frozen=True)
class GateCounts:
    cnot: int = 0
    single_qubit_rotation: int = 0
    single_qubit_clifford: int = 0
    multi_controlled_rotation: int = 0

    def __post_init__(self):
        if min(self.cnot, self.single_qubit_rotation, self.single_qubit_clifford,
               self.multi_controlled_rotation) < 0:
            raise ValueError("gate counts must be non-negative")

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def single_qubit(self) -> int:
        return self.single_qubit_rotation + self.single_qubit_clifford


def _is_clifford_rx(angle: float) -> bool:
    k = angle / _HALF_PI
    return abs(k - round(k)) < 1e-12


def count_gates(c: Circuit) -> GateCounts:
    """Per-category tallies. RZ always counts as a rotation."""
    cnot = rot = cliff = mc = 0
    for g in c.gates:
        if g.kind == "CNOT":
            cnot += 1
        elif g.kind == "RZ":
            rot += 1
        elif g.kind == "RX":
            if _is_clifford_rx(g.angle):
                cliff += 1
            else:
                rot += 1
        elif g.kind == "MCRZ":
            mc += 1
        else:
            cliff += 1
    return GateCounts(cnot, rot, cliff, mc)


# ---------------------------------------------------------------- text format

_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'
_LINE_RE = re.compile(r"^(h|x|cx|rx|rz)(?:\(([^)]*)\))?\s+q\[(\d+)\](?:\s*,\s*q\[(\d+)\])?;$")
_QREG_RE = re.compile(r"^qreg\s+q\[(\d+)\];$")
_NAMES = {"H": "h", "X": "x", "CNOT": "cx", "RX": "rx", "RZ": "rz"}
_KINDS = {v: k for k, v in _NAMES.items()}


def export_text(c: Circuit) -> str:
    """QASM-2-like listing; angles use ``repr`` so import is bit-exact."""
    out = io.StringIO()
    out.write(_HEADER)
    out.write(f"qreg q[{c.n_qubits}];\n")
    for g in c.gates:
        if g.kind == "MCRZ":
            raise CircuitError("cannot export an unlowered MCRZ gate")
        name = _NAMES[g.kind]
        args = f"({g.angle!r})" if g.angle is not None else ""
        ops = ",".join(f"q[{q}]" for q in g.qubits)
        out.write(f"{name}{args} {ops};\n")
    return out.getvalue()


def parse_text(text: str) -> Circuit:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("//")]
    if len(lines) < 3 or lines[0] != "OPENQASM 2.0;" or lines[1] != 'include "qelib1.inc";':
        raise SyntaxError("missing OPENQASM header")
    m = _QREG_RE.match(lines[2])
    if not m:
        raise SyntaxError("missing qreg declaration")
    n = int(m.group(1))
    gates = []
    for ln in lines[3:]:
        m = _LINE_RE.match(ln)
        if not m:
            raise SyntaxError(f"cannot parse line {ln!r}")
        name, arg, q0, q1 = m.groups()
        kind = _KINDS[name]
        qubits = (int(q0),) if q1 is None else (int(q0), int(q1))
        angle = float(arg) if arg is not None else None
        gates.append(Gate(kind, qubits, angle))
    return Circuit(n, tuple(gates))


# ---------------------------------------------------------------- oracle

def apply_matrix_to_tensor(tensor: np.ndarray, n_qubits: int, gate: Gate) -> np.ndarray:
    """Contract ``gate.matrix()`` into a ``(2,)*n + rest`` tensor."""
    k = len(gate.qubits)
    mat = gate.matrix().reshape((2,) * (2 * k))
    axes = [n_qubits - 1 - q for q in gate.qubits]
    moved = np.tensordot(mat, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(moved, list(range(k)), axes)


def unitary(c: Circuit, cap: int | None = None) -> np.ndarray:
    """Dense unitary; qubit 0 is the least-significant index bit."""
    _check_cap(c.n_qubits, cap)
    dim = 2 ** c.n_qubits
    tensor = np.eye(dim, dtype=complex).reshape((2,) * c.n_qubits + (dim,))
    for g in c.gates:
        tensor = apply_matrix_to_tensor(tensor, c.n_qubits, g)
    return tensor.reshape(dim, dim)


# ---------------------------------------------------------------- CSV

COUNTS_HEADER = "rank,M,scheme,cnot,rot,clifford"


def counts_csv(rows: Iterable[tuple[int, int, str, GateCounts]]) -> str:
    lines = [COUNTS_HEADER]
    for rank, m, scheme, gc in rows:
        lines.append(f"{rank},{m},{scheme},{gc.cnot},{gc.single_qubit_rotation},{gc.single_qubit_clifford}")
    return "\n".join(lines) + "\n"
