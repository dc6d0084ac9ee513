"""Controlled UCC factors and multi-controlled RZ lowering.

A factor controlled on orbitals ``C`` first copies each control onto a clean
ancilla, then runs every Pauli-exponential block with an MCRZ conditioned on
the copies, then uncopies. The copies keep the condition intact while parity
cascades scramble the register.

MCRZ lowering (``k`` controls, CNOT cost ``2, 8, 26, 80``):

* ``k = 1``: ``RZ(-a/2) CNOT RZ(-a/2) CNOT RZ(a)`` on the target.
* ``k >= 2``: square-root recursion with ``V = RZ(a/2)``
  ``C^{k-1}V, CNOT(c1, c2), C^{k-1}V†, CNOT(c1, c2), C^{k-1}V``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuit import CNOT, RZ, Circuit, CircuitError, Gate
from .fermion import ExcitationOperator, JwConvention, OperatorError
from .synthesis import synth_ucc_factor

MAX_CONTROLS = 4


@dataclass(frozen=True)
class ControlledFactorSpec:
    """``exp(theta (A - A†))`` applied only when every control orbital is occupied."""

    controls: tuple[int, ...]
    op: ExcitationOperator
    theta: float
    copy_ancillas: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "copy_ancillas", tuple(self.copy_ancillas))
        if len(self.controls) != len(self.copy_ancillas):
            raise OperatorError("need exactly one copy ancilla per control")
        if len(set(self.controls)) != len(self.controls):
            raise OperatorError("repeated control orbital")
        if len(set(self.copy_ancillas)) != len(self.copy_ancillas):
            raise OperatorError("repeated copy ancilla")
        if set(self.controls) & set(self.op.orbitals):
            raise OperatorError("controls overlap the excitation orbitals")


def synth_controlled_ucc(spec: ControlledFactorSpec, conv: JwConvention,
                         n_qubits: int | None = None) -> Circuit:
    """Controlled factor; copy ancillas must start (and end) in ``|0>``."""
    n = conv.total_qubits if n_qubits is None else n_qubits
    if not spec.controls:
        return synth_ucc_factor(spec.op, spec.theta, conv, n)
    op_qubits = conv.qubits(spec.op.orbitals)
    ctrl_qubits = conv.qubits(spec.controls)
    lo, hi = min(op_qubits), max(op_qubits)
    for a in spec.copy_ancillas:
        if not 0 <= a < n:
            raise OperatorError(f"copy ancilla {a} outside the register")
        if a in ctrl_qubits or a in op_qubits:
            raise OperatorError(f"copy ancilla {a} overlaps a control or excitation qubit")
        if lo <= a <= hi:
            raise OperatorError(f"copy ancilla {a} lies inside the excitation's parity span")
    copies = tuple(CNOT(c, a) for c, a in zip(ctrl_qubits, spec.copy_ancillas))
    body = synth_ucc_factor(spec.op, spec.theta, conv, n, controls=spec.copy_ancillas)
    return Circuit(n, copies + body.gates + copies[::-1])


def _mcrz_gates(controls: Sequence[int], target: int, angle: float) -> list[Gate]:
    if len(controls) == 1:
        c = controls[0]
        return [RZ(target, -angle / 2), CNOT(c, target), RZ(target, -angle / 2),
                CNOT(c, target), RZ(target, angle)]
    c1, c2, rest = controls[0], controls[1], list(controls[2:])
    half = angle / 2
    return (_mcrz_gates([c2] + rest, target, half) + [CNOT(c1, c2)]
            + _mcrz_gates([c2] + rest, target, -half) + [CNOT(c1, c2)]
            + _mcrz_gates([c1] + rest, target, half))


def lower_mcrz(gate: Gate, n_qubits: int | None = None) -> Circuit:
    """CNOT + RZ circuit equal to the multi-controlled rotation."""
    if gate.kind != "MCRZ":
        raise CircuitError(f"expected MCRZ, got {gate.kind}")
    k = len(gate.controls)
    if not 1 <= k <= MAX_CONTROLS:
        raise CircuitError(f"MCRZ lowering supports 1..{MAX_CONTROLS} controls, got {k}")
    n = max(gate.qubits) + 1 if n_qubits is None else n_qubits
    return Circuit(n, tuple(_mcrz_gates(gate.controls, gate.target, gate.angle)))


def mcrz_cnot_cost(k: int) -> int:
    """CNOTs used by ``lower_mcrz`` with ``k`` controls."""
    if k < 1:
        raise ValueError("k must be positive")
    return 2 if k == 1 else 3 * mcrz_cnot_cost(k - 1) + 2


def lower_circuit(c: Circuit) -> Circuit:
    """Replace every MCRZ by its lowering."""
    gates: list[Gate] = []
    for g in c.gates:
        if g.kind == "MCRZ":
            gates.extend(lower_mcrz(g, c.n_qubits).gates)
        else:
            gates.append(g)
    return Circuit(c.n_qubits, tuple(gates))
