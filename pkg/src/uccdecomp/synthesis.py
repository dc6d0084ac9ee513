"""Pauli-exponential and UCC-factor synthesis via CNOT cascades.

``synth_pauli_exponential(P, phi)`` realizes ``exp(-i phi/2 P)``:

* basis layer: ``H`` on X axes, ``RX(-pi/2)`` on Y axes,
* CNOT cascade between consecutive support qubits, ascending,
* ``RZ(phi')`` on the highest support qubit,
* mirrored cascade and inverse basis layer.

Conjugating Z by ``RX(pi/2)`` gives ``-Y``, so ``phi' = (-1)**(#Y) * phi``.
"""
from __future__ import annotations

import math
from typing import Sequence

from .circuit import CNOT, MCRZ, RX, RZ, Circuit, Gate, H, concat
from .fermion import ExcitationOperator, JwConvention, OperatorError, jw_generator
from .pauli import PauliString


_TOL = 1e-12


def _basis_layer(p: PauliString, entering: bool) -> list[Gate]:
    gates = []
    for q, a in p.axes:
        if a == "X":
            gates.append(H(q))
        elif a == "Y":
            gates.append(RX(q, -math.pi / 2 if entering else math.pi / 2))
    return gates


def cascade(support: Sequence[int]) -> list[Gate]:
    """Adjacent-pair CNOT chain accumulating parity on ``support[-1]``."""
    s = sorted(support)
    return [CNOT(s[i], s[i + 1]) for i in range(len(s) - 1)]


def synth_pauli_exponential(p: PauliString, theta: float, n_qubits: int | None = None,
                            controls: Sequence[int] = ()) -> Circuit:
    """Circuit for ``exp(-i theta/2 P)``, optionally controlled on ``controls``.

    ``p`` must carry coefficient ``+1`` or ``-1``; the sign folds into the angle.
    With controls the central rotation becomes an MCRZ, which is the whole
    controlled action because the conjugating layers cancel when it is idle.
    """
    if not p.axes:
        raise ValueError("cannot synthesize the exponential of an identity string")
    c = p.coefficient
    if abs(c.imag) > _TOL or abs(abs(c.real) - 1) > _TOL:
        raise ValueError(f"Pauli string must have coefficient +-1, got {c}")
    n = p.axes[-1][0] + 1 if n_qubits is None else n_qubits
    n_y = sum(1 for _, a in p.axes if a == "Y")
    angle = theta * (1 if c.real > 0 else -1) * (-1) ** n_y
    chain = cascade(p.support)
    target = p.support[-1]
    if controls:
        if target in controls or set(controls) & set(p.support):
            raise ValueError("controls overlap the string support")
        pivot = MCRZ(controls, target, angle)
    else:
        pivot = RZ(target, angle)
    gates = _basis_layer(p, True) + chain + [pivot] + chain[::-1] + _basis_layer(p, False)
    return Circuit(n, tuple(gates))


def parity_of_cascade(bits: Sequence[int]) -> int:
    """Value left on the last qubit after a CNOT cascade: XOR of inputs."""
    out = 0
    for b in bits:
        out ^= int(b) & 1
    return out


def factor_terms(op: ExcitationOperator, conv: JwConvention) -> list[tuple[PauliString, float]]:
    """``(unit string, gamma)`` pairs with generator ``= sum i*gamma*P``."""
    out = []
    for t in jw_generator(op, conv):
        if abs(t.coefficient.real) > _TOL:
            raise AssertionError("generator term is not anti-Hermitian")
        out.append((t.with_coefficient(1.0), t.coefficient.imag))
    return out


def synth_ucc_factor(op: ExcitationOperator, theta: float, conv: JwConvention,
                     n_qubits: int | None = None, controls: Sequence[int] = (),
                     term_order: Sequence[int] | None = None) -> Circuit:
    """Circuit for ``exp(theta * (A - A†))``.

    Each term ``i*gamma*P`` contributes ``exp(-i phi/2 P)`` with
    ``phi = -2*theta*gamma``. ``term_order`` permutes the canonical order.
    """
    n = conv.total_qubits if n_qubits is None else n_qubits
    terms = factor_terms(op, conv)
    if term_order is not None:
        if sorted(term_order) != list(range(len(terms))):
            raise OperatorError("term_order must be a permutation of the term indices")
        terms = [terms[i] for i in term_order]
    return concat(n, (synth_pauli_exponential(p, -2.0 * theta * g, n, controls) for p, g in terms))


def worst_case_operator(rank: int, orbitals: int) -> ExcitationOperator:
    """Rank-N operator whose Pauli terms all span qubits ``0..M-1``."""
    if orbitals < 2 * rank:
        raise OperatorError(f"{orbitals} orbitals cannot host a rank-{rank} excitation")
    occ = tuple(range(rank))
    virt = tuple(range(rank, 2 * rank - 1)) + (orbitals - 1,)
    return ExcitationOperator(occ, virt)
