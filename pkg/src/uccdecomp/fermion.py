"""Fermionic excitation operators and their Jordan-Wigner images.

Convention: orbital ``p`` maps to qubit ``q = conv.qubit(p)`` and

    a_p  = 1/2 (X_q + i Y_q) * prod_{r > q} Z_r
    a_p† = 1/2 (X_q - i Y_q) * prod_{r > q} Z_r

with ``|0>`` meaning "empty". The Z-chain therefore runs over qubits with a
strictly larger index, which fixes the fermionic sign of ``a_p`` acting on a
basis index ``x`` as ``(-1) ** popcount(x >> (q + 1))``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from .pauli import PauliString, PauliSum, anticommuting_index_count

MAX_RANK = 6

_OP_RE = re.compile(r"^\s*A\s*\[\s*([0-9,\s]*)->([0-9,\s]*)\]\s*$")


class OperatorError(ValueError):
    """Invalid excitation operator or orbital mapping."""


@dataclass(frozen=True)
class ExcitationOperator:
    """Rank-n excitation ``a†_{v1} ... a†_{vn} a_{on} ... a_{o1}``.

    Parameters
    ----------
    occupied : tuple of int
        Orbitals emptied by the excitation, in listed order ``(o1, ..., on)``.
    virtual : tuple of int
        Orbitals filled by the excitation, in listed order ``(v1, ..., vn)``.
    """

    occupied: tuple[int, ...]
    virtual: tuple[int, ...]

    def __post_init__(self):
        occ, virt = tuple(int(i) for i in self.occupied), tuple(int(a) for a in self.virtual)
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "virtual", virt)
        if len(occ) != len(virt):
            raise OperatorError("occupied and virtual lists differ in length")
        if not 1 <= len(occ) <= MAX_RANK:
            raise OperatorError(f"rank must lie in 1..{MAX_RANK}, got {len(occ)}")
        if min(occ + virt) < 0:
            raise OperatorError("orbital indices must be non-negative")
        if len(set(occ)) != len(occ) or len(set(virt)) != len(virt):
            raise OperatorError("repeated orbital inside an index list")
        if set(occ) & set(virt):
            raise OperatorError("occupied and virtual orbitals overlap")

    @property
    def rank(self) -> int:
        return len(self.occupied)

    @property
    def orbitals(self) -> tuple[int, ...]:
        return self.occupied + self.virtual

    def adjoint(self) -> "ExcitationOperator":
        """The de-excitation, itself written as an excitation."""
        return ExcitationOperator(self.virtual, self.occupied)

    @classmethod
    def parse(cls, text: str) -> "ExcitationOperator":
        """Parse ``A[i1,i2->a1,a2]``."""
        m = _OP_RE.match(text)
        if not m:
            raise SyntaxError(f"cannot parse operator {text!r}")
        occ, virt = ([int(t) for t in part.split(",") if t.strip()] for part in m.groups())
        return cls(tuple(occ), tuple(virt))

    def __str__(self) -> str:
        return f"A[{','.join(map(str, self.occupied))}->{','.join(map(str, self.virtual))}]"


@dataclass(frozen=True)
class JwConvention:
    """Orbital-to-qubit placement for the Jordan-Wigner map."""

    total_qubits: int
    orbital_to_qubit: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.total_qubits < 1:
            raise OperatorError("total_qubits must be positive")
        if self.orbital_to_qubit is not None:
            perm = tuple(int(q) for q in self.orbital_to_qubit)
            if sorted(perm) != list(range(self.total_qubits)):
                raise OperatorError("orbital_to_qubit must be a bijection on [0, M)")
            object.__setattr__(self, "orbital_to_qubit", perm)

    def qubit(self, orbital: int) -> int:
        if not 0 <= orbital < self.total_qubits:
            raise OperatorError(f"orbital {orbital} outside [0, {self.total_qubits})")
        return orbital if self.orbital_to_qubit is None else self.orbital_to_qubit[orbital]

    def qubits(self, orbitals: Iterable[int]) -> tuple[int, ...]:
        return tuple(self.qubit(p) for p in orbitals)

    def check(self, op: ExcitationOperator) -> None:
        for p in op.orbitals:
            self.qubit(p)


def jw_ladder(orbital: int, dagger: bool, conv: JwConvention) -> PauliSum:
    """Two-term image of ``a_p`` (``dagger=False``) or ``a_p†``."""
    q = conv.qubit(orbital)
    chain = tuple((r, "Z") for r in range(q + 1, conv.total_qubits))
    y_coeff = -0.5j if dagger else 0.5j
    return PauliSum((PauliString(((q, "X"),) + chain, 0.5), PauliString(((q, "Y"),) + chain, y_coeff)))


def ladder_sequence(op: ExcitationOperator) -> list[tuple[int, bool]]:
    """Ladder factors of ``op`` in application order (rightmost first)."""
    return [(p, False) for p in op.occupied] + [(p, True) for p in reversed(op.virtual)]


@lru_cache(maxsize=256)
def _generator_cached(op: ExcitationOperator, conv: JwConvention) -> PauliSum:
    # operator product: left factor is the last one applied
    factors = [jw_ladder(p, d, conv) for p, d in reversed(ladder_sequence(op))]
    excitation = reduce(lambda a, b: a * b, factors)
    return excitation - excitation.dagger()


def jw_generator(op: ExcitationOperator, conv: JwConvention) -> PauliSum:
    """Pauli image of ``A - A†``: anti-Hermitian, ``2**(2n-1)`` terms."""
    conv.check(op)
    return _generator_cached(op, conv)


def pairwise_commutation_report(terms: PauliSum | Sequence[PauliString]) -> np.ndarray:
    """Symmetric integer table of anticommuting-index counts between terms."""
    ts = list(terms)
    out = np.zeros((len(ts), len(ts)), dtype=int)
    for i, a in enumerate(ts):
        for j in range(i + 1, len(ts)):
            out[i, j] = out[j, i] = anticommuting_index_count(a, ts[j])
    return out


def excitation_masks(op: ExcitationOperator, conv: JwConvention) -> tuple[int, int]:
    """Bit masks ``(occupied, virtual)`` in qubit space."""
    occ = sum(1 << q for q in conv.qubits(op.occupied))
    virt = sum(1 << q for q in conv.qubits(op.virtual))
    return occ, virt


def apply_excitation(op: ExcitationOperator, det: int, conv: JwConvention) -> tuple[int, int] | None:
    """Act with ``op`` on basis index ``det``.

    Returns ``(sign, new_det)`` or ``None`` when the result vanishes.
    """
    x = det
    sign = 1
    for p, dagger in ladder_sequence(op):
        q = conv.qubit(p)
        if bool(x >> q & 1) == dagger:
            return None
        if bin(x >> (q + 1)).count("1") & 1:
            sign = -sign
        x ^= 1 << q
    return sign, x


def excitation_sign(op: ExcitationOperator, conv: JwConvention) -> int:
    """Sign of ``op`` acting on its minimal source determinant."""
    occ, _ = excitation_masks(op, conv)
    result = apply_excitation(op, occ, conv)
    assert result is not None
    return result[0]
