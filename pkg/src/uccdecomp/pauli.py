"""Pauli strings with exact phase tracking.

Qubit ordering convention (shared with the simulator): qubit 0 is the
least-significant bit of a basis-state index, so the dense matrix of a string
over ``n`` qubits is ``kron(P[n-1], ..., P[1], P[0])``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

AXES = ("I", "X", "Y", "Z")

# (a, b) -> (phase, c) with a.b = phase * c
_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_ORACLE_CAP = 16


class DimensionCapError(ValueError):
    """Raised when a dense construction would exceed the oracle qubit cap."""


def oracle_cap() -> int:
    """Maximum qubit count for dense oracle matrices (env override)."""
    return int(os.environ.get("UCCDECOMP_ORACLE_CAP", DEFAULT_ORACLE_CAP))


def axis_product(a: str, b: str) -> tuple[complex, str]:
    """Product of two single-qubit axes as ``(phase, axis)``."""
    if a == "I":
        return 1, b
    if b == "I":
        return 1, a
    if a == b:
        return 1, "I"
    return _PRODUCT[(a, b)]


def format_coefficient(c: complex) -> str:
    c = complex(c)
    re, im = c.real + 0.0, c.imag + 0.0
    if im == 0.0:
        return repr(re)
    if re == 0.0:
        return repr(im) + "j"
    return f"({re!r}{'+' if im >= 0 else '-'}{abs(im)!r}j)"


@dataclass(frozen=True)
class PauliString:
    """Sparse tensor product of Pauli axes with a complex coefficient.

    ``axes`` is a sorted tuple of ``(qubit, axis)`` pairs holding only the
    non-identity factors.
    """

    axes: tuple[tuple[int, str], ...] = ()
    coefficient: complex = 1.0

    def __post_init__(self):
        seen = set()
        for q, a in self.axes:
            if a not in ("X", "Y", "Z"):
                raise ValueError(f"invalid axis {a!r} on qubit {q}")
            if q < 0 or q in seen:
                raise ValueError(f"invalid or repeated qubit index {q}")
            seen.add(q)
        if list(self.axes) != sorted(self.axes):
            object.__setattr__(self, "axes", tuple(sorted(self.axes)))
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @classmethod
    def from_dict(cls, axes: Mapping[int, str], coefficient: complex = 1.0) -> "PauliString":
        return cls(tuple(sorted((q, a) for q, a in axes.items() if a != "I")), coefficient)

    @classmethod
    def from_label(cls, label: str, qubits: Iterable[int] | None = None,
                   coefficient: complex = 1.0) -> "PauliString":
        """Build from a dense label such as ``"XXYX"``.

        Character ``k`` acts on ``qubits[k]`` (default: qubit ``k``).
        """
        qubits = list(range(len(label))) if qubits is None else list(qubits)
        if len(qubits) != len(label):
            raise ValueError("label and qubit list differ in length")
        return cls.from_dict(dict(zip(qubits, label)), coefficient)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Inverse of ``str()``: ``"0.5j * X0 Y3 Z5"``."""
        coeff_text, _, ops = text.partition("*")
        coeff = complex(coeff_text.strip().replace(" ", ""))
        axes = {}
        for tok in ops.split():
            if tok == "I":
                continue
            axes[int(tok[1:])] = tok[0]
        return cls.from_dict(axes, coeff)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.axes)

    def axis(self, qubit: int) -> str:
        for q, a in self.axes:
            if q == qubit:
                return a
        return "I"

    def label(self, qubits: Iterable[int]) -> str:
        return "".join(self.axis(q) for q in qubits)

    @property
    def key(self) -> tuple[tuple[int, str], ...]:
        return self.axes

    def with_coefficient(self, c: complex) -> "PauliString":
        return PauliString(self.axes, c)

    def dagger(self) -> "PauliString":
        return PauliString(self.axes, self.coefficient.conjugate())

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return abs(self.coefficient.imag) <= tol

    def is_antihermitian(self, tol: float = 0.0) -> bool:
        return abs(self.coefficient.real) <= tol

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return PauliString(self.axes, self.coefficient * other)

    def __rmul__(self, other):
        return PauliString(self.axes, self.coefficient * other)

    def __str__(self) -> str:
        ops = " ".join(f"{a}{q}" for q, a in self.axes) or "I"
        return f"{format_coefficient(self.coefficient)} * {ops}"


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with the phase folded into the coefficient."""
    merged = dict(a.axes)
    phase: complex = 1
    for q, bx in b.axes:
        ax = merged.get(q, "I")
        p, c = axis_product(ax, bx)
        phase *= p
        if c == "I":
            merged.pop(q, None)
        else:
            merged[q] = c
    return PauliString(tuple(sorted(merged.items())), a.coefficient * b.coefficient * phase)


def anticommuting_index_count(a: PauliString, b: PauliString) -> int:
    """Number of qubits where both axes are non-identity and differ."""
    bd = dict(b.axes)
    return sum(1 for q, ax in a.axes if q in bd and bd[q] != ax)


def commutes(a: PauliString, b: PauliString) -> bool:
    return anticommuting_index_count(a, b) % 2 == 0


def _check_cap(n_qubits: int, cap: int | None) -> None:
    cap = oracle_cap() if cap is None else cap
    if n_qubits > cap:
        raise DimensionCapError(f"{n_qubits} qubits exceeds the oracle cap of {cap}")


def to_matrix(p: PauliString, n_qubits: int, cap: int | None = None, sparse: bool = False):
    """Dense (or scipy CSR) matrix of ``p`` on ``n_qubits`` qubits."""
    if p.axes and n_qubits < p.axes[-1][0] + 1:
        raise ValueError("n_qubits smaller than the highest qubit index")
    _check_cap(n_qubits, cap)
    if sparse:
        import scipy.sparse as sp

        mat = sp.identity(1, dtype=complex, format="csr")
        for q in reversed(range(n_qubits)):
            mat = sp.kron(mat, sp.csr_matrix(_MATRICES[p.axis(q)]), format="csr")
        return p.coefficient * mat
    mat = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n_qubits)):
        mat = np.kron(mat, _MATRICES[p.axis(q)])
    return p.coefficient * mat


@dataclass(frozen=True)
class PauliSum:
    """Canonical sum of Pauli strings: merged axes, zero terms dropped.

    Terms are kept sorted by their axes tuple, which is the canonical term
    order used by circuit synthesis.
    """

    terms: tuple[PauliString, ...] = field(default=())

    def __post_init__(self):
        acc: dict[tuple, complex] = {}
        for t in self.terms:
            acc[t.axes] = acc.get(t.axes, 0) + t.coefficient
        canon = tuple(PauliString(k, c) for k, c in sorted(acc.items()) if c != 0)
        object.__setattr__(self, "terms", canon)

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scale(-1)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return PauliSum(tuple(multiply(a, b) for a in self.terms for b in other.terms))
        return self.scale(other)

    def scale(self, c: complex) -> "PauliSum":
        return PauliSum(tuple(t * c for t in self.terms))

    def dagger(self) -> "PauliSum":
        return PauliSum(tuple(t.dagger() for t in self.terms))

    def coefficient(self, axes: tuple[tuple[int, str], ...]) -> complex:
        for t in self.terms:
            if t.axes == axes:
                return t.coefficient
        return 0j

    def to_matrix(self, n_qubits: int, cap: int | None = None, sparse: bool = False):
        if sparse:
            import scipy.sparse as sp

            total = sp.csr_matrix((2**n_qubits, 2**n_qubits), dtype=complex)
        else:
            _check_cap(n_qubits, cap)
            total = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
        for t in self.terms:
            total = total + to_matrix(t, n_qubits, cap, sparse=sparse)
        return total

    def __str__(self) -> str:
        return "\n".join(str(t) for t in self.terms) or "0"
