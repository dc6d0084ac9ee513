"""Dense state-vector simulation and the two correctness oracles.

Amplitudes are indexed with qubit 0 as the least-significant bit. Internally
states are ``(2**n, B)`` arrays so a batch of inputs shares one pass over
the circuit.

Circuits run through a fused *program*:

* consecutive single-qubit gates on one qubit are multiplied together, with
  exact inverse pairs (``H H``, ``RX(a) RX(-a)``, ``X X``) cancelled
  symbolically;
* runs of CNOT / X / RZ form a monomial block: an affine GF(2) map
  ``x -> Lx ^ b`` plus parity-dependent phases, applied in two passes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .circuit import Circuit, Gate
from .fermion import ExcitationOperator, JwConvention, excitation_masks, jw_generator, ladder_sequence
from .pauli import DimensionCapError, _check_cap

MAX_QUBITS = 18
NORM_TOL = 1e-10


class SimulationCapError(DimensionCapError):
    """State would exceed the simulator's hard qubit cap."""


def _check_sim_cap(n: int) -> None:
    if n > MAX_QUBITS:
        raise SimulationCapError(f"{n} qubits exceeds the simulator cap of {MAX_QUBITS}")


@dataclass
class StateVector:
    """Normalized amplitudes over ``n_qubits`` qubits."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_sim_cap(self.n_qubits)
        amp = np.ascontiguousarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != 2 ** self.n_qubits:
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, got {amp.shape[0]}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        self.amplitudes = amp

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "StateVector":
        amp = np.zeros(2 ** n_qubits, dtype=complex)
        amp[index] = 1.0
        return cls(n_qubits, amp)

    @classmethod
    def determinant(cls, n_qubits: int, occupied: Iterable[int]) -> "StateVector":
        """Basis state with the listed qubits set."""
        return cls.basis(n_qubits, determinant_index(occupied))

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "StateVector":
        v = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
        return cls(n_qubits, v / np.linalg.norm(v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def determinant_index(occupied: Iterable[int]) -> int:
    idx = 0
    for q in occupied:
        idx |= 1 << q
    return idx


def _as_batch(amps: np.ndarray) -> tuple[np.ndarray, bool]:
    a = np.asarray(amps, dtype=complex)
    single = a.ndim == 1
    return np.array(a.reshape(a.shape[0], -1), dtype=complex, order="C"), single


# ---------------------------------------------------------------- gate actions

def _rz_phases(angle: float) -> tuple[complex, complex]:
    return complex(np.exp(-0.5j * angle)), complex(np.exp(0.5j * angle))


def _apply_single_gate(state: np.ndarray, n: int, g: Gate) -> np.ndarray:
    """Unfused action of one gate on a batch; returns the (possibly new) buffer."""
    if max(g.qubits) >= n:
        raise IndexError(f"{g.kind} on {g.qubits} outside a {n}-qubit state")
    if g.kind in ("H", "RX"):
        kernels.apply_1q(state, g.target, g.matrix())
        return state
    if g.kind == "RZ":
        p0, p1 = _rz_phases(g.angle)
        kernels.apply_phase_terms(state, np.array([1 << g.target], dtype=np.uint64),
                                  np.array([p0]), np.array([p1]))
        return state
    if g.kind == "MCRZ":
        _apply_mcrz(state, g)
        return state
    rows = np.array([1 << i for i in range(n)], dtype=np.uint64)
    flips = 0
    if g.kind == "X":
        flips = 1 << g.target
    else:
        rows[g.target] |= np.uint64(1 << g.controls[0])
    out = np.empty_like(state)
    kernels.apply_affine_permutation(state, out, rows, np.uint64(flips))
    return out


def _apply_mcrz(state: np.ndarray, g: Gate) -> None:
    idx = np.arange(state.shape[0], dtype=np.int64)
    cmask = determinant_index(g.controls)
    on = (idx & cmask) == cmask
    p0, p1 = _rz_phases(g.angle)
    tbit = (idx >> g.target) & 1
    state[on & (tbit == 0)] *= p0
    state[on & (tbit == 1)] *= p1


def apply_gate(s: StateVector, g: Gate) -> StateVector:
    """New state after one gate."""
    buf, _ = _as_batch(s.amplitudes)
    out = _apply_single_gate(buf, s.n_qubits, g)
    return StateVector(s.n_qubits, out[:, 0])


# ---------------------------------------------------------------- fused program

@dataclass(frozen=True)
class Program:
    """Fused instruction list for one circuit."""

    n_qubits: int
    ops: tuple

    def run(self, amps: np.ndarray) -> np.ndarray:
        """Apply to a ``(2**n,)`` or ``(2**n, B)`` array; returns a new array."""
        state, single = _as_batch(amps)
        if state.shape[0] != 2 ** self.n_qubits:
            raise ValueError("state dimension does not match the program")
        spare = None
        for op in self.ops:
            kind = op[0]
            if kind == "1q":
                kernels.apply_1q(state, op[1], op[2])
            elif kind == "layer":
                kernels.apply_1q_layer(state, op[1], op[2])
            elif kind == "phase":
                kernels.apply_phase_terms(state, op[1], op[2], op[3])
            elif kind == "perm":
                if spare is None:
                    spare = np.empty_like(state)
                kernels.apply_affine_permutation(state, spare, op[1], op[2])
                state, spare = spare, state
            else:
                _apply_mcrz(state, op[1])
        return state[:, 0].copy() if single else state

    @property
    def passes(self) -> int:
        return len(self.ops)


def _is_inverse_pair(a: Gate, b: Gate) -> bool:
    if a.kind != b.kind or a.qubits != b.qubits:
        return False
    if a.angle is None:
        return True
    return a.angle == -b.angle


class _Fuser:
    def __init__(self, n: int):
        self.n = n
        self.ops: list[tuple] = []
        self.pending: dict[int, list[Gate]] = {}
        self._reset_block()

    def _reset_block(self):
        self.rows = [1 << i for i in range(self.n)]
        self.flips = 0
        self.phases: dict[int, list[complex]] = {}
        self.touched: set[int] = set()

    def flush_qubit(self, q: int) -> None:
        gates = self.pending.pop(q, None)
        if not gates:
            return
        m = np.eye(2, dtype=complex)
        for g in gates:
            m = g.matrix() @ m
        self.ops.append(("1q", q, m))

    def flush_block(self) -> None:
        if not self.touched:
            return
        if self.phases:
            masks = np.array(list(self.phases), dtype=np.uint64)
            p0 = np.array([v[0] for v in self.phases.values()], dtype=complex)
            p1 = np.array([v[1] for v in self.phases.values()], dtype=complex)
            self.ops.append(("phase", masks, p0, p1))
        identity = self.flips == 0 and all(r == 1 << i for i, r in enumerate(self.rows))
        if not identity:
            self.ops.append(("perm", np.array(self.rows, dtype=np.uint64), np.uint64(self.flips)))
        self._reset_block()

    def flush_all(self) -> None:
        for q in sorted(self.pending):
            self.flush_qubit(q)
        self.flush_block()

    def add(self, g: Gate) -> None:
        if g.kind in ("H", "RX"):
            q = g.target
            if q in self.touched:
                self.flush_block()
            stack = self.pending.setdefault(q, [])
            if stack and _is_inverse_pair(stack[-1], g):
                stack.pop()
            else:
                stack.append(g)
            return
        if g.kind == "MCRZ":
            self.flush_all()
            self.ops.append(("mcrz", g))
            return
        for q in g.qubits:
            self.flush_qubit(q)
            self.touched.add(q)
        if g.kind == "X":
            self.flips ^= 1 << g.target
        elif g.kind == "CNOT":
            c, t = g.qubits
            self.rows[t] ^= self.rows[c]
            if self.flips >> c & 1:
                self.flips ^= 1 << t
        else:  # RZ: phase depends on the current bit, i.e. parity(row & x) ^ flip
            p0, p1 = _rz_phases(g.angle)
            if self.flips >> g.target & 1:
                p0, p1 = p1, p0
            acc = self.phases.setdefault(self.rows[g.target], [1.0 + 0j, 1.0 + 0j])
            acc[0] *= p0
            acc[1] *= p1


MAX_LAYER = 10


def _merge_layers(ops: list[tuple]) -> list[tuple]:
    """Group adjacent single-qubit ops on distinct qubits into one sweep."""
    out: list[tuple] = []
    run: list[tuple] = []

    def close():
        if len(run) == 1:
            out.append(run[0])
        elif run:
            qs = np.array([o[1] for o in run], dtype=np.int64)
            out.append(("layer", qs, np.ascontiguousarray(np.stack([o[2] for o in run]))))
        run.clear()

    for op in ops:
        if op[0] != "1q":
            close()
            out.append(op)
            continue
        if len(run) == MAX_LAYER or any(o[1] == op[1] for o in run):
            close()
        run.append(op)
    close()
    return out


def compile_program(c: Circuit, layers: bool = True) -> Program:
    """Fuse ``c`` into kernel calls; ``layers`` merges adjacent 1q sweeps."""
    _check_sim_cap(c.n_qubits)
    f = _Fuser(c.n_qubits)
    for g in c.gates:
        f.add(g)
    f.flush_all()
    return Program(c.n_qubits, tuple(_merge_layers(f.ops) if layers else f.ops))


def run_circuit(c: Circuit, s: StateVector) -> StateVector:
    return StateVector(c.n_qubits, compile_program(c).run(s.amplitudes))


def run_unfused(c: Circuit, amps: np.ndarray) -> np.ndarray:
    """Reference gate-by-gate simulation (no fusion)."""
    state, single = _as_batch(amps)
    for g in c.gates:
        state = _apply_single_gate(state, c.n_qubits, g)
    return state[:, 0].copy() if single else state


# ---------------------------------------------------------------- exact factor

def factor_pairs(op: ExcitationOperator, conv: JwConvention, n_qubits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source indices, partner indices and JW signs with ``A|src> = sign |dst>``."""
    conv.check(op)
    occ, virt = excitation_masks(op, conv)
    idx = np.arange(2 ** n_qubits, dtype=np.int64)
    src = idx[((idx & occ) == occ) & ((idx & virt) == 0)]
    x = src.copy()
    parity = np.zeros(src.shape, dtype=np.int64)
    for p, _ in ladder_sequence(op):
        q = conv.qubit(p)
        parity ^= np.bitwise_count(x >> (q + 1)).astype(np.int64) & 1
        x ^= 1 << q
    return src, x, 1 - 2 * parity


def apply_ucc_factor_exact_array(amps: np.ndarray, op: ExcitationOperator, theta: float,
                                 conv: JwConvention, n_qubits: int) -> np.ndarray:
    """``exp(theta (A - A†))`` via the closed-form SU(2) action on determinant pairs.

    Every excitable ``|src>`` couples only to ``|dst> = A|src>/sign``; all
    other amplitudes are copied untouched.
    """
    _check_sim_cap(n_qubits)
    if conv.total_qubits > n_qubits:
        raise ValueError("convention spans more qubits than the state")
    a = np.array(amps, dtype=complex)
    src, dst, sign = factor_pairs(op, conv, n_qubits)
    c, s = math.cos(theta), math.sin(theta)
    shape = (-1,) + (1,) * (a.ndim - 1)
    ss = (s * sign).reshape(shape)
    a_src, a_dst = a[src], a[dst]
    a[src] = c * a_src - ss * a_dst
    a[dst] = c * a_dst + ss * a_src
    return a


def apply_ucc_factor_exact(s: StateVector, op: ExcitationOperator, theta: float,
                           conv: JwConvention) -> StateVector:
    return StateVector(s.n_qubits, apply_ucc_factor_exact_array(s.amplitudes, op, theta, conv, s.n_qubits))


# ---------------------------------------------------------------- dense oracle

def generator_matrix(op: ExcitationOperator, conv: JwConvention, sparse: bool = False):
    return jw_generator(op, conv).to_matrix(conv.total_qubits, sparse=sparse)


@lru_cache(maxsize=16)
def _sparse_generator(op: ExcitationOperator, conv: JwConvention):
    g = generator_matrix(op, conv, sparse=True).tocsr()
    g.data.setflags(write=False)
    return g


def matrix_exponential_oracle(op: ExcitationOperator, theta: float, conv: JwConvention,
                              cap: int | None = None) -> np.ndarray:
    """Dense ``exp(theta G)`` from scaled squaring of the Pauli-sum matrix."""
    from scipy.linalg import expm

    _check_cap(conv.total_qubits, cap)
    return expm(theta * generator_matrix(op, conv))


def oracle_apply(op: ExcitationOperator, theta: float, conv: JwConvention, amps: np.ndarray,
                 cap: int | None = None) -> np.ndarray:
    """``exp(theta G) @ amps`` using the sparse generator (no dense matrix)."""
    from scipy.sparse.linalg import expm_multiply

    _check_cap(conv.total_qubits, cap)
    return expm_multiply(theta * _sparse_generator(op, conv), np.asarray(amps, dtype=complex))


# ---------------------------------------------------------------- comparisons

def sector_restrict(s: StateVector, ancilla_qubits: Sequence[int]) -> tuple[StateVector | None, float]:
    """Project onto ancillas ``|0>``; return the renormalized rest and the leaked weight."""
    amps, leaked = sector_restrict_array(s.amplitudes, s.n_qubits, ancilla_qubits)
    kept = float(np.vdot(amps, amps).real)
    n_rest = s.n_qubits - len(set(ancilla_qubits))
    if kept == 0.0:
        return None, leaked
    return StateVector(n_rest, amps / math.sqrt(kept)), leaked


def sector_restrict_array(amps: np.ndarray, n_qubits: int, ancilla_qubits: Sequence[int]) -> tuple[np.ndarray, float]:
    """Unnormalized projection onto ancillas ``|0>`` (remaining qubits keep their order)."""
    anc = sorted(set(ancilla_qubits))
    keep = [q for q in range(n_qubits) if q not in anc]
    amask = determinant_index(anc)
    idx = np.arange(2 ** n_qubits, dtype=np.int64)
    inside = (idx & amask) == 0
    a = np.asarray(amps)
    leaked = float(np.sum(np.abs(a[~inside]) ** 2))
    # compress the kept bits into a contiguous index
    sub = idx[inside]
    new = np.zeros_like(sub)
    for j, q in enumerate(keep):
        new |= ((sub >> q) & 1) << j
    out = np.zeros((2 ** len(keep),) + a.shape[1:], dtype=complex)
    out[new] = a[inside]
    return out, leaked


def deviation(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> float:
    """Max absolute amplitude difference; global phase is not quotiented out."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if va.shape != vb.shape:
        raise ValueError("states differ in dimension")
    return float(np.max(np.abs(va - vb))) if va.size else 0.0


# ---------------------------------------------------------------- dump format

DUMP_THRESHOLD = 1e-12


def dump_state(s: StateVector) -> str:
    """``bitstring re im`` per amplitude above threshold; orbital 0 is the leftmost bit."""
    lines = []
    for i in np.flatnonzero(np.abs(s.amplitudes) > DUMP_THRESHOLD):
        bits = "".join(str(int(i) >> q & 1) for q in range(s.n_qubits))
        a = s.amplitudes[i]
        lines.append(f"{bits} {float(a.real)!r} {float(a.imag)!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_state(text: str) -> StateVector:
    entries = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not entries:
        raise ValueError("empty state dump")
    n = len(entries[0][0])
    amp = np.zeros(2 ** n, dtype=complex)
    for bits, re_, im_ in entries:
        if len(bits) != n:
            raise ValueError("inconsistent bitstring lengths")
        amp[int(bits[::-1], 2)] = complex(float(re_), float(im_))
    return StateVector(n, amp)
