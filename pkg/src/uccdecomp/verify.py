"""Exactness sweeps: compiled plans against the closed-form factor.

Inputs live on the physical qubits ``0..M-1`` with ancillas and copies in
``|0>``. The default domain is the particle sector with as many electrons as
the plan rank, which contains every determinant the decomposition tables
track. ``domain="full"`` samples all physical determinants and exposes
determinants outside that sector on which the scheme is not exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fermion import JwConvention
from .schemes import DecompositionPlan, compile, plan_convention
from .statevector import apply_ucc_factor_exact_array, compile_program, determinant_index

DEVIATION_TOL = 1e-9
LEAK_TOL = 1e-10


def sector_determinants(n_qubits: int, n_electrons: int) -> np.ndarray:
    return np.array([determinant_index(c) for c in itertools.combinations(range(n_qubits), n_electrons)],
                    dtype=np.int64)


def shelved_determinants(plan: DecompositionPlan, n_physical: int) -> list[int]:
    """Rank-electron determinants that the outer steps shelve but the target does not excite.

    These hold one outer block of occupied orbitals plus arbitrary other
    physical orbitals (the ``|ab phi phi>`` columns of the tables).
    """
    occ = plan.occupied
    p = plan.steps[0].op.rank
    blocks = (set(occ[:p]), set(occ[p:]))
    out = []
    for det in itertools.combinations(range(n_physical), plan.rank):
        d = set(det)
        if set(occ) <= d:
            continue
        if any(b <= d for b in blocks):
            out.append(determinant_index(det))
    return out


def random_states(plan: DecompositionPlan, n_physical: int, count: int, rng: np.random.Generator,
                  domain: str = "sector") -> np.ndarray:
    """``(2**M, count)`` batch of normalized random physical states.

    Even columns are dense over the domain; odd columns mix the source and
    target determinants with at least four shelved determinants only.
    """
    if domain == "sector":
        support = sector_determinants(n_physical, plan.rank)
    elif domain == "full":
        support = np.arange(2 ** n_physical, dtype=np.int64)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    shelved = shelved_determinants(plan, n_physical)
    src = determinant_index(plan.occupied)
    tgt = determinant_index(plan.virtual)
    out = np.zeros((2 ** n_physical, count), dtype=complex)
    for j in range(count):
        if j % 2 == 1 and len(shelved) >= 4:
            k = min(len(shelved), 4 + int(rng.integers(0, 5)))
            idx = np.concatenate([[src, tgt], rng.choice(shelved, size=k, replace=False)])
        else:
            idx = support
        out[idx, j] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
        out[:, j] /= np.linalg.norm(out[:, j])
    return out


@dataclass(frozen=True)
class VerificationReport:
    scheme: str
    n_qubits: int
    states: int
    thetas: int
    max_deviation: float
    max_leak: float
    ordering: tuple[int, ...] | None = None

    @property
    def passed(self) -> bool:
        return self.max_deviation < DEVIATION_TOL and self.max_leak < LEAK_TOL

    def summary(self) -> str:
        order = "" if self.ordering is None else f" ordering={','.join(map(str, self.ordering))}"
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} scheme={self.scheme} qubits={self.n_qubits} states={self.states} "
                f"thetas={self.thetas} max_deviation={self.max_deviation:.3e} "
                f"max_leak={self.max_leak:.3e}{order}")


def run_plan(plan: DecompositionPlan, theta: float, phys: np.ndarray, n_physical: int,
             physical_perm: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Simulate the compiled plan; return ``(ancilla-|0> block, leaked weight per column)``."""
    conv = plan_convention(plan, physical_perm, n_physical)
    n = conv.total_qubits
    full = np.zeros((2 ** n, phys.shape[1]), dtype=complex)
    full[: 2 ** n_physical] = phys
    out = compile_program(compile(plan, theta, conv)).run(full)
    kept = out[: 2 ** n_physical]
    leak = np.sum(np.abs(out[2 ** n_physical:]) ** 2, axis=0)
    return kept, leak


def verify_plan(plan: DecompositionPlan, thetas: Iterable[float], phys: np.ndarray, n_physical: int,
                physical_perm: Sequence[int] | None = None) -> VerificationReport:
    """Max deviation from ``exp(theta (A - A†))`` over all states and angles."""
    ref_conv = JwConvention(n_physical, None if physical_perm is None else tuple(physical_perm))
    n_total = plan_convention(plan, physical_perm, n_physical).total_qubits
    dev = leak = 0.0
    thetas = list(thetas)
    for th in thetas:
        kept, lk = run_plan(plan, th, phys, n_physical, physical_perm)
        ref = apply_ucc_factor_exact_array(phys, plan.target, th, ref_conv, n_physical)
        dev = max(dev, float(np.max(np.abs(kept - ref))))
        leak = max(leak, float(np.max(lk)))
    return VerificationReport(plan.name, n_total, phys.shape[1], len(thetas), dev, leak,
                              None if physical_perm is None else tuple(physical_perm))


def orderings(plan: DecompositionPlan, n_physical: int, count: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Orbital-to-qubit permutations of the physical register.

    Always includes the block ordering, its reverse and the pairwise
    interleaving ``a w b x ...``; the rest are random.
    """
    ident = tuple(range(n_physical))
    perms = [ident, ident[::-1]]
    inter = [0] * n_physical
    slot = 0
    for o, v in zip(plan.occupied, plan.virtual):
        inter[o], inter[v] = slot, slot + 1
        slot += 2
    for q in range(n_physical):
        if q not in plan.physical:
            inter[q] = slot
            slot += 1
    perms.append(tuple(inter))
    seen = set(perms)
    while len(perms) < count and len(seen) < math.factorial(n_physical):
        p = tuple(int(x) for x in rng.permutation(n_physical))
        if p not in seen:
            seen.add(p)
            perms.append(p)
    return perms[:count]
