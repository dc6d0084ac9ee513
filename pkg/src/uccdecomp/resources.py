"""Closed-form and synthesized gate counts, crossovers and sweep CSVs.

Three CNOT figures are kept apart on purpose:

* ``traditional``: ``2**(2N) (M-1)``, one rank-N factor with every cascade
  spanning all ``M`` orbitals;
* ``decomposed`` (published worst case): each of the five factors costs a
  full-width cascade over ``M + 2`` qubits and every controlled rotation is
  charged ``2**4`` times its lowering cost;
* ``synthesized``: ``count_gates`` of the compiled plan on the worst-case
  layout (last virtual orbital at ``M - 1``, ancillas above).
"""
from __future__ import annotations

import io
from functools import lru_cache
from typing import Iterable

from .circuit import GateCounts, count_gates
from .controlled import mcrz_cnot_cost
from .fermion import OperatorError
from .schemes import SCHEMES, canonical_scheme, compile, named_plan, plan_convention

SEARCH_LIMIT = 4096
RANK_SCHEMES = {
    3: ("triple",),
    4: ("quadruple",),
    5: ("quintuple",),
    6: ("sextuple-24", "sextuple-33"),
}


def traditional_counts(rank: int, orbitals: int) -> GateCounts:
    """Unoptimized counts for one rank-N factor on M orbitals."""
    if rank < 1:
        raise OperatorError("rank must be positive")
    if orbitals < 2 * rank:
        raise OperatorError(f"{orbitals} orbitals cannot host a rank-{rank} excitation")
    terms = 2 ** (2 * rank - 1)
    return GateCounts(cnot=2 ** (2 * rank) * (orbitals - 1), single_qubit_rotation=terms,
                      single_qubit_clifford=4 * rank * terms)


def _controls(scheme: str) -> int:
    rank, p = SCHEMES[scheme]
    return rank - 2


def closed_form_cnot(scheme: str, orbitals: int) -> int:
    """Published-style worst case: full-width cascades over ``M + 2`` qubits."""
    scheme = canonical_scheme(scheme)
    if scheme not in SCHEMES:
        raise OperatorError(f"no closed form for {scheme}")
    rank, p = SCHEMES[scheme]
    q = rank - p
    width = orbitals + 1  # (M + 2) - 1
    outer = 2 * (2 ** (2 * p) + 2 ** (2 * q)) * width
    return outer + 16 * width + 16 * mcrz_cnot_cost(_controls(scheme))


@lru_cache(maxsize=1024)
def decomposed_counts(scheme: str, orbitals: int) -> GateCounts:
    """Counts of the compiled, fully lowered plan on the worst-case layout."""
    scheme = canonical_scheme(scheme)
    if scheme not in SCHEMES:
        raise OperatorError(f"{scheme} is not a decomposition scheme")
    rank = SCHEMES[scheme][0]
    if orbitals < 2 * rank:
        raise OperatorError(f"{orbitals} orbitals cannot host a rank-{rank} excitation")
    plan = named_plan(scheme, orbitals, worst_case=True)
    conv = plan_convention(plan, orbitals=orbitals)
    return count_gates(compile(plan, 0.123, conv))


def crossover(rank: int, scheme: str | None = None, source: str = "formula") -> int | str:
    """Smallest M with decomposed CNOTs below traditional CNOTs.

    ``source`` picks the decomposed figure: ``"formula"`` (published worst
    case) or ``"synthesized"``. Returns ``"always"`` if it already holds at
    the smallest valid M, ``"never"`` if no scheme exists or no M up to
    ``SEARCH_LIMIT`` qualifies.
    """
    if scheme is None:
        schemes = RANK_SCHEMES.get(rank)
        if not schemes:
            return "never"
        scheme = schemes[0]
    scheme = canonical_scheme(scheme)
    if SCHEMES[scheme][0] != rank:
        raise OperatorError(f"scheme {scheme} does not decompose rank {rank}")

    def below(m: int) -> bool:
        trad = 2 ** (2 * rank) * (m - 1)
        if source == "formula":
            return closed_form_cnot(scheme, m) < trad
        if source == "synthesized":
            return decomposed_counts(scheme, max(m, 2 * rank)).cnot < trad
        raise ValueError(f"unknown source {source!r}")

    start = 1 if source == "formula" else 2 * rank
    if below(start):
        return "always"
    for m in range(start + 1, SEARCH_LIMIT + 1):
        if below(m):
            return m
    return "never"


SWEEP_HEADER = ("rank,M,scheme,cnot_traditional,cnot_decomposed,cnot_synthesized,"
                "rot_traditional,rot_synthesized,clifford_traditional,clifford_synthesized")


def sweep_rows(ranks: Iterable[int], m_values: Iterable[int]) -> list[tuple]:
    m_values = list(m_values)
    rows = []
    for rank in ranks:
        schemes = RANK_SCHEMES.get(rank)
        if not schemes:
            raise OperatorError(f"no decomposition scheme for rank {rank}")
        for scheme in schemes:
            for m in m_values:
                if m < 2 * rank:
                    continue
                t = traditional_counts(rank, m)
                s = decomposed_counts(scheme, m)
                rows.append((rank, m, scheme, t.cnot, closed_form_cnot(scheme, m), s.cnot,
                             t.single_qubit_rotation, s.single_qubit_rotation,
                             t.single_qubit_clifford, s.single_qubit_clifford))
    return rows


def emit_sweep_csv(ranks: Iterable[int], m_values: Iterable[int]) -> str:
    """Deterministic comparison table, one row per (rank, scheme, M)."""
    out = io.StringIO()
    out.write(SWEEP_HEADER + "\n")
    for row in sweep_rows(ranks, m_values):
        out.write(",".join(str(v) for v in row) + "\n")
    return out.getvalue()


def gnuplot_columns(ranks: Iterable[int], m_values: Iterable[int]) -> dict[str, str]:
    """Per-scheme ``M cnot_traditional cnot_decomposed cnot_synthesized`` blocks."""
    files: dict[str, list[str]] = {}
    for row in sweep_rows(ranks, m_values):
        files.setdefault(row[2], ["# M cnot_traditional cnot_decomposed cnot_synthesized"])
        files[row[2]].append(f"{row[1]} {row[3]} {row[4]} {row[5]}")
    return {k: "\n".join(v) + "\n" for k, v in files.items()}
