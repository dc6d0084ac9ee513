"""Controlled decomposition of high-rank UCC factors into doubles.

The main entry points are re-exported here; see the submodules for the rest.
"""
from __future__ import annotations

from .circuit import Circuit, Gate, GateCounts, count_gates, export_text, parse_text
from .fermion import ExcitationOperator, JwConvention, OperatorError, jw_generator
from .kernels import BACKEND
from .pauli import DimensionCapError, PauliString, PauliSum
from .resources import closed_form_cnot, crossover, decomposed_counts, traditional_counts
from .schemes import DecompositionPlan, PlanError, compile, format_plan, named_plan, parse_plan
from .statevector import StateVector, apply_ucc_factor_exact, compile_program, run_circuit
from .synthesis import synth_pauli_exponential, synth_ucc_factor
from .verify import verify_plan

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Circuit", "DecompositionPlan", "DimensionCapError", "ExcitationOperator", "Gate",
    "GateCounts", "JwConvention", "OperatorError", "PauliString", "PauliSum", "PlanError",
    "StateVector", "apply_ucc_factor_exact", "closed_form_cnot", "compile", "compile_program",
    "count_gates", "crossover", "decomposed_counts", "export_text", "format_plan", "jw_generator",
    "named_plan", "parse_plan", "parse_text", "run_circuit", "synth_pauli_exponential",
    "synth_ucc_factor", "traditional_counts", "verify_plan",
]
