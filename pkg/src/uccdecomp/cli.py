"""Batch command-line front end.

Exit codes: 0 success, 1 verification failed, 2 parse error, 3 semantic
error, 4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .circuit import count_gates, export_text
from .fermion import ExcitationOperator, JwConvention, OperatorError
from .pauli import DimensionCapError
from .resources import (closed_form_cnot, decomposed_counts, emit_sweep_csv, gnuplot_columns,
                        traditional_counts)
from .schemes import (SCHEMES, PlanError, canonical_scheme, compile, format_plan, named_plan,
                      plan_convention, scheme_rank)
from .statevector import (MAX_QUBITS, apply_ucc_factor_exact_array, compile_program, determinant_index)
from .synthesis import synth_ucc_factor
from .verify import DEVIATION_TOL, orderings, random_states, run_plan, verify_plan

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_SEMANTIC, EXIT_CAP = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_op(text: str | None) -> ExcitationOperator | None:
    if text is None:
        return None
    try:
        return ExcitationOperator.parse(text)
    except SyntaxError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except OperatorError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CliError(EXIT_PARSE, f"bad integer list {text!r}") from None


def _parse_range(text: str) -> range:
    """``a:b`` inclusive, or a single integer; an empty string gives an empty range."""
    if not text.strip():
        return range(0)
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return range(int(a), int(b) + 1)
        return range(int(text), int(text) + 1)
    except ValueError:
        raise CliError(EXIT_PARSE, f"bad range {text!r}") from None


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)


def _counts_line(prefix: str, c) -> str:
    return (f"{prefix}cnot={c.cnot} rot={c.single_qubit_rotation} clifford={c.single_qubit_clifford} "
            f"mcrz={c.multi_controlled_rotation}")


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    op = _parse_op(args.operator)
    m = args.orbitals if args.orbitals is not None else max(op.orbitals) + 1
    try:
        conv = JwConvention(m)
        circ = synth_ucc_factor(op, args.theta, conv)
    except OperatorError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None
    _write(args.out, export_text(circ))
    print(f"operator={op} orbitals={m} theta={args.theta!r}")
    print(_counts_line("", count_gates(circ)))
    return EXIT_OK


def _plan_for(args, scheme: str):
    rank = scheme_rank(scheme)
    op = _parse_op(args.op)
    if op is not None and op.rank != rank:
        raise CliError(EXIT_SEMANTIC, f"scheme {scheme} decomposes rank {rank}, operator has rank {op.rank}")
    m = args.orbitals if args.orbitals is not None else (2 * rank if op is None else max(op.orbitals) + 1)
    try:
        plan = named_plan(scheme, m, occ=None if op is None else op.occupied,
                          virt=None if op is None else op.virtual)
    except (PlanError, OperatorError) as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None
    return plan, m


def cmd_decompose(args) -> int:
    scheme = _scheme(args.scheme)
    plan, m = _plan_for(args, scheme)
    conv = plan_convention(plan, orbitals=m)
    circ = compile(plan, args.theta, conv)
    _write(args.plan_out, format_plan(plan))
    _write(args.out, export_text(circ))
    sys.stdout.write(format_plan(plan, plan.labels()))
    compiled = count_gates(circ)
    print(_counts_line("compiled_", compiled))
    if scheme in SCHEMES:
        trad = traditional_counts(plan.rank, m)
        synth = decomposed_counts(scheme, m)
        print(f"decomposed_cnot={closed_form_cnot(scheme, m)} traditional_cnot={trad.cnot} "
              f"synthesized_cnot={synth.cnot}")
    return EXIT_OK


def _scheme(name: str) -> str:
    try:
        return canonical_scheme(name)
    except PlanError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None


def _verify_factor(args, rng) -> int:
    op = _parse_op(args.op)
    if op is None:
        raise CliError(EXIT_SEMANTIC, "verify factor needs --op")
    m = args.orbitals if args.orbitals is not None else max(op.orbitals) + 1
    if m > MAX_QUBITS:
        raise CliError(EXIT_CAP, f"{m} qubits exceeds the simulator cap of {MAX_QUBITS}")
    try:
        conv = JwConvention(m)
        conv.check(op)
    except OperatorError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None
    dim = 2 ** m
    states = rng.normal(size=(dim, args.trials)) + 1j * rng.normal(size=(dim, args.trials))
    states /= np.linalg.norm(states, axis=0)
    dev = 0.0
    for th in rng.uniform(-math.pi, math.pi, args.thetas):
        out = compile_program(synth_ucc_factor(op, th, conv)).run(states)
        ref = apply_ucc_factor_exact_array(states, op, th, conv, m)
        dev = max(dev, float(np.max(np.abs(out - ref))))
    ok = dev < DEVIATION_TOL
    print(f"{'PASS' if ok else 'FAIL'} factor={op} qubits={m} states={args.trials} "
          f"thetas={args.thetas} max_deviation={dev:.3e}")
    return EXIT_OK if ok else EXIT_FAILED


def _exhibit_trace(plan, m: int, theta: float) -> str:
    """Tabulated amplitudes for the failure exhibits."""
    occ, virt = plan.occupied, plan.virtual
    a, b, c, d = occ
    w, x, y, z = virt
    phys = np.zeros((2 ** m, 1), dtype=complex)
    if plan.name == "naive-quad":
        xi1, xi2 = 0.6, 0.8
        phys[determinant_index(occ), 0] = xi1
        phys[determinant_index(virt), 0] = xi2
        kept, _ = run_plan(plan, theta, phys, m)
        amp = kept[determinant_index(occ), 0]
        want = math.cos(theta) ** 2 * xi1 + math.sin(theta) ** 2 * xi2
        return f"exhibit amp_abcd={amp.real:.12f} expected_cos2_sin2={want:.12f}"
    phys[determinant_index((a, c, x, z)), 0] = 1.0
    conv = plan_convention(plan, orbitals=m)
    full = np.zeros((2 ** conv.total_qubits, 1), dtype=complex)
    full[: 2 ** m] = phys
    out = compile_program(compile(plan, theta, conv)).run(full)
    h1, h2 = plan.ancillas
    leak = out[determinant_index((a, c, h1, h2)), 0]
    stay = out[determinant_index((a, c, x, z)), 0]
    return (f"exhibit input=|acxz> amp_acxz={stay.real:.12f} amp_ac_h1h2={leak.real:.12f} "
            f"leaked_weight={abs(leak) ** 2:.12f}")


def cmd_verify(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    if args.target == "factor":
        return _verify_factor(args, rng)
    scheme = _scheme(args.target)
    plan, m = _plan_for(args, scheme)
    n_total = plan_convention(plan, orbitals=m).total_qubits
    if n_total > MAX_QUBITS:
        raise CliError(EXIT_CAP, f"{n_total} qubits exceeds the simulator cap of {MAX_QUBITS}")
    states = random_states(plan, m, args.trials, rng, args.domain)
    thetas = rng.uniform(-math.pi, math.pi, args.thetas)
    perms = [None] if not args.orderings else orderings(plan, m, args.orderings, rng)
    ok = True
    for perm in perms:
        report = verify_plan(plan, thetas, states, m, perm)
        print(report.summary())
        ok &= report.passed
    if plan.exhibit:
        print(_exhibit_trace(plan, m, math.pi / 4))
    return EXIT_OK if ok else EXIT_FAILED


def cmd_sweep(args) -> int:
    ranks = _parse_int_list(args.ranks)
    m_values = _parse_range(args.m_range)
    try:
        text = emit_sweep_csv(ranks, m_values)
        cols = gnuplot_columns(ranks, m_values) if args.gnuplot else {}
    except OperatorError as exc:
        raise CliError(EXIT_SEMANTIC, str(exc)) from None
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.gnuplot:
        d = Path(args.gnuplot)
        d.mkdir(parents=True, exist_ok=True)
        for scheme, body in cols.items():
            (d / f"{scheme}.dat").write_text(body)
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_PARSE, message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uccdecomp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize one UCC factor")
    s.add_argument("operator", help="operator such as A[0,1->4,5]")
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--orbitals", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("decompose", help="build and compile a decomposition plan")
    d.add_argument("scheme")
    d.add_argument("--op", help="rank-n operator; defaults to the block layout")
    d.add_argument("--theta", type=float, default=0.0)
    d.add_argument("--orbitals", type=int)
    d.add_argument("--out", help="compiled circuit path")
    d.add_argument("--plan-out", help="plan listing path")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", help="exactness sweep of a scheme or a single factor")
    v.add_argument("target", help="scheme name or 'factor'")
    v.add_argument("--op")
    v.add_argument("--orbitals", type=int)
    v.add_argument("--trials", type=int, default=10, help="random input states")
    v.add_argument("--thetas", type=int, default=10, help="random angles")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--orderings", type=int, nargs="?", const=6, default=0,
                   help="also sweep N orbital-to-qubit orderings (default 6)")
    v.add_argument("--domain", choices=("sector", "full"), default="sector")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="CNOT comparison CSV")
    w.add_argument("--ranks", default="3,4,5,6")
    w.add_argument("--m-range", default="12:64", help="inclusive a:b")
    w.add_argument("--out")
    w.add_argument("--gnuplot", help="directory for per-scheme two-column files")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimensionCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
