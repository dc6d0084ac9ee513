"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--qubits 16] [--batch 4] [--repeat 5]

Each row reports the best-of-``repeat`` wall time per backend and the
speedup. The last row runs a whole compiled quadruple plan.
"""
from __future__ import annotations

import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from uccdecomp import kernels
from uccdecomp.schemes import compile, named_plan, plan_convention
from uccdecomp.statevector import compile_program

KERNELS = ("apply_1q", "apply_1q_layer", "apply_phase_terms", "apply_affine_permutation")


@contextmanager
def using(module):
    """Route the simulator through one backend module."""
    saved = {k: getattr(kernels, k) for k in KERNELS}
    try:
        for k in KERNELS:
            setattr(kernels, k, getattr(module, k))
        yield
    finally:
        for k, f in saved.items():
            setattr(kernels, k, f)


def cases(n: int, batch: int, rng: np.random.Generator):
    state = rng.normal(size=(2 ** n, batch)) + 1j * rng.normal(size=(2 ** n, batch))
    spare = np.empty_like(state)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    qubits = np.arange(0, n, 2, dtype=np.int64)
    mats = np.ascontiguousarray(np.broadcast_to(h, (qubits.size, 2, 2)))
    masks = rng.integers(1, 2 ** n, size=8, dtype=np.uint64)
    p0 = np.exp(1j * rng.uniform(-1, 1, 8))
    rows = np.array([(1 << i) | (1 << ((i + 1) % n)) for i in range(n)], dtype=np.uint64)
    return {
        "apply_1q": lambda m: m.apply_1q(state, n // 2, h),
        "apply_1q_layer": lambda m: m.apply_1q_layer(state, qubits, mats),
        "apply_phase_terms": lambda m: m.apply_phase_terms(state, masks, p0, p0.conj()),
        "apply_affine_permutation": lambda m: m.apply_affine_permutation(state, spare, rows, 5),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=16)
    ap.add_argument("--batch", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    mods = kernels.backends()
    if "cython" not in mods:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    names = list(mods)
    print(f"{'case':<28}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))

    def row(label, timings):
        line = f"{label:<28}" + "".join(f"{timings[n] * 1e3:>10.2f}ms" for n in names)
        if len(names) == 2:
            line += f"{timings['python'] / timings['cython']:>11.1f}x"
        print(line)

    for label, fn in cases(args.qubits, args.batch, rng).items():
        row(label, {n: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for n, m in mods.items()})

    plan = named_plan("quadruple")
    conv = plan_convention(plan, orbitals=8)
    program = compile_program(compile(plan, 0.37, conv))
    psi = rng.normal(size=(2 ** conv.total_qubits, 50)).astype(complex)
    timings = {}
    for n, m in mods.items():
        with using(m):
            timings[n] = min(timeit.repeat(lambda: program.run(psi), number=1, repeat=args.repeat))
    row(f"quadruple plan ({conv.total_qubits}q x 50)", timings)


if __name__ == "__main__":
    main()
