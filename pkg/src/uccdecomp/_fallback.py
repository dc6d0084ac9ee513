"""Pure numpy implementations of the simulator kernels.

All kernels act on a C-contiguous complex128 array of shape ``(2**n, B)``:
one column per batched state.
"""
from __future__ import annotations

import numpy as np


def _indices(dim: int) -> np.ndarray:
    return np.arange(dim, dtype=np.uint64)


def apply_1q(state: np.ndarray, q: int, m: np.ndarray) -> None:
    """In place: 2x2 matrix ``m`` on qubit ``q``."""
    v = state.reshape(-1, 2, 1 << q, state.shape[1])
    a0 = v[:, 0].copy()
    a1 = v[:, 1]
    v[:, 0] = m[0, 0] * a0 + m[0, 1] * a1
    v[:, 1] = m[1, 0] * a0 + m[1, 1] * a1


def apply_phase_terms(state: np.ndarray, masks: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> None:
    """In place: amplitude ``x`` gains ``prod_t (p1[t] if parity(x & masks[t]) else p0[t])``."""
    idx = _indices(state.shape[0])
    factor = np.ones(state.shape[0], dtype=complex)
    for m, a, b in zip(masks, p0, p1):
        odd = (np.bitwise_count(idx & np.uint64(m)) & 1).astype(bool)
        factor *= np.where(odd, b, a)
    state *= factor[:, None]


def apply_affine_permutation(src: np.ndarray, dst: np.ndarray, rows: np.ndarray, flips: int) -> None:
    """``dst[y] = src[x]`` with bit ``i`` of ``y`` equal to ``parity(rows[i] & x) ^ flips_i``."""
    idx = _indices(src.shape[0])
    y = np.zeros_like(idx)
    for i, r in enumerate(rows):
        y |= (np.bitwise_count(idx & np.uint64(r)) & 1).astype(np.uint64) << np.uint64(i)
    y ^= np.uint64(flips)
    dst[y] = src


def apply_1q_layer(state: np.ndarray, qubits: np.ndarray, mats: np.ndarray) -> None:
    """In place: tensor product of 2x2 matrices ``mats[i]`` on distinct ``qubits[i]``."""
    for q, m in zip(qubits, mats):
        apply_1q(state, int(q), m)
