"""Kernel backend selection.

The compiled extension is used when it imports; ``UCCDECOMP_PURE_PYTHON=1``
forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _fallback

BACKEND = "python"
_compiled = None

if os.environ.get("UCCDECOMP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _fallback

apply_1q = _impl.apply_1q
apply_phase_terms = _impl.apply_phase_terms
apply_affine_permutation = _impl.apply_affine_permutation
apply_1q_layer = _impl.apply_1q_layer


def backends() -> dict[str, object]:
    """Available kernel modules by name, for cross-checks and benchmarks."""
    out: dict[str, object] = {"python": _fallback}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
