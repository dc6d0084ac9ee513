"""Ancilla-assisted decompositions of high-rank UCC factors.

A rank-``n`` factor ``occ -> virt`` is split ``n = p + q`` into five steps
using two ancilla orbitals ``h1, h2``:

1. ``occ[:p]  -> virt[:p-1] + h1``          at pi/2
2. ``occ[p:]  -> virt[p:n-1] + h2``         at pi/2
3. controlled on ``virt[:p-1] + virt[p:n-1]``:
   ``h1, h2 -> virt[p-1], virt[n-1]``      at theta
4. inverse of step 2                        at pi/2
5. inverse of step 1                        at pi/2

Steps 1-2 shelve the source determinant onto the ancillas, step 3 performs
the only theta-dependent rotation, and steps 4-5 undo the shelving. The
controls keep step 3 from touching determinants that merely share the
ancilla pair, which is what breaks the uncontrolled variant.

The fermionic sign of the composite excitation can differ from the direct
one. Plans fix this at construction by ordering the virtual pair of step 3
so the free angle keeps the same meaning as in the exact factor.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .circuit import Circuit, concat
from .controlled import ControlledFactorSpec, lower_circuit, synth_controlled_ucc
from .fermion import ExcitationOperator, JwConvention, OperatorError, apply_excitation, excitation_masks
from .synthesis import synth_ucc_factor

HALF_PI = math.pi / 2

# name -> (rank, p)
SCHEMES: dict[str, tuple[int, int]] = {
    "triple": (3, 2),
    "quadruple": (4, 2),
    "quintuple": (5, 2),
    "sextuple-24": (6, 2),
    "sextuple-33": (6, 3),
}
EXHIBITS = {"naive-quad": 4, "uncontrolled-quad": 4}
ALIASES = {
    "quad": "quadruple",
    "quint": "quintuple",
    "sext24": "sextuple-24",
    "sext33": "sextuple-33",
    "naive": "naive-quad",
    "uncontrolled": "uncontrolled-quad",
}

# letters used by the decomposition tables, per rank
LETTERS = {
    3: ("abc", "wxy"),
    4: ("abcd", "wxyz"),
    5: ("abcde", "vwxyz"),
    6: ("abcdef", "uvwxyz"),
}


class PlanError(ValueError):
    """Invalid plan or plan text."""


def canonical_scheme(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in SCHEMES and name not in EXHIBITS:
        raise PlanError(f"unknown scheme {name!r}")
    return name


def scheme_rank(name: str) -> int:
    name = canonical_scheme(name)
    return SCHEMES[name][0] if name in SCHEMES else EXHIBITS[name]


@dataclass(frozen=True)
class Step:
    """One (possibly controlled) UCC factor at a fixed pi/2 or the free angle."""

    op: ExcitationOperator
    free: bool = False
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        if set(self.controls) & set(self.op.orbitals):
            raise PlanError("step controls overlap its orbitals")

    @property
    def kind(self) -> str:
        return "controlled_ucc_factor" if self.controls else "ucc_factor"

    def angle(self, theta: float) -> float:
        return theta if self.free else HALF_PI


@dataclass(frozen=True)
class DecompositionPlan:
    """Executable step list for one scheme.

    ``exhibit`` plans reproduce documented failures and skip the five-step
    structural checks.
    """

    name: str
    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    ancillas: tuple[int, ...]
    copy_ancillas: tuple[int, ...]
    steps: tuple[Step, ...]
    exhibit: bool = False

    def __post_init__(self):
        for f in ("occupied", "virtual", "ancillas", "copy_ancillas", "steps"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        physical = set(self.occupied) | set(self.virtual)
        if set(self.ancillas) & physical:
            raise PlanError("ancilla orbitals collide with physical orbitals")
        if set(self.copy_ancillas) & (physical | set(self.ancillas)):
            raise PlanError("copy ancillas collide with orbitals")
        if len(set(self.copy_ancillas)) != len(self.copy_ancillas):
            raise PlanError("repeated copy ancilla")
        need = max((len(s.controls) for s in self.steps), default=0)
        if len(self.copy_ancillas) < need:
            raise PlanError(f"plan needs {need} copy ancillas, has {len(self.copy_ancillas)}")
        if not self.exhibit:
            self._check_structure()

    def _check_structure(self) -> None:
        s = self.steps
        if len(s) != 5:
            raise PlanError("a decomposition plan has exactly five steps")
        if [st.free for st in s] != [False, False, True, False, False]:
            raise PlanError("only the middle step carries the free angle")
        if s[3].op != s[1].op.adjoint() or s[4].op != s[0].op.adjoint():
            raise PlanError("steps 4 and 5 must undo steps 2 and 1")
        if s[0].op.rank + s[1].op.rank != self.rank:
            raise PlanError("outer excitations must add up to the plan rank")
        if any(st.controls for i, st in enumerate(s) if i != 2):
            raise PlanError("only the middle step may be controlled")

    @property
    def rank(self) -> int:
        return len(self.occupied)

    @property
    def target(self) -> ExcitationOperator:
        return ExcitationOperator(self.occupied, self.virtual)

    @property
    def physical(self) -> tuple[int, ...]:
        return self.occupied + self.virtual

    @property
    def all_qubits(self) -> tuple[int, ...]:
        return self.physical + self.ancillas + self.copy_ancillas

    def labels(self) -> dict[int, str]:
        """Table letters for the physical orbitals and ``h1, h2`` for ancillas."""
        out: dict[int, str] = {}
        if self.rank in LETTERS:
            occ_l, virt_l = LETTERS[self.rank]
            out.update(zip(self.occupied, occ_l))
            out.update(zip(self.virtual, virt_l))
        out.update((a, f"h{i + 1}") for i, a in enumerate(self.ancillas))
        return out


# ---------------------------------------------------------------- construction

def _sign(op: ExcitationOperator, det: int, conv: JwConvention) -> tuple[int, int]:
    res = apply_excitation(op, det, conv)
    if res is None:
        raise PlanError(f"{op} does not act on the shelved determinant")
    return res


def composite_sign(steps: Sequence[Step], target: ExcitationOperator, conv: JwConvention) -> int:
    """Relative sign of shelve-rotate (steps 1-3) versus the direct excitation."""
    occ, _ = excitation_masks(target, conv)
    direct, final = _sign(target, occ, conv)
    det, total = occ, 1
    for st in steps[:3]:
        s, det = _sign(st.op, det, conv)
        total *= s
    if det != final:
        raise PlanError("composite excitation does not reach the target determinant")
    return total * direct


def _identity_conv(orbitals: Iterable[int]) -> JwConvention:
    return JwConvention(max(orbitals) + 1)


def _default_copies(occ, virt, anc, k: int) -> tuple[int, ...]:
    top = max(tuple(occ) + tuple(virt) + tuple(anc)) + 1
    return tuple(range(top, top + k))


def plan_split(occ: Sequence[int], virt: Sequence[int], anc: Sequence[int], p: int,
               copies: Sequence[int] | None = None, name: str | None = None,
               controlled: bool = True) -> DecompositionPlan:
    """Five-step plan for the ``p + (n - p)`` split of ``occ -> virt``."""
    occ, virt, anc = tuple(occ), tuple(virt), tuple(anc)
    n = len(occ)
    if len(virt) != n or len(anc) != 2:
        raise PlanError("need n occupied, n virtual and two ancilla orbitals")
    if not 1 <= p < n:
        raise PlanError(f"split point p={p} must satisfy 1 <= p < {n}")
    if len(set(occ + virt + anc)) != 2 * n + 2:
        raise PlanError("plan orbitals must be distinct")
    h1, h2 = anc
    s1 = ExcitationOperator(occ[:p], virt[:p - 1] + (h1,))
    s2 = ExcitationOperator(occ[p:], virt[p:n - 1] + (h2,))
    ctrl = virt[:p - 1] + virt[p:n - 1] if controlled else ()
    pair = (virt[p - 1], virt[n - 1])
    conv = _identity_conv(occ + virt + anc)
    target = ExcitationOperator(occ, virt)

    def build(vpair):
        s3 = ExcitationOperator((h1, h2), vpair)
        return [Step(s1), Step(s2), Step(s3, True, ctrl), Step(s2.adjoint()), Step(s1.adjoint())]

    steps = build(pair)
    if composite_sign(steps, target, conv) < 0:
        steps = build(pair[::-1])
    copies = _default_copies(occ, virt, anc, len(ctrl)) if copies is None else tuple(copies)
    return DecompositionPlan(name or f"split-{p}-{n - p}", occ, virt, anc, copies, tuple(steps),
                             exhibit=not controlled)


def plan_triple(occ, virt, anc, copies=None) -> DecompositionPlan:
    _check_rank(occ, 3)
    return plan_split(occ, virt, anc, 2, copies, "triple")


def plan_quadruple(occ, virt, anc, copies=None) -> DecompositionPlan:
    _check_rank(occ, 4)
    return plan_split(occ, virt, anc, 2, copies, "quadruple")


def plan_quintuple(occ, virt, anc, copies=None) -> DecompositionPlan:
    _check_rank(occ, 5)
    return plan_split(occ, virt, anc, 2, copies, "quintuple")


def plan_sextuple_24(occ, virt, anc, copies=None) -> DecompositionPlan:
    _check_rank(occ, 6)
    return plan_split(occ, virt, anc, 2, copies, "sextuple-24")


def plan_sextuple_33(occ, virt, anc, copies=None) -> DecompositionPlan:
    _check_rank(occ, 6)
    return plan_split(occ, virt, anc, 3, copies, "sextuple-33")


def plan_uncontrolled(occ, virt, anc) -> DecompositionPlan:
    """Failure exhibit: the quadruple plan with the middle step's controls dropped."""
    _check_rank(occ, 4)
    return plan_split(occ, virt, anc, 2, (), "uncontrolled-quad", controlled=False)


def plan_naive_two_doubles(occ, virt) -> DecompositionPlan:
    """Failure exhibit: ``ab -> wx`` then ``cd -> yz``, both at the free angle."""
    _check_rank(occ, 4)
    occ, virt = tuple(occ), tuple(virt)
    steps = (Step(ExcitationOperator(occ[:2], virt[:2]), True),
             Step(ExcitationOperator(occ[2:], virt[2:]), True))
    return DecompositionPlan("naive-quad", occ, virt, (), (), steps, exhibit=True)


def _check_rank(occ, n: int) -> None:
    if len(occ) != n:
        raise PlanError(f"expected {n} occupied orbitals, got {len(occ)}")


_CONSTRUCTORS = {
    "triple": plan_triple,
    "quadruple": plan_quadruple,
    "quintuple": plan_quintuple,
    "sextuple-24": plan_sextuple_24,
    "sextuple-33": plan_sextuple_33,
}


@dataclass(frozen=True)
class Layout:
    """Qubit placement: physical orbitals ``0..M-1``, then ancillas, then copies."""

    rank: int
    orbitals: int
    occupied: tuple[int, ...]
    virtual: tuple[int, ...]
    ancillas: tuple[int, int]

    @property
    def physical_qubits(self) -> int:
        return self.orbitals


def standard_layout(rank: int, orbitals: int | None = None, worst_case: bool = False) -> Layout:
    """Occupied block ``0..n-1`` and virtual block ``n..2n-1``.

    ``worst_case`` moves the last virtual orbital to ``M-1`` so the Pauli
    terms of the outer factors span as many qubits as possible.
    """
    m = 2 * rank if orbitals is None else orbitals
    if m < 2 * rank:
        raise PlanError(f"{m} orbitals cannot host a rank-{rank} excitation")
    occ = tuple(range(rank))
    virt = tuple(range(rank, 2 * rank))
    if worst_case:
        virt = virt[:-1] + (m - 1,)
    return Layout(rank, m, occ, virt, (m, m + 1))


def named_plan(scheme: str, orbitals: int | None = None, worst_case: bool = False,
               occ: Sequence[int] | None = None, virt: Sequence[int] | None = None) -> DecompositionPlan:
    """Plan for a named scheme on the standard layout (or the given orbitals)."""
    scheme = canonical_scheme(scheme)
    rank = scheme_rank(scheme)
    lay = standard_layout(rank, orbitals, worst_case)
    occ = lay.occupied if occ is None else tuple(occ)
    virt = lay.virtual if virt is None else tuple(virt)
    if len(occ) != rank or len(virt) != rank:
        raise PlanError(f"scheme {scheme} needs a rank-{rank} operator")
    m = max(lay.orbitals, max(occ + virt) + 1)
    anc = (m, m + 1)
    if scheme == "naive-quad":
        return plan_naive_two_doubles(occ, virt)
    if scheme == "uncontrolled-quad":
        return plan_uncontrolled(occ, virt, anc)
    return _CONSTRUCTORS[scheme](occ, virt, anc)


# ---------------------------------------------------------------- compilation

def plan_qubits(plan: DecompositionPlan, orbitals: int | None = None) -> int:
    """Register size: physical orbitals, ancillas and copies."""
    top = max(plan.all_qubits) + 1
    return top if orbitals is None else max(top, orbitals)


def plan_convention(plan: DecompositionPlan, physical_perm: Sequence[int] | None = None,
                    orbitals: int | None = None) -> JwConvention:
    """Convention over the whole register; ``physical_perm`` reorders orbitals ``0..M-1``."""
    n = plan_qubits(plan, orbitals)
    if physical_perm is None:
        return JwConvention(n)
    perm = tuple(physical_perm) + tuple(range(len(physical_perm), n))
    return JwConvention(n, perm)


def compile_blocks(plan: DecompositionPlan, theta: float, conv: JwConvention,
                   lower: bool = True) -> list[Circuit]:
    """One circuit per step, in step order."""
    needed = set(plan.physical + plan.ancillas)
    if conv.total_qubits <= max(plan.all_qubits) or any(p >= conv.total_qubits for p in needed):
        raise PlanError("convention does not cover the plan's orbitals and ancillas")
    n = conv.total_qubits
    blocks = []
    for st in plan.steps:
        if st.controls:
            spec = ControlledFactorSpec(st.controls, st.op, st.angle(theta),
                                        plan.copy_ancillas[:len(st.controls)])
            c = synth_controlled_ucc(spec, conv, n)
            blocks.append(lower_circuit(c) if lower else c)
        else:
            blocks.append(synth_ucc_factor(st.op, st.angle(theta), conv, n))
    return blocks


def compile(plan: DecompositionPlan, theta: float, conv: JwConvention, lower: bool = True) -> Circuit:
    """Concatenate the step circuits; MCRZ gates are lowered by default."""
    return concat(conv.total_qubits, compile_blocks(plan, theta, conv, lower))


# ---------------------------------------------------------------- text format

_HEAD_RE = re.compile(r"^plan\s+(\S+)\s+rank=(\d+)(\s+exhibit)?$")
_STEP_RE = re.compile(r"^(?:C\{([^}]*)\}\s+)?([^\s>-][^>]*?)\s*->\s*(\S+)\s*@\s*(pi/2|theta)$")


def _fmt(xs: Iterable[int], labels: Mapping[int, str] | None) -> str:
    return ",".join(labels.get(x, str(x)) if labels else str(x) for x in xs)


def format_plan(plan: DecompositionPlan, labels: Mapping[int, str] | None = None) -> str:
    """Human-readable listing, one step per line."""
    lines = [f"plan {plan.name} rank={plan.rank}" + (" exhibit" if plan.exhibit else ""),
             f"target {_fmt(plan.occupied, None)}->{_fmt(plan.virtual, None)}",
             f"ancillas {_fmt(plan.ancillas, None)}",
             f"copies {_fmt(plan.copy_ancillas, None)}"]
    for st in plan.steps:
        ctrl = f"C{{{_fmt(st.controls, labels)}}} " if st.controls else ""
        angle = "theta" if st.free else "pi/2"
        lines.append(f"{ctrl}{_fmt(st.op.occupied, labels)}->{_fmt(st.op.virtual, labels)} @ {angle}")
    return "\n".join(lines) + "\n"


def _parse_list(text: str, labels: Mapping[str, int] | None) -> tuple[int, ...]:
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if labels and tok in labels:
            out.append(labels[tok])
        else:
            try:
                out.append(int(tok))
            except ValueError:
                raise PlanError(f"unknown orbital token {tok!r}") from None
    return tuple(out)


def parse_plan(text: str, labels: Mapping[str, int] | None = None) -> DecompositionPlan:
    """Inverse of ``format_plan``; structural checks are re-run."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) < 4:
        raise PlanError("plan text is truncated")
    head = _HEAD_RE.match(lines[0])
    if not head:
        raise PlanError(f"bad plan header {lines[0]!r}")
    name, rank, exhibit = head.group(1), int(head.group(2)), bool(head.group(3))
    fields_ = {}
    for ln, key in zip(lines[1:4], ("target", "ancillas", "copies")):
        if not ln.startswith(key):
            raise PlanError(f"expected {key!r} line, got {ln!r}")
        fields_[key] = ln[len(key):].strip()
    occ_t, _, virt_t = fields_["target"].partition("->")
    occ, virt = _parse_list(occ_t, None), _parse_list(virt_t, None)
    if len(occ) != rank:
        raise PlanError("target rank disagrees with header")
    steps = []
    for ln in lines[4:]:
        m = _STEP_RE.match(ln)
        if not m:
            raise PlanError(f"bad step line {ln!r}")
        ctrl, o, v, angle = m.groups()
        try:
            op = ExcitationOperator(_parse_list(o, labels), _parse_list(v, labels))
        except OperatorError as exc:
            raise PlanError(str(exc)) from None
        steps.append(Step(op, angle == "theta", _parse_list(ctrl or "", labels)))
    return DecompositionPlan(name, occ, virt, _parse_list(fields_["ancillas"], None),
                             _parse_list(fields_["copies"], None), tuple(steps), exhibit)
