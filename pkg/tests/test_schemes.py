from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uccdecomp.circuit import count_gates
from uccdecomp.fermion import JwConvention
from uccdecomp.schemes import (SCHEMES, DecompositionPlan, PlanError, Step, canonical_scheme, compile,
                               compile_blocks, format_plan, named_plan, parse_plan, plan_convention,
                               plan_naive_two_doubles, plan_quadruple, plan_split, plan_triple,
                               plan_uncontrolled, standard_layout)
from uccdecomp.statevector import compile_program, determinant_index
from uccdecomp.verify import (random_states, run_plan, sector_determinants, shelved_determinants,
                              verify_plan)

# Step listings transcribed from the decomposition tables (letters per table, h1/h2 the ancillas).
TABLE_STEPS = {
    "triple": ["a,b->w,h1 @ pi/2", "c->h2 @ pi/2", "C{w} h1,h2->x,y @ theta", "h2->c @ pi/2",
               "w,h1->a,b @ pi/2"],
    "quadruple": ["a,b->w,h1 @ pi/2", "c,d->y,h2 @ pi/2", "C{w,y} h1,h2->x,z @ theta", "y,h2->c,d @ pi/2",
                  "w,h1->a,b @ pi/2"],
    "quintuple": ["a,b->v,h1 @ pi/2", "c,d,e->x,y,h2 @ pi/2", "C{v,x,y} h1,h2->w,z @ theta",
                  "x,y,h2->c,d,e @ pi/2", "v,h1->a,b @ pi/2"],
    "sextuple-24": ["a,b->u,h1 @ pi/2", "c,d,e,f->w,x,y,h2 @ pi/2", "C{u,w,x,y} h1,h2->v,z @ theta",
                    "w,x,y,h2->c,d,e,f @ pi/2", "u,h1->a,b @ pi/2"],
    "sextuple-33": ["a,b,c->u,v,h1 @ pi/2", "d,e,f->x,y,h2 @ pi/2", "C{u,v,x,y} h1,h2->w,z @ theta",
                    "x,y,h2->d,e,f @ pi/2", "u,v,h1->a,b,c @ pi/2"],
}


def basis_columns(m: int, dets) -> np.ndarray:
    out = np.zeros((2 ** m, len(dets)), dtype=complex)
    for j, d in enumerate(dets):
        out[d, j] = 1.0
    return out


class TestPlans:
    @pytest.mark.parametrize("scheme", list(TABLE_STEPS))
    def test_table_listing(self, scheme):
        plan = named_plan(scheme)
        assert format_plan(plan, plan.labels()).splitlines()[4:] == TABLE_STEPS[scheme]
        assert len(plan.steps) == 5 and sum(s.free for s in plan.steps) == 1

    @pytest.mark.parametrize("scheme,controls", [("triple", 1), ("quadruple", 2), ("quintuple", 3),
                                                 ("sextuple-24", 4), ("sextuple-33", 4)])
    def test_register(self, scheme, controls):
        plan = named_plan(scheme)
        m = 2 * plan.rank
        assert plan.ancillas == (m, m + 1)
        assert plan.copy_ancillas == tuple(range(m + 2, m + 2 + controls))
        assert plan_convention(plan).total_qubits == m + 2 + controls

    def test_quadruple_blocks(self):
        plan = named_plan("quadruple")
        blocks = compile_blocks(plan, 0.3, plan_convention(plan), lower=False)
        mc = [count_gates(b).multi_controlled_rotation for b in blocks]
        assert len(blocks) == 5 and mc == [0, 0, 8, 0, 0]

    def test_triple_blocks(self):
        plan = named_plan("triple")
        assert len(compile_blocks(plan, 0.3, plan_convention(plan))) == 5

    def test_aliases(self):
        assert canonical_scheme("quad") == "quadruple" and canonical_scheme("sext33") == "sextuple-33"
        with pytest.raises(PlanError):
            canonical_scheme("septuple")

    @pytest.mark.parametrize("build", [
        lambda: plan_quadruple((0, 1, 2, 3), (4, 5, 6, 3), (8, 9)),
        lambda: plan_quadruple((0, 1, 2, 3), (4, 5, 6, 7), (7, 9)),
        lambda: plan_quadruple((0, 1, 2), (4, 5, 6), (8, 9)),
        lambda: plan_triple((0, 1, 2), (3, 4, 5), (6, 7), copies=(5,)),
        lambda: plan_split((0, 1, 2), (3, 4, 5), (6, 7), 3),
        lambda: standard_layout(4, 7),
    ])
    def test_invalid(self, build):
        with pytest.raises(PlanError):
            build()

    def test_structure_enforced(self):
        plan = named_plan("quadruple")
        s = plan.steps
        with pytest.raises(PlanError):
            DecompositionPlan(plan.name, plan.occupied, plan.virtual, plan.ancillas, plan.copy_ancillas,
                              (s[0], s[1], s[2], s[4], s[3]))
        with pytest.raises(PlanError):
            DecompositionPlan(plan.name, plan.occupied, plan.virtual, plan.ancillas, plan.copy_ancillas,
                              (s[0], s[1], Step(s[2].op, False, s[2].controls), s[3], s[4]))

    def test_convention_too_small(self):
        with pytest.raises(PlanError):
            compile(named_plan("quadruple"), 0.1, JwConvention(10))


class TestPlanText:
    @pytest.mark.parametrize("scheme", list(SCHEMES) + ["naive-quad", "uncontrolled-quad"])
    def test_round_trip(self, scheme):
        plan = named_plan(scheme, 14)
        text = format_plan(plan)
        assert parse_plan(text) == plan and format_plan(parse_plan(text)) == text

    def test_round_trip_with_letters(self):
        plan = named_plan("quintuple")
        labels = plan.labels()
        back = parse_plan(format_plan(plan, labels), {v: k for k, v in labels.items()})
        assert back == plan

    @pytest.mark.parametrize("text", [
        "",
        "plan quadruple\ntarget 0->1\nancillas 2,3\ncopies\n",
        "plan quadruple rank=4\ntarget 0,1,2,3->4,5,6,7\nancillas 8,9\ncopies 10,11\n0,1->4 8 @ pi/2\n",
        "plan quadruple rank=4\ntarget 0,1,2,3->4,5,6,7\nancillas 8,9\ncopies 10,11\nq->4,8 @ pi/2\n",
        "plan quadruple rank=4\ntarget 0,1,2->4,5,6\nancillas 8,9\ncopies 10,11\n",
    ])
    def test_parse_errors(self, text):
        with pytest.raises(PlanError):
            parse_plan(text)


class TestTableAmplitudes:
    """Source, target and shelved columns of each decomposition table on the block layout."""

    @pytest.mark.parametrize("scheme", list(SCHEMES))
    def test_columns(self, scheme, rng):
        plan = named_plan(scheme)
        m = 2 * plan.rank
        src, tgt = determinant_index(plan.occupied), determinant_index(plan.virtual)
        shelved = shelved_determinants(plan, m)
        picks = [int(d) for d in rng.choice(shelved, size=min(6, len(shelved)), replace=False)]
        theta = rng.uniform(-math.pi, math.pi)
        c, s = math.cos(theta), math.sin(theta)
        kept, leak = run_plan(plan, theta, basis_columns(m, [src, tgt] + picks), m)
        assert np.max(leak) < 1e-10
        assert kept[src, 0] == pytest.approx(c, abs=1e-12) and kept[tgt, 0] == pytest.approx(s, abs=1e-12)
        assert kept[tgt, 1] == pytest.approx(c, abs=1e-12) and kept[src, 1] == pytest.approx(-s, abs=1e-12)
        for j, d in enumerate(picks, start=2):
            assert abs(kept[d, j] - 1) < 1e-12

    @pytest.mark.parametrize("scheme", ["triple", "quadruple"])
    def test_zero_angle_identity(self, scheme, rng):
        plan = named_plan(scheme)
        m = 2 * plan.rank
        psi = random_states(plan, m, 4, rng, domain="full")
        kept, leak = run_plan(plan, 0.0, psi, m)
        np.testing.assert_allclose(kept, psi, atol=1e-12)

    def test_sextuple_variants_agree(self, rng):
        a, b = named_plan("sextuple-24"), named_plan("sextuple-33")
        psi = random_states(a, 12, 4, rng)
        theta = rng.uniform(-math.pi, math.pi)
        ka, _ = run_plan(a, theta, psi, 12)
        kb, _ = run_plan(b, theta, psi, 12)
        np.testing.assert_allclose(ka, kb, atol=1e-9)


class TestExactness:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_rank4_splits(self, p, rng):
        plan = plan_split((0, 1, 2, 3), (4, 5, 6, 7), (8, 9), p)
        psi = random_states(plan, 8, 6, rng)
        assert verify_plan(plan, rng.uniform(-math.pi, math.pi, 3), psi, 8).passed

    @settings(max_examples=15, deadline=None)
    @given(st.permutations(range(7)), st.sampled_from([3, 4]), st.integers(0, 2 ** 32 - 1))
    def test_random_placements(self, orbs, rank, seed):
        m = 7 if rank == 3 else 8
        orbs = list(orbs) + [7] if m == 8 else list(orbs)
        occ, virt = orbs[:rank], orbs[rank:2 * rank]
        plan = named_plan("triple" if rank == 3 else "quadruple", m, occ=occ, virt=virt)
        rng = np.random.default_rng(seed)
        psi = random_states(plan, m, 4, rng)
        assert verify_plan(plan, rng.uniform(-math.pi, math.pi, 2), psi, m).passed

    def test_interleaved_orderings(self, rng):
        from uccdecomp.verify import orderings

        plan = named_plan("quadruple")
        psi = random_states(plan, 8, 6, rng)
        thetas = rng.uniform(-math.pi, math.pi, 2)
        for perm in orderings(plan, 8, 5, rng):
            assert verify_plan(plan, thetas, psi, 8, perm).passed, perm

    def test_outside_sector_counterexample(self):
        # |a w x y z>: five electrons, the factor acts as identity but the plan leaks
        plan = named_plan("quadruple")
        det = determinant_index((0, 4, 5, 6, 7))
        report = verify_plan(plan, [math.pi / 4], basis_columns(8, [det]), 8)
        assert not report.passed and report.max_leak == pytest.approx(0.5, abs=1e-9)

    def test_sector_is_rank_electrons(self):
        assert len(sector_determinants(8, 4)) == 70


class TestExhibits:
    def test_naive_two_doubles(self, rng):
        plan = plan_naive_two_doubles((0, 1, 2, 3), (4, 5, 6, 7))
        xi1, xi2 = 0.6, 0.8
        psi = np.zeros((256, 1), dtype=complex)
        psi[determinant_index((0, 1, 2, 3)), 0] = xi1
        psi[determinant_index((4, 5, 6, 7)), 0] = xi2
        theta = rng.uniform(0.2, 1.3)
        c, s = math.cos(theta), math.sin(theta)
        kept, _ = run_plan(plan, theta, psi, 8)
        assert kept[determinant_index((0, 1, 2, 3)), 0].real == pytest.approx(c * c * xi1 + s * s * xi2, abs=1e-12)
        assert abs(kept[determinant_index((4, 5, 2, 3)), 0]) == pytest.approx(c * s * abs(xi1 - xi2), abs=1e-12)

    def test_naive_zero_angle(self, rng):
        plan = plan_naive_two_doubles((0, 1, 2, 3), (4, 5, 6, 7))
        psi = random_states(named_plan("quadruple"), 8, 2, rng)
        kept, _ = run_plan(plan, 0.0, psi, 8)
        np.testing.assert_allclose(kept, psi, atol=1e-12)

    def test_uncontrolled_leaks(self):
        plan = plan_uncontrolled((0, 1, 2, 3), (4, 5, 6, 7), (8, 9))
        assert not plan.steps[2].controls
        theta = math.pi / 4
        conv = plan_convention(plan)
        psi = np.zeros((2 ** conv.total_qubits, 1), dtype=complex)
        psi[determinant_index((0, 2, 5, 7)), 0] = 1.0
        out = compile_program(compile(plan, theta, conv)).run(psi)
        assert out[determinant_index((0, 2, 5, 7)), 0].real == pytest.approx(math.cos(theta), abs=1e-12)
        assert out[determinant_index((0, 2, 8, 9)), 0].real == pytest.approx(-math.sin(theta), abs=1e-12)

    def test_uncontrolled_source_alone_is_correct(self, rng):
        plan = plan_uncontrolled((0, 1, 2, 3), (4, 5, 6, 7), (8, 9))
        src = determinant_index((0, 1, 2, 3))
        assert verify_plan(plan, rng.uniform(-3, 3, 3), basis_columns(8, [src]), 8).passed

    @pytest.mark.parametrize("scheme", ["naive-quad", "uncontrolled-quad"])
    def test_deviation_at_quarter_angle(self, scheme):
        plan = named_plan(scheme)
        psi = basis_columns(8, [determinant_index((0, 1, 2, 3)), determinant_index((0, 2, 5, 7))])
        psi[:, 0] = psi[:, 0] * 0.6 + basis_columns(8, [determinant_index((4, 5, 6, 7))])[:, 0] * 0.8
        assert verify_plan(plan, [math.pi / 4], psi, 8).max_deviation > 0.1
