import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from closinglab import comparison, hyp2
from closinglab.bounds import CurvatureBounds, a_theta
from closinglab.comparison import CheckReport
from closinglab.errors import DomainError, HypothesisViolated, SideCrossing
from strategies import kappas, tangents

UNIT = CurvatureBounds(1.0, 1.0)
PYTHAGORAS_1_1 = 1.513374006596504  # arcosh(cosh(1)^2)

sides = st.floats(0.1, 10.0)
apex = st.floats(1e-3, math.pi - 1e-3)


class TestSolveSide:
    def test_pythagoras(self):
        assert comparison.solve_side_constant(1, 1, math.pi / 2, 1.0) == pytest.approx(PYTHAGORAS_1_1, abs=1e-14)

    @given(st.floats(0.01, 10), kappas)
    def test_straight(self, l, k):
        assert comparison.solve_side_constant(l, l, math.pi, k) == pytest.approx(2 * l, rel=1e-12)

    @given(sides, sides, apex, kappas)
    def test_matches_constructed_vertices(self, l1, l2, a3, k):
        t = comparison.construct_triangle(l1, l2, a3, k)
        assert comparison.solve_side_constant(l1, l2, a3, k) == pytest.approx(t.l3, abs=1e-10, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            comparison.solve_side_constant(-1, 1, 1, 1.0)


class TestTriangleLaws:
    @given(sides, sides, apex)
    def test_cosine_laws_coincide(self, l1, l2, a3):
        t = comparison.construct_triangle(l1, l2, a3)
        m = comparison.triangle_law_margins(t, UNIT)
        assert abs(m["cosine_upper_curv"]) <= 1e-9 and abs(m["cosine_lower_curv"]) <= 1e-9
        assert m["angle_chain_left"] >= -1e-12
        assert m["angle_chain_right"] >= -1e-9

    @given(st.floats(0.1, 8.0), st.floats(0.1, 8.0), tangents())
    def test_right_triangle_equalities(self, l1, l2, start):
        t = comparison.construct_triangle(l1, l2, math.pi / 2, 1.0, start)
        m = comparison.triangle_law_margins(t, UNIT)
        for name in ("sine_upper_curv_1", "sine_upper_curv_2", "sine_lower_curv_1", "sine_lower_curv_2"):
            assert abs(m[name]) <= 1e-9
        assert math.sin(t.a1) * math.sinh(t.l3) == pytest.approx(math.sinh(t.l1), rel=1e-9)

    @given(st.floats(0.1, 8.0), st.floats(0.1, 8.0))
    def test_right_triangle_inequalities(self, l1, l2):
        t = comparison.construct_triangle(l1, l2, math.pi / 2)
        m = comparison.triangle_law_margins(t, UNIT)
        assert min(m["cosh_leg_1"], m["cosh_leg_2"], m["sin_cot_1"], m["sin_cot_2"]) >= -1e-9

    def test_angle_chain_grid(self):
        for a in np.linspace(0, math.pi, 10_001):
            assert 2 * a * a / math.pi**2 <= 2 * math.sin(a / 2) ** 2 + 1e-15

    def test_near_straight_angle(self):
        t = comparison.construct_triangle(2.0, 3.0, math.pi - 1e-9)
        assert comparison.triangle_law_margins(t, UNIT)["angle_chain_left"] >= 0

    def test_right_relations_skipped_for_general(self):
        t = comparison.construct_triangle(1.0, 2.0, 1.0)
        assert "sine_upper_curv_1" not in comparison.triangle_law_margins(t, UNIT)

    def test_pinched_strict(self):
        # a constant -1 triangle is admissible for pinching in [-4, -1/4]
        t = comparison.construct_triangle(1.5, 2.0, 1.2)
        m = comparison.triangle_law_margins(t, CurvatureBounds(0.5, 2.0))
        assert m["cosine_upper_curv"] > 0 and m["cosine_lower_curv"] > 0

    def test_reports(self):
        t = comparison.construct_triangle(1.5, 2.0, math.pi / 2)
        reports = comparison.check_triangle_laws(t, UNIT)
        assert len(reports) == 12 and all(r.passed for r in reports)


class TestObtuseTriangles:
    def test_example(self):
        t = comparison.construct_triangle(3.0, 3.0, math.pi - 0.2)
        reports = comparison.check_corollary_tri(t, 0.2, 3.0, 3.0, UNIT)
        assert [r.name for r in reports] == ["near_base", "base_length", "base_angle"]
        assert all(r.passed for r in reports)

    def test_straight_apex(self):
        tri = comparison.ConstantTriangle(math.exp(-3) * 1j, math.exp(3) * 1j, 1j)
        d = tri.side_distance(1, 0.0)
        assert abs(d) <= 1e-12 and d <= a_theta(0.05, 1.0)

    @given(st.floats(0.2, 8.0), st.floats(0.2, 8.0), st.floats(1e-3, 0.5), st.floats(0.0, 1.0),
           st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_base_length_random(self, l1, l2, eps, share, f1, f2):
        a3 = math.pi - eps * share
        l3 = comparison.solve_side_constant(l1, l2, a3, 1.0)
        assert l3 >= f1 * l1 + f2 * l2 - 2 * a_theta(eps / 2, 1.0) - 1e-9

    def test_hypotheses(self):
        t = comparison.construct_triangle(3.0, 3.0, 2.0)
        with pytest.raises(HypothesisViolated):
            comparison.check_corollary_tri(t, 0.2, 1.0, 1.0, UNIT)
        t = comparison.construct_triangle(3.0, 3.0, math.pi - 0.1)
        with pytest.raises(HypothesisViolated):
            comparison.check_corollary_tri(t, 0.2, 4.0, 1.0, UNIT)
        with pytest.raises(DomainError):
            comparison.check_corollary_tri(t, 2.0, 1.0, 1.0, UNIT)


class TestPerpendiculars:
    @given(st.floats(-4, 4), st.floats(-4, 4), kappas)
    def test_on_line_equality(self, t1, t2, k):
        geo = comparison.ConstantPerpendiculars(k)
        d = geo.pair_distance(0.0, 0.0, t1, t2)
        assert math.sinh(k * d / 2) ** 2 == pytest.approx(math.sinh(k * abs(t1 - t2) / 2) ** 2, rel=1e-9, abs=1e-14)

    @given(st.floats(0.0, 3.0), st.floats(0.01, 4.0), kappas)
    def test_equidistant_identity(self, r, s, k):
        geo = comparison.ConstantPerpendiculars(k)
        d = geo.pair_distance(r, r, 0.3, 0.3 + s)
        lhs = math.sinh(k * d / 2) ** 2
        rhs = math.cosh(k * r) ** 2 * math.sinh(k * s / 2) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-9)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(-3, 3), st.floats(-3, 3), kappas)
    def test_bound_holds(self, r1, r2, t1, t2, k):
        assume(abs(t1 - t2) + abs(r1 - r2) > 1e-6)
        assert comparison.check_perp_proj(r1, r2, t1, t2, k).passed

    def test_opposite_sides(self):
        with pytest.raises(SideCrossing):
            comparison.check_perp_proj(1.0, -1.0, 0.0, 1.0, 1.0)


class TestAnglesAtInfinity:
    def test_same_vector(self):
        v = hyp2.UnitTangent(1j, 1.0)
        r = comparison.check_angles_at_infinity(v, v, 0.1, UNIT)
        assert r.passed and r.worst_margin > 0

    def test_parallel_verticals(self):
        v = hyp2.UnitTangent(1j, hyp2.HALF_PI)
        w = hyp2.UnitTangent(0.05 + 1j, hyp2.HALF_PI)
        delta = hyp2.d1_metric(v, w)
        assert comparison.check_angles_at_infinity(v, w, delta, UNIT).passed

    @given(tangents(), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0.0, 0.2),
           st.floats(-0.2, 0.2))
    def test_random_pairs(self, v, heading, turn, step, t):
        w = hyp2.geodesic_flow(hyp2.UnitTangent(v.base, heading), step)
        w = hyp2.geodesic_flow(hyp2.UnitTangent(w.base, v.direction + turn * 0.1), t)
        delta = hyp2.d1_metric(v, w)
        assume(1e-9 < delta <= 0.4)
        r = comparison.check_angles_at_infinity(v, w, delta, UNIT, tolerance=1e-9)
        assert r.passed
        # the bound never exceeds its linear relaxation
        assert r.worst_margin <= 2 * math.pi * delta

    def test_seeded_sweep(self):
        rng = np.random.default_rng(11)
        worst, trials = math.inf, 0
        while trials < 10_000:
            v = hyp2.UnitTangent(complex(rng.normal(), math.exp(rng.normal())), rng.uniform(0, 2 * math.pi))
            w = hyp2.geodesic_flow(hyp2.UnitTangent(v.base, rng.uniform(0, 2 * math.pi)), rng.uniform(0, 0.2))
            w = hyp2.UnitTangent(w.base, v.direction + rng.normal(scale=0.05))
            delta = hyp2.d1_metric(v, w)
            if not 0 < delta <= 0.4:
                continue
            trials += 1
            worst = min(worst, comparison.check_angles_at_infinity(v, w, delta, UNIT).worst_margin)
        assert worst >= -1e-9

    def test_delta_too_small(self):
        v = hyp2.UnitTangent(1j, 1.0)
        w = hyp2.UnitTangent(1.5j, 1.0)
        with pytest.raises(HypothesisViolated):
            comparison.check_angles_at_infinity(v, w, 1e-3, UNIT)


class TestReports:
    @given(st.lists(st.floats(-1, 1), min_size=1), st.floats(0, 0.5))
    def test_zero_violations_means_margin_ok(self, margins, tol):
        r = CheckReport.from_margins("x", margins, tol)
        assert r.passed == (r.worst_margin >= -tol)
        assert r.samples == len(margins)

    def test_nan_is_violation(self):
        assert not CheckReport.from_margins("x", [math.nan], 1.0).passed

    def test_merge(self):
        merged = comparison.merge_reports([CheckReport.from_margins("a", [1.0], 0.0),
                                           CheckReport.from_margins("a", [-1.0, 2.0], 0.0),
                                           CheckReport.from_margins("b", [0.5], 0.0)])
        assert merged["a"].samples == 3 and merged["a"].violations == 1 and merged["a"].worst_margin == -1.0
        with pytest.raises(ValueError):
            merged["a"].merged(merged["b"])
