import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closinglab import hyp2, orbits
from closinglab.bounds import CurvatureBounds, a_theta, make_constants
from closinglab.errors import DeltaTooLarge, DomainError, HypothesisViolated, NoWitness
from strategies import hyperbolic_elements, tangents

UNIT = make_constants(CurvatureBounds(1.0, 1.0))
UP = hyp2.HALF_PI


def partner(T1=10.0, T2=10.0, eps=0.05, **kw):
    cg = orbits.synthesize_crossed_geodesic(T1, T2, eps, "partner", **kw)
    return cg, orbits.construct_partner(cg, UNIT)


class TestSampledSup:
    def test_matches_dense_grid(self):
        fn = lambda s: math.sin(3 * s) * math.exp(-0.1 * s)
        sup, arg = orbits.sampled_sup(fn, 0.0, 10.0, 0.05)
        dense = max(fn(s) for s in np.linspace(0, 10, 200_001))
        assert dense - 1e-3 <= sup <= dense
        assert fn(arg) == sup


class TestSynthesis:
    def test_zero_angle_rejected(self):
        with pytest.raises(DomainError):
            orbits.synthesize_crossed_geodesic(6, 6, 0.0, "partner")

    def test_example(self):
        cg = orbits.synthesize_crossed_geodesic(6.0, 6.0, 0.05, "partner")
        assert hyp2.translation_length(cg.g) == pytest.approx(12.0, abs=1e-9)
        assert cg.crossing_angle() == pytest.approx(0.05, abs=1e-9)

    def test_pseudo_complement(self):
        cg = orbits.synthesize_crossed_geodesic(6.0, 6.0, 0.05, "pseudo")
        incoming = cg.lift_tangent(cg.T1).direction + math.pi
        angle = hyp2.angle_between(cg.g1.apply_tangent(cg.v0).direction, incoming)
        assert angle == pytest.approx(math.pi - 0.05, abs=1e-9)

    @given(st.floats(5, 15), st.floats(5, 15), st.floats(1e-3, 0.5), st.sampled_from(["partner", "pseudo"]),
           st.booleans(), st.sampled_from([0.5, 1.0, 2.0]))
    def test_self_check(self, T1, T2, eps, mode, mirror, k):
        cg = orbits.synthesize_crossed_geodesic(T1, T2, eps, mode, k, mirror)
        res = cg.check()
        assert res["composition"] < 1e-9 and res["angle"] < 1e-8
        assert res["endpoint"] < 1e-7 and res["length"] < 1e-8

    def test_large_eps_flag(self):
        cg = orbits.synthesize_crossed_geodesic(10, 10, 0.2, "partner", eps_max=UNIT.eps0)
        assert cg.large_eps

    @pytest.mark.parametrize("bad", [dict(T1=-1.0), dict(mode="other"), dict(eps=4.0)])
    def test_rejects(self, bad):
        args = dict(T1=5.0, T2=5.0, eps=0.1, mode="partner")
        args.update(bad)
        with pytest.raises((DomainError, HypothesisViolated)):
            orbits.synthesize_crossed_geodesic(**args)


class TestPartner:
    def test_example(self):
        _, res = partner()
        assert res.T - res.T_prime <= 34 * 0.05
        assert res.dist_sup <= 49 * 0.05
        assert res.ok and res.T_prime < res.T

    def test_trace_oracle(self):
        cg, res = partner(eps=0.01)
        m = np.linalg.inv(cg.g2.matrix) @ cg.g1.matrix
        assert res.T_prime == pytest.approx(2 * math.acosh(abs(np.trace(m)) / 2), abs=1e-12)

    def test_monotone_sweep(self):
        gaps = [partner(eps=e)[1] for e in np.geomspace(1e-3, 0.05, 12)]
        gaps = [r.T - r.T_prime for r in gaps]
        assert all(np.diff(gaps) > 0) and gaps[0] < 1e-5

    @given(st.floats(5, 14), st.floats(5, 14), st.floats(1e-3, 0.09), st.booleans())
    @settings(max_examples=25)
    def test_invariants(self, T1, T2, eps, mirror):
        _, res = partner(T1, T2, eps, mirror=mirror)
        assert res.ok
        assert min(orbits.partner_invariants(res, 1.0).values()) >= 0
        assert 0 <= res.T3 <= res.T_hat

    def test_mirror_symmetric(self):
        a, b = partner(mirror=False)[1], partner(mirror=True)[1]
        assert a.T_prime == pytest.approx(b.T_prime, abs=1e-10)
        assert a.dist_sup == pytest.approx(b.dist_sup, abs=1e-8)

    def test_wrong_mode(self):
        cg = orbits.synthesize_crossed_geodesic(10, 10, 0.05, "pseudo")
        with pytest.raises(DomainError):
            orbits.construct_partner(cg, UNIT)


class TestPseudo:
    def test_example(self):
        cg = orbits.synthesize_crossed_geodesic(10, 10, 0.05, "pseudo")
        res = orbits.construct_pseudo_partner(cg, UNIT)
        assert max(res.len_gaps) <= 16 * 0.05 and res.endpoint_gap <= 64 * 0.05 and res.ok

    def test_smooth_closing(self):
        cg = orbits.synthesize_crossed_geodesic(10, 10, 0.0, "pseudo")
        res = orbits.construct_pseudo_partner(cg, UNIT)
        assert res.That1 == pytest.approx(10.0, abs=1e-12)
        assert max(res.dist_sups) < 1e-9 and res.endpoint_gap < 1e-9

    def test_at_most_linear(self):
        eps = np.geomspace(1e-3, UNIT.eps0, 10)
        res = [orbits.construct_pseudo_partner(orbits.synthesize_crossed_geodesic(10, 10, e, "pseudo"), UNIT)
               for e in eps]
        for series in ([r.len_gaps[0] for r in res], [r.dist_sups[0] for r in res], [r.endpoint_gap for r in res]):
            slope = np.polyfit(np.log(eps), np.log(series), 1)[0]
            assert slope >= 0.9


class TestMidpointChain:
    @given(tangents(), st.floats(1.0, 12.0), st.floats(-math.pi, math.pi), st.sampled_from([0.5, 1.0, 2.0]))
    def test_holds_for_any_loop(self, v, L, turn, k):
        end = hyp2.geodesic_flow(v, L, k)
        g = hyp2.isometry_from_frames(v, end.rotated(turn))
        # equality at turn 0; the matrix entries grow like exp(kL / 2), so rounding scales with exp(kL)
        assert orbits.midpoint_chain_residual(g, v, L, k) >= -(1e-9 + 4e-16 * math.exp(k * L))

    def test_closing_angle(self):
        v = hyp2.UnitTangent(1j, UP)
        g = hyp2.isometry_from_frames(v, hyp2.geodesic_flow(v, 5.0).rotated(math.pi - 0.3))
        assert orbits.closing_angle(g, v, 5.0) == pytest.approx(0.3, abs=1e-10)

    @pytest.mark.parametrize("mode", ["partner", "pseudo"])
    def test_both_loops(self, mode):
        cg = orbits.synthesize_crossed_geodesic(8.0, 11.0, 0.02, mode)
        assert min(orbits.loop_chain_residuals(cg)) >= -1e-9


class TestClosing:
    def g10(self):
        return hyp2.isometry_from_frames(orbits.START, hyp2.geodesic_flow(orbits.START, 10.0))

    def test_on_axis(self):
        g = self.g10()
        w, delta = orbits.synthesize_recurrent(g, 0.0, 0.0, 10.0)
        assert delta < 1e-12
        res = orbits.close_orbit(w, 10.0, g, UNIT)
        assert abs(res.T - res.T_prime) < 1e-9 and res.shadow_sup < 1e-9

    def test_delta_grows_with_offset(self):
        g = self.g10()
        deltas = [orbits.synthesize_recurrent(g, r, T=hyp2.translation_length(g))[1] for r in (0.005, 0.01, 0.02)]
        assert 0 < deltas[0] < deltas[1] < deltas[2]

    def test_jitter(self):
        g = self.g10()
        w, d0 = orbits.synthesize_recurrent(g, 0.01)
        _, d1 = orbits.synthesize_recurrent(g, 0.01, T=hyp2.distance(w.base, g.apply(w.base)) + 0.005)
        assert d0 < d1 <= d0 + 0.005 * math.cosh(1.0) + 1e-12

    def test_example_pipeline(self):
        g = self.g10()
        w, _ = orbits.synthesize_recurrent(g, 0.01)
        res = orbits.close_orbit(w, hyp2.distance(w.base, g.apply(w.base)), g, UNIT)
        assert res.ok and res.footpoint and res.T > res.T_prime

    def test_too_far(self):
        g = self.g10()
        w = hyp2.UnitTangent(2j, 0.0)
        with pytest.raises(HypothesisViolated):
            orbits.close_orbit(w, 10.0, g, UNIT)
        with pytest.raises(DeltaTooLarge):
            orbits.synthesize_recurrent(g, 0.5, tilt=0.3, constants=UNIT)

    def test_sampler_is_admissible(self):
        rng = np.random.default_rng([3, 0])
        for _ in range(10):
            g, w, T, info = orbits.sample_closing_case(rng, UNIT)
            assert info["offset"] <= 0.02 and abs(info["tilt"]) <= 0.01 and abs(info["jitter"]) <= 0.005
            assert orbits.close_orbit(w, T, g, UNIT).ok


class TestCones:
    def test_membership_basics(self):
        v0 = orbits.START
        assert orbits.in_A_theta(v0, v0, 0.0)
        t = a_theta(0.1, 1.0) + 0.01
        assert not orbits.in_A_theta(hyp2.geodesic_flow(v0, t), v0, 0.1)
        assert orbits.in_A_theta(hyp2.geodesic_flow(v0, t - 0.02), v0, 0.1)

    @given(st.floats(0.01, 0.3), st.floats(1.01, 3.0))
    def test_wide_angle_excluded(self, theta, factor):
        v0 = orbits.START
        v = v0.rotated(theta * factor)
        # the forward endpoints of v and v0 are seen from p0 at the rotation angle
        assert not orbits.in_A_theta(v, v0, theta)

    def test_axial(self):
        v0 = orbits.START
        g = hyp2.isometry_from_frames(v0, hyp2.geodesic_flow(v0, 7.0))
        rep = orbits.check_cone_contraction(g, v0, 0.1, 7.0, 200, UNIT)
        assert rep.passed

    def test_degenerate_cone(self):
        v0 = orbits.START
        g = hyp2.isometry_from_frames(v0, hyp2.geodesic_flow(v0, 7.0))
        rep = orbits.check_cone_contraction(g, v0, 0.0, 7.0, 3, UNIT)
        assert rep.passed and rep.samples == 6

    def test_partner_element(self):
        cg, res = partner(eps=0.02)
        v = orbits.find_witness(res.element, cg.v0, 0.04, res.T_hat)
        assert orbits.check_cone_contraction(res.element, cg.v0, 0.04, res.T_hat, 300, UNIT, witness=v).passed
        reports = orbits.check_length_bracket(res.element, v, cg.v0, 0.04, res.T_hat, UNIT)
        assert {r.name for r in reports} == {"length_bracket", "footpoint_length", "footpoint_shadow"}
        assert all(r.passed for r in reports)

    def test_no_witness(self):
        v0 = orbits.START
        g = hyp2.isometry_from_frames(v0, hyp2.geodesic_flow(v0.rotated(1.0), 7.0))
        with pytest.raises(NoWitness):
            orbits.find_witness(g, v0, 0.01, 7.0)

    @given(hyperbolic_elements(5.0, 9.0))
    @settings(max_examples=20)
    def test_bracket_for_axial_witness(self, g):
        line = hyp2.axis(g)
        v0 = line.base
        L = hyp2.translation_length(g)
        (rep,) = orbits.check_length_bracket(g, v0, v0, 0.05, L, UNIT)[:1]
        assert rep.passed
