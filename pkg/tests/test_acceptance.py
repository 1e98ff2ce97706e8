"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records a PASS/FAIL line in conftest.ACCEPTANCE, printed at the end of the session.
"""
import math
import time

import mpmath as mp
import numpy as np
import pytest

from closinglab import bounds, hyp2
from closinglab.experiments import EQUALITY_COLUMNS, ExperimentConfig, run_experiment
from conftest import ACCEPTANCE

UNIT = bounds.CurvatureBounds(1.0, 1.0)
C_MAIN = 20 * math.pi
C_TILDE = 8 * math.pi


def record(label: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[label] = (ok, detail)
    assert ok, f"{label}: {detail}"


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def partner_sweep():
    cfg = ExperimentConfig("partner", T1=10.0, T2=10.0, eps_min=1e-3, eps_max=0.05, eps_count=20)
    (rows, summary), elapsed = timed(lambda: run_experiment(cfg))
    return rows, summary, elapsed


@pytest.fixture(scope="module")
def pseudo_sweep():
    cfg = ExperimentConfig("pseudo", T1=10.0, T2=10.0, eps_min=1e-3, eps_max=0.05, eps_count=20)
    (rows, summary), elapsed = timed(lambda: run_experiment(cfg))
    return rows, summary, elapsed


def test_01_constant_curvature_equalities():
    cfg = ExperimentConfig("triangles", samples=10_000, side_min=0.1, side_max=10.0)
    (rows, _), elapsed = timed(lambda: run_experiment(cfg))
    worst = max(abs(r[c]) for r in rows for c in EQUALITY_COLUMNS if r[c] is not None)
    right = sum(1 for r in rows if r["kind"] == "right")
    sides_ok = all(0.1 <= r[k] <= 10.0 for r in rows for k in ("l1", "l2"))
    ok = len(rows) == 10_000 and right > 0 and sides_ok and worst <= 1e-9 and elapsed <= 5.0
    record("1 constant-curvature equalities", ok,
           f"{len(rows)} triangles ({right} right), max |margin| {worst:.2e} <= 1e-9, {elapsed:.2f} s <= 5 s")


def test_02_variable_curvature_inequalities():
    cfg = ExperimentConfig("surface-triangles", kappa1=0.5, kappa2=1.0, samples=1000, tolerance=1e-6)
    (rows, summary), elapsed = timed(lambda: run_experiment(cfg))
    worst = min(r["worst_margin"] for r in rows)
    obtuse = sum(1 for r in rows if r["base_length"] is not None)
    perp = sum(1 for r in rows if r["perpendicular_projection"] is not None)
    ok = summary["violations"] == 0 and worst >= -1e-6 and obtuse > 0 and perp > 0 and elapsed <= 180.0
    record("2 variable-curvature inequalities", ok,
           f"{len(rows)} surface triangles ({obtuse} obtuse-triangle, {perp} projection checks), "
           f"worst margin {worst:.2e} >= -1e-6, {elapsed:.1f} s <= 180 s")


def test_03_partner_bounds(partner_sweep):
    rows, _, elapsed = partner_sweep
    len_ok = all(r["T"] - r["T_prime"] <= 34 * r["eps"] for r in rows)
    dist_ok = all(r["dist_sup"] <= 49 * r["eps"] for r in rows)
    strict = all(r["T_prime"] < r["T"] for r in rows)
    worst_len = max((r["T"] - r["T_prime"]) / r["eps"] for r in rows)
    worst_dist = max(r["dist_sup"] / r["eps"] for r in rows)
    ok = len(rows) == 20 and len_ok and dist_ok and strict and elapsed <= 10.0
    record("3 partner length and distance", ok,
           f"max (T-T')/eps {worst_len:.3g} <= 34, max sup/eps {worst_dist:.3g} <= 49, T' < T in all 20, "
           f"{elapsed:.2f} s <= 10 s")


def test_04_partner_scaling():
    cfg = ExperimentConfig("partner-scaling", T1=10.0, T2=10.0, eps_min=1e-3, eps_max=0.05, eps_count=20)
    (rows, summary), elapsed = timed(lambda: run_experiment(cfg))
    # independent slope fit
    eps = np.array([r["eps"] for r in rows])
    gap = np.array([r["T"] - r["T_prime"] for r in rows])
    slope = np.polyfit(np.log(eps), np.log(gap), 1)[0]
    c1 = summary["C1"]
    lower_ok = all(g >= c1 * e * e for g, e in zip(gap, eps))
    ok = abs(slope - 2.0) <= 0.05 and lower_ok and c1 > 0 and elapsed <= 10.0
    record("4 partner quadratic scaling", ok,
           f"slope {slope:.4f} in 2 +- 0.05, T-T' >= C1 eps^2 with C1 {c1:.3e} (b {summary['b']:.3e}), "
           f"{elapsed:.2f} s <= 10 s")


def test_05_tprime_bracket():
    rng = np.random.default_rng(5)
    mp.mp.dps = 50
    cases = []
    for _ in range(1000):
        b = rng.uniform(0.1, 1.0)
        eps = math.exp(rng.uniform(math.log(1e-3), math.log(0.09)))
        t_min = math.acosh(b / (2 * math.sin(eps / 2) ** 2) + 1)
        cases.append((t_min + rng.uniform(0, 5), t_min + rng.uniform(0, 5), eps, b))
    # oracle: the third side opposite the angle pi - eps, at 50 digits
    gaps = []
    for T1, T2, eps, _ in cases:
        t1, t2, e = mp.mpf(T1), mp.mpf(T2), mp.mpf(eps)
        tp = mp.acosh(mp.cosh(t1) * mp.cosh(t2) + mp.sinh(t1) * mp.sinh(t2) * mp.cos(e))
        gaps.append(float(t1 + t2 - tp))

    def check():
        bad = 0
        for (T1, T2, eps, b), gap in zip(cases, gaps):
            lo, hi = bounds.tprime_bounds(T1, T2, eps, UNIT, b)
            bad += not (lo - 1e-9 <= gap <= hi + 1e-9)
        return bad

    bad, elapsed = timed(check)
    ok = bad == 0 and elapsed <= 2.0
    record("5 T' bracket", ok, f"{bad} of {len(cases)} outside [lower, upper] at 1e-9, {elapsed:.3f} s <= 2 s")


def test_06_closing():
    cfg = ExperimentConfig("closing", samples=100)
    (rows, summary), elapsed = timed(lambda: run_experiment(cfg))
    admissible = all(r["offset"] <= 0.02 and abs(r["tilt"]) <= 0.01 and abs(r["jitter"]) <= 0.005 for r in rows)
    bad = sum(1 for r in rows if abs(r["T"] - r["T_prime"]) > 2 * C_MAIN * r["delta"]
              or r["shadow_sup"] > (5 * C_MAIN + 1) * r["delta"])
    fp = [r for r in rows if r["footpoint"]]
    fp_bad = sum(1 for r in fp if not (0 < r["T"] - r["T_prime"] <= 4 * C_TILDE * r["delta"])
                 or r["shadow_sup"] > (10 * C_TILDE + 1) * r["delta"])
    ok = len(rows) == 100 and admissible and bad == 0 and fp and fp_bad == 0 and summary["violations"] == 0 \
        and elapsed <= 30.0
    record("6 closing", ok,
           f"{bad} of 100 violate 40pi delta / (100pi+1) delta; {fp_bad} of {len(fp)} foot-point cases violate "
           f"4C~ delta / (10C~+1) delta; {elapsed:.2f} s <= 30 s")


def test_07_pseudo_partner(pseudo_sweep):
    rows, summary, elapsed = pseudo_sweep
    bad = sum(1 for r in rows if max(r["len_gap_1"], r["len_gap_2"]) > 16 * r["eps"]
              or max(r["dist_sup_1"], r["dist_sup_2"]) > 24 * r["eps"] or r["endpoint_gap"] > 64 * r["eps"])
    ok = len(rows) == 20 and bad == 0 and summary["violations"] == 0 and elapsed <= 10.0
    record("7 pseudo-partner", ok, f"{bad} of {len(rows)} violate 16 eps / 24 eps / 64 eps, {elapsed:.2f} s <= 10 s")


def test_08_scalar_functions():
    def check():
        exact = all(bounds.f_delta(0.5, k) == math.pi for k in (0.25, 0.5, 1.0, 2.0, 4.0))
        worst_f = worst_beta = -math.inf
        monotone = True
        for k in (0.5, 1.0, 2.0):
            deltas = np.linspace(0.5 / 1000, 0.5, 1000)
            worst_f = max(worst_f, max(bounds.f_delta(d, k) - 2 * math.pi * d for d in deltas))
            betas = np.linspace(0.0, 0.5 * math.pi / k, 1001)[:-1]
            worst_beta = max(worst_beta, max(b - bounds.a_theta(k * b, k) for b in betas))
            vals = [bounds.a_theta(t, k) for t in np.linspace(0.0, 0.5 * math.pi, 1001)[:-1]]
            monotone = monotone and all(np.diff(vals) > 0)
        return exact, worst_f, worst_beta, monotone

    (exact, worst_f, worst_beta, monotone), elapsed = timed(check)
    ok = exact and worst_f <= 0 and worst_beta <= 0 and monotone and elapsed <= 1.0
    record("8 scalar functions", ok,
           f"f(1/2) == pi exactly: {exact}; max f - 2 pi delta {worst_f:.2e}; max beta - a(k beta) "
           f"{worst_beta:.2e}; a increasing: {monotone}; {elapsed:.3f} s <= 1 s")


def _random_point(rng):
    return complex(rng.uniform(-3, 3), math.exp(rng.uniform(-2, 2)))


def _random_boundary(rng):
    return math.inf if rng.random() < 0.1 else rng.uniform(-5, 5)


def test_09_busemann_cocycle():
    rng = np.random.default_rng(9)
    b = hyp2.busemann

    def check():
        worst = 0.0
        for _ in range(1000):
            xi, k = _random_boundary(rng), float(rng.choice([0.5, 1.0, 2.0]))
            p, q, r = (_random_point(rng) for _ in range(3))
            worst = max(worst, abs(b(xi, r, p, k) - b(xi, r, q, k) - b(xi, q, p, k)),
                        abs(b(xi, q, p, k) + b(xi, p, q, k)))
        return worst

    worst, elapsed = timed(check)
    ok = worst <= 1e-9 and elapsed <= 10.0
    record("9 Busemann cocycle and antisymmetry", ok,
           f"max residual {worst:.2e} <= 1e-9 on 1000 configurations, {elapsed:.2f} s <= 10 s")


@pytest.mark.xfail(strict=True, reason="the visibility angle has gradient up to 2 kappa, so kappa is not a "
                                       "valid Lipschitz constant")
def test_09_visibility_lipschitz():
    rng = np.random.default_rng(19)

    def check():
        worst, over = 0.0, 0
        for _ in range(10_000):
            k = float(rng.choice([0.5, 1.0, 2.0]))
            q = _random_point(rng)
            xi, eta = _random_boundary(rng), rng.uniform(-5, 5)
            if hyp2.boundary_equal(xi, eta, 1e-6):
                eta += 0.5
            d = rng.uniform(1e-3, 1.0)
            q2 = hyp2.geodesic_flow(hyp2.UnitTangent(q, rng.uniform(0, 2 * math.pi)), d, k).base
            diff = abs(hyp2.visibility_angle(q, xi, eta, k) - hyp2.visibility_angle(q2, xi, eta, k))
            ratio = diff / (k * hyp2.distance(q, q2, k))
            worst = max(worst, ratio)
            over += ratio > 1 + 1e-6
        return worst, over

    (worst, over), elapsed = timed(check)
    ok = over == 0 and elapsed <= 10.0
    record("9 visibility Lipschitz at kappa", ok,
           f"{over} of 10000 pairs exceed kappa (1 + 1e-6); max ratio / kappa {worst:.4f}, the true constant is "
           f"2 kappa; {elapsed:.2f} s")


def test_10_cone_contraction():
    cfg = ExperimentConfig("cones", T1=10.0, T2=10.0, eps_min=1e-3, eps_max=0.05, eps_count=20, cone_samples=1000)
    theta0 = cfg.constants.theta0
    (rows, _), elapsed = timed(lambda: run_experiment(cfg))
    admissible = all(r["theta"] <= theta0 and r["t"] >= 5.0 for r in rows)
    sampled = min(r["cone_samples"] for r in rows)
    violations = sum(r["cone_violations"] for r in rows)
    ok = len(rows) == 20 and admissible and sampled >= 1000 and violations == 0 and elapsed <= 30.0
    record("10 cone contraction", ok,
           f"20 elements, >= {sampled} sampled directions each, {violations} violations, {elapsed:.2f} s <= 30 s")


def test_11_midpoint_chain(partner_sweep, pseudo_sweep):
    rows = partner_sweep[0] + pseudo_sweep[0]
    worst = min(min(r["chain_residual_1"], r["chain_residual_2"]) for r in rows)
    ok = len(rows) == 40 and worst >= -1e-9
    record("11 midpoint chain", ok, f"{2 * len(rows)} loops, min residual {worst:.2e} >= -1e-9")
