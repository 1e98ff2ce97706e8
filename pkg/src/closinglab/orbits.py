"""Closed geodesics with a prescribed self-crossing, their partners, and closing checks.

All constructions live in the constant-curvature half-plane and work with the
deck elements directly: a loop through p0 = i is encoded by the isometry that
carries the start vector to the (rotated) end vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hyp2
from .bounds import BoundConstants, a_theta, footpoint_length_gap, footpoint_shadow_bound, length_bracket
from .comparison import CheckReport
from .errors import DeltaTooLarge, DomainError, HypothesisViolated, NoWitness

SUP_STEP = 0.05
P0 = 1j
START = hyp2.UnitTangent(P0, hyp2.HALF_PI)


def sampled_sup(fn, lo: float, hi: float, step: float = SUP_STEP) -> tuple[float, float]:
    """Max of fn on a uniform grid of spacing <= step, rechecked at half spacing near the peak."""
    n = max(1, int(math.ceil((hi - lo) / step)))
    grid = np.linspace(lo, hi, n + 1)
    vals = [fn(s) for s in grid]
    k = int(np.argmax(vals))
    best, arg = vals[k], float(grid[k])
    h = (hi - lo) / n
    for s in (arg - 0.5 * h, arg + 0.5 * h):
        if lo <= s <= hi:
            v = fn(s)
            if v > best:
                best, arg = v, s
    return float(best), arg


@dataclass
class CrossedGeodesic:
    kappa: float
    v0: hyp2.UnitTangent
    T1: float
    T2: float
    eps: float
    mode: str
    g1: hyp2.Isometry
    g: hyp2.Isometry
    g2: hyp2.Isometry
    mirror: bool = False
    large_eps: bool = False

    @property
    def T(self) -> float:
        return self.T1 + self.T2

    def lift(self, t: float) -> complex:
        return hyp2.geodesic_flow(self.v0, t, self.kappa).base

    def lift_tangent(self, t: float) -> hyp2.UnitTangent:
        return hyp2.geodesic_flow(self.v0, t, self.kappa)

    def crossing_angle(self) -> float:
        """Angle at c(T1) between the pushed start vector and the incoming (partner) or outgoing (pseudo) lift."""
        pushed = self.g1.apply_tangent(self.v0).direction
        d = self.lift_tangent(self.T1).direction
        ref = d + math.pi if self.mode == "partner" else d
        return hyp2.angle_between(pushed, ref)

    def check(self) -> dict[str, float]:
        """Residuals of the defining relations (composition relative to the matrix scale)."""
        comp = self.g2 @ self.g1
        scale = max(1.0, float(np.max(np.abs(self.g.matrix))))
        diff = comp.matrix - np.sign(comp.trace * self.g.trace) * self.g.matrix
        return {
            "composition": float(np.max(np.abs(diff))) / scale,
            "endpoint": hyp2.distance(self.g1.apply(self.v0.base), self.lift(self.T1), self.kappa),
            "length": abs(hyp2.translation_length(self.g, self.kappa) - self.T),
            "angle": abs(self.crossing_angle() - self.eps),
        }


def synthesize_crossed_geodesic(T1: float, T2: float, eps: float, mode: str = "partner", kappa: float = 1.0,
                                mirror: bool = False, eps_max: float | None = None) -> CrossedGeodesic:
    if not (T1 > 0 and T2 > 0):
        raise HypothesisViolated("loop lengths must be positive")
    if mode not in ("partner", "pseudo"):
        raise DomainError(f"unknown mode {mode!r}")
    if not (0.0 <= eps < math.pi):
        raise DomainError("eps must lie in [0, pi)")
    if mode == "partner" and eps == 0.0:
        raise DomainError("a crossing angle of 0 is not a transversal crossing")
    kappa = hyp2.check_kappa(kappa)
    alpha = math.pi - eps if mode == "partner" else eps
    if mirror:
        alpha = -alpha
    end = hyp2.geodesic_flow(START, T1 + T2, kappa)
    mid = hyp2.geodesic_flow(START, T1, kappa)
    g = hyp2.isometry_from_frames(START, end)
    g1 = hyp2.isometry_from_frames(START, mid.rotated(alpha))
    g2 = g @ g1.inverse()
    return CrossedGeodesic(kappa, START, float(T1), float(T2), float(eps), mode, g1, g, g2, mirror,
                           eps_max is not None and eps > eps_max)


@dataclass
class PartnerResult:
    T: float
    T_hat: float
    T_prime: float
    T3: float
    eps: float
    dist_sup: float
    bound_len: float
    bound_dist: float
    axis: hyp2.GeodesicLine = field(repr=False)
    element: hyp2.Isometry = field(repr=False)
    in_regime: bool = True
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def construct_partner(cg: CrossedGeodesic, constants: BoundConstants, step: float = SUP_STEP,
                      tolerance: float = 1e-9) -> PartnerResult:
    if cg.mode != "partner":
        raise DomainError("construct_partner needs a partner-mode crossing")
    k = cg.kappa
    elem = cg.g2.inverse() @ cg.g1
    T_prime = hyp2.translation_length(elem, k)
    p0 = cg.v0.base
    p1 = cg.g1.apply(p0)
    p2 = elem.apply(p0)
    T_hat = hyp2.distance(p0, p2, k)
    T3 = hyp2.GeodesicSegment.between(p0, p2, k).line.foot_parameter(p1)
    c = hyp2.axis(elem, k, reference=p0)
    first = hyp2.GeodesicSegment(hyp2.GeodesicLine(cg.v0, k), 0.0, cg.T1)
    # gamma2^-1 maps the second loop onto the segment from p1 to p2
    second = hyp2.GeodesicSegment.between(p1, p2, k)

    def gap(s: float) -> float:
        q = c.point(s)
        return min(first.distance_to(q), second.distance_to(q))

    dist_sup, _ = sampled_sup(gap, 0.0, T_prime, step)
    T = cg.T
    bound_len = constants.partner_len_coeff * cg.eps
    bound_dist = constants.partner_dist_coeff * cg.eps
    passed = {
        "length": T - T_prime <= bound_len + tolerance,
        "distance": dist_sup <= bound_dist + tolerance,
        "shorter": T_prime < T,
    }
    return PartnerResult(T, T_hat, T_prime, T3, cg.eps, dist_sup, bound_len, bound_dist, c, elem,
                         min(cg.T1, cg.T2) >= constants.t0, passed)


def partner_invariants(res: PartnerResult, kappa1: float, tol: float = 1e-9) -> dict[str, float]:
    """Margins (non-negative when satisfied) for T' <= T_hat <= T and T - T_hat <= 2a(eps/2)."""
    return {
        "tprime_below_that": res.T_hat - res.T_prime + tol,
        "that_below_t": res.T - res.T_hat + tol,
        "chord_gap": 2.0 * a_theta(0.5 * res.eps, kappa1) - (res.T - res.T_hat) + tol,
    }


@dataclass
class PseudoPartnerResult:
    T1: float
    T2: float
    That1: float
    That2: float
    eps: float
    len_gaps: tuple[float, float]
    dist_sups: tuple[float, float]
    endpoint_gap: float
    bound_len: float
    bound_dist: float
    bound_gap: float
    in_regime: bool = True
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def construct_pseudo_partner(cg: CrossedGeodesic, constants: BoundConstants, step: float = SUP_STEP,
                             tolerance: float = 1e-9) -> PseudoPartnerResult:
    if cg.mode != "pseudo":
        raise DomainError("construct_pseudo_partner needs a pseudo-mode crossing")
    k = cg.kappa
    p0 = cg.v0.base
    p1 = cg.lift(cg.T1)
    L1 = hyp2.translation_length(cg.g1, k)
    L2 = hyp2.translation_length(cg.g2, k)
    c1 = hyp2.axis(cg.g1, k, reference=p0)
    c2 = hyp2.axis(cg.g2, k, reference=p1)
    sup1, _ = sampled_sup(lambda s: hyp2.distance(c1.point(s), cg.lift(s), k), 0.0, cg.T1, step)
    sup2, _ = sampled_sup(lambda s: hyp2.distance(c2.point(s), cg.lift(cg.T1 + s), k), 0.0, cg.T2, step)
    gap = hyp2.distance(c1.point(L1), c2.point(0.0), k)
    gaps = (cg.T1 - L1, cg.T2 - L2)
    bl = constants.pseudo_len_coeff * cg.eps
    bd = constants.pseudo_dist_coeff * cg.eps
    bg = constants.pseudo_gap_coeff * cg.eps
    passed = {
        "length": all(-tolerance <= x <= bl + tolerance for x in gaps),
        "distance": max(sup1, sup2) <= bd + tolerance,
        "endpoint_gap": gap <= bg + tolerance,
    }
    return PseudoPartnerResult(cg.T1, cg.T2, L1, L2, cg.eps, gaps, (sup1, sup2), gap, bl, bd, bg,
                               min(cg.T1, cg.T2) >= constants.t0, passed)


def closing_angle(g: hyp2.Isometry, start: hyp2.UnitTangent, length: float, kappa: float = 1.0) -> float:
    """Angle between the pushed start vector and the reversed arrival vector of a loop."""
    arrive = hyp2.geodesic_flow(start, length, kappa)
    return hyp2.angle_between(g.apply_tangent(start).direction, arrive.direction + math.pi)


def midpoint_chain_residual(g: hyp2.Isometry, start: hyp2.UnitTangent, length: float, kappa: float = 1.0) -> float:
    """Relative slack in cosh(k rho_mid) <= 1 + (cosh(k L) - 1)(1 - cos phi)/2 for a loop of length L."""
    phi = closing_angle(g, start, length, kappa)
    m = hyp2.geodesic_flow(start, 0.5 * length, kappa).base
    rho = hyp2.distance(m, g.apply(m), kappa)
    # both sides minus one, in sinh^2 form to keep small values exact
    lhs = 2.0 * math.sinh(0.5 * kappa * rho) ** 2
    rhs = 2.0 * math.sinh(0.5 * kappa * length) ** 2 * math.sin(0.5 * phi) ** 2
    return 1.0 - lhs / rhs if rhs > 0 else -lhs


def loop_chain_residuals(cg: CrossedGeodesic) -> tuple[float, float]:
    first = midpoint_chain_residual(cg.g1, cg.v0, cg.T1, cg.kappa)
    second = midpoint_chain_residual(cg.g2, cg.lift_tangent(cg.T1), cg.T2, cg.kappa)
    return first, second


# closing


def synthesize_recurrent(g: hyp2.Isometry, offset: float, tilt: float = 0.0, T: float | None = None,
                         kappa: float = 1.0, constants: BoundConstants | None = None,
                         reference: complex = P0) -> tuple[hyp2.UnitTangent, float]:
    """Vector at distance offset from the axis of g aimed along the chord to its image, rotated by tilt.

    With T omitted the orbit length is the chord length, so the orbit ends exactly at the image point.
    """
    c = hyp2.axis(g, kappa, reference)
    x = hyp2.geodesic_flow(c.base.rotated(hyp2.HALF_PI), offset, kappa).base
    gx = g.apply(x)
    if x == gx:
        raise DomainError("g fixes the chosen point")
    w = hyp2.UnitTangent(x, hyp2.direction_toward(x, gx) + tilt)
    if T is None:
        T = hyp2.distance(x, gx, kappa)
    delta = hyp2.d1_metric(g.apply_tangent(w), hyp2.geodesic_flow(w, T, kappa), kappa)
    if constants is not None and delta > constants.delta0:
        raise DeltaTooLarge(f"delta = {delta} exceeds delta0 = {constants.delta0}")
    return w, delta


@dataclass
class ClosingResult:
    delta: float
    T: float
    T_prime: float
    shadow_sup: float
    footpoint: bool
    C_main: float
    C_tilde: float
    in_regime: bool = True
    passed: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    @property
    def bound_len(self) -> float:
        return 2.0 * self.C_main * self.delta

    @property
    def bound_shadow(self) -> float:
        return (5.0 * self.C_main + 1.0) * self.delta


def close_orbit(w: hyp2.UnitTangent, T: float, g: hyp2.Isometry, constants: BoundConstants, kappa: float = 1.0,
                step: float = SUP_STEP, tolerance: float = 1e-9, footpoint_tol: float = 1e-9) -> ClosingResult:
    delta = hyp2.d1_metric(g.apply_tangent(w), hyp2.geodesic_flow(w, T, kappa), kappa)
    if delta > constants.delta0:
        raise HypothesisViolated(f"delta = {delta} exceeds delta0 = {constants.delta0}")
    T_prime = hyp2.translation_length(g, kappa)
    u_line = hyp2.axis(g, kappa, reference=w.base)
    w_line = hyp2.GeodesicLine(w, kappa)

    def shadow(s: float) -> float:
        return max(hyp2.distance(w_line.point(s + e), u_line.point(s + e), kappa) for e in (-1.0, 1.0))

    sup, _ = sampled_sup(shadow, 0.0, T, step)
    C, Ct = constants.C_main, constants.C_tilde
    passed = {
        "length": abs(T - T_prime) <= 2.0 * C * delta + tolerance,
        "shadow": sup <= (5.0 * C + 1.0) * delta + tolerance,
    }
    foot = hyp2.distance(g.apply(w.base), hyp2.geodesic_flow(w, T, kappa).base, kappa) <= footpoint_tol
    if foot and delta > 0:
        passed["footpoint_length"] = 0.0 < T - T_prime <= 4.0 * Ct * delta + tolerance
        passed["footpoint_shadow"] = sup <= (10.0 * Ct + 1.0) * delta + tolerance
    return ClosingResult(delta, T, T_prime, sup, foot, C, Ct, T >= constants.t0, passed)


# cone sets


def in_A_theta(v: hyp2.UnitTangent, v0: hyp2.UnitTangent, theta: float, kappa: float = 1.0,
               tol: float = 1e-12) -> bool:
    p0 = v0.base
    if hyp2.distance(v.base, p0, kappa) > a_theta(theta, kappa) + tol:
        return False
    back, fwd = hyp2.endpoints(v)
    back0, fwd0 = hyp2.endpoints(v0)
    for x, y in ((back, back0), (fwd, fwd0)):
        if hyp2.boundary_equal(x, y, 1e-300):
            continue
        if hyp2.visibility_angle(p0, x, y) > theta + tol:
            return False
    return True


def witness_candidates(g: hyp2.Isometry, v0: hyp2.UnitTangent, t: float, kappa: float):
    # the chord to g p0 comes first: it satisfies the foot-point hypotheses
    p0 = v0.base
    q = g.apply(p0)
    if q != p0:
        yield hyp2.tangent_toward(p0, q)
    yield v0
    if hyp2.classify(g) == "hyperbolic":
        yield hyp2.axis(g, kappa, reference=p0).base


def find_witness(g: hyp2.Isometry, v0: hyp2.UnitTangent, theta: float, t: float,
                 kappa: float = 1.0) -> hyp2.UnitTangent:
    """Vector v with v and g^-1 phi^t v both in the theta-neighbourhood of v0."""
    inv = g.inverse()
    for v in witness_candidates(g, v0, t, kappa):
        back = inv.apply_tangent(hyp2.geodesic_flow(v, t, kappa))
        if in_A_theta(v, v0, theta, kappa) and in_A_theta(back, v0, theta, kappa):
            return v
    raise NoWitness("no membership witness among the candidate vectors")


def sample_closing_case(rng: np.random.Generator, constants: BoundConstants, kappa: float = 1.0,
                        length_range: tuple[float, float] = (5.0, 12.0), max_offset: float = 0.02,
                        max_tilt: float = 0.01, max_jitter: float = 0.005, footpoint_share: float = 0.3,
                        max_attempts: int = 1000) -> tuple[hyp2.Isometry, hyp2.UnitTangent, float, dict]:
    """Random admissible closing configuration; inadmissible draws (delta > delta0) are rejected."""
    for _ in range(max_attempts):
        L = rng.uniform(*length_range)
        base = hyp2.UnitTangent(complex(rng.normal(), math.exp(rng.normal())), rng.uniform(0.0, 2.0 * math.pi))
        g = hyp2.isometry_from_frames(base, hyp2.geodesic_flow(base, L, kappa))
        offset = rng.uniform(0.0, max_offset)
        foot = rng.uniform() < footpoint_share
        if foot:
            tilt, jitter = 0.0, 0.0
        else:
            # admissible tilts shrink like exp(-kappa L), so draw them on a log scale
            tilt = rng.choice((-1.0, 1.0)) * math.exp(rng.uniform(math.log(1e-12), math.log(max_tilt)))
            jitter = rng.uniform(-max_jitter, max_jitter)
        w, _ = synthesize_recurrent(g, offset, tilt, None, kappa, reference=base.base)
        T = hyp2.distance(w.base, g.apply(w.base), kappa) + jitter
        delta = hyp2.d1_metric(g.apply_tangent(w), hyp2.geodesic_flow(w, T, kappa), kappa)
        if delta <= constants.delta0 and T >= constants.t0:
            return g, w, T, {"length": L, "offset": offset, "tilt": tilt, "jitter": jitter, "footpoint": foot}
    raise DeltaTooLarge("no admissible closing configuration within the attempt budget")


def _boundary_in_direction(p: complex, direction: float) -> float:
    return hyp2.endpoints(hyp2.UnitTangent(p, direction))[1]


def check_cone_contraction(g: hyp2.Isometry, v0: hyp2.UnitTangent, theta: float, t: float, n_samples: int,
                           constants: BoundConstants, kappa: float | None = None,
                           witness: hyp2.UnitTangent | None = None, tolerance: float = 1e-9) -> CheckReport:
    """Sample the forward and backward cones of opening rho(theta) and test that g maps them inside."""
    kappa = constants.kappa1 if kappa is None else kappa
    if witness is None:
        find_witness(g, v0, theta, t, kappa)
    rho = constants.rho(theta)
    p0 = v0.base
    back0, fwd0 = hyp2.endpoints(v0)
    d_fwd = hyp2.direction_to_boundary(p0, fwd0)
    d_back = hyp2.direction_to_boundary(p0, back0)
    inv = g.inverse()
    margins = []
    for off in np.linspace(-rho, rho, n_samples):
        for elem, d_ref in ((g, d_fwd), (inv, d_back)):
            eta = _boundary_in_direction(p0, d_ref + off)
            img = elem.apply_boundary(eta)
            margins.append(rho - hyp2.angle_between(d_ref, hyp2.direction_to_boundary(p0, img)))
    return CheckReport.from_margins("cone_contraction", margins, tolerance)


def check_length_bracket(g: hyp2.Isometry, v: hyp2.UnitTangent, v0: hyp2.UnitTangent, theta: float, t: float,
                         constants: BoundConstants, kappa: float | None = None, step: float = SUP_STEP,
                         tolerance: float = 1e-9, landing_tol: float = 1e-6) -> list[CheckReport]:
    """Translation-length bracket for a witness; adds the sharper foot-point bounds when they apply.

    Long chords lose about exp(kappa t) ulps when pushed back, hence the looser landing test.
    """
    cb = constants.bounds
    kappa = cb.kappa1 if kappa is None else kappa
    L = hyp2.translation_length(g, kappa)
    lo, hi = length_bracket(t, theta, cb)
    reports = [CheckReport.from_margins("length_bracket", [L - lo, hi - L], tolerance)]
    same_base = hyp2.distance(v.base, v0.base, kappa) <= 1e-12
    lands = hyp2.distance(g.apply(v.base), hyp2.geodesic_flow(v, t, kappa).base, kappa) <= landing_tol
    if same_base and lands:
        c = hyp2.axis(g, kappa, reference=v0.base)
        vl = hyp2.GeodesicLine(v, kappa)
        sup, _ = sampled_sup(lambda s: hyp2.distance(c.point(s), vl.point(s), kappa), 0.0, t, step)
        gap = t - L
        reports.append(CheckReport.from_margins(
            "footpoint_length", [gap, footpoint_length_gap(theta, cb) - gap], tolerance))
        reports.append(CheckReport.from_margins(
            "footpoint_shadow", [footpoint_shadow_bound(theta, cb) - sup], tolerance))
    return reports
