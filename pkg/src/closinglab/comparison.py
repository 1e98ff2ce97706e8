"""Triangle comparison checks under curvature pinching.

Every check turns an inequality into a margin that is non-negative when the
inequality holds, so a violation is a margin below ``-tolerance``. Margins are
expressed on a scale of order one: lengths for the cosine laws, sines and
normalized ratios elsewhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from . import hyp2
from .bounds import CurvatureBounds, a_theta, f_delta
from .errors import DomainError, HypothesisViolated, SideCrossing

RIGHT_ANGLE_TOL = 1e-6


@dataclass
class TriangleSample:
    l1: float
    l2: float
    l3: float
    a1: float
    a2: float
    a3: float
    source: str = "constant"
    geometry: object = field(default=None, repr=False, compare=False)

    @property
    def right_angled(self) -> bool:
        return abs(self.a3 - 0.5 * math.pi) <= RIGHT_ANGLE_TOL


@dataclass
class CheckReport:
    name: str
    samples: int
    violations: int
    worst_margin: float
    tolerance: float

    @classmethod
    def from_margins(cls, name: str, margins: Iterable[float], tolerance: float) -> "CheckReport":
        margins = list(margins)
        worst = min(margins) if margins else math.inf
        bad = sum(1 for m in margins if not m >= -tolerance)
        return cls(name, len(margins), bad, worst, tolerance)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def merged(self, other: "CheckReport") -> "CheckReport":
        if other.name != self.name:
            raise ValueError("cannot merge reports for different checks")
        return CheckReport(self.name, self.samples + other.samples, self.violations + other.violations,
                           min(self.worst_margin, other.worst_margin), max(self.tolerance, other.tolerance))

    def row(self) -> dict:
        return {"name": self.name, "samples": self.samples, "violations": self.violations,
                "worst_margin": self.worst_margin, "tolerance": self.tolerance}


def merge_reports(reports: Iterable[CheckReport]) -> dict[str, CheckReport]:
    out: dict[str, CheckReport] = {}
    for r in reports:
        out[r.name] = out[r.name].merged(r) if r.name in out else r
    return out


def solve_side_constant(l1: float, l2: float, a3: float, kappa: float) -> float:
    """Side opposite the angle a3 in the model plane of curvature -kappa**2."""
    if l1 < 0 or l2 < 0 or not (0.0 <= a3 <= math.pi):
        raise DomainError("sides must be non-negative and the angle in [0, pi]")
    # cosh l3 - 1 = (cosh(l1 - l2) - 1) + 2 sinh l1 sinh l2 sin^2(a3/2)
    x = 2.0 * math.sinh(0.5 * kappa * (l1 - l2)) ** 2 \
        + 2.0 * math.sinh(kappa * l1) * math.sinh(kappa * l2) * math.sin(0.5 * a3) ** 2
    return math.log1p(x + math.sqrt(x * (x + 2.0))) / kappa


def triangle_law_margins(t: TriangleSample, cb: CurvatureBounds) -> dict[str, float]:
    k1, k2 = cb.kappa1, cb.kappa2
    half = math.sin(0.5 * t.a3) ** 2
    m = {
        "cosine_upper_curv": t.l3 - solve_side_constant(t.l1, t.l2, t.a3, k1),
        "cosine_lower_curv": solve_side_constant(t.l1, t.l2, t.a3, k2) - t.l3,
        "angle_chain_left": 2.0 * half - 2.0 * t.a3**2 / math.pi**2,
        # cosh(l3) - 1 = 2 sinh^2(l3/2)
        "angle_chain_right": 1.0 - half * math.sinh(k1 * t.l1) * math.sinh(k1 * t.l2)
        / math.sinh(0.5 * k1 * t.l3) ** 2,
    }
    if not t.right_angled:
        return m
    legs = ((t.l1, t.a1, t.l2, t.a2), (t.l2, t.a2, t.l1, t.a1))
    for i, (li, ai, lj, aj) in enumerate(legs, start=1):
        m[f"sine_upper_curv_{i}"] = math.sinh(k1 * li) / math.sinh(k1 * t.l3) - math.sin(ai)
        m[f"sine_lower_curv_{i}"] = math.sin(ai) - math.sinh(k2 * li) / math.sinh(k2 * t.l3)
        m[f"cosh_leg_{i}"] = 1.0 - math.cosh(k1 * li) * math.sin(aj)
        m[f"sin_cot_{i}"] = 1.0 / (math.tan(aj) * math.sinh(k1 * t.l3)) - math.sin(ai)
    return m


def check_triangle_laws(t: TriangleSample, cb: CurvatureBounds, tolerance: float = 1e-9) -> list[CheckReport]:
    """One report per inequality; right-angle relations are skipped unless a3 is pi/2."""
    return [CheckReport.from_margins(name, [m], tolerance)
            for name, m in triangle_law_margins(t, cb).items()]


def check_corollary_tri(t: TriangleSample, eps: float, R1: float, R2: float, cb: CurvatureBounds,
                        geometry=None, tolerance: float = 1e-9,
                        fractions: tuple[float, ...] = (0.0, 0.5)) -> list[CheckReport]:
    """Obtuse-triangle consequences: sides stay near the base, base is long, base angles are small."""
    if not (0.0 < eps < 0.5 * math.pi):
        raise DomainError("eps must lie in (0, pi/2)")
    if t.a3 < math.pi - eps - 1e-12:
        raise HypothesisViolated(f"angle {t.a3} is below pi - eps")
    if R1 > t.l1 + 1e-12 or R2 > t.l2 + 1e-12:
        raise HypothesisViolated("R_i must not exceed the adjacent sides")
    geometry = geometry if geometry is not None else t.geometry
    k1 = cb.kappa1
    a_half = a_theta(0.5 * eps, k1)
    reports = []
    if geometry is not None:
        # fraction 0 is the shared apex, so side 2 skips it
        points = [(1, s) for s in fractions] + [(2, s) for s in fractions if s > 0]
        dists = [geometry.side_distance(side, s) for side, s in points]
        reports.append(CheckReport.from_margins("near_base", [a_half - d for d in dists], tolerance))
    reports.append(CheckReport.from_margins("base_length", [t.l3 - (R1 + R2 - 2.0 * a_half)], tolerance))
    tan_eps = math.tan(eps)
    reports.append(CheckReport.from_margins("base_angle", [
        tan_eps / math.sinh(k1 * R2) - math.sin(t.a1),
        tan_eps / math.sinh(k1 * R1) - math.sin(t.a2),
    ], tolerance))
    return reports


def perpendicular_bound_margin(d: float, r1: float, r2: float, t1: float, t2: float, kappa2: float) -> float:
    """Relative slack in the distance estimate between two points over a geodesic."""
    lhs = math.sinh(0.5 * kappa2 * d) ** 2
    rhs = math.cosh(kappa2 * r1) * math.cosh(kappa2 * r2) * math.sinh(0.5 * kappa2 * abs(t1 - t2)) ** 2 \
        + math.sinh(0.5 * kappa2 * abs(r1 - r2)) ** 2
    if rhs == 0.0:
        return -lhs
    return 1.0 - lhs / rhs


class ConstantPerpendiculars:
    """Points at signed distance r over the foot parameter t on a fixed line of H^2."""

    def __init__(self, kappa: float = 1.0, line: hyp2.GeodesicLine | None = None):
        self.kappa = hyp2.check_kappa(kappa)
        self.line = line if line is not None else hyp2.GeodesicLine(hyp2.UnitTangent(1j, hyp2.HALF_PI), self.kappa)

    def offset_point(self, r: float, t: float) -> complex:
        v = self.line.tangent(t).rotated(hyp2.HALF_PI)
        return hyp2.geodesic_flow(v, r, self.kappa).base

    def pair_distance(self, r1: float, r2: float, t1: float, t2: float) -> float:
        if r1 * r2 < 0:
            raise SideCrossing("points lie on opposite sides of the geodesic")
        return hyp2.distance(self.offset_point(r1, t1), self.offset_point(r2, t2), self.kappa)


def check_perp_proj(r1: float, r2: float, t1: float, t2: float, kappa2: float,
                    geometry=None, tolerance: float = 1e-10) -> CheckReport:
    if geometry is None:
        geometry = ConstantPerpendiculars(kappa2)
    d = geometry.pair_distance(r1, r2, t1, t2)
    return CheckReport.from_margins("perpendicular_projection",
                                    [perpendicular_bound_margin(d, abs(r1), abs(r2), t1, t2, kappa2)], tolerance)


def check_angles_at_infinity(v: hyp2.UnitTangent, w: hyp2.UnitTangent, delta: float, cb: CurvatureBounds,
                             kappa: float | None = None, tolerance: float = 1e-9) -> CheckReport:
    kappa = cb.kappa1 if kappa is None else kappa
    d1 = hyp2.d1_metric(v, w, kappa)
    if d1 > delta:
        raise HypothesisViolated(f"d1 = {d1} exceeds delta = {delta}")
    bound = f_delta(delta, cb.kappa1)
    vb, vf = hyp2.endpoints(v)
    wb, wf = hyp2.endpoints(w)
    p = w.base
    angles = [0.0 if hyp2.boundary_equal(x, y, 0.0) else hyp2.visibility_angle(p, x, y)
              for x, y in ((vf, wf), (vb, wb))]
    return CheckReport.from_margins("angles_at_infinity", [bound - a for a in angles], tolerance)


class ConstantTriangle:
    """Vertices of a triangle in H^2 with side c1 = [p3, p2], c2 = [p3, p1], c3 = [p1, p2]."""

    def __init__(self, p1: complex, p2: complex, p3: complex, kappa: float = 1.0):
        self.p1, self.p2, self.p3, self.kappa = p1, p2, p3, kappa
        self.base = hyp2.GeodesicSegment.between(p1, p2, kappa)

    def side_distance(self, side: int, fraction: float) -> float:
        end = self.p2 if side == 1 else self.p1
        return self.base.distance_to(hyp2.geodesic_point(self.p3, end, fraction, self.kappa))


def construct_triangle(l1: float, l2: float, a3: float, kappa: float = 1.0,
                       start: hyp2.UnitTangent | None = None) -> TriangleSample:
    """Triangle in H^2 built from two sides and the included angle."""
    if not (l1 > 0 and l2 > 0 and 0 < a3 < math.pi):
        raise DomainError("need positive sides and an angle in (0, pi)")
    start = start if start is not None else hyp2.UnitTangent(1j, hyp2.HALF_PI)
    p3 = start.base
    p2 = hyp2.geodesic_flow(start, l1, kappa).base
    p1 = hyp2.geodesic_flow(start.rotated(a3), l2, kappa).base
    a1 = hyp2.angle_between(hyp2.direction_toward(p1, p2), hyp2.direction_toward(p1, p3))
    a2 = hyp2.angle_between(hyp2.direction_toward(p2, p1), hyp2.direction_toward(p2, p3))
    return TriangleSample(l1, l2, hyp2.distance(p1, p2, kappa), a1, a2, a3, "constant",
                          ConstantTriangle(p1, p2, p3, kappa))
