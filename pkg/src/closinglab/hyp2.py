"""Upper half-plane model of the hyperbolic plane with curvature -kappa**2.

Points are Python complex numbers with positive imaginary part. Boundary points
are real floats, with ``math.inf`` standing for the point at infinity. A unit
tangent vector is a base point together with the Euclidean angle of its
direction; since the model is conformal, that angle is also the Riemannian one.

Isometries are elements of PSL(2, R) stored as four floats. Every product is
renormalized to unit determinant, and equality is taken up to sign.

All length-valued routines take ``kappa`` and return the unit-curvature value
divided by ``kappa``; angles do not depend on ``kappa``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CoincidentBoundaryPoints, DomainError, NotHyperbolic

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
INF = math.inf
HYPERBOLIC_TOL = 1e-10


def check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not (math.isfinite(kappa) and kappa > 0):
        raise DomainError(f"curvature scale must be positive, got {kappa}")
    return kappa


def check_point(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag) and z.imag > 0):
        raise DomainError(f"{z} is not a point of the upper half-plane")
    return z


def point(x: float, y: float) -> complex:
    return check_point(complex(x, y))


def normalize_boundary(xi: float) -> float:
    xi = float(xi)
    if math.isnan(xi):
        raise DomainError("boundary point is NaN")
    return INF if math.isinf(xi) else xi + 0.0


def boundary_equal(xi: float, eta: float, tol: float = 1e-12) -> bool:
    if math.isinf(xi) or math.isinf(eta):
        return math.isinf(xi) and math.isinf(eta)
    return abs(xi - eta) <= tol * max(1.0, abs(xi), abs(eta))


def wrap_angle(theta: float) -> float:
    theta = math.fmod(theta, TWO_PI)
    if theta < 0:
        theta += TWO_PI
    return 0.0 if theta >= TWO_PI else theta


def angle_between(theta1: float, theta2: float) -> float:
    """Unsigned angle in [0, pi] between two direction angles."""
    d = wrap_angle(theta1 - theta2)
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class UnitTangent:
    base: complex
    direction: float

    def __post_init__(self):
        object.__setattr__(self, "base", check_point(self.base))
        object.__setattr__(self, "direction", wrap_angle(float(self.direction)))

    def flipped(self) -> "UnitTangent":
        return UnitTangent(self.base, self.direction + math.pi)

    def rotated(self, angle: float) -> "UnitTangent":
        return UnitTangent(self.base, self.direction + angle)


@dataclass(frozen=True)
class Isometry:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = (float(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if not (math.isfinite(det) and det > 0):
            raise DomainError(f"matrix determinant must be positive, got {det}")
        s = math.sqrt(det)
        for name, val in zip("abcd", (a / s, b / s, c / s, d / s)):
            object.__setattr__(self, name, val)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def unimodular(cls, a: float, b: float, c: float, d: float) -> "Isometry":
        """Trust the caller that ad - bc = 1; recomputing it cancels badly for large entries."""
        g = object.__new__(cls)
        for name, val in zip("abcd", (a, b, c, d)):
            object.__setattr__(g, name, float(val))
        return g

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    # products and inverses of unimodular matrices are unimodular, so they skip renormalization
    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry.unimodular(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Isometry":
        return Isometry.unimodular(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "Isometry":
        base = self if n >= 0 else self.inverse()
        out = Isometry.identity()
        for _ in range(abs(n)):
            out = out @ base
        return out

    def conjugate_by(self, h: "Isometry") -> "Isometry":
        return h @ self @ h.inverse()

    def close_to(self, other: "Isometry", tol: float = 1e-10) -> bool:
        m, n = self.matrix, other.matrix
        return min(np.abs(m - n).max(), np.abs(m + n).max()) <= tol

    def apply(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_boundary(self, xi: float) -> float:
        if math.isinf(xi):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * xi + self.d
        if den == 0:
            return INF
        return normalize_boundary((self.a * xi + self.b) / den)

    def apply_tangent(self, v: UnitTangent) -> UnitTangent:
        den = self.c * v.base + self.d
        return UnitTangent((self.a * v.base + self.b) / den, v.direction - 2.0 * cmath.phase(den))


def frame(v: UnitTangent) -> Isometry:
    """Isometry taking (i, upward) to v."""
    x, y = v.base.real, v.base.imag
    s = math.sqrt(y)
    half = 0.5 * (v.direction - HALF_PI)
    co, si = math.cos(half), math.sin(half)
    # cos(pi/2) is 6e-17 in floating point; below angle resolution, so snap it
    co = 0.0 if abs(co) < 2e-16 else co
    si = 0.0 if abs(si) < 2e-16 else si
    return Isometry(s * co - x * si / s, s * si + x * co / s, -si / s, co / s)


def isometry_from_frames(src: UnitTangent, dst: UnitTangent) -> Isometry:
    return frame(dst) @ frame(src).inverse()


def rotation_about(z: complex, angle: float) -> Isometry:
    v = UnitTangent(z, HALF_PI)
    return isometry_from_frames(v, v.rotated(angle))


def distance(p: complex, q: complex, kappa: float = 1.0) -> float:
    # 2 asinh form of cosh d = 1 + |p - q|^2 / (2 Im p Im q); stable for close points
    return 2.0 * math.asinh(abs(p - q) / (2.0 * math.sqrt(p.imag * q.imag))) / kappa


def classify(g: Isometry, tol: float = HYPERBOLIC_TOL) -> str:
    tr = abs(g.trace)
    if tr > 2.0 + tol:
        return "hyperbolic"
    if tr < 2.0 - tol:
        return "elliptic"
    return "parabolic"


def translation_length(g: Isometry, kappa: float = 1.0) -> float:
    tr = abs(g.trace)
    if tr <= 2.0 + HYPERBOLIC_TOL:
        raise NotHyperbolic(f"|trace| = {tr} is not above 2")
    return 2.0 * math.acosh(0.5 * tr) / kappa


def _fixed_point_for(a, b, c, d, lam) -> float:
    # null vector of g - lam, taken from whichever row is better conditioned
    x1, y1 = b, lam - a
    x2, y2 = lam - d, c
    x, y = (x1, y1) if math.hypot(x1, y1) >= math.hypot(x2, y2) else (x2, y2)
    return INF if y == 0 else normalize_boundary(x / y)


def fixed_points(g: Isometry) -> tuple[float, float]:
    """(repelling, attracting) fixed points of a hyperbolic isometry."""
    a, b, c, d = g.a, g.b, g.c, g.d
    tr = a + d
    if abs(tr) <= 2.0 + HYPERBOLIC_TOL:
        raise NotHyperbolic(f"|trace| = {abs(tr)} is not above 2")
    if tr < 0:
        a, b, c, d, tr = -a, -b, -c, -d, -tr
    big = 0.5 * (tr + math.sqrt((tr - 2.0) * (tr + 2.0)))
    return _fixed_point_for(a, b, c, d, 1.0 / big), _fixed_point_for(a, b, c, d, big)


def _normalizer(xi_minus: float, xi_plus: float) -> Isometry:
    """Isometry sending xi_minus to 0 and xi_plus to infinity."""
    if boundary_equal(xi_minus, xi_plus, 0.0):
        raise CoincidentBoundaryPoints("geodesic endpoints coincide")
    if math.isinf(xi_plus):
        return Isometry(1.0, -xi_minus, 0.0, 1.0)
    if math.isinf(xi_minus):
        return Isometry(0.0, -1.0, 1.0, -xi_plus)
    if xi_minus > xi_plus:
        return Isometry(1.0, -xi_minus, 1.0, -xi_plus)
    return Isometry(-1.0, xi_minus, 1.0, -xi_plus)


@dataclass(frozen=True)
class GeodesicLine:
    """Oriented unit-speed geodesic t -> flow of ``base`` for time t."""

    base: UnitTangent
    kappa: float = 1.0

    @classmethod
    def through(cls, xi_minus: float, xi_plus: float, kappa: float = 1.0,
                reference: complex = 1j) -> "GeodesicLine":
        """Line with given endpoints, based at the foot point of ``reference``."""
        h = _normalizer(normalize_boundary(xi_minus), normalize_boundary(xi_plus))
        w = h.apply(check_point(reference))
        foot = UnitTangent(complex(0.0, abs(w)), HALF_PI)
        line = cls(h.inverse().apply_tangent(foot), check_kappa(kappa))
        line.__dict__["endpoints"] = (normalize_boundary(xi_minus), normalize_boundary(xi_plus))
        return line

    @cached_property
    def frame(self) -> Isometry:
        return frame(self.base)

    @cached_property
    def endpoints(self) -> tuple[float, float]:
        return self.frame.apply_boundary(0.0), self.frame.apply_boundary(INF)

    def point(self, t: float) -> complex:
        return self.frame.apply(complex(0.0, math.exp(self.kappa * t)))

    def tangent(self, t: float) -> UnitTangent:
        return self.frame.apply_tangent(UnitTangent(complex(0.0, math.exp(self.kappa * t)), HALF_PI))

    def normalized(self, q: complex) -> complex:
        """Coordinates of q in the frame where this line is the upward imaginary axis."""
        return self.frame.inverse().apply(q)

    def foot_parameter(self, q: complex) -> float:
        return math.log(abs(self.normalized(q))) / self.kappa

    def distance_to(self, q: complex) -> float:
        w = self.normalized(q)
        return math.asinh(abs(w.real) / w.imag) / self.kappa

    def side(self, q: complex) -> int:
        """+1 left of the direction of travel, -1 right, 0 on the line."""
        x = self.normalized(q).real
        return (x < 0) - (x > 0)

    def reparametrized(self, t0: float) -> "GeodesicLine":
        return GeodesicLine(self.tangent(t0), self.kappa)


@dataclass(frozen=True)
class GeodesicSegment:
    line: GeodesicLine
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise DomainError("segment end precedes its start")

    @classmethod
    def between(cls, p: complex, q: complex, kappa: float = 1.0) -> "GeodesicSegment":
        v = tangent_toward(p, q)
        return cls(GeodesicLine(v, kappa), 0.0, distance(p, q, kappa))

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    def point(self, t: float) -> complex:
        return self.line.point(t)

    def distance_to(self, q: complex) -> float:
        line = self.line
        w = line.normalized(q)
        t = min(max(math.log(abs(w)) / line.kappa, self.t_start), self.t_end)
        return distance(w, complex(0.0, math.exp(line.kappa * t)), line.kappa)


def geodesic_flow(v: UnitTangent, t: float, kappa: float = 1.0) -> UnitTangent:
    return frame(v).apply_tangent(UnitTangent(complex(0.0, math.exp(kappa * t)), HALF_PI))


def endpoints(v: UnitTangent) -> tuple[float, float]:
    """(backward, forward) endpoints of the geodesic through v."""
    g = frame(v)
    return g.apply_boundary(0.0), g.apply_boundary(INF)


def axis(g: Isometry, kappa: float = 1.0, reference: complex = 1j) -> GeodesicLine:
    """Translation axis, oriented toward the attracting fixed point."""
    rep, att = fixed_points(g)
    return GeodesicLine.through(rep, att, kappa, reference)


def _disk_direction(w: complex) -> float:
    # direction at i toward w (point or boundary) via the Cayley transform
    return wrap_angle(cmath.phase((w - 1j) / (w + 1j)) + HALF_PI)


def direction_toward(p: complex, q: complex) -> float:
    if p == q:
        raise DomainError("direction toward a coincident point is undefined")
    return _disk_direction((q - p.real) / p.imag)


def direction_to_boundary(p: complex, xi: float) -> float:
    if math.isinf(xi):
        return HALF_PI
    return _disk_direction(complex((xi - p.real) / p.imag, 0.0))


def tangent_toward(p: complex, q: complex) -> UnitTangent:
    return UnitTangent(p, direction_toward(p, q))


def tangent_to_boundary(p: complex, xi: float) -> UnitTangent:
    return UnitTangent(p, direction_to_boundary(p, xi))


def busemann(xi: float, q: complex, p: complex, kappa: float = 1.0) -> float:
    """Horofunction centred at xi, normalized to vanish at p."""
    if math.isinf(xi):
        return -math.log(q.imag / p.imag) / kappa
    # height of z in the frame sending xi to infinity is Im z / |z - xi|^2
    hq = q.imag / abs(q - xi) ** 2
    hp = p.imag / abs(p - xi) ** 2
    return -math.log(hq / hp) / kappa


def visibility_angle(q: complex, xi: float, eta: float, kappa: float = 1.0) -> float:
    if boundary_equal(xi, eta, 0.0):
        raise CoincidentBoundaryPoints("visibility angle needs distinct boundary points")
    return angle_between(direction_to_boundary(q, xi), direction_to_boundary(q, eta))


def d1_metric(v: UnitTangent, w: UnitTangent, kappa: float = 1.0) -> float:
    # distance between geodesics is convex in time, so the max over [-1, 1] sits at an end
    return max(
        distance(geodesic_flow(v, -1.0, kappa).base, geodesic_flow(w, -1.0, kappa).base, kappa),
        distance(geodesic_flow(v, 1.0, kappa).base, geodesic_flow(w, 1.0, kappa).base, kappa),
    )


def hopf(v: UnitTangent, p0: complex = 1j, kappa: float = 1.0) -> tuple[float, float, float]:
    back, fwd = endpoints(v)
    return back, fwd, busemann(back, v.base, p0, kappa)


def distance_to_segment(q: complex, segment: GeodesicSegment) -> float:
    return segment.distance_to(q)


def geodesic_point(p: complex, q: complex, fraction: float, kappa: float = 1.0) -> complex:
    """Point at the given fraction of the way from p to q."""
    if p == q:
        return p
    return geodesic_flow(tangent_toward(p, q), fraction * distance(p, q, kappa), kappa).base
