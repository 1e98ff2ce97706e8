"""Rotationally symmetric Hadamard surfaces dr^2 + f(r)^2 dtheta^2.

The curvature interpolates from -kappa2**2 near the pole to -kappa1**2 far out
through a monotone smoothstep on [r_lo, r_hi]. The warping function f solves
the Jacobi equation f'' = -K f with f(0) = 0, f'(0) = 1. It is exact (sinh) on
the inner disc and on the outer region, and tabulated with quintic Hermite
interpolation on the transition annulus.

Geodesics are integrated in Cartesian chart coordinates as a Hamiltonian flow

    H(q, p) = (h(r) |p|^2 + m(r) (p.q)^2) / 2,   h = (r/f)^2,  m = (1 - h)/r^2,

which is smooth through the pole, so no polar singularity has to be handled.
The angular momentum q x p is the Clairaut integral f(r) sin(psi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .bounds import CurvatureBounds
from .comparison import TriangleSample
from .errors import DomainError, NoConvergence, OutOfTable, ProfileOutOfRange

# Taylor coefficients of (x / sinh x)^2 in u = x^2
_H_SERIES = np.array([
    1.0, -1.0 / 3.0, 1.0 / 15.0, -2.0 / 189.0, 1.0 / 675.0, -2.0 / 10395.0,
    1382.0 / 58046625.0, -4.0 / 1403325.0, 3617.0 / 10854718875.0,
    -87734.0 / 2292899734125.0, 349222.0 / 80596287646875.0,
    -310732.0 / 640374140030625.0, 472728182.0 / 8779111824511153125.0,
])
_SERIES_X = 0.5


def smoothstep(x):
    """C^2 quintic ramp from 0 on x <= 0 to 1 on x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)


@dataclass(frozen=True)
class CurvatureProfile:
    kappa1: float
    kappa2: float
    r_lo: float = 1.0
    r_hi: float = 2.0
    ramp: Callable | None = None

    def __post_init__(self):
        CurvatureBounds(self.kappa1, self.kappa2)
        if not (0.0 < self.r_lo <= self.r_hi):
            raise ProfileOutOfRange("need 0 < r_lo <= r_hi")

    def shape(self, x):
        return (self.ramp or smoothstep)(x)

    def curvature(self, r):
        k1, k2 = self.kappa1, self.kappa2
        width = self.r_hi - self.r_lo
        x = (np.asarray(r, dtype=float) - self.r_lo) / width if width > 0 else (np.asarray(r) >= self.r_lo) * 1.0
        return -k2 * k2 + (k2 * k2 - k1 * k1) * self.shape(x)


POLE_RADIUS = 1e-150


@dataclass(frozen=True)
class SurfacePoint:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise DomainError(f"radius must be non-negative, got {self.r}")
        if self.r < POLE_RADIUS:
            # chart directions are meaningless at subnormal radii; the metric there is Euclidean anyway
            object.__setattr__(self, "r", 0.0)
        object.__setattr__(self, "theta", 0.0 if self.r == 0 else math.fmod(self.theta, 2 * math.pi))

    @property
    def cartesian(self) -> np.ndarray:
        return np.array([self.r * math.cos(self.theta), self.r * math.sin(self.theta)])

    @classmethod
    def from_cartesian(cls, x: float, y: float) -> "SurfacePoint":
        return cls(math.hypot(x, y), math.atan2(y, x))


@dataclass(frozen=True)
class SurfaceTangent:
    """Unit vector at ``point`` making angle ``angle`` with the radial direction.

    At the pole the angle is measured from the theta = 0 ray.
    """

    point: SurfacePoint
    angle: float


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _warp(r, par, F, D1, D2):
    k1, k2, r_lo, r_hi, hstep, A, B = par[0], par[1], par[2], par[3], par[4], par[5], par[6]
    if r <= r_lo:
        return math.sinh(k2 * r) / k2, math.cosh(k2 * r)
    if r >= r_hi:
        x = r - r_hi
        c, s = math.cosh(k1 * x), math.sinh(k1 * x)
        return A * c + B * s, k1 * (A * s + B * c)
    j = int((r - r_lo) / hstep)
    n = F.shape[0] - 1
    if j >= n:
        j = n - 1
    t = (r - r_lo) / hstep - j
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
    h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
    h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5)
    h3 = 0.5 * (t3 - 2.0 * t4 + t5)
    h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
    h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
    g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4
    g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4
    g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4)
    g3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4)
    g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4
    g5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4
    hh = hstep * hstep
    f = (F[j] * h0 + hstep * D1[j] * h1 + hh * D2[j] * h2
         + hh * D2[j + 1] * h3 + hstep * D1[j + 1] * h4 + F[j + 1] * h5)
    fp = (F[j] * g0 + hstep * D1[j] * g1 + hh * D2[j] * g2
          + hh * D2[j + 1] * g3 + hstep * D1[j + 1] * g4 + F[j + 1] * g5) / hstep
    return f, fp


@njit(cache=True)
def _coeffs(r, par, F, D1, D2, series):
    k2, r_lo = par[1], par[2]
    x = k2 * r
    if r < r_lo and x < 0.5:
        # h = H(u), m = k^2 M(u) with M(u) = (1 - H(u)) / u, u = (k r)^2
        u = x * x
        m = 0.0
        dh = 0.0
        dm = 0.0
        p = 1.0
        q = 0.0
        for n in range(1, series.shape[0]):
            m -= series[n] * p
            dh += n * series[n] * p
            if n >= 2:
                dm -= (n - 1) * series[n] * q
            q = p
            p *= u
        k2s = k2 * k2
        return 1.0 - u * m, k2s * m, 2.0 * k2s * dh, 2.0 * k2s * k2s * dm
    f, fp = _warp(r, par, F, D1, D2)
    q = r / f
    h = q * q
    hr = 2.0 * (f - r * fp) / (f * f * f)
    r2 = r * r
    m = (1.0 - h) / r2
    mr = -hr / r2 - 2.0 * m / r2
    return h, m, hr, mr


@njit(cache=True)
def _rhs(qx, qy, px, py, par, F, D1, D2, series):
    r = math.sqrt(qx * qx + qy * qy)
    h, m, hr, mr = _coeffs(r, par, F, D1, D2, series)
    s = px * qx + py * qy
    c = -0.5 * (hr * (px * px + py * py) + mr * s * s)
    ms = m * s
    return h * px + ms * qx, h * py + ms * qy, c * qx - ms * px, c * qy - ms * py


@njit(cache=True)
def _flow(y, t, nsteps, par, F, D1, D2, series, r_max, record):
    dt = t / nsteps
    qx, qy, px, py = y[0], y[1], y[2], y[3]
    out = np.empty((nsteps + 1 if record else 1, 4))
    if record:
        out[0, 0], out[0, 1], out[0, 2], out[0, 3] = qx, qy, px, py
    ok = True
    for i in range(nsteps):
        a0, a1, a2, a3 = _rhs(qx, qy, px, py, par, F, D1, D2, series)
        b0, b1, b2, b3 = _rhs(qx + 0.5 * dt * a0, qy + 0.5 * dt * a1, px + 0.5 * dt * a2, py + 0.5 * dt * a3,
                              par, F, D1, D2, series)
        c0, c1, c2, c3 = _rhs(qx + 0.5 * dt * b0, qy + 0.5 * dt * b1, px + 0.5 * dt * b2, py + 0.5 * dt * b3,
                              par, F, D1, D2, series)
        d0, d1, d2, d3 = _rhs(qx + dt * c0, qy + dt * c1, px + dt * c2, py + dt * c3, par, F, D1, D2, series)
        qx += dt / 6.0 * (a0 + 2.0 * b0 + 2.0 * c0 + d0)
        qy += dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        px += dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        py += dt / 6.0 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        if qx * qx + qy * qy > r_max * r_max:
            ok = False
            break
        if record:
            out[i + 1, 0], out[i + 1, 1], out[i + 1, 2], out[i + 1, 3] = qx, qy, px, py
    if not record:
        out[0, 0], out[0, 1], out[0, 2], out[0, 3] = qx, qy, px, py
    return out, ok


# ---------------------------------------------------------------- warp table

class WarpTable:
    """Warping function of a profile, with the geodesic integrator bound to it."""

    def __init__(self, profile: CurvatureProfile, step: float, r_max: float):
        self.profile = profile
        self.step = step
        self.r_max = r_max
        k1, k2 = profile.kappa1, profile.kappa2
        if k1 == k2:
            r_lo, r_hi = 1e300, 1e300
            nodes = np.array([0.0, 1.0])
            F = np.zeros(2)
            D1 = np.zeros(2)
            D2 = np.zeros(2)
            A = B = 0.0
        else:
            r_lo, r_hi = profile.r_lo, profile.r_hi
            n = max(1, math.ceil((r_hi - r_lo) / step))
            nodes = np.linspace(r_lo, r_hi, n + 1)
            F, D1 = self._jacobi(nodes, k2)
            D2 = -profile.curvature(nodes) * F
            A, B = F[-1], D1[-1] / k1
        self.nodes = nodes
        self.F, self.D1, self.D2 = F, D1, D2
        self.par = np.array([k1, k2, r_lo, r_hi, (r_hi - r_lo) / (len(nodes) - 1), A, B])

    def _jacobi(self, nodes, k2):
        K = self.profile.curvature
        f, fp = math.sinh(k2 * nodes[0]) / k2, math.cosh(k2 * nodes[0])
        F, D1 = [f], [fp]
        for a, b in zip(nodes[:-1], nodes[1:]):
            h = b - a
            ka, km, kb = float(K(a)), float(K(a + 0.5 * h)), float(K(b))
            s1 = (fp, -ka * f)
            s2 = (fp + 0.5 * h * s1[1], -km * (f + 0.5 * h * s1[0]))
            s3 = (fp + 0.5 * h * s2[1], -km * (f + 0.5 * h * s2[0]))
            s4 = (fp + h * s3[1], -kb * (f + h * s3[0]))
            f += h / 6.0 * (s1[0] + 2 * s2[0] + 2 * s3[0] + s4[0])
            fp += h / 6.0 * (s1[1] + 2 * s2[1] + 2 * s3[1] + s4[1])
            F.append(f)
            D1.append(fp)
        return np.array(F), np.array(D1)

    def warp(self, r: float) -> tuple[float, float]:
        return _warp(float(r), self.par, self.F, self.D1, self.D2)

    def warp_ratio(self, r: float) -> float:
        """f(r) / r, which is 1 + O(r^2); below 1e-8 the correction is under rounding."""
        return 1.0 if r < 1e-8 else self.warp(r)[0] / r

    def curvature(self, r: float) -> float:
        return float(self.profile.curvature(r))

    def curvature_bounds(self, r_max: float | None = None, n: int = 20_001) -> CurvatureBounds:
        """Pinching constants read back from the table: K = -f''/f on a grid."""
        r_max = self.r_max if r_max is None else r_max
        r = np.linspace(1e-3, r_max, n)
        r = np.concatenate([r, self.nodes[self.nodes < r_max]])
        K = self.profile.curvature(r)
        return CurvatureBounds(math.sqrt(-K.max()), math.sqrt(-K.min()))

    def jacobi_violation(self, r_max: float | None = None, n: int = 20_001) -> float:
        """Largest relative excess of f outside [sinh(k1 r)/k1, sinh(k2 r)/k2]."""
        k1, k2 = self.profile.kappa1, self.profile.kappa2
        r_max = self.r_max if r_max is None else r_max
        worst = 0.0
        for r in np.linspace(r_max / n, r_max, n):
            f, _ = self.warp(r)
            lo, hi = math.sinh(k1 * r) / k1, math.sinh(k2 * r) / k2
            worst = max(worst, (lo - f) / lo, (f - hi) / hi)
        return worst

    # state vectors are chart positions with covector momenta: (qx, qy, px, py)

    def state(self, v: SurfaceTangent) -> np.ndarray:
        x, y = v.point.cartesian
        r = v.point.r
        if r == 0.0:
            return np.array([0.0, 0.0, math.cos(v.angle), math.sin(v.angle)])
        rx, ry = x / r, y / r
        c, s = math.cos(v.angle), math.sin(v.angle) * self.warp_ratio(r)
        return np.array([x, y, c * rx - s * ry, c * ry + s * rx])

    def tangent(self, y: np.ndarray) -> SurfaceTangent:
        p = SurfacePoint.from_cartesian(y[0], y[1])
        if p.r == 0.0:
            return SurfaceTangent(p, math.atan2(y[3], y[2]))
        rx, ry = y[0] / p.r, y[1] / p.r
        pr = y[2] * rx + y[3] * ry
        pt = -y[2] * ry + y[3] * rx
        return SurfaceTangent(p, math.atan2(pt / self.warp_ratio(p.r), pr))

    def velocity(self, y: np.ndarray) -> np.ndarray:
        r = math.hypot(y[0], y[1])
        h, m, _, _ = _coeffs(r, self.par, self.F, self.D1, self.D2, _H_SERIES)
        s = y[0] * y[2] + y[1] * y[3]
        return np.array([h * y[2] + m * s * y[0], h * y[3] + m * s * y[1]])

    def inner(self, y: np.ndarray, vec: np.ndarray) -> float:
        """Metric inner product of the velocity of state y with a chart vector at the same point."""
        return float(y[2] * vec[0] + y[3] * vec[1])

    def speed2(self, y: np.ndarray) -> float:
        r = math.hypot(y[0], y[1])
        h, m, _, _ = _coeffs(r, self.par, self.F, self.D1, self.D2, _H_SERIES)
        s = y[0] * y[2] + y[1] * y[3]
        return h * (y[2] ** 2 + y[3] ** 2) + m * s * s

    @staticmethod
    def clairaut(y: np.ndarray) -> float:
        return float(y[0] * y[3] - y[1] * y[2])

    def flow_state(self, y: np.ndarray, t: float, record: bool = False) -> np.ndarray:
        nsteps = max(1, math.ceil(abs(t) / self.step))
        out, ok = _flow(np.asarray(y, dtype=float), float(t), nsteps, self.par, self.F, self.D1, self.D2,
                        _H_SERIES, self.r_max, record)
        if not ok:
            raise OutOfTable(f"geodesic left the tabulated disc of radius {self.r_max}")
        return out if record else out[0]

    def chart_metric_length(self, a: np.ndarray, b: np.ndarray, n: int = 32) -> float:
        """Length of the straight chart segment from a to b."""
        d = b - a
        total = 0.0
        for s in (np.arange(n) + 0.5) / n:
            q = a + s * d
            r = math.hypot(q[0], q[1])
            if r < POLE_RADIUS:
                total += math.hypot(d[0], d[1])
                continue
            rx, ry = q[0] / r, q[1] / r
            dr = d[0] * rx + d[1] * ry
            dt = -d[0] * ry + d[1] * rx
            total += math.sqrt(dr * dr + (self.warp_ratio(r) * dt) ** 2)
        return total / n


def build_surface(profile: CurvatureProfile, step: float | None = None, r_max: float = 30.0) -> WarpTable:
    k1, k2 = profile.kappa1, profile.kappa2
    limit = 1e-3 * min(1.0, 1.0 / k2)
    step = limit if step is None else float(step)
    if not (0 < step <= limit * (1 + 1e-12)):
        raise DomainError(f"step must lie in (0, {limit}]")
    xs = np.linspace(0.0, 1.0, 2001)
    ramp = np.asarray(profile.shape(xs), dtype=float)
    if ramp.min() < -1e-12 or ramp.max() > 1 + 1e-12 or np.any(np.diff(ramp) < -1e-12):
        raise ProfileOutOfRange("ramp must be monotone with values in [0, 1]")
    if k1 * r_max > 600:
        raise ProfileOutOfRange("r_max too large for double precision warping")
    return WarpTable(profile, step, r_max)


def geodesic_integrate(v: SurfaceTangent, t: float, w: WarpTable) -> SurfaceTangent:
    return w.tangent(w.flow_state(w.state(v), t))


class SurfaceGeodesic:
    """Unit-speed geodesic segment of given length from an initial state."""

    def __init__(self, w: WarpTable, start: np.ndarray, length: float):
        self.w = w
        self.start = np.asarray(start, dtype=float)
        self.length = float(length)

    def state_at(self, s: float) -> np.ndarray:
        return self.start.copy() if s == 0 else self.w.flow_state(self.start, s)

    def point(self, s: float) -> np.ndarray:
        return self.state_at(s)[:2]

    @property
    def end_state(self) -> np.ndarray:
        return self.state_at(self.length)

    def reversed_state(self) -> np.ndarray:
        y = self.end_state
        return np.array([y[0], y[1], -y[2], -y[3]])


def _angle_state(w: WarpTable, P: np.ndarray, angle: float) -> np.ndarray:
    return w.state(SurfaceTangent(SurfacePoint.from_cartesian(*P), angle))


def _chart_angle(w: WarpTable, P: np.ndarray, d: np.ndarray) -> float:
    r = math.hypot(P[0], P[1])
    if r < POLE_RADIUS:
        return math.atan2(d[1], d[0])
    rx, ry = P[0] / r, P[1] / r
    return math.atan2(w.warp_ratio(r) * (-d[0] * ry + d[1] * rx), d[0] * rx + d[1] * ry)


def _newton_shoot(w: WarpTable, P, Q, angle, length, tol, max_iter, dpsi=1e-7):
    def end(a, L):
        return w.flow_state(_angle_state(w, P, a), L)

    y = end(angle, length)
    res = y[:2] - Q
    err = float(np.hypot(*res))
    for _ in range(max_iter):
        if err < tol:
            return angle, length, err
        yd = end(angle + dpsi, length)
        J = np.column_stack([(yd[:2] - y[:2]) / dpsi, w.velocity(y)])
        try:
            da, dL = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-4:
            a_new, L_new = angle + lam * da, max(length + lam * dL, 1e-12)
            try:
                y_new = end(a_new, L_new)
            except Exception:
                lam *= 0.5
                continue
            res_new = y_new[:2] - Q
            err_new = float(np.hypot(*res_new))
            if err_new < err:
                angle, length, y, res, err = a_new, L_new, y_new, res_new, err_new
                break
            lam *= 0.5
        else:
            break
    return angle, length, err


def shoot(w: WarpTable, P: np.ndarray, Q: np.ndarray, guess: tuple[float, float] | None = None,
          tol: float = 1e-11, max_iter: int = 40) -> SurfaceGeodesic:
    """Geodesic between chart points P and Q by Newton shooting on (initial angle, length)."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if np.hypot(*(Q - P)) < 1e-14:
        raise DomainError("endpoints coincide")
    if guess is None:
        guess = (_chart_angle(w, P, Q - P), w.chart_metric_length(P, Q))
    angle, length, err = _newton_shoot(w, P, Q, guess[0], guess[1], tol, max_iter)
    if err >= tol:
        # continuation along the chart segment, warm-starting each stage
        angle, length = _chart_angle(w, P, Q - P), 0.0
        for k in range(1, 9):
            target = P + k / 8.0 * (Q - P)
            start = (angle, length if length > 0 else w.chart_metric_length(P, target))
            angle, length, err = _newton_shoot(w, P, target, start[0], start[1], tol, max_iter)
        if err >= tol:
            raise NoConvergence(f"shooting stalled with endpoint error {err}")
    return SurfaceGeodesic(w, _angle_state(w, P, angle), length)


def connect_by_shooting(p: SurfacePoint, q: SurfacePoint, w: WarpTable,
                        guess: tuple[float, float] | None = None) -> tuple[SurfaceGeodesic, float]:
    g = shoot(w, p.cartesian, q.cartesian, guess)
    return g, g.length


def foot_point(w: WarpTable, x: np.ndarray, g: SurfaceGeodesic, tol: float = 1e-11) -> tuple[float, float]:
    """Nearest point of the geodesic segment g to x, as (parameter, distance)."""
    x = np.asarray(x, dtype=float)
    last = {}

    def toward(y):
        guess = last.get("guess")
        if guess is not None:
            guess = (_chart_angle(w, y[:2], x - y[:2]) + guess[0], guess[1])
        try:
            seg = shoot(w, y[:2], x, guess)
        except NoConvergence:
            seg = shoot(w, y[:2], x)
        a = w.tangent(seg.start).angle - _chart_angle(w, y[:2], x - y[:2])
        last["guess"] = (a, seg.length)
        return seg

    def slope(s):
        y = g.state_at(s)
        if np.hypot(*(x - y[:2])) < 1e-13:
            return 0.0
        return -w.inner(toward(y).start, w.velocity(y))

    lo, hi = slope(0.0), slope(g.length)
    if lo >= 0:
        s = 0.0
    elif hi <= 0:
        s = g.length
    else:
        s = brentq(slope, 0.0, g.length, xtol=tol)
    y = g.state_at(s)
    if np.hypot(*(x - y[:2])) < 1e-13:
        return s, 0.0
    return s, toward(y).length


class SurfaceTriangle:
    """Triangle p1 p2 p3 on a surface with side c1 = [p3, p2], c2 = [p3, p1], c3 = [p1, p2]."""

    def __init__(self, w: WarpTable, c1: SurfaceGeodesic, c2: SurfaceGeodesic, c3: SurfaceGeodesic):
        self.w, self.c1, self.c2, self.c3 = w, c1, c2, c3

    def side_distance(self, side: int, fraction: float) -> float:
        g = self.c1 if side == 1 else self.c2
        return foot_point(self.w, g.point(fraction * g.length), self.c3)[1]


def _angle_at(w: WarpTable, y1: np.ndarray, y2: np.ndarray) -> float:
    """Angle between the velocities of two states based at the same point."""
    a1 = w.tangent(y1).angle
    a2 = w.tangent(y2).angle
    d = math.fmod(abs(a1 - a2), 2 * math.pi)
    return min(d, 2 * math.pi - d)


def triangle_from_sas(w: WarpTable, p3: SurfacePoint, heading: float, l1: float, l2: float,
                      a3: float) -> TriangleSample:
    """Triangle with sides l1, l2 leaving p3 at angle a3; the third side is found by shooting."""
    v = SurfaceTangent(p3, heading)
    y0 = w.state(v)
    y1 = w.state(SurfaceTangent(p3, heading + a3))
    c1 = SurfaceGeodesic(w, y0, l1)
    c2 = SurfaceGeodesic(w, y1, l2)
    e1, e2 = c1.end_state, c2.end_state
    c3 = shoot(w, e2[:2], e1[:2])
    back1 = c2.reversed_state()
    back2 = c1.reversed_state()
    end3 = c3.end_state
    a1 = _angle_at(w, c3.start, back1)
    a2 = _angle_at(w, np.array([end3[0], end3[1], -end3[2], -end3[3]]), back2)
    return TriangleSample(l1, l2, c3.length, a1, a2, a3, "surface", SurfaceTriangle(w, c1, c2, c3))


def sample_triangle(seed: int, w: WarpTable, box: tuple[float, float] | None = None, kind: str = "general",
                    side_range: tuple[float, float] = (0.3, 2.5), eps_max: float = 0.5,
                    min_angle: float = 1e-3) -> TriangleSample:
    """Deterministic random triangle with its apex in the annulus ``box``.

    ``kind`` selects the apex angle: 'general' draws it uniformly, 'right'
    fixes it at pi/2 and 'obtuse' draws it from [pi - eps_max, pi).
    Degenerate draws are rejected and redrawn from the next substream.
    """
    prof = w.profile
    if box is None:
        box = (max(0.0, prof.r_lo - 1.0), prof.r_hi + 1.0)
    for attempt in range(100):
        rng = np.random.default_rng([seed, attempt])
        r = rng.uniform(*box)
        th, heading = rng.uniform(0.0, 2 * math.pi, 2)
        l1, l2 = rng.uniform(*side_range, 2)
        if kind == "right":
            a3 = 0.5 * math.pi
        elif kind == "obtuse":
            a3 = math.pi - rng.uniform(1e-3, eps_max)
        elif kind == "general":
            a3 = rng.uniform(0.05, math.pi - 0.05)
        else:
            raise DomainError(f"unknown triangle kind {kind!r}")
        try:
            t = triangle_from_sas(w, SurfacePoint(r, th), heading, l1, l2, a3)
        except (NoConvergence, OutOfTable):
            continue
        if min(t.a1, t.a2) > min_angle and t.a1 + t.a2 + t.a3 < math.pi:
            return t
    raise NoConvergence("could not draw a non-degenerate triangle")


class SurfacePerpendiculars:
    """Points at signed distance r over foot parameter t of a base geodesic on the surface."""

    def __init__(self, w: WarpTable, base: SurfaceTangent):
        self.w = w
        self.base = w.state(base)

    def offset_point(self, r: float, t: float) -> np.ndarray:
        y = self.w.flow_state(self.base, t) if t != 0 else self.base
        tan = self.w.tangent(y)
        normal = self.w.state(SurfaceTangent(tan.point, tan.angle + 0.5 * math.pi))
        return self.w.flow_state(normal, r)[:2] if r != 0 else normal[:2]

    def pair_distance(self, r1: float, r2: float, t1: float, t2: float) -> float:
        from .errors import SideCrossing
        if r1 * r2 < 0:
            raise SideCrossing("points lie on opposite sides of the geodesic")
        return shoot(self.w, self.offset_point(r1, t1), self.offset_point(r2, t2)).length


def to_half_plane(p: SurfacePoint, kappa: float) -> complex:
    """Isometric image in the upper half-plane when the surface has constant curvature."""
    w = math.tanh(0.5 * kappa * p.r) * complex(math.cos(p.theta), math.sin(p.theta))
    return 1j * (1 + w) / (1 - w)
