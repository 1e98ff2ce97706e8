"""Curvature-pinching constants and the closed-form scalar bounds built from them."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, HypothesisViolated

D_GRID_POINTS = 10_000
D_SAFETY = 1.10


@dataclass(frozen=True)
class CurvatureBounds:
    """Sectional curvature pinched in [-kappa2**2, -kappa1**2]."""

    kappa1: float
    kappa2: float

    def __post_init__(self):
        k1, k2 = float(self.kappa1), float(self.kappa2)
        if not (math.isfinite(k1) and math.isfinite(k2) and 0 < k1 <= k2):
            raise DomainError(f"need 0 < kappa1 <= kappa2, got ({k1}, {k2})")
        object.__setattr__(self, "kappa1", k1)
        object.__setattr__(self, "kappa2", k2)

    @property
    def ratio(self) -> float:
        return self.kappa2 / self.kappa1

    @property
    def constant(self) -> bool:
        return self.kappa1 == self.kappa2


@dataclass(frozen=True)
class BoundConstants:
    kappa1: float
    kappa2: float
    theta0: float
    theta0_alt: float
    eps0: float
    delta0: float
    C_main: float
    C_intro: float
    C_tilde: float
    rho_coeff: float
    partner_len_coeff: float
    partner_dist_coeff: float
    pseudo_len_coeff: float
    pseudo_dist_coeff: float
    pseudo_gap_coeff: float
    t0: float
    inj_radius: float
    b_inj: float
    D_num: float

    @property
    def bounds(self) -> CurvatureBounds:
        return CurvatureBounds(self.kappa1, self.kappa2)

    def rho(self, theta: float) -> float:
        """Cone opening after contraction."""
        return self.rho_coeff * theta

    def as_dict(self) -> dict:
        return asdict(self)


def a_theta(theta: float, kappa1: float) -> float:
    """Distance at which an angle theta at a base point is seen, at curvature -kappa1**2."""
    if not (0.0 <= theta < 0.5 * math.pi):
        raise DomainError(f"a_theta needs theta in [0, pi/2), got {theta}")
    # arcosh(sec t) == asinh(tan t), which keeps precision near 0
    return math.asinh(math.tan(theta)) / kappa1


def f_delta(delta: float, kappa1: float) -> float:
    """Angle bound at a base point for endpoints of d1-close vectors."""
    if not (0.0 < delta <= 0.5):
        raise DomainError(f"f_delta needs delta in (0, 1/2], got {delta}")
    far = math.sinh(kappa1 * (1.0 - delta))
    ratio = math.sinh(kappa1 * delta) / far
    if ratio <= 0.5:
        return 2.0 * math.asin(ratio)
    # asin is ill-conditioned near 1; use pi - 4 asin(sqrt((1 - ratio) / 2)) with 1 - ratio in product form
    gap = 2.0 * math.cosh(0.5 * kappa1) * math.sinh(kappa1 * (0.5 - delta)) / far
    return math.pi - 4.0 * math.asin(math.sqrt(0.5 * gap))


def b_from_rho(rho: float, kappa: float) -> float:
    return 4.0 * math.sinh(0.5 * kappa * rho) ** 2


def rho_from_b(b: float, kappa: float) -> float:
    return 2.0 * math.asinh(math.sqrt(b / 4.0)) / kappa


def _d_numeric(k1: float, k2: float, eps0: float, rho_coeff: float) -> float:
    eps = np.linspace(eps0 / D_GRID_POINTS, eps0, D_GRID_POINTS)
    a = np.arcsinh(np.tan(rho_coeff * 2.0 * eps)) / k1
    return float(D_SAFETY * np.max((np.cosh(k2 * a) - 1.0) / eps**2))


def make_constants(cb: CurvatureBounds, t0: float = 5.0, inj_radius: float = 0.5) -> BoundConstants:
    k1, k2 = cb.kappa1, cb.kappa2
    if not (t0 > 0 and inj_radius > 0):
        raise DomainError("t0 and inj_radius must be positive")
    r = k2 / k1
    theta0 = math.pi / 8.0 * k1 / (k2 + k1)
    eps0 = math.pi / 16.0 * k1 / (k1 + k2)
    big = max(2.0 * math.pi, k1)
    rho_coeff = 2.0 * (r + 1.0)
    return BoundConstants(
        kappa1=k1,
        kappa2=k2,
        theta0=theta0,
        theta0_alt=math.pi / 8.0 * k1 / (k2 + 2.0 * k1),
        eps0=eps0,
        delta0=min(theta0 / big, math.pi / (2.0 * k1), 0.5 - 1e-9),
        C_main=2.0 / k1 * (2.0 * r + 3.0) * big,
        C_intro=4.0 * math.pi / k1 * (2.0 * r + 3.0),
        C_tilde=4.0 * math.pi / k1 * (r + 1.0),
        rho_coeff=rho_coeff,
        partner_len_coeff=18.0 / k1 + 16.0 * k2 / k1**2,
        partner_dist_coeff=25.0 / k1 + 24.0 * k2 / k1**2,
        pseudo_len_coeff=8.0 * (r + 1.0) / k1,
        pseudo_dist_coeff=12.0 * (r + 1.0) / k1,
        pseudo_gap_coeff=32.0 * (r + 1.0) / k1,
        t0=float(t0),
        inj_radius=float(inj_radius),
        b_inj=b_from_rho(2.0 * inj_radius, k2),
        D_num=_d_numeric(k1, k2, eps0, rho_coeff),
    )


def loop_length_lower_bound(eps: float, kappa: float, rho: float) -> float:
    """Shortest loop through a point with closing angle eps when the injectivity radius is rho/2."""
    if not (0.0 < eps < math.pi):
        raise DomainError(f"eps must lie in (0, pi), got {eps}")
    b = b_from_rho(rho, kappa)
    return math.acosh(b / (2.0 * math.sin(0.5 * eps) ** 2) + 1.0) / kappa


def lower_bound_coefficient(b: float, kappa2: float) -> float:
    """Leading eps**2 coefficient of the lower bound on T - T'."""
    s = (b + 2.0) ** 2
    return (1.0 - 8.0 * s / (s * s + 16.0)) / (math.pi**2 * kappa2)


def tprime_bounds(T1: float, T2: float, eps: float, cb: CurvatureBounds, b: float) -> tuple[float, float]:
    """Bracket [lower, upper] for T - T' where T = T1 + T2."""
    if not (0.0 < eps < math.pi):
        raise DomainError(f"eps must lie in (0, pi), got {eps}")
    if not b > 0:
        raise DomainError("b must be positive")
    k1, k2 = cb.kappa1, cb.kappa2
    need = b / (2.0 * math.sin(0.5 * eps) ** 2) + 1.0
    for T in (T1, T2):
        if math.cosh(k2 * T) < need * (1.0 - 1e-12):
            raise HypothesisViolated(f"loop length {T} is below the injectivity bound")
    lower_arg = lower_bound_coefficient(b, k2) * k2 * eps**2
    upper_arg = 1.0 - eps**2 / 4.0 - (eps / (math.sqrt(2.0) * b)) ** (4.0 * k1 / k2)
    if lower_arg >= 1.0 or upper_arg <= 0.0:
        raise DomainError("logarithm argument is not positive")
    return -math.log1p(-lower_arg) / k2, -math.log(upper_arg) / k1


def length_bracket(t: float, theta: float, cb: CurvatureBounds) -> tuple[float, float]:
    """Range of translation lengths for elements carrying a theta-cone vector forward by t."""
    k1, r = cb.kappa1, cb.ratio
    return t - 4.0 / k1 * (2.0 * r + 3.0) * theta, t + 4.0 / k1 * theta


def footpoint_length_gap(theta: float, cb: CurvatureBounds) -> float:
    return 8.0 / cb.kappa1 * (cb.ratio + 1.0) * theta


def footpoint_shadow_bound(theta: float, cb: CurvatureBounds) -> float:
    return 12.0 / cb.kappa1 * (cb.ratio + 1.0) * theta
