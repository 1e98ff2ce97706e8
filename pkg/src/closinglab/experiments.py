"""Experiment runners. Each returns a list of flat rows plus a summary dict."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import comparison, groups, hyp2, orbits, surface
from .bounds import BoundConstants, CurvatureBounds, lower_bound_coefficient, make_constants
from .errors import ConfigError, NotHyperbolic

LAW_COLUMNS = [
    "cosine_upper_curv", "cosine_lower_curv", "angle_chain_left", "angle_chain_right",
    "sine_upper_curv_1", "sine_upper_curv_2", "sine_lower_curv_1", "sine_lower_curv_2",
    "cosh_leg_1", "cosh_leg_2", "sin_cot_1", "sin_cot_2",
    "near_base", "base_length", "base_angle", "perpendicular_projection",
]
EQUALITY_COLUMNS = ["cosine_upper_curv", "cosine_lower_curv", "sine_upper_curv_1", "sine_upper_curv_2",
                    "sine_lower_curv_1", "sine_lower_curv_2"]


@dataclass
class ExperimentConfig:
    kind: str
    kappa1: float = 1.0
    kappa2: float = 1.0
    kappa: float | None = None
    t0: float = 5.0
    inj_radius: float = 0.5
    seed: int = 0
    samples: int = 100
    tolerance: float = 1e-9
    T1: float = 10.0
    T2: float = 10.0
    eps_min: float = 1e-3
    eps_max: float = 0.05
    eps_count: int = 20
    allow_large_eps: bool = False
    mirror: bool = False
    sup_step: float = orbits.SUP_STEP
    cone_samples: int = 1000
    separation: float = 3.0
    strength: float = 2.0
    word: str = "ab"
    L: int = 6
    L_cut: int = 4
    side_min: float = 0.1
    side_max: float = 10.0
    r_lo: float = 1.0
    r_hi: float = 2.0
    out: str | None = None
    json_out: str | None = None
    plot: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kappa is None:
            self.kappa = self.kappa1
        try:
            self.bounds = CurvatureBounds(self.kappa1, self.kappa2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.samples < 1 or self.eps_count < 1:
            raise ConfigError("sample counts must be positive")
        if not (0 < self.eps_min <= self.eps_max):
            raise ConfigError("need 0 < eps_min <= eps_max")
        if not (0 < self.side_min <= self.side_max):
            raise ConfigError("need 0 < side_min <= side_max")
        if self.T1 <= 0 or self.T2 <= 0 or self.t0 <= 0 or self.inj_radius <= 0:
            raise ConfigError("lengths must be positive")
        if not self.tolerance >= 0:
            raise ConfigError("tolerance must be non-negative")
        self.constants = make_constants(self.bounds, self.t0, self.inj_radius)
        if self.kind in ("partner", "partner-scaling", "pseudo", "cones") and not self.allow_large_eps \
                and self.eps_max > self.constants.eps0:
            raise ConfigError(f"eps_max {self.eps_max} exceeds eps0 = {self.constants.eps0}; "
                              "pass --allow-large-eps to override")

    def eps_grid(self) -> np.ndarray:
        if self.eps_count == 1:
            return np.array([self.eps_min])
        return np.geomspace(self.eps_min, self.eps_max, self.eps_count)

    def rng(self, counter: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, counter])


def _margins_row(margins: dict[str, float]) -> dict:
    return {name: margins.get(name) for name in LAW_COLUMNS}


def _finish(row: dict, tolerance: float) -> dict:
    vals = [v for k, v in row.items() if (k in LAW_COLUMNS or k.startswith("margin_")) and v is not None]
    worst = min(vals) if vals else math.inf
    row["worst_margin"] = worst
    row["pass"] = bool(worst >= -tolerance) and row.get("pass", True)
    return row


def run_triangles(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    """Random constant-curvature triangles; every fourth one has a right angle at the apex."""
    rows = []
    cb = cfg.bounds
    for i in range(cfg.samples):
        rng = cfg.rng(i)
        l1, l2 = rng.uniform(cfg.side_min, cfg.side_max, 2)
        right = i % 4 == 3
        a3 = 0.5 * math.pi if right else rng.uniform(1e-3, math.pi - 1e-3)
        start = hyp2.UnitTangent(1j, rng.uniform(0.0, 2.0 * math.pi))
        t = comparison.construct_triangle(l1, l2, a3, cfg.kappa, start)
        m = comparison.triangle_law_margins(t, cb)
        row = {"index": i, "kind": "right" if right else "general",
               "l1": t.l1, "l2": t.l2, "l3": t.l3, "a1": t.a1, "a2": t.a2, "a3": t.a3}
        row.update(_margins_row(m))
        rows.append(_finish(row, cfg.tolerance))
    summary = {"max_equality_residual": _max_equality(rows)} if cb.constant else {}
    return rows, summary


def _max_equality(rows: list[dict]) -> float:
    vals = [abs(r[c]) for r in rows for c in EQUALITY_COLUMNS if r.get(c) is not None]
    return max(vals) if vals else 0.0


SURFACE_KINDS = ("general", "right", "obtuse")


def surface_triangle_row(i: int, w: surface.WarpTable, cb: CurvatureBounds, seed: int, tolerance: float,
                         perp_every: int = 5) -> dict:
    kind = SURFACE_KINDS[i % 3]
    t = surface.sample_triangle(seed * 1_000_003 + i, w, kind=kind)
    margins = comparison.triangle_law_margins(t, cb)
    rng = np.random.default_rng([seed, i, 1])
    if kind == "obtuse":
        eps = math.pi - t.a3
        R1, R2 = t.l1 * rng.uniform(0.5, 1.0), t.l2 * rng.uniform(0.5, 1.0)
        for rep in comparison.check_corollary_tri(t, eps, R1, R2, cb, tolerance=tolerance):
            margins[rep.name] = rep.worst_margin
    if i % perp_every == 0:
        base = surface.SurfaceTangent(surface.SurfacePoint(rng.uniform(0.0, 3.0), rng.uniform(0, 2 * math.pi)),
                                      rng.uniform(0, 2 * math.pi))
        r1, r2 = rng.uniform(0.0, 1.5, 2) * rng.choice((-1.0, 1.0))
        t1, t2 = rng.uniform(-1.5, 1.5, 2)
        geo = surface.SurfacePerpendiculars(w, base)
        rep = comparison.check_perp_proj(r1, r2, t1, t2, cb.kappa2, geometry=geo, tolerance=tolerance)
        margins[rep.name] = rep.worst_margin
    row = {"index": i, "kind": kind, "l1": t.l1, "l2": t.l2, "l3": t.l3, "a1": t.a1, "a2": t.a2, "a3": t.a3}
    row.update(_margins_row(margins))
    return _finish(row, tolerance)


def build_configured_surface(cfg: ExperimentConfig) -> surface.WarpTable:
    prof = surface.CurvatureProfile(cfg.kappa1, cfg.kappa2, cfg.r_lo, cfg.r_hi)
    return surface.build_surface(prof)


def run_surface_triangles(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    w = build_configured_surface(cfg)
    # the surface's own curvature range, not the requested one, decides the bounds
    cb = w.curvature_bounds()
    rows = [surface_triangle_row(i, w, cb, cfg.seed, cfg.tolerance) for i in range(cfg.samples)]
    return rows, {"surface_kappa1": cb.kappa1, "surface_kappa2": cb.kappa2}


def partner_row(cfg: ExperimentConfig, eps: float) -> dict:
    C = cfg.constants
    cg = orbits.synthesize_crossed_geodesic(cfg.T1, cfg.T2, eps, "partner", cfg.kappa, cfg.mirror, C.eps0)
    res = orbits.construct_partner(cg, C, cfg.sup_step, cfg.tolerance)
    r1, r2 = orbits.loop_chain_residuals(cg)
    row = {
        "T1": cfg.T1, "T2": cfg.T2, "eps": eps, "T": res.T, "T_hat": res.T_hat, "T_prime": res.T_prime,
        "T3": res.T3, "length_gap": res.T - res.T_prime, "dist_sup": res.dist_sup,
        "bound_len": res.bound_len, "bound_dist": res.bound_dist,
        "margin_len": res.bound_len - (res.T - res.T_prime), "margin_dist": res.bound_dist - res.dist_sup,
        "margin_shorter": res.T - res.T_prime, "chain_residual_1": r1, "chain_residual_2": r2,
        "in_regime": res.in_regime, "large_eps": cg.large_eps,
    }
    row["pass"] = res.ok and min(r1, r2) >= -cfg.tolerance
    inv = orbits.partner_invariants(res, cfg.kappa1, cfg.tolerance)
    row["pass"] = row["pass"] and min(inv.values()) >= 0
    return _finish(row, cfg.tolerance)


def run_partner(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    rows = [partner_row(cfg, float(e)) for e in cfg.eps_grid()]
    return rows, {}


def scaling_fit(rows: list[dict]) -> dict:
    eps = np.array([r["eps"] for r in rows])
    gap = np.array([r["length_gap"] for r in rows])
    slope, icpt = np.polyfit(np.log(eps), np.log(gap), 1)
    ratio = gap / eps**2
    return {"slope": float(slope), "intercept": float(icpt), "ratio_min": float(ratio.min()),
            "ratio_max": float(ratio.max()), "ratio_mean": float(ratio.mean())}


def admissible_b(cfg: ExperimentConfig) -> float:
    """Largest b for which every run of the sweep satisfies the loop-length hypothesis."""
    e = cfg.eps_min
    return min((math.cosh(cfg.bounds.kappa2 * T) - 1.0) * 2.0 * math.sin(0.5 * e) ** 2 for T in (cfg.T1, cfg.T2))


def run_partner_scaling(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    rows, _ = run_partner(cfg)
    fit = scaling_fit(rows) if len(rows) > 1 else {}
    b = admissible_b(cfg)
    c1 = lower_bound_coefficient(b, cfg.bounds.kappa2)
    for r in rows:
        r["lower_bound"] = c1 * r["eps"] ** 2
        r["margin_lower"] = r["length_gap"] - r["lower_bound"]
        _finish(r, cfg.tolerance)
    fit.update({"b": b, "C1": c1})
    return rows, fit


def run_pseudo(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    C = cfg.constants
    rows = []
    for e in cfg.eps_grid():
        cg = orbits.synthesize_crossed_geodesic(cfg.T1, cfg.T2, float(e), "pseudo", cfg.kappa, cfg.mirror, C.eps0)
        res = orbits.construct_pseudo_partner(cg, C, cfg.sup_step, cfg.tolerance)
        r1, r2 = orbits.loop_chain_residuals(cg)
        row = {
            "T1": cfg.T1, "T2": cfg.T2, "eps": float(e), "That1": res.That1, "That2": res.That2,
            "len_gap_1": res.len_gaps[0], "len_gap_2": res.len_gaps[1],
            "dist_sup_1": res.dist_sups[0], "dist_sup_2": res.dist_sups[1], "endpoint_gap": res.endpoint_gap,
            "bound_len": res.bound_len, "bound_dist": res.bound_dist, "bound_gap": res.bound_gap,
            "margin_len": res.bound_len - max(res.len_gaps),
            "margin_len_sign": min(res.len_gaps),
            "margin_dist": res.bound_dist - max(res.dist_sups),
            "margin_gap": res.bound_gap - res.endpoint_gap,
            "chain_residual_1": r1, "chain_residual_2": r2, "in_regime": res.in_regime,
        }
        row["pass"] = res.ok and min(r1, r2) >= -cfg.tolerance
        rows.append(_finish(row, cfg.tolerance))
    return rows, {}


def run_closing(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    C = cfg.constants
    rows = []
    for i in range(cfg.samples):
        g, w, T, info = orbits.sample_closing_case(cfg.rng(i), C, cfg.kappa)
        res = orbits.close_orbit(w, T, g, C, cfg.kappa, cfg.sup_step, cfg.tolerance)
        row = {"index": i, "length": info["length"], "offset": info["offset"], "tilt": info["tilt"],
               "jitter": info["jitter"], "footpoint": res.footpoint, "delta": res.delta, "T": res.T,
               "T_prime": res.T_prime, "shadow_sup": res.shadow_sup,
               "bound_len": res.bound_len, "bound_shadow": res.bound_shadow,
               "margin_len": res.bound_len - abs(res.T - res.T_prime),
               "margin_shadow": res.bound_shadow - res.shadow_sup}
        if "footpoint_length" in res.passed:
            fl, fs = 4.0 * C.C_tilde * res.delta, (10.0 * C.C_tilde + 1.0) * res.delta
            row.update({"fp_bound_len": fl, "fp_bound_shadow": fs, "margin_fp_len": fl - (res.T - res.T_prime),
                        "margin_fp_positive": res.T - res.T_prime, "margin_fp_shadow": fs - res.shadow_sup})
        row["in_regime"] = res.in_regime
        row["pass"] = res.ok
        rows.append(_finish(row, cfg.tolerance))
    return rows, {"footpoint_cases": sum(1 for r in rows if r.get("fp_bound_len") is not None)}


def run_cones(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    C = cfg.constants
    rows = []
    for e in cfg.eps_grid():
        e = float(e)
        cg = orbits.synthesize_crossed_geodesic(cfg.T1, cfg.T2, e, "partner", cfg.kappa, cfg.mirror, C.eps0)
        res = orbits.construct_partner(cg, C, cfg.sup_step, cfg.tolerance)
        theta = 2.0 * e
        v = orbits.find_witness(res.element, cg.v0, theta, res.T_hat, cfg.kappa)
        rep = orbits.check_cone_contraction(res.element, cg.v0, theta, res.T_hat, cfg.cone_samples, C, cfg.kappa,
                                            witness=v, tolerance=cfg.tolerance)
        brackets = {r.name: r for r in orbits.check_length_bracket(res.element, v, cg.v0, theta, res.T_hat, C,
                                                                    cfg.kappa, cfg.sup_step, cfg.tolerance)}
        row = {"eps": e, "theta": theta, "rho": C.rho(theta), "t": res.T_hat, "T_prime": res.T_prime,
               "cone_samples": rep.samples, "cone_violations": rep.violations, "margin_cone": rep.worst_margin,
               "margin_bracket": brackets["length_bracket"].worst_margin,
               "margin_fp_len": brackets["footpoint_length"].worst_margin if "footpoint_length" in brackets else None,
               "margin_fp_shadow": brackets["footpoint_shadow"].worst_margin if "footpoint_shadow" in brackets else None,
               "theta_admissible": theta <= C.theta0, "in_regime": res.T_hat >= C.t0}
        rows.append(_finish(row, cfg.tolerance))
    return rows, {}


def run_crossings(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    C = cfg.constants
    gs = groups.schottky_generators(cfg.separation, cfg.strength, cfg.kappa)
    words = [groups.Word.parse(cfg.word)] if cfg.word != "all" else \
        [w for w, _ in groups.enumerate_conjugacy(gs, cfg.L) if len(w) > 1]
    rows = []
    for word in words:
        for c in groups.detect_crossings(word, gs, cfg.L_cut, cfg.kappa):
            cg = groups.crossing_geometry(c, cfg.kappa)
            applies = cg.mode == "partner" and cg.eps <= C.eps0 and min(c.T1, c.T2) >= C.t0
            row = {"word": word.render(), "T": c.period, "T1": c.T1, "T2": c.T2, "eps": c.eps, "mode": cg.mode,
                   "applies": applies, "T_prime": None, "length_gap": None, "bound_len": None, "margin_len": None}
            if cg.mode == "partner":
                try:
                    res = orbits.construct_partner(cg, C, cfg.sup_step, cfg.tolerance)
                    row.update({"T_prime": res.T_prime, "length_gap": res.T - res.T_prime,
                                "bound_len": res.bound_len})
                    if applies:
                        row["margin_len"] = res.bound_len - (res.T - res.T_prime)
                except NotHyperbolic:
                    pass
            rows.append(_finish(row, cfg.tolerance))
    return rows, {"certificate": gs.certificate, "words": len(words)}


def run_constants(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    return [{"name": k, "value": v} for k, v in cfg.constants.as_dict().items()], {}


RUNNERS = {
    "triangles": run_triangles,
    "surface-triangles": run_surface_triangles,
    "partner": run_partner,
    "partner-scaling": run_partner_scaling,
    "pseudo": run_pseudo,
    "closing": run_closing,
    "cones": run_cones,
    "crossings": run_crossings,
    "constants": run_constants,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], dict]:
    if cfg.kind not in RUNNERS:
        raise ConfigError(f"unknown experiment kind {cfg.kind!r}")
    rows, summary = RUNNERS[cfg.kind](cfg)
    summary = dict(summary)
    summary["rows"] = len(rows)
    summary["violations"] = sum(1 for r in rows if r.get("pass") is False)
    return rows, summary


def constants_table(constants: BoundConstants) -> str:
    width = max(len(k) for k in constants.as_dict())
    return "\n".join(f"{k:<{width}}  {v!r}" for k, v in constants.as_dict().items())
