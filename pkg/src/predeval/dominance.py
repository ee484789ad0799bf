"""Pairwise comparison of predictors: Lorenz and Murphy dominance, crossing
counts, second-degree dominance, third-degree integrals and the variance
criterion for the generator classes ``U`` (p >= 0) and ``V`` (p <= 0).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .curves import (
    Curve,
    CrossingReport,
    common_grid,
    default_theta_grid,
    knot_grid,
    lorenz_curve,
    murphy_curve,
    sign_changes,
    stop_loss,
)
from .losses import AtomicMeasure, MixingMeasure, tweedie_generator
from .sample import PairedSample, ecdf, rebalance

__all__ = [
    "DominanceVerdict",
    "ThirdDegreeReport",
    "lorenz_dominance",
    "murphy_dominance",
    "cdf_sign_changes",
    "crossing_consistency",
    "second_degree_lorenz",
    "second_degree_murphy",
    "third_degree_integrals",
    "bregman_dominance_class",
    "tweedie_class",
    "calibrated_dsc",
    "align_means",
]

DEFAULT_MEAN_TOL = 1e-2


@dataclass(frozen=True)
class DominanceVerdict:
    relation: str  # first_dominates | second_dominates | cross | equal_within_tol
    crossing: CrossingReport
    evidence: Curve
    tolerance: float

    @property
    def count(self) -> int:
        return self.crossing.sign_changes

    @property
    def locations(self) -> list:
        return self.crossing.locations

    def as_dict(self) -> dict:
        return {
            "relation": self.relation,
            "sign_changes": self.crossing.sign_changes,
            "locations": self.crossing.locations,
            "first_sign": self.crossing.first_sign,
            "unresolved": self.crossing.unresolved,
            "tolerance": self.tolerance,
        }


def _verdict(diff: Curve, tol: float, better_when_negative: bool, count_narrow: bool) -> DominanceVerdict:
    """Classify a difference curve (first minus second)."""
    zero = Curve(diff.axis, diff.grid, np.zeros_like(diff.values))
    rep = sign_changes(diff, zero, tol=tol, count_narrow=count_narrow)
    v = diff.values
    if np.all(np.abs(v) <= tol):
        rel = "equal_within_tol"
    elif np.all(v <= tol):
        rel = "first_dominates" if better_when_negative else "second_dominates"
    elif np.all(v >= -tol):
        rel = "second_dominates" if better_when_negative else "first_dominates"
    else:
        rel = "cross"
    return DominanceVerdict(rel, rep, diff, tol)


def lorenz_dominance(x1, x2, tol: float = 1e-9, grid=None) -> DominanceVerdict:
    """``first_dominates`` when ``LC(x1) <= LC(x2)`` everywhere."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    exact = grid is None
    grid = common_grid(knot_grid(x1.size), knot_grid(x2.size)) if exact else np.asarray(grid, dtype=float)
    diff = lorenz_curve(x1, grid) - lorenz_curve(x2, grid)
    return _verdict(diff, tol, better_when_negative=True, count_narrow=exact)


def murphy_dominance(s1: PairedSample, s2: PairedSample, theta_grid=None, tol: float = 1e-9) -> DominanceVerdict:
    """``first_dominates`` when ``M_theta(Y, X1) <= M_theta(Y, X2)`` everywhere.

    Calibrated samples use the stop-loss form, where the comparison is the
    convex order ``E(X2 - theta)+ <= E(X1 - theta)+``.
    """
    if s1.y.shape != s2.y.shape or not np.array_equal(s1.y, s2.y):
        raise ValueError("samples do not share the response column")
    exact = theta_grid is None
    grid = default_theta_grid(s1.y, s1.x, s2.x) if exact else np.asarray(theta_grid, dtype=float)
    calibrated = s1.calibrated and s2.calibrated
    m1 = murphy_curve(s1, grid, calibrated_form=calibrated)
    m2 = murphy_curve(s2, grid, calibrated_form=calibrated)
    return _verdict(m1 - m2, tol, better_when_negative=True, count_narrow=exact)


def cdf_sign_changes(x1, x2, tol: float = 1e-12) -> int:
    """Sign changes of ``F1 - F2`` over the pooled support (exact for step CDFs)."""
    grid = np.unique(np.concatenate([x1, x2]))
    f1 = ecdf(x1).cdf(grid)
    f2 = ecdf(x2).cdf(grid)
    d = f1 - f2
    s = np.sign(np.where(np.abs(d) <= tol, 0.0, d))
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


def align_means(x1, x2, target: float | None = None, mean_tol: float = DEFAULT_MEAN_TOL):
    """Rescale both columns to a common mean; error if they differ by more than ``mean_tol`` (relative)."""
    m1, m2 = float(np.mean(x1)), float(np.mean(x2))
    target = 0.5 * (m1 + m2) if target is None else float(target)
    gap = max(abs(m1 - target), abs(m2 - target)) / target
    if gap > mean_tol:
        raise ValueError(f"means differ by {gap:.3g} (relative), beyond tolerance {mean_tol:g}")
    a, b = rebalance([x1, x2], target)
    return a, b, gap


def crossing_consistency(
    x1, x2, y=None, tol: float = 1e-9, mean_tol: float = DEFAULT_MEAN_TOL, cdf_tol: float | None = None
) -> dict:
    """Compare CDF, Lorenz and Murphy crossing counts of a calibrated pair.

    Empirical CDF differences carry noise of order ``1/sqrt(n)`` where the
    true CDFs touch; ``cdf_tol`` defaults to a tenth of that.
    """
    target = None if y is None else float(np.mean(y))
    a, b, gap = align_means(np.asarray(x1, float), np.asarray(x2, float), target, mean_tol)
    ybar = float(np.mean(a))
    lor = lorenz_dominance(a, b, tol=tol)
    grid = default_theta_grid(a, b)
    dm = Curve("theta", grid, stop_loss(b, grid) - stop_loss(a, grid))
    scale = max(float(np.max(np.abs(stop_loss(a, grid)))), ybar)
    mur = _verdict(dm, tol * scale, True, True)
    if cdf_tol is None:
        cdf_tol = 0.1 / np.sqrt(min(a.size, b.size))
    cdf = cdf_sign_changes(a, b, cdf_tol)
    consistent = lor.count == mur.count and (lor.count <= max(cdf - 1, 0))
    return {
        "cdf_changes": cdf,
        "lorenz_changes": lor.count,
        "murphy_changes": mur.count,
        "lorenz_first_sign": lor.crossing.first_sign,
        "murphy_first_sign": mur.crossing.first_sign,
        "consistent": bool(consistent),
        "mean_gap": gap,
    }


def _cumulative_trapezoid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    seg = np.diff(grid) * (values[:-1] + values[1:]) / 2.0
    return np.concatenate([[0.0], np.cumsum(seg)])


def _single_crossing_from_above(rep: CrossingReport) -> bool:
    return rep.sign_changes == 1 and rep.first_sign == 1


def second_degree_lorenz(x1, x2, tol: float = 1e-12) -> dict:
    """Partial-integral Lorenz comparisons for a pair whose curves cross once.

    ``up_holds``: ``int_0^p LC(x1) >= int_0^p LC(x2)`` for all ``p``;
    ``down_holds``: ``int_p^1 (1 - LC(x2)) <= int_p^1 (1 - LC(x1))`` for all ``p``.
    For the curve crossing from above, ``up`` matches the lower Gini index and
    ``down`` the higher one.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    grid = common_grid(knot_grid(x1.size), knot_grid(x2.size))
    l1, l2 = lorenz_curve(x1, grid), lorenz_curve(x2, grid)
    rep = sign_changes(l1, l2, tol=tol, count_narrow=True)
    if rep.sign_changes != 1:
        raise ValueError(f"Lorenz curves must cross exactly once, found {rep.sign_changes}")
    from_above = 1 if rep.first_sign == 1 else 2
    i1, i2 = _cumulative_trapezoid(l1.values, grid), _cumulative_trapezoid(l2.values, grid)
    up = bool(np.all(i1 - i2 >= -tol))
    c1 = _cumulative_trapezoid(1.0 - l1.values, grid)
    c2 = _cumulative_trapezoid(1.0 - l2.values, grid)
    t1, t2 = c1[-1] - c1, c2[-1] - c2
    down = bool(np.all(t2 - t1 <= tol))
    g1, g2 = float(1.0 - 2.0 * i1[-1]), float(1.0 - 2.0 * i2[-1])
    order = "equal" if abs(g1 - g2) <= tol else ("first_lower" if g1 < g2 else "first_higher")
    out = {
        "from_above": from_above,
        "crossing": rep.locations[0],
        "up_holds": up,
        "down_holds": down,
        "gini_1": g1,
        "gini_2": g2,
        "gini_order": order,
    }
    if from_above == 1:
        out["oriented_up"], out["oriented_down"] = up, down
        ga, gb = g1, g2
    else:
        flipped = second_degree_lorenz(x2, x1, tol)
        out["oriented_up"], out["oriented_down"] = flipped["up_holds"], flipped["down_holds"]
        ga, gb = g2, g1
    out["lemma_consistent"] = bool(
        out["oriented_up"] == (ga <= gb + tol) and out["oriented_down"] == (ga >= gb - tol)
    )
    return out


def _measure_atoms(H: MixingMeasure, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Locations and masses that integrate piecewise-linear functions of theta
    on ``grid`` exactly against ``dH``."""
    if isinstance(H, AtomicMeasure):
        return H.thetas, H.masses
    # absolutely continuous H: Simpson on each grid cell is exact for the
    # quadratic integrand (piecewise-linear curve times piecewise-linear H)
    g = np.unique(np.concatenate([grid, getattr(H, "knots", np.array([]))]))
    g = g[g <= grid[-1]]
    h = H.value
    a, b = g[:-1], g[1:]
    mid = 0.5 * (a + b)
    # slope of H on each cell from its end values
    slope = (h(b) - h(a)) / (b - a)
    w = (b - a) / 6.0 * slope
    locs = np.concatenate([a, mid, b])
    masses = np.concatenate([w, 4.0 * w, w])
    return locs, masses


def second_degree_murphy(s1: PairedSample, s2: PairedSample, H: MixingMeasure, tol: float = 1e-12) -> dict:
    """Partial integrals of calibrated Murphy curves against ``dH``.

    ``up_holds``: ``int_0^t M1 dH >= int_0^t M2 dH`` for all ``t``;
    ``down_holds``: ``int_t^inf M1 dH <= int_t^inf M2 dH`` for all ``t``.
    """
    if not np.array_equal(s1.y, s2.y):
        raise ValueError("samples do not share the response column")
    if not (s1.calibrated and s2.calibrated):
        raise ValueError("both samples must be flagged calibrated")
    y, x1, x2 = s1.y, s1.x, s2.x
    ybar = float(np.mean(y))
    grid = default_theta_grid(y, x1, x2)
    m1 = stop_loss(y, grid) - stop_loss(x1, grid)
    m2 = stop_loss(y, grid) - stop_loss(x2, grid)
    scale = max(float(np.max(np.abs(m1))), float(np.max(np.abs(m2))), 1e-300)
    rep = sign_changes(Curve("theta", grid, m1), Curve("theta", grid, m2), tol=1e-9 * scale, count_narrow=True)
    identical = np.array_equal(x1, x2)
    if not identical and not _single_crossing_from_above(rep):
        raise ValueError(
            f"Murphy curves must cross once from above, found {rep.sign_changes} change(s), first sign {rep.first_sign}"
        )
    locs, mass = _measure_atoms(H, grid)
    keep = mass != 0
    locs, mass = locs[keep], mass[keep]
    order = np.argsort(locs, kind="stable")
    locs, mass = locs[order], mass[order]
    f1 = (stop_loss(y, locs) - stop_loss(x1, locs)) * mass
    f2 = (stop_loss(y, locs) - stop_loss(x2, locs)) * mass
    c1, c2 = np.cumsum(f1), np.cumsum(f2)
    t1, t2 = c1[-1] - np.concatenate([[0.0], c1[:-1]]), c2[-1] - np.concatenate([[0.0], c2[:-1]])
    sc = tol * max(1.0, float(np.max(np.abs(c1))), float(np.max(np.abs(c2))))
    up = bool(np.all(c1 - c2 >= -sc))
    down = bool(np.all(t1 - t2 <= sc))
    d1 = float(np.sum((stop_loss(x1, locs) - np.maximum(ybar - locs, 0.0)) * mass))
    d2 = float(np.sum((stop_loss(x2, locs) - np.maximum(ybar - locs, 0.0)) * mass))
    order_s = "equal" if abs(d1 - d2) <= sc else ("first_lower" if d1 < d2 else "first_higher")
    return {
        "up_holds": up,
        "down_holds": down,
        "consistent": bool(up == (d1 <= d2 + sc) and down == (d1 >= d2 - sc)),
        "dsc_1": d1,
        "dsc_2": d2,
        "dsc_order": order_s,
        "crossing": rep.locations[0] if rep.locations else None,
    }


@dataclass(frozen=True)
class ThirdDegreeReport:
    grid: np.ndarray
    lower_integral: np.ndarray
    upper_integral: np.ndarray
    half_var_diff: float
    var_1: float
    var_2: float
    mean_gap: float
    lower_nonneg: bool
    upper_nonneg: bool
    signs: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = self.grid.tolist()
        d["lower_integral"] = self.lower_integral.tolist()
        d["upper_integral"] = self.upper_integral.tolist()
        return d


def _sq_lower(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``mean(((u - x)+)^2)`` for each u."""
    xs = np.sort(x)
    n = xs.size
    c1 = np.concatenate([[0.0], np.cumsum(xs)])
    c2 = np.concatenate([[0.0], np.cumsum(xs * xs)])
    k = np.searchsorted(xs, u, side="right")
    return (k * u * u - 2.0 * u * c1[k] + c2[k]) / n


def third_degree_integrals(x1, x2, grid=None, mean_tol: float = DEFAULT_MEAN_TOL, align: bool = True) -> ThirdDegreeReport:
    """Double integrals of ``F2 - F1`` from below and from above.

    ``lower(u) = 1/2 [E((u - X2)+)^2 - E((u - X1)+)^2]`` and
    ``upper(u) = lower(u) - (Var2 - Var1)/2``.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if align:
        x1, x2, gap = align_means(x1, x2, mean_tol=mean_tol)
    else:
        gap = abs(x1.mean() - x2.mean()) / (0.5 * (x1.mean() + x2.mean()))
        if gap > mean_tol:
            raise ValueError(f"means differ by {gap:.3g} (relative), beyond tolerance {mean_tol:g}")
    if grid is None:
        grid = np.unique(np.concatenate([[0.0], x1, x2]))
    grid = np.asarray(grid, dtype=float)
    lower = 0.5 * (_sq_lower(x2, grid) - _sq_lower(x1, grid))
    v1, v2 = float(np.var(x1)), float(np.var(x2))
    half = 0.5 * (v2 - v1)
    upper = lower - half
    scale = max(1.0, abs(half)) * 1e-9
    return ThirdDegreeReport(
        grid=grid,
        lower_integral=lower,
        upper_integral=upper,
        half_var_diff=half,
        var_1=v1,
        var_2=v2,
        mean_gap=gap,
        lower_nonneg=bool(np.all(lower >= -scale)),
        upper_nonneg=bool(np.all(upper >= -scale)),
        signs={"upper_at_0": float(upper[0]) if grid[0] == 0 else None},
    )


def tweedie_class(p: float, grid=None) -> dict:
    """Class membership of ``phi_p`` with a numerical check of ``phi''`` and ``phi'''``.

    ``U`` asks for ``phi'''`` <= 0 (p >= 0), ``V`` for ``phi'''`` >= 0 (p <= 0).
    """
    p = float(p)
    gen = tweedie_generator(p)
    grid = np.geomspace(0.05, 20.0, 60) if grid is None else np.asarray(grid, dtype=float)
    h = 1e-4 * grid
    d2 = (gen.deriv(grid + h) - gen.deriv(grid - h)) / (2.0 * h)
    d3 = (gen.deriv(grid + h) - 2.0 * gen.deriv(grid) + gen.deriv(grid - h)) / (h * h)
    tol3 = 1e-3 * np.abs(grid ** (-p - 1.0)) * max(abs(p), 1.0)
    in_u, in_v = p >= 0, p <= 0
    convex = bool(np.all(d2 >= -1e-8 * np.abs(grid ** (-p))))
    third_ok = True
    if in_u and not in_v:
        third_ok = bool(np.all(d3 <= tol3))
    elif in_v and not in_u:
        third_ok = bool(np.all(d3 >= -tol3))
    else:
        third_ok = bool(np.all(np.abs(d3) <= tol3 + 1e-6))
    return {"in_U": in_u, "in_V": in_v, "convex_check": convex, "third_derivative_check": third_ok}


def calibrated_dsc(x, p: float, ybar: float | None = None) -> float:
    """``mean phi_p(x) - phi_p(ybar)`` for a calibrated predictor column."""
    x = np.asarray(x, dtype=float)
    ybar = float(np.mean(x)) if ybar is None else ybar
    g = tweedie_generator(p)
    return float(np.mean(g.eval(x)) - g.eval(np.array(ybar)))


def bregman_dominance_class(
    x1,
    x2,
    y=None,
    cls: str = "U",
    p_samples=None,
    mean_tol: float = DEFAULT_MEAN_TOL,
) -> dict:
    """Variance criterion for a calibrated pair with one Lorenz crossing.

    With ``A`` the predictor whose Lorenz curve starts above: ``Var(A) <= Var(B)``
    gives ``DSC(A) <= DSC(B)`` for every generator in ``U``; ``Var(A) >= Var(B)``
    gives ``DSC(A) >= DSC(B)`` for every generator in ``V``.  For the other
    class the verdict abstains.
    """
    if cls not in ("U", "V"):
        raise ValueError("class must be 'U' or 'V'")
    target = None if y is None else float(np.mean(y))
    a, b, gap = align_means(np.asarray(x1, float), np.asarray(x2, float), target, mean_tol)
    lor = lorenz_dominance(a, b)
    if lor.count != 1:
        raise ValueError(f"need exactly one Lorenz crossing, found {lor.count}")
    above = 1 if lor.crossing.first_sign == 1 else 2
    xa, xb = (a, b) if above == 1 else (b, a)
    va, vb = float(np.var(xa)), float(np.var(xb))
    implied = "U" if va <= vb else "V"
    applicable = implied == cls
    if p_samples is None:
        p_samples = [0.0, 0.5, 1.0, 1.5] if cls == "U" else [-2.0, -1.0, -0.5, 0.0]
    m = float(np.mean(a))
    checks = []
    for p in p_samples:
        if (cls == "U" and p < 0) or (cls == "V" and p > 0):
            raise ValueError(f"p={p} is outside class {cls}")
        d1, d2 = calibrated_dsc(a, p, m), calibrated_dsc(b, p, m)
        checks.append({"p": float(p), "dsc_1": d1, "dsc_2": d2})
    verdict = None
    if applicable:
        # direction of DSC(first argument) relative to DSC(second argument)
        a_larger = implied == "V"
        first_larger = a_larger if above == 1 else not a_larger
        verdict = "first_larger_dsc" if first_larger else "second_larger_dsc"
        for c in checks:
            ok = c["dsc_1"] >= c["dsc_2"] - 1e-12 * abs(c["dsc_2"]) if first_larger else c["dsc_1"] <= c["dsc_2"] + 1e-12 * abs(c["dsc_2"])
            c["agrees"] = bool(ok)
    return {
        "class": cls,
        "implied_class": implied,
        "applicable": applicable,
        "verdict": verdict if applicable else "abstain",
        "from_above": above,
        "var_1": float(np.var(a)),
        "var_2": float(np.var(b)),
        "checks": checks,
        "mean_gap": gap,
    }
