"""Lorenz, concentration, Murphy and Q curves, and crossing detection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .sample import PairedSample, midrank_transform, tie_groups

__all__ = [
    "Curve",
    "CrossingReport",
    "default_p_grid",
    "knot_grid",
    "default_theta_grid",
    "lorenz_curve",
    "concentration_curve",
    "murphy_curve",
    "discrimination_murphy_curve",
    "stop_loss",
    "q_function",
    "sign_changes",
    "common_grid",
]

DEFAULT_POINTS = 512


@dataclass(frozen=True)
class Curve:
    """Piecewise-linear function given by ordinates on a strictly increasing grid."""

    axis: str  # "p" or "theta"
    grid: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be aligned 1-d arrays")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    def integral(self) -> float:
        """Exact integral of the linear interpolant."""
        return float(np.trapezoid(self.values, self.grid))

    def integral_of_square(self) -> float:
        """Exact integral of the squared linear interpolant."""
        a, b = self.values[:-1], self.values[1:]
        return float(np.sum(np.diff(self.grid) * (a * a + a * b + b * b) / 3.0))

    def __sub__(self, other: "Curve") -> "Curve":
        if self.axis != other.axis or not np.array_equal(self.grid, other.grid):
            raise ValueError("curves live on different grids")
        return Curve(self.axis, self.grid, self.values - other.values, f"{self.label}-{other.label}")

    def records(self) -> list[tuple[float, float]]:
        return list(zip(self.grid.tolist(), self.values.tolist()))

    def to_csv(self, path) -> None:
        """Headerless two-column text; ``repr`` floats round-trip exactly."""
        with open(path, "w", encoding="utf-8") as fh:
            for a, b in zip(self.grid.tolist(), self.values.tolist()):
                fh.write(f"{a!r},{b!r}\n")

    @classmethod
    def from_csv(cls, path, axis: str, label: str = "") -> "Curve":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls(axis, data[:, 0], data[:, 1], label)


# Grids ----------------------------------------------------------------------


def default_p_grid(points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


def knot_grid(n: int) -> np.ndarray:
    """Probability knots ``k/n``, where empirical Lorenz curves bend."""
    return np.arange(n + 1) / n


def default_theta_grid(*columns: Iterable[float], points: int = DEFAULT_POINTS) -> np.ndarray:
    """All distinct sample values, 0, and a uniform grid up to 1.05 * max."""
    vals = np.concatenate([np.asarray(c, dtype=float).ravel() for c in columns])
    top = float(vals.max()) if vals.size else 1.0
    top = top if top > 0 else 1.0
    return np.unique(np.concatenate([[0.0], vals, np.linspace(0.0, 1.05 * top, points)]))


def common_grid(*grids: np.ndarray) -> np.ndarray:
    return np.unique(np.concatenate([np.asarray(g, dtype=float) for g in grids]))


# Lorenz and concentration ---------------------------------------------------


def _share_curve(weights_in_order: np.ndarray, grid) -> np.ndarray:
    n = weights_in_order.size
    total = weights_in_order.sum()
    if not total > 0:
        raise ValueError("zero total mass")
    cum = np.concatenate([[0.0], np.cumsum(weights_in_order)]) / total
    cum[-1] = 1.0
    return np.interp(grid, knot_grid(n), cum)


def lorenz_curve(x, grid=None) -> Curve:
    """``LC_p``: share of total ``x`` held by the lowest ``100p%`` of ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    grid = knot_grid(x.size) if grid is None else np.asarray(grid, dtype=float)
    return Curve("p", grid, _share_curve(np.sort(x), grid), "lorenz")


def _y_by_x_with_ties(y, x) -> np.ndarray:
    order, gid, sizes = tie_groups(x)
    ys = np.asarray(y, dtype=float)[order]
    gmean = np.bincount(gid, weights=ys) / sizes
    return gmean[gid]


def concentration_curve(sample: PairedSample, grid=None) -> Curve:
    """``CC_p``: share of total ``y`` over the lowest ``100p%`` ranked by ``x``.

    Within tie groups of ``x`` the responses are averaged.
    """
    n = sample.n
    grid = knot_grid(n) if grid is None else np.asarray(grid, dtype=float)
    if not sample.y.sum() > 0:
        raise ValueError("zero total response")
    return Curve("p", grid, _share_curve(_y_by_x_with_ties(sample.y, sample.x), grid), "concentration")


# Murphy curves --------------------------------------------------------------


def stop_loss(values, theta) -> np.ndarray:
    """``mean((v - theta)+)`` for each theta, via sorted suffix sums."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    theta = np.asarray(theta, dtype=float)
    n = v.size
    suffix = np.concatenate([np.cumsum(v[::-1])[::-1], [0.0]])
    k = np.searchsorted(v, theta, side="right")
    return np.maximum((suffix[k] - theta * (n - k)) / n, 0.0)


def _slope_term(y, x, theta) -> np.ndarray:
    """``mean(1{x > theta} (y - x))``."""
    order = np.argsort(x, kind="stable")
    xs = np.asarray(x, dtype=float)[order]
    d = (np.asarray(y, dtype=float) - np.asarray(x, dtype=float))[order]
    suffix = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]])
    k = np.searchsorted(xs, theta, side="right")
    return suffix[k] / xs.size


def murphy_curve(sample: PairedSample, theta_grid=None, calibrated_form: bool = False) -> Curve:
    """``M_theta = mean L_theta(y_i, x_i)``.

    ``calibrated_form`` drops the slope term, which is only legitimate when
    the sample is flagged mean-calibrated.
    """
    y, x = sample.y, sample.x
    grid = default_theta_grid(y, x) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    m = stop_loss(y, grid) - stop_loss(x, grid)
    if calibrated_form:
        if not sample.calibrated:
            raise ValueError("calibrated form requested for a sample not flagged calibrated")
    else:
        m = m - _slope_term(y, x, grid)
    return Curve("theta", grid, np.maximum(m, 0.0) if not calibrated_form else m, "murphy")


def discrimination_murphy_curve(x, ybar: float, theta_grid=None) -> Curve:
    """``M_theta(X, ybar) = mean((x - theta)+) - (ybar - theta)+``."""
    if not ybar > 0:
        raise ValueError("ybar must be positive")
    grid = default_theta_grid(x) if theta_grid is None else np.asarray(theta_grid, dtype=float)
    vals = stop_loss(x, grid) - np.maximum(ybar - grid, 0.0)
    return Curve("theta", grid, vals, "murphy_disc")


# Q function -----------------------------------------------------------------


def normalised_residuals(sample: PairedSample) -> np.ndarray:
    """``d_i = y_i / ybar - x_i / xbar`` (sums to zero)."""
    return sample.y / sample.ybar - sample.x / sample.xbar


def q_function(sample: PairedSample, grid=None) -> Curve:
    """``Q(z) = mean(d_i (1 - max(z, r_i)))`` with midranks ``r_i``.

    With equal sample means ``d_i = (y_i - x_i) / ybar``.
    """
    grid = default_p_grid() if grid is None else np.asarray(grid, dtype=float)
    d = normalised_residuals(sample)
    r = midrank_transform(sample.x)
    order = np.argsort(r, kind="stable")
    rs, ds = r[order], d[order]
    n = d.size
    cum_d = np.concatenate([[0.0], np.cumsum(ds)])
    tail = np.concatenate([np.cumsum((ds * (1.0 - rs))[::-1])[::-1], [0.0]])
    k = np.searchsorted(rs, grid, side="right")
    vals = (cum_d[k] * (1.0 - grid) + tail[k]) / n
    return Curve("p", grid, vals, "Q")


# Crossings ------------------------------------------------------------------


@dataclass(frozen=True)
class CrossingReport:
    sign_changes: int
    locations: list
    tolerance: float
    first_sign: int = 0  # sign of c1 - c2 before the first change (0 if none)
    unresolved: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return self.sign_changes


def sign_changes(c1: Curve, c2: Curve, tol: float | None = None, count_narrow: bool = False) -> CrossingReport:
    """Sign changes of ``c1 - c2``, ignoring values within ``tol`` of zero.

    A sign run that occupies a single grid point is reported as unresolved
    unless ``count_narrow`` is set (appropriate on exact knot grids).
    """
    if c1.axis != c2.axis or not np.array_equal(c1.grid, c2.grid):
        raise ValueError("curves must share axis and grid")
    diff = c1.values - c2.values
    scale = max(float(np.max(np.abs(c1.values), initial=0.0)), float(np.max(np.abs(c2.values), initial=0.0)), 1e-300)
    tol = 1e-9 * scale if tol is None else float(tol)
    s = np.where(diff > tol, 1, np.where(diff < -tol, -1, 0))
    idx = np.flatnonzero(s)
    if idx.size == 0:
        return CrossingReport(0, [], tol, 0, [])
    # runs of constant sign among the non-zero points
    run_start = [0]
    for j in range(1, idx.size):
        if s[idx[j]] != s[idx[j - 1]]:
            run_start.append(j)
    runs = [(run_start[i], (run_start[i + 1] if i + 1 < len(run_start) else idx.size)) for i in range(len(run_start))]
    g = c1.grid
    unresolved = []
    keep = []
    for i, (a, b) in enumerate(runs):
        narrow = (b - a == 1) and 0 < i < len(runs) - 1
        if narrow and not count_narrow:
            unresolved.append(float(g[idx[a]]))
        else:
            keep.append((a, b))
    # merge neighbouring kept runs of equal sign left after dropping narrow ones
    merged: list = []
    for a, b in keep:
        if merged and s[idx[merged[-1][0]]] == s[idx[a]]:
            merged[-1] = (merged[-1][0], b)
        else:
            merged.append((a, b))
    locations = []
    for (a0, b0), (a1, _) in zip(merged[:-1], merged[1:]):
        i, j = idx[b0 - 1], idx[a1]
        if j == i + 1:
            t = diff[i] / (diff[i] - diff[j])
            locations.append(float(g[i] + t * (g[j] - g[i])))
        else:
            locations.append(float(0.5 * (g[i + 1] + g[j - 1])))
    return CrossingReport(len(locations), locations, tol, int(s[idx[0]]), unresolved)
