"""Empirical data model: validation, ECDF, midranks and recalibration."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "ValidationError",
    "EmptyInputError",
    "LengthMismatchError",
    "NonFiniteError",
    "NegativeValueError",
    "PairedSample",
    "RecalibratedSample",
    "EmpiricalDistribution",
    "validate",
    "ecdf",
    "quantile",
    "midrank_transform",
    "tie_groups",
    "pav",
    "recalibrate",
    "rebalance",
]


class ValidationError(ValueError):
    pass


class EmptyInputError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class NonFiniteError(ValidationError):
    pass


class NegativeValueError(ValidationError):
    pass


@dataclass(frozen=True)
class PairedSample:
    """Responses ``y`` and one predictor column ``x`` (both >= 0)."""

    y: np.ndarray
    x: np.ndarray
    name: str = "x"
    calibrated: bool = False

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def ybar(self) -> float:
        return float(np.mean(self.y))

    @property
    def xbar(self) -> float:
        return float(np.mean(self.x))

    @property
    def unbiasedness_gap(self) -> float:
        """``|mean(x) - mean(y)| / mean(y)``."""
        yb = self.ybar
        return abs(self.xbar - yb) / yb if yb > 0 else float("inf")

    def with_predictor(self, x, name: str | None = None, calibrated: bool = False) -> "PairedSample":
        return replace(self, x=np.asarray(x, dtype=float), name=name or self.name, calibrated=calibrated)


def _check_column(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInputError(f"{what}: empty input")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteError(f"{what}: non-finite value at row {int(bad[0])}")
    neg = np.flatnonzero(arr < 0)
    if neg.size:
        raise NegativeValueError(f"{what}: negative value at row {int(neg[0])}")
    return arr


def validate(y, xs, names: Sequence[str] | None = None, calibrated: bool = False) -> list[PairedSample]:
    """Check columns and build one :class:`PairedSample` per predictor.

    ``xs`` may be a single column, a list of columns or a name->column map.
    """
    y = _check_column(y, "response")
    if isinstance(xs, Mapping):
        names = list(xs.keys())
        cols = list(xs.values())
    else:
        if len(xs) and np.ndim(xs[0]) == 0:
            cols = [xs]
        else:
            cols = list(xs)
        names = list(names) if names is not None else [f"x{i + 1}" for i in range(len(cols))]
    if not cols:
        raise EmptyInputError("no predictor columns")
    out = []
    for name, col in zip(names, cols):
        x = _check_column(col, f"predictor {name!r}")
        if x.size != y.size:
            raise LengthMismatchError(f"predictor {name!r} has {x.size} rows, response has {y.size}")
        out.append(PairedSample(y=y, x=x, name=str(name), calibrated=calibrated))
    return out


# Empirical distributions ----------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Right-continuous step CDF on sorted distinct ``values``."""

    values: np.ndarray
    cum: np.ndarray  # F_hat at each distinct value

    def cdf(self, t):
        k = np.searchsorted(self.values, np.asarray(t, dtype=float), side="right")
        return np.concatenate([[0.0], self.cum])[k]

    def left_cdf(self, t):
        k = np.searchsorted(self.values, np.asarray(t, dtype=float), side="left")
        return np.concatenate([[0.0], self.cum])[k]

    def quantile(self, p):
        return quantile(self, p)


def ecdf(values) -> EmpiricalDistribution:
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInputError("ecdf of empty input")
    vals, counts = np.unique(v, return_counts=True)
    return EmpiricalDistribution(vals, np.cumsum(counts) / v.size)


def quantile(dist: EmpiricalDistribution, p):
    """Generalised inverse ``inf{t : F(t) >= p}``; ``p = 0`` maps to the minimum."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)) or np.any(np.isnan(p_arr)):
        raise ValueError("probability outside [0, 1]")
    # guard the cumulative against rounding just below 1
    cum = dist.cum.copy()
    cum[-1] = 1.0
    k = np.searchsorted(cum, p_arr, side="left")
    return dist.values[np.minimum(k, dist.values.size - 1)]


def tie_groups(x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stable sort order, group index per sorted position, and group sizes."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    new = np.concatenate([[True], xs[1:] != xs[:-1]])
    gid = np.cumsum(new) - 1
    sizes = np.bincount(gid)
    return order, gid, sizes


def midrank_transform(x) -> np.ndarray:
    """``(rank - 0.5) / n`` with midranks for ties."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise EmptyInputError("midranks of empty input")
    order, gid, sizes = tie_groups(x)
    ends = np.cumsum(sizes)
    mid = (ends - sizes / 2.0) / n  # centre of each group's mass in (0, 1)
    r = np.empty(n)
    r[order] = mid[gid]
    return r


# Isotonic recalibration -----------------------------------------------------


def pav(values, weights=None) -> np.ndarray:
    """Weighted pool-adjacent-violators fit of a sequence (non-decreasing)."""
    v = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=float).ravel()
    m = v.size
    if m == 0:
        return v.copy()
    # stack of blocks: weighted sum, weight, length
    sums = [0.0] * m
    wts = [0.0] * m
    lens = [0] * m
    top = -1
    vl = (v * w).tolist()
    wl = w.tolist()
    for i in range(m):
        top += 1
        sums[top] = vl[i]
        wts[top] = wl[i]
        lens[top] = 1
        while top > 0 and sums[top - 1] * wts[top] >= sums[top] * wts[top - 1]:
            sums[top - 1] += sums[top]
            wts[top - 1] += wts[top]
            lens[top - 1] += lens[top]
            top -= 1
    means = np.array(sums[: top + 1]) / np.array(wts[: top + 1])
    return np.repeat(means, lens[: top + 1])


@dataclass(frozen=True)
class RecalibratedSample:
    """Isotonic fit: ``fitted[i]`` estimates ``E[Y | X = x_i]``."""

    fitted: np.ndarray
    blocks: list  # (x_low, x_high, fitted value, count)
    method: str

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def _blocks_from(x_sorted: np.ndarray, f_sorted: np.ndarray) -> list:
    if x_sorted.size == 0:
        return []
    change = np.flatnonzero(np.diff(f_sorted) != 0) + 1
    starts = np.concatenate([[0], change])
    stops = np.concatenate([change, [x_sorted.size]])
    return [
        (float(x_sorted[a]), float(x_sorted[b - 1]), float(f_sorted[a]), int(b - a))
        for a, b in zip(starts, stops)
    ]


def recalibrate(sample: PairedSample, method: str = "pav") -> RecalibratedSample:
    """Empirical ``E[Y|X]`` by isotonic regression (``"pav"``) or equal-frequency
    binning (``"bins:k"``).  Tied ``x`` values always share one fitted value."""
    y = np.asarray(sample.y, dtype=float)
    x = np.asarray(sample.x, dtype=float)
    n = y.size
    if n == 0:
        raise EmptyInputError("cannot recalibrate an empty sample")
    order, gid, sizes = tie_groups(x)
    gsum = np.bincount(gid, weights=y[order])
    if method == "pav":
        gfit = pav(gsum / sizes, sizes)
    elif method.startswith("bins:"):
        k = int(method.split(":", 1)[1])
        if k < 1:
            raise ValueError("bin count must be positive")
        # bin edges on cumulative counts so ties never straddle bins
        cum = np.cumsum(sizes)
        bin_of_group = np.minimum((k * (cum - sizes / 2.0) / n).astype(int), k - 1)
        bsum = np.bincount(bin_of_group, weights=gsum, minlength=k)
        bcnt = np.bincount(bin_of_group, weights=sizes, minlength=k)
        with np.errstate(invalid="ignore", divide="ignore"):
            bmean = bsum / bcnt
        gfit = bmean[bin_of_group]
    else:
        raise ValueError(f"unknown recalibration method {method!r}")
    fitted = np.empty(n)
    fitted[order] = gfit[gid]
    return RecalibratedSample(fitted=fitted, blocks=_blocks_from(x[order], fitted[order]), method=method)


def rebalance(columns: Sequence[np.ndarray], target: float) -> list[np.ndarray]:
    """Scale each column to have mean ``target`` (Lorenz curves unchanged)."""
    out = []
    for c in columns:
        c = np.asarray(c, dtype=float)
        m = c.mean()
        if m <= 0:
            raise ValueError("column with non-positive mean cannot be rescaled")
        out.append(c * (target / m))
    return out
