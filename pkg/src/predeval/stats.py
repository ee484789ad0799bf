"""Lorenz-curve statistics: ABC, ABC^2, Gini and related identities.

Sign convention: ``abc = int (LC - CC) dp = Cov(y/ybar - x/xbar, r)`` with
midranks ``r``.  It is positive when the predictor over-spreads the
response (its Lorenz curve lies above the concentration curve).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .curves import (
    Curve,
    concentration_curve,
    knot_grid,
    lorenz_curve,
    normalised_residuals,
    q_function,
)
from .decomp import mcb_via_mixture
from .losses import AtomicMeasure, bregman_loss, ecdf_measure, mixture_generator
from .sample import PairedSample, RecalibratedSample, ecdf, midrank_transform, recalibrate, tie_groups

__all__ = [
    "GiniReport",
    "AbcReport",
    "gini",
    "abc",
    "abc_squared",
    "gini_dsc_decomposition",
    "auc_binary",
    "linear_miscalibration_oracle",
    "abc_via_mcb",
]


@dataclass(frozen=True)
class GiniReport:
    gini_cov: float
    gini_mad: float
    gini_integral: float
    gini_lorenz: float
    value: float
    discrepancy: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AbcReport:
    abc: float
    abc_from_curves: float
    abc_from_cov: float
    abc2: float
    abc2_from_curves: float
    abc2_from_q: float
    unbiasedness_gap: float

    def as_dict(self) -> dict:
        return asdict(self)


def gini(x) -> GiniReport:
    """Gini index by covariance, mean absolute difference, CDF integral and Lorenz area."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    m = x.mean()
    if not m > 0:
        raise ValueError("Gini needs a positive mean")
    r = midrank_transform(x)
    g_cov = 2.0 * np.mean((x - m) * (r - 0.5)) / m
    xs = np.sort(x)
    i = np.arange(1, n + 1)
    # sum_{i,j} |x_i - x_j| = 2 sum_i (2i - n - 1) x_(i)
    g_mad = 2.0 * np.sum((2 * i - n - 1) * xs) / (n * n) / (2.0 * m)
    dist = ecdf(x)
    F = dist.cum[:-1]
    g_int = np.sum(F * (1.0 - F) * np.diff(dist.values)) / m
    g_lor = 1.0 - 2.0 * lorenz_curve(x).integral()
    forms = np.array([g_cov, g_mad, g_int, g_lor])
    return GiniReport(
        gini_cov=float(g_cov),
        gini_mad=float(g_mad),
        gini_integral=float(g_int),
        gini_lorenz=float(g_lor),
        value=float(g_mad),
        discrepancy=float(forms.max() - forms.min()),
    )


def _gap_curve(sample: PairedSample) -> Curve:
    grid = knot_grid(sample.n)
    return lorenz_curve(sample.x, grid) - concentration_curve(sample, grid)


def _check(sample: PairedSample) -> None:
    if not sample.ybar > 0:
        raise ValueError("zero mean response")
    if not sample.xbar > 0:
        raise ValueError("zero mean predictor")


def abc(sample: PairedSample) -> AbcReport:
    """Area between the Lorenz and concentration curves, plus ABC^2."""
    _check(sample)
    gap = _gap_curve(sample)
    d = normalised_residuals(sample)
    r = midrank_transform(sample.x)
    abc_cov = float(np.mean(d * r))
    abc2_c = gap.integral_of_square()
    return AbcReport(
        abc=abc_cov,
        abc_from_curves=gap.integral(),
        abc_from_cov=abc_cov,
        abc2=abc2_c,
        abc2_from_curves=abc2_c,
        abc2_from_q=_abc2_from_q(sample, d, r),
        unbiasedness_gap=sample.unbiasedness_gap,
    )


def _abc2_from_q(sample: PairedSample, d: np.ndarray, r: np.ndarray) -> float:
    # Cov(d, Q(r)) treats each tie group as a point mass at its midrank; the
    # exact integral spreads it over the group's cell, which costs
    # m^3 dbar^2 / (6 n^3) per group of size m.
    n = d.size
    q = q_function(sample, np.unique(r))
    cov = float(np.mean(d * q(r)))
    order, gid, sizes = tie_groups(sample.x)
    dbar = np.bincount(gid, weights=d[order]) / sizes
    return cov - float(np.sum(sizes.astype(float) ** 3 * dbar**2)) / (6.0 * n**3)


def abc_squared(sample: PairedSample) -> AbcReport:
    return abc(sample)


def gini_dsc_decomposition(sample: PairedSample, assume_calibrated: bool = False) -> dict:
    """Gini as discrimination under ``H = F_hat_X`` plus a mean-absolute-deviation term."""
    if not (sample.calibrated or assume_calibrated):
        raise ValueError("sample is not flagged mean-calibrated; recalibrate or pass assume_calibrated")
    x = sample.x
    ybar = sample.ybar
    H = ecdf_measure(x)
    g = mixture_generator(H)
    dsc_h = float(np.mean(bregman_loss(g, x, np.full_like(x, ybar))))
    mad_term = 0.5 * float(np.mean(np.abs(x - ybar))) / ybar
    gi = gini(x).value
    p = float(ecdf(x).cdf(ybar))
    mad_lorenz = p - float(lorenz_curve(x)(p))
    return {
        "gini": gi,
        "dsc_term": dsc_h / ybar,
        "dsc_H": dsc_h,
        "mad_term": mad_term,
        "mad_term_lorenz": mad_lorenz,
        "residual": gi - (dsc_h / ybar + mad_term),
    }


def auc_binary(sample: PairedSample) -> dict:
    """Rank AUC (midranks for ties) and its link to the Gini index.

    For mean-calibrated scores ``Gini(X) = pi0 (2 AUC - 1)`` and the score
    with ``H = F_X`` equals ``2 pi0 pi1 (1 - AUC)``.
    """
    y, x = sample.y, sample.x
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("response must be binary")
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("both classes must be present")
    ranks = midrank_transform(x) * y.size + 0.5
    auc = float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))
    pi1 = n1 / y.size
    pi0 = 1.0 - pi1
    gi = gini(x).value
    s_h = float(np.mean(bregman_loss(mixture_generator(ecdf_measure(x)), y, x)))
    return {
        "auc": auc,
        "pi1": pi1,
        "gini": gi,
        "gini_relation_residual": gi - pi0 * (2.0 * auc - 1.0),
        "score_H": s_h,
        "score_relation_residual": s_h - 2.0 * pi0 * pi1 * (1.0 - auc),
    }


def linear_miscalibration_oracle(b: float, lorenz: Curve, var_x: float, gini_x: float) -> dict:
    """Curves and statistics when ``E[Y|X] = (1-b) E[X] + b X``."""
    p = lorenz.grid
    cc = Curve("p", p, (1.0 - b) * p + b * lorenz.values, "concentration")
    gap = Curve("p", p, p - lorenz.values, "gap")
    return {
        "cc": cc,
        "abc": -(1.0 - b) * gini_x / 2.0,
        "abc2": (1.0 - b) ** 2 * gap.integral_of_square(),
        "mcb_mse": (1.0 - b) ** 2 * var_x,
    }


def _signed_step_measure(x: np.ndarray, level: np.ndarray) -> tuple[AtomicMeasure, AtomicMeasure]:
    """Split the jumps of a step function (``level`` after each distinct x) into
    increasing parts ``H1 - H2``."""
    jumps = np.diff(np.concatenate([[0.0], level]))
    up = np.where(jumps > 0, jumps, 0.0)
    down = np.where(jumps < 0, -jumps, 0.0)
    return AtomicMeasure(x, up), AtomicMeasure(x, down)


def abc_via_mcb(sample: PairedSample, direction: str = "auto", recal="pav") -> dict:
    """Rebuild ABC and ABC^2 from miscalibration under mixture losses.

    ABC uses ``H = F_hat_X``.  ABC^2 uses ``H = Q(F_hat_X) + ABC``, which is
    split into two increasing parts when ``Q`` is not monotone.  The
    predictor is first rescaled to the response mean; both statistics and
    the isotonic fit are invariant under that scaling.  What remains is the
    within-block term ``mean((y - y_hat) H)``, which vanishes when no fitted
    block pools distinct ``x`` values.
    """
    _check(sample)
    ybar = sample.ybar
    scaled = sample.with_predictor(sample.x * (ybar / sample.xbar))
    fit = recal if isinstance(recal, RecalibratedSample) else recalibrate(scaled, recal)
    rep = abc(sample)

    H = ecdf_measure(scaled.x)
    parts = mcb_via_mixture(scaled, H, fit)
    abc_rec = -(parts["mcb"] - parts["integral_term"]) / ybar

    dist = ecdf(scaled.x)
    qc = q_function(scaled, np.concatenate([[0.0], dist.cum]))
    base = qc.values[0] + rep.abc  # H on [0, min x)
    level = qc.values[1:] + rep.abc  # H just after each distinct x
    jumps = np.diff(np.concatenate([[base], level]))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(level))))
    if np.all(jumps >= -tol):
        found = "Q-increasing"
    elif np.all(jumps <= tol):
        found = "Q-decreasing"
    else:
        found = "split"
    if direction not in ("auto", "split", found):
        raise ValueError(f"Q is classified as {found}, not {direction}")
    direction = found if direction == "auto" else direction
    H1, H2 = _signed_step_measure(dist.values, level - base)
    p1 = mcb_via_mixture(scaled, H1, fit)
    p2 = mcb_via_mixture(scaled, H2, fit)
    # the constant part of H contributes base * mean(x - y_hat) = 0
    abc2_rec = -((p1["mcb"] - p1["integral_term"]) - (p2["mcb"] - p2["integral_term"])) / ybar
    return {
        "direction": direction,
        "abc": rep.abc,
        "abc_reconstructed": float(abc_rec),
        "abc_residual": float(abs(rep.abc - abc_rec)),
        "abc2": rep.abc2,
        "abc2_reconstructed": float(abc2_rec),
        "abc2_residual": float(abs(rep.abc2 - abc2_rec)),
        "mcb_H1": p1["mcb"],
        "mcb_H2": p2["mcb"],
    }
