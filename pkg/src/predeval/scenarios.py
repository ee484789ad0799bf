"""Closed-form scenarios with analytic oracles and seeded samplers.

* latent uniform model: ``Z ~ U(0,1)``, ``E[Y|Z] = Z``,
  ``X1 = (1-b)/2 + bZ`` and ``X2 = Z + q cos(2 pi Z)``;
* weighted-score counterexample: ``Var[Y|Z] = phi Z^p``, ``X1 = Z``, ``X2 = 1 - Z``;
* shifted log-normal predictors ``X = a + exp(mu + sigma N)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import erf, exp, log, pi, sqrt

import numpy as np
from scipy import integrate, stats

from .sample import PairedSample

__all__ = [
    "LatentUniformScenario",
    "ShiftedLogNormalSpec",
    "WeightedCounterexampleSpec",
    "EXAMPLE5_X1",
    "EXAMPLE5_X2",
    "latent_oracles",
    "latent_quadrature",
    "lognormal_oracles",
    "lognormal_quadrature",
    "lognormal_stop_loss_quadrature",
    "weighted_oracles",
    "sample_latent",
    "sample_lognormal",
    "sample_lognormal_pair",
    "sample_weighted",
    "example7_dsc_ratio",
    "example7_dsc_ratio_analytic",
]


# Latent uniform -------------------------------------------------------------


@dataclass(frozen=True)
class LatentUniformScenario:
    b: float = 0.9
    q: float = 0.07

    def __post_init__(self):
        if not 0.0 < self.b <= 1.0:
            raise ValueError("b must lie in (0, 1]")
        if not 0.0 <= self.q < 1.0 / (2.0 * pi):
            raise ValueError("q must lie in [0, 1/(2 pi))")

    def x1(self, z):
        return (1.0 - self.b) / 2.0 + self.b * np.asarray(z, dtype=float)

    def x2(self, z):
        z = np.asarray(z, dtype=float)
        return z + self.q * np.cos(2.0 * pi * z)


def latent_oracles(s: LatentUniformScenario) -> dict:
    """Closed forms for both predictors of the latent uniform model."""
    b, q = s.b, s.q
    return {
        "abc_1": (1.0 - b) / 6.0,
        "abc_2": 0.0,
        "abc2_1": (1.0 - b) ** 2 / 30.0,
        "abc2_2": q * q / (2.0 * pi * pi),
        "mcb_1": (1.0 - b) ** 2 / 12.0,
        "mcb_2": q * q / 2.0,
        "lc_1": lambda p: (1.0 - b) * np.asarray(p) + b * np.asarray(p) ** 2,
        "lc_2": lambda p: np.asarray(p) ** 2 + q * np.sin(2.0 * pi * np.asarray(p)) / pi,
        "cc": lambda p: np.asarray(p) ** 2,
        "q_1": lambda z: 2.0 * (1.0 - b) * (-1.0 / 12.0 + np.asarray(z) ** 2 / 4.0 - np.asarray(z) ** 3 / 6.0),
        "q_2": lambda z: -2.0 * q * (np.cos(2.0 * pi * np.asarray(z)) - 1.0) / (4.0 * pi * pi),
    }


def latent_quadrature(s: LatentUniformScenario) -> dict:
    """The same statistics by adaptive quadrature over the uniform density.

    Both predictors are increasing in ``Z``, so ``F_X(X) = Z`` and the curves
    are partial integrals in ``z``.
    """
    kw = dict(epsabs=1e-15, epsrel=1e-11, limit=200)

    def quad(f, a=0.0, b=1.0):
        return integrate.quad(f, a, b, **kw)[0]

    out = {}
    for k, h in (("1", s.x1), ("2", s.x2)):
        hm = quad(lambda z: float(h(z)))
        out[f"abc_{k}"] = quad(lambda z: (z - float(h(z))) * z) / 0.5

        def lc(p, h=h, hm=hm):
            return quad(lambda z: float(h(z)), 0.0, p) / hm

        out[f"abc2_{k}"] = quad(lambda p: (lc(p) - p * p) ** 2)
        out[f"mcb_{k}"] = quad(lambda z: (z - float(h(z))) ** 2)
    return out


def sample_latent(s: LatentUniformScenario, n: int, seed: int, noise: str = "uniform") -> dict:
    """Draw ``(z, y, x1, x2)`` with ``E[Y|Z] = Z`` and ``Y >= 0``.

    ``noise="uniform"``: ``Y = Z + U(-m, m)``, ``m = min(Z, 1-Z)``;
    ``noise="beta"``: ``Y = 2 Z B`` with ``B ~ Beta(2, 2)``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.0, 1.0, n)
    if noise == "uniform":
        m = np.minimum(z, 1.0 - z)
        y = z + rng.uniform(-1.0, 1.0, n) * m
    elif noise == "beta":
        y = 2.0 * z * rng.beta(2.0, 2.0, n)
    else:
        raise ValueError(f"unknown noise law {noise!r}")
    x1, x2 = s.x1(z), s.x2(z)
    return {
        "z": z,
        "y": y,
        "x1": x1,
        "x2": x2,
        "s1": PairedSample(y, x1, "x1"),
        "s2": PairedSample(y, x2, "x2"),
    }


# Weighted-score counterexample ------------------------------------------------


@dataclass(frozen=True)
class WeightedCounterexampleSpec:
    phi: float = 4.0
    p: float = 1.0


def weighted_oracles(spec: WeightedCounterexampleSpec) -> dict:
    """Exact weighted scores with ``W(u) = u``.

    ``S1 = E[phi Z^p Z] = phi/(p+2)``;
    ``S2 = E[phi Z^p (1-Z)] + E[(2Z-1)^2 (1-Z)] = phi(1/(p+1) - 1/(p+2)) + 1/6``.
    """
    phi = Fraction(spec.phi).limit_denominator(10**9)
    p = Fraction(spec.p).limit_denominator(10**9)
    s1 = phi / (p + 2)
    s2 = phi * (1 / (p + 1) - 1 / (p + 2)) + Fraction(1, 6)
    return {"score_1": s1, "score_2": s2}


def sample_weighted(spec: WeightedCounterexampleSpec, n: int, seed: int, law: str = "tweedie") -> dict:
    """Draw ``Y`` with mean ``Z`` and variance ``phi Z^p``.

    ``law="tweedie"`` uses the Tweedie member itself where it has a simple
    sampler (``p=1``: ``phi * Poisson(Z/phi)``; ``p=2``: Gamma); otherwise and
    for ``law="gamma"`` a Gamma law matched to the two moments.
    """
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.0, 1.0, n)
    z = np.where(z == 0.0, np.finfo(float).tiny, z)
    var = spec.phi * z**spec.p
    if law == "tweedie" and spec.p == 1.0:
        y = spec.phi * rng.poisson(z / spec.phi)
    elif law in ("tweedie", "gamma"):
        shape = z * z / var
        y = rng.gamma(shape, var / z)
    else:
        raise ValueError(f"unknown law {law!r}")
    y = y.astype(float)
    return {"z": z, "y": y, "s1": PairedSample(y, z, "x1"), "s2": PairedSample(y, 1.0 - z, "x2")}


# Shifted log-normal -----------------------------------------------------------


@dataclass(frozen=True)
class ShiftedLogNormalSpec:
    a: float
    sigma: float
    mean: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.mean > self.a >= 0:
            raise ValueError("need 0 <= a < mean")

    @property
    def mu(self) -> float:
        return log(self.mean - self.a) - self.sigma**2 / 2.0


EXAMPLE5_X1 = ShiftedLogNormalSpec(a=7.5, sigma=2.0, mean=10.0)
EXAMPLE5_X2 = ShiftedLogNormalSpec(a=5.0, sigma=1.0, mean=10.0)


def _Phi(t: float) -> float:
    return 0.5 * (1.0 + erf(t / sqrt(2.0)))


def lognormal_oracles(spec: ShiftedLogNormalSpec) -> dict:
    a, s, m, mu = spec.a, spec.sigma, spec.mean, spec.mu
    scale = m - a

    def lorenz(p):
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = stats.norm.cdf(stats.norm.ppf(p) - s)
        return (a * p + scale * inner) / m

    def stop(theta):
        theta = np.asarray(theta, dtype=float)
        k = np.maximum(theta - a, 0.0)
        with np.errstate(divide="ignore"):
            lk = np.log(np.where(k > 0, k, 1.0))
        d1 = (mu + s * s - lk) / s
        d2 = d1 - s
        above = scale * stats.norm.cdf(d1) - k * stats.norm.cdf(d2)
        return np.where(theta <= a, m - theta, above)

    def murphy_disc(theta):
        theta = np.asarray(theta, dtype=float)
        return stop(theta) - np.maximum(m - theta, 0.0)

    return {
        "mean": m,
        "var": scale**2 * (exp(s * s) - 1.0),
        "gini": scale / m * (2.0 * _Phi(s / sqrt(2.0)) - 1.0),
        "lorenz": lorenz,
        "stop_loss": stop,
        "murphy_disc": murphy_disc,
    }


def _normal_expectation(f) -> float:
    """``E[f(N)]`` for standard normal ``N``; mass beyond |t| = 40 is below 1e-340."""
    g = lambda t: f(t) * stats.norm.pdf(t)
    return integrate.quad(g, -40.0, 40.0, points=[-5.0, 0.0, 2.0, 4.0, 8.0, 12.0], epsabs=0.0, epsrel=1e-12, limit=800)[0]


def lognormal_quadrature(spec: ShiftedLogNormalSpec) -> dict:
    """Mean, variance and Gini by quadrature over the normal density."""
    a, s, mu = spec.a, spec.sigma, spec.mu
    kw = dict(epsabs=0.0, epsrel=1e-12, limit=400)

    def ex(f):
        return _normal_expectation(lambda t: f(a + exp(mu + s * t)))

    m = ex(lambda x: x)
    v = ex(lambda x: (x - m) ** 2)
    # E|X - X'| = 2 int F(1 - F) dx over the support (a, inf)
    # substitute x = a + exp(mu + s t), so F(x) = Phi(t)
    g = lambda t: stats.norm.cdf(t) * stats.norm.sf(t) * s * exp(mu + s * t)
    gmd = 2.0 * integrate.quad(g, -40.0, 40.0, points=[-5.0, 0.0, 5.0], **kw)[0]
    return {"mean": m, "var": v, "gini": gmd / (2.0 * m)}


def lognormal_stop_loss_quadrature(spec: ShiftedLogNormalSpec, theta: float) -> float:
    """``E[(X - theta)+]`` by integrating the survival function."""
    a, s, mu = spec.a, spec.sigma, spec.mu

    def surv(x):
        if x <= a:
            return 1.0
        return stats.norm.sf((log(x - a) - mu) / s)

    def q(lo, hi):
        return integrate.quad(surv, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)[0]

    lo = max(theta, 0.0)
    if lo < a:
        return (a - lo) + q(a, np.inf)
    return q(lo, np.inf)


def _draw_lognormal(rng: np.random.Generator, spec: ShiftedLogNormalSpec, n: int) -> np.ndarray:
    return spec.a + np.exp(spec.mu + spec.sigma * rng.standard_normal(n))


def sample_lognormal(spec: ShiftedLogNormalSpec, n: int, seed: int, noise_shape: float = 4.0) -> PairedSample:
    """Calibrated pair: ``Y = X G`` with ``G ~ Gamma(k, 1/k)`` independent of ``X``."""
    rng = np.random.default_rng(seed)
    x = _draw_lognormal(rng, spec, n)
    g = rng.gamma(noise_shape, 1.0 / noise_shape, n)
    return PairedSample(x * g, x, "x", calibrated=True)


def sample_lognormal_pair(
    spec1: ShiftedLogNormalSpec = EXAMPLE5_X1,
    spec2: ShiftedLogNormalSpec = EXAMPLE5_X2,
    n: int = 10**5,
    seed: int = 0,
) -> dict:
    """Independent ``X1, X2`` and ``Y = X1 X2 / mean``.

    Then ``E[Y|X1] = X1`` and ``E[Y|X2] = X2``: both columns are calibrated
    for the same response (the means must agree).
    """
    if abs(spec1.mean - spec2.mean) > 1e-12 * spec1.mean:
        raise ValueError("specs must share the mean")
    rng = np.random.default_rng(seed)
    x1 = _draw_lognormal(rng, spec1, n)
    x2 = _draw_lognormal(rng, spec2, n)
    y = x1 * x2 / spec1.mean
    return {
        "x1": x1,
        "x2": x2,
        "y": y,
        "s1": PairedSample(y, x1, "x1", calibrated=True),
        "s2": PairedSample(y, x2, "x2", calibrated=True),
    }


# Discrimination ratio across Tweedie powers -----------------------------------


def _tweedie_dsc_analytic(spec: ShiftedLogNormalSpec, p: float) -> float:
    from .losses import tweedie_generator

    g = tweedie_generator(p)
    a, s, mu, m = spec.a, spec.sigma, spec.mu, spec.mean
    e = _normal_expectation(lambda t: float(g.eval(np.array(a + exp(mu + s * t)))))
    return e - float(g.eval(np.array(m)))


def example7_dsc_ratio_analytic(p_grid, spec1=EXAMPLE5_X1, spec2=EXAMPLE5_X2) -> dict:
    return {float(p): _tweedie_dsc_analytic(spec1, p) / _tweedie_dsc_analytic(spec2, p) for p in p_grid}


def example7_dsc_ratio(p_grid, n: int, seed: int, spec1=EXAMPLE5_X1, spec2=EXAMPLE5_X2) -> dict:
    """Monte Carlo ``DSC_p(X1) / DSC_p(X2)`` with ``DSC_p = mean phi_p(x) - phi_p(mean x)``."""
    from .dominance import calibrated_dsc

    pair = sample_lognormal_pair(spec1, spec2, n, seed)
    out = {}
    for p in p_grid:
        out[float(p)] = calibrated_dsc(pair["x1"], p) / calibrated_dsc(pair["x2"], p)
    return out
