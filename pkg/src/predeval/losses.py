"""Bregman divergences, elementary losses, mixture losses and scoring.

A loss here is anything that maps aligned arrays ``(y, x)`` to an array of
non-negative pointwise losses.  Convex generators produce Bregman losses;
mixing measures produce ``L_H = int L_theta dH``, which is itself a Bregman
loss with generator ``Psi(t) = int_0^t H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import xlogy

__all__ = [
    "BregmanDomainError",
    "ConvexGenerator",
    "TweedieSpec",
    "MixingMeasure",
    "AtomicMeasure",
    "PiecewiseLinearMeasure",
    "tweedie_generator",
    "squared_generator",
    "ecdf_measure",
    "mixture_generator",
    "bregman_loss",
    "elementary_loss",
    "mixture_loss",
    "as_loss",
    "score",
    "weighted_score",
]

_TINY = np.finfo(float).tiny


class BregmanDomainError(ValueError):
    """A loss evaluation produced a non-finite value."""

    def __init__(self, label: str, detail: str = ""):
        self.label = label
        msg = f"non-finite loss for generator {label!r}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class ConvexGenerator:
    """Convex function ``phi`` with derivative, defining ``L_phi``.

    ``eval`` and ``deriv`` are vectorised.  Divergent branches at 0 return
    signed infinities; ``finite_at_zero`` flags whether ``phi(0)`` is finite.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    domain_floor: float
    label: str
    finite_at_zero: bool = True
    strict: bool = True

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class TweedieSpec:
    p: float


def tweedie_generator(spec: TweedieSpec | float) -> ConvexGenerator:
    """Generator ``phi_p`` of the Tweedie deviance family.

    p=0 gives x**2, p=1 gives x log x - x, p=2 gives -log x, otherwise
    x**(2-p) / ((1-p)(2-p)).  ``phi_p''(x) = x**(-p)`` except at p=0,
    where the unscaled square gives 2.
    """
    p = float(spec.p if isinstance(spec, TweedieSpec) else spec)
    label = f"tweedie:{p:g}"

    if p == 0.0:
        return ConvexGenerator(
            eval=lambda x: np.square(x),
            deriv=lambda x: 2.0 * np.asarray(x, dtype=float),
            domain_floor=0.0,
            label=label,
        )
    if p == 1.0:
        def ev(x):
            x = np.asarray(x, dtype=float)
            return xlogy(x, x) - x

        def dv(x):
            with np.errstate(divide="ignore"):
                return np.log(np.asarray(x, dtype=float))

        return ConvexGenerator(ev, dv, _TINY, label, finite_at_zero=True)
    if p == 2.0:
        def ev(x):
            with np.errstate(divide="ignore"):
                return -np.log(np.asarray(x, dtype=float))

        def dv(x):
            with np.errstate(divide="ignore"):
                return -1.0 / np.asarray(x, dtype=float)

        return ConvexGenerator(ev, dv, _TINY, label, finite_at_zero=False)

    c = (1.0 - p) * (2.0 - p)

    def ev(x):
        with np.errstate(divide="ignore"):
            return np.power(np.asarray(x, dtype=float), 2.0 - p) / c

    def dv(x):
        with np.errstate(divide="ignore"):
            return np.power(np.asarray(x, dtype=float), 1.0 - p) / (1.0 - p)

    floor = 0.0 if p < 1.0 else _TINY
    return ConvexGenerator(ev, dv, floor, label, finite_at_zero=p < 2.0)


def squared_generator() -> ConvexGenerator:
    return tweedie_generator(0.0)


# Mixing measures ------------------------------------------------------------


class MixingMeasure:
    """Non-decreasing ``H`` on ``[0, inf)`` with ``H(0) = 0``.

    Subclasses provide ``psi(t) = int_0^t H`` and the left limit ``H(t-)``.
    """

    label: str = "H"

    def psi(self, t: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def left(self, t: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def value(self, t: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class AtomicMeasure(MixingMeasure):
    """Point masses ``mass_j`` at ``theta_j``."""

    thetas: np.ndarray
    masses: np.ndarray
    label: str = "atoms"
    _cum_m: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_mt: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        th = np.asarray(self.thetas, dtype=float).ravel()
        m = np.asarray(self.masses, dtype=float).ravel()
        if th.shape != m.shape:
            raise ValueError("thetas and masses differ in length")
        if np.any(th < 0) or not np.all(np.isfinite(th)):
            raise ValueError("atom locations must be finite and >= 0")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("atom masses must be finite and >= 0")
        order = np.argsort(th, kind="stable")
        th, m = th[order], m[order]
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "_cum_m", np.concatenate([[0.0], np.cumsum(m)]))
        object.__setattr__(self, "_cum_mt", np.concatenate([[0.0], np.cumsum(m * th)]))

    @property
    def total(self) -> float:
        return float(self._cum_m[-1])

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.thetas, t, side="right")
        return self._cum_m[k] * t - self._cum_mt[k]

    def left(self, t):
        k = np.searchsorted(self.thetas, np.asarray(t, dtype=float), side="left")
        return self._cum_m[k]

    def value(self, t):
        k = np.searchsorted(self.thetas, np.asarray(t, dtype=float), side="right")
        return self._cum_m[k]


@dataclass(frozen=True)
class PiecewiseLinearMeasure(MixingMeasure):
    """Continuous piecewise-linear ``H`` through ``(knots, values)``.

    The first knot must be 0 with value 0.  Beyond the last knot ``H`` keeps
    the slope of the last segment.
    """

    knots: np.ndarray
    values: np.ndarray
    label: str = "piecewise_linear"

    def __post_init__(self):
        t = np.asarray(self.knots, dtype=float).ravel()
        h = np.asarray(self.values, dtype=float).ravel()
        if t.shape != h.shape or t.size < 2:
            raise ValueError("need at least two knots with matching values")
        if t[0] != 0.0 or h[0] != 0.0:
            raise ValueError("H must start at (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.any(np.diff(h) < 0):
            raise ValueError("H must be non-decreasing")
        object.__setattr__(self, "knots", t)
        object.__setattr__(self, "values", h)
        slopes = np.diff(h) / np.diff(t)
        object.__setattr__(self, "_slopes", slopes)
        seg = np.diff(t) * (h[:-1] + h[1:]) / 2.0
        object.__setattr__(self, "_psi_knots", np.concatenate([[0.0], np.cumsum(seg)]))

    def _segment(self, t):
        k = np.searchsorted(self.knots, t, side="right") - 1
        return np.clip(k, 0, self.knots.size - 2)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        k = self._segment(t)
        return self.values[k] + self._slopes[k] * (t - self.knots[k])

    left = value

    def psi(self, t):
        t = np.asarray(t, dtype=float)
        k = self._segment(t)
        dt = t - self.knots[k]
        return self._psi_knots[k] + self.values[k] * dt + 0.5 * self._slopes[k] * dt * dt


def ecdf_measure(x) -> AtomicMeasure:
    """``H = F_hat_X``: mass 1/n at every observation (ties accumulate)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty column")
    vals, counts = np.unique(x, return_counts=True)
    return AtomicMeasure(vals, counts / x.size, label="ecdf")


def mixture_generator(H: MixingMeasure) -> ConvexGenerator:
    """``L_H`` as a Bregman loss: ``phi = Psi`` and ``phi' = H(.-)``."""
    return ConvexGenerator(
        eval=H.psi, deriv=H.left, domain_floor=0.0, label=getattr(H, "label", "H"), strict=False
    )


# Pointwise losses -----------------------------------------------------------


def bregman_loss(gen: ConvexGenerator, y, x):
    """``phi(y) - phi(x) - phi'(x)(y - x)``, elementwise."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        dx = y - x
        slope_term = gen.deriv(x) * dx
        # 0 * inf arises for y == x at a divergent point; the loss is 0 there
        slope_term = np.where(dx == 0.0, 0.0, slope_term)
        fy, fx = gen.eval(y), gen.eval(x)
        diff = np.where(dx == 0.0, 0.0, fy - fx)
        out = diff - slope_term
    if not np.all(np.isfinite(out)):
        bad = np.flatnonzero(~np.isfinite(np.atleast_1d(out)))[:3]
        raise BregmanDomainError(gen.label, f"first offending indices {bad.tolist()}")
    # rounding can leave tiny negatives
    return np.maximum(out, 0.0) if out.ndim else max(float(out), 0.0)


def elementary_loss(theta, y, x):
    """``(y-theta)+ - (x-theta)+ - 1{x>theta}(y-x)``, elementwise."""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.maximum(y - theta, 0.0) - np.maximum(x - theta, 0.0) - (x > theta) * (y - x)
    return np.maximum(out, 0.0) if out.ndim else max(float(out), 0.0)


def mixture_loss(H: MixingMeasure, y, x):
    """``int L_theta(y, x) dH(theta)`` in closed form."""
    return bregman_loss(mixture_generator(H), y, x)


def as_loss(loss) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Accept a generator, a mixing measure or a plain callable."""
    if isinstance(loss, ConvexGenerator):
        return lambda y, x: bregman_loss(loss, y, x)
    if isinstance(loss, MixingMeasure):
        gen = mixture_generator(loss)
        return lambda y, x: bregman_loss(gen, y, x)
    if callable(loss):
        return loss
    raise TypeError(f"cannot interpret {type(loss).__name__} as a loss")


def _columns(sample):
    y = np.asarray(sample.y if hasattr(sample, "y") else sample[0], dtype=float)
    x = np.asarray(sample.x if hasattr(sample, "x") else sample[1], dtype=float)
    if y.size == 0:
        raise ValueError("empty sample")
    return y, x


def score(sample, loss) -> float:
    """Average loss ``(1/n) sum L(y_i, x_i)``."""
    y, x = _columns(sample)
    return float(np.mean(as_loss(loss)(y, x)))


def weighted_score(sample, gen, weight: Callable[[np.ndarray], np.ndarray]) -> float:
    """Average of ``L(y_i, x_i) * W(F_hat_X(x_i))`` with midrank ``F_hat_X``.

    The weight depends on the predictor itself, so this is not a consistent
    scoring function; it exists to exhibit that failure.
    """
    from .sample import midrank_transform

    y, x = _columns(sample)
    w = np.asarray(weight(midrank_transform(x)), dtype=float)
    return float(np.mean(as_loss(gen)(y, x) * w))


def parse_atoms(text: str) -> AtomicMeasure:
    """Parse ``"t1=m1,t2=m2"`` into an atomic measure."""
    thetas: list[float] = []
    masses: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        t, sep, m = part.partition("=")
        if not sep:
            raise ValueError(f"atom {part!r} is not of the form theta=mass")
        thetas.append(float(t))
        masses.append(float(m))
    if not thetas:
        raise ValueError("no atoms given")
    return AtomicMeasure(np.array(thetas), np.array(masses), label=f"atoms:{text}")


def random_atomic_measure(rng: np.random.Generator, hi: float, k: int | None = None) -> AtomicMeasure:
    """Random atoms on ``[0, hi]`` with exponential masses (test helper)."""
    k = int(rng.integers(1, 8)) if k is None else k
    return AtomicMeasure(rng.uniform(0.0, hi, k), rng.exponential(1.0, k))


def atoms_from_pairs(pairs: Sequence[tuple[float, float]]) -> AtomicMeasure:
    th, m = zip(*pairs)
    return AtomicMeasure(np.array(th, dtype=float), np.array(m, dtype=float))
