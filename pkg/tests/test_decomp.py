import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predeval.decomp import (
    dsc_mse,
    mcb_mse,
    mcb_via_mixture,
    murphy_curve_components,
    murphy_decomposition,
    skill_score,
    squared_decomposition,
)
from predeval.losses import AtomicMeasure, random_atomic_measure, tweedie_generator
from predeval.sample import PairedSample, recalibrate


def noisy_sample(rng, n, ties=False):
    z = rng.uniform(0.05, 1.0, n)
    y = rng.gamma(2.0, z / 2.0)
    x = z**1.3 + rng.uniform(0, 0.2, n)
    if ties:
        x = np.round(x, 1) + 0.01
    return PairedSample(y + 0.01, x)


@pytest.mark.parametrize("p", [0.0, 1.0, 2.0, 3.0])
def test_identity_and_signs(p):
    rng = np.random.default_rng(int(10 * p) + 1)
    s = noisy_sample(rng, 500)
    d = murphy_decomposition(s, tweedie_generator(p))
    assert d.identity_residual <= 1e-10 * max(1.0, d.S)
    assert d.DSC >= -1e-12 and d.MCB >= -1e-12
    assert d.DSC == pytest.approx(d.dsc_classic, abs=1e-10 * max(1.0, d.S))
    assert d.pooling_gap >= -1e-12


def test_pooling_gap_closed_form():
    rng = np.random.default_rng(2)
    s = noisy_sample(rng, 400)
    g = tweedie_generator(1.0)
    fit = recalibrate(s)
    d = murphy_decomposition(s, g, fit)
    expect = -np.mean(g.deriv(s.x) * (s.y - fit.fitted))
    assert d.pooling_gap == pytest.approx(expect, rel=1e-9, abs=1e-14)


def test_calibrated_input_has_zero_mcb():
    rng = np.random.default_rng(3)
    s = noisy_sample(rng, 300)
    yhat = recalibrate(s).fitted
    d = murphy_decomposition(s.with_predictor(yhat), tweedie_generator(0.0))
    assert abs(d.MCB) < 1e-12 and abs(d.mcb_predictor_form) < 1e-12
    assert d.pooling_gap == pytest.approx(0.0, abs=1e-12)


def test_constant_predictor_has_no_discrimination():
    rng = np.random.default_rng(4)
    y = rng.exponential(size=100)
    s = PairedSample(y, np.full_like(y, y.mean()))
    d = squared_decomposition(s)
    assert d.DSC == pytest.approx(0.0, abs=1e-14)
    assert d.S == pytest.approx(d.UNC)
    assert skill_score(s, tweedie_generator(0.0)) == pytest.approx(0.0, abs=1e-14)


def test_mse_shortcuts():
    rng = np.random.default_rng(5)
    s = noisy_sample(rng, 300)
    d = squared_decomposition(s)
    assert mcb_mse(s) == pytest.approx(d.mcb_predictor_form, rel=1e-12)
    assert dsc_mse(s) == pytest.approx(d.DSC, rel=1e-12)


def test_mcb_via_mixture_split():
    rng = np.random.default_rng(6)
    s = noisy_sample(rng, 300, ties=True)
    H = AtomicMeasure([0.2, 0.5, 0.9], [1.0, 2.0, 0.5])
    parts = mcb_via_mixture(s, H)
    assert parts["mcb"] == pytest.approx(parts["cov_term"] + parts["integral_term"], abs=1e-13)
    d = murphy_decomposition(s, H)
    assert parts["mcb"] == pytest.approx(d.mcb_predictor_form, abs=1e-14)


def test_curve_components_integrate_to_scalar_decomposition():
    rng = np.random.default_rng(7)
    s = noisy_sample(rng, 250)
    H = AtomicMeasure([0.15, 0.4, 0.7, 1.1], [0.5, 1.0, 2.0, 0.25])
    comp = murphy_curve_components(s, H.thetas)
    d = murphy_decomposition(s, H)
    for key, scalar in [("S", d.S), ("UNC", d.UNC), ("DSC", d.DSC), ("MCB", d.MCB), ("MCB_predictor_form", d.mcb_predictor_form)]:
        assert np.dot(comp[key], H.masses) == pytest.approx(scalar, abs=1e-12)
    resid = comp["S"] - (comp["UNC"] - comp["DSC"] + comp["MCB"])
    assert np.max(np.abs(resid)) < 1e-12


def test_binned_recalibration_also_closes():
    rng = np.random.default_rng(8)
    s = noisy_sample(rng, 1000)
    d = murphy_decomposition(s, tweedie_generator(0.0), "bins:10")
    assert d.identity_residual < 1e-12
    assert d.recalibration == "bins:10"


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 200), ties=st.booleans())
def test_decomposition_property(seed, n, ties):
    rng = np.random.default_rng(seed)
    s = noisy_sample(rng, n, ties)
    gens = [tweedie_generator(p) for p in (0.0, 1.0, 2.0)] + [random_atomic_measure(rng, 1.5)]
    for g in gens:
        d = murphy_decomposition(s, g)
        assert d.identity_residual <= 1e-10 * max(1.0, d.S)
        assert d.DSC >= -1e-12 and d.MCB >= -1e-12 and d.pooling_gap >= -1e-12
