import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predeval.curves import lorenz_curve
from predeval.decomp import mcb_mse
from predeval.sample import PairedSample
from predeval.stats import abc, abc_via_mcb, auc_binary, gini, gini_dsc_decomposition, linear_miscalibration_oracle

pos_cols = st.lists(st.floats(0.0, 1e3), min_size=2, max_size=50).filter(lambda v: sum(v) > 1e-3)


def grouped_calibrated(levels, size):
    """Binary responses whose mean inside each x-group equals x exactly."""
    x = np.repeat(levels, size)
    y = np.concatenate([np.r_[np.ones(round(size * l)), np.zeros(size - round(size * l))] for l in levels])
    return PairedSample(y, x, calibrated=True)


def test_gini_small():
    g = gini([1.0, 2.0, 3.0])
    assert g.value == pytest.approx(2 / 9)
    assert g.discrepancy < 1e-15
    assert gini([4.0, 4.0, 4.0]).value == pytest.approx(0.0, abs=1e-15)


def test_gini_rejects_zero_mean():
    with pytest.raises(ValueError):
        gini([0.0, 0.0])


@settings(max_examples=150, deadline=None)
@given(x=pos_cols)
def test_gini_forms_agree(x):
    g = gini(x)
    assert g.discrepancy <= 1e-9
    assert -1e-12 <= g.value <= 1.0


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 120), ties=st.booleans())
def test_abc_forms_agree(seed, n, ties):
    rng = np.random.default_rng(seed)
    x = rng.exponential(size=n) + 0.01
    if ties:
        x = np.round(x, 0) + 0.5
    y = rng.gamma(2.0, 1.0, n) * (0.5 + 0.5 * x)
    r = abc(PairedSample(y, x))
    assert r.abc_from_curves == pytest.approx(r.abc_from_cov, abs=1e-9)
    assert r.abc2_from_curves == pytest.approx(r.abc2_from_q, abs=1e-9)


def test_abc_zero_when_groups_are_calibrated():
    s = grouped_calibrated(np.arange(1, 10) / 10, 20)
    r = abc(s)
    assert abs(r.abc) < 1e-15 and r.abc2 < 1e-20


def test_linear_miscalibration_oracle_is_exact():
    rng = np.random.default_rng(3)
    x = rng.lognormal(0.0, 0.7, 500)
    b = 0.6
    y = (1 - b) * x.mean() + b * x
    s = PairedSample(y, x)
    lc = lorenz_curve(x)
    o = linear_miscalibration_oracle(b, lc, float(np.var(x)), gini(x).value)
    r = abc(s)
    assert r.abc == pytest.approx(o["abc"], abs=1e-14)
    assert r.abc2 == pytest.approx(o["abc2"], abs=1e-15)
    assert mcb_mse(s) == pytest.approx(o["mcb_mse"], rel=1e-10)
    assert o["abc"] == pytest.approx(-(1 - b) * gini(x).value / 2)


def test_gini_dsc_decomposition_exact_on_calibrated_groups():
    s = grouped_calibrated(np.arange(1, 10) / 10, 20)
    out = gini_dsc_decomposition(s)
    assert abs(out["residual"]) < 1e-12
    assert out["mad_term"] == pytest.approx(out["mad_term_lorenz"], abs=1e-12)


def test_gini_dsc_decomposition_requires_flag():
    s = PairedSample(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="calibrated"):
        gini_dsc_decomposition(s)
    assert abs(gini_dsc_decomposition(s, assume_calibrated=True)["residual"]) < 1e-12


def test_auc_relations_for_calibrated_scores():
    s = grouped_calibrated(np.array([0.1, 0.25, 0.5, 0.8, 0.95]), 40)
    out = auc_binary(s)
    assert abs(out["gini_relation_residual"]) < 1e-12
    assert abs(out["score_relation_residual"]) < 1e-12


def test_auc_ties_and_rank_oracle():
    y = np.array([0, 1, 0, 1, 1, 0], dtype=float)
    x = np.array([0.1, 0.4, 0.4, 0.8, 0.3, 0.2])
    pairs = [(i, j) for i in range(6) for j in range(6) if y[i] == 1 and y[j] == 0]
    brute = np.mean([1.0 if x[i] > x[j] else 0.5 if x[i] == x[j] else 0.0 for i, j in pairs])
    assert auc_binary(PairedSample(y, x))["auc"] == pytest.approx(brute)
    with pytest.raises(ValueError):
        auc_binary(PairedSample(np.array([0.0, 2.0]), np.array([1.0, 1.0])))


def test_abc_via_mcb_exact_without_pooling():
    rng = np.random.default_rng(1)
    x = np.repeat(np.arange(1.0, 11.0), 15)
    y = 1.1 * x + rng.uniform(-0.3, 0.3, x.size)
    out = abc_via_mcb(PairedSample(y, x))
    assert out["abc_residual"] < 1e-14


def test_abc_via_mcb_direction_check():
    rng = np.random.default_rng(2)
    z = rng.uniform(size=2000)
    s = PairedSample(z + rng.uniform(-0.05, 0.05, z.size) * z, 0.05 + 0.9 * z)
    out = abc_via_mcb(s)
    assert out["direction"] == "Q-increasing"
    with pytest.raises(ValueError):
        abc_via_mcb(s, direction="Q-decreasing")
    assert out["abc_residual"] < 1e-3 and out["abc2_residual"] < 1e-4
