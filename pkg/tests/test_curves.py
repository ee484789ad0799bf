import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from predeval.curves import (
    Curve,
    concentration_curve,
    default_theta_grid,
    discrimination_murphy_curve,
    lorenz_curve,
    murphy_curve,
    normalised_residuals,
    q_function,
    sign_changes,
    stop_loss,
)
from predeval.losses import elementary_loss
from predeval.sample import PairedSample, midrank_transform

cols = st.lists(st.floats(0.0, 100.0), min_size=2, max_size=40).filter(lambda v: sum(v) > 1e-6)


def test_lorenz_small():
    lc = lorenz_curve([3.0, 1.0, 2.0])
    assert np.allclose(lc.values, [0.0, 1 / 6, 1 / 2, 1.0])
    assert lc(0.5) == pytest.approx((1 / 6 + 1 / 2) / 2)


@settings(max_examples=100, deadline=None)
@given(x=cols)
def test_lorenz_shape(x):
    lc = lorenz_curve(x)
    assert lc.values[0] == 0.0 and lc.values[-1] == 1.0
    assert np.all(lc.values <= lc.grid + 1e-12)
    assert np.all(np.diff(lc.values, 2) >= -1e-12)


def test_concentration_averages_ties():
    s = PairedSample(np.array([0.0, 3.0, 3.0]), np.array([1.0, 1.0, 2.0]))
    cc = concentration_curve(s)
    assert np.allclose(cc.values, [0.0, 0.25, 0.5, 1.0])


def test_concentration_of_response_is_its_lorenz_curve():
    rng = np.random.default_rng(4)
    y = rng.exponential(size=300)
    cc = concentration_curve(PairedSample(y, y))
    assert np.allclose(cc.values, lorenz_curve(y).values)


def test_stop_loss_brute_force():
    rng = np.random.default_rng(5)
    v = rng.exponential(size=200)
    th = np.linspace(-1, 5, 61)
    brute = np.array([np.mean(np.maximum(v - t, 0)) for t in th])
    assert np.allclose(stop_loss(v, th), brute, atol=1e-13)


def test_murphy_curve_is_mean_elementary_loss():
    rng = np.random.default_rng(6)
    y, x = rng.gamma(2.0, size=150), rng.gamma(2.0, size=150)
    s = PairedSample(y, x)
    g = np.linspace(0.0, 8.0, 41)
    brute = np.array([np.mean(elementary_loss(t, y, x)) for t in g])
    assert np.allclose(murphy_curve(s, g).values, brute, atol=1e-13)


def test_murphy_curve_integrates_to_mse():
    # M_theta jumps at the predictions, so integrate on a dense grid
    rng = np.random.default_rng(7)
    y, x = rng.uniform(0, 3, 200), rng.uniform(0, 3, 200)
    m = murphy_curve(PairedSample(y, x), np.linspace(0.0, 3.0, 300001))
    assert 2.0 * m.integral() == pytest.approx(np.mean((y - x) ** 2), rel=1e-4)


def test_calibrated_form_needs_flag():
    s = PairedSample(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        murphy_curve(s, calibrated_form=True)
    c = PairedSample(s.y, s.x, calibrated=True)
    assert np.allclose(murphy_curve(c, calibrated_form=True).values, murphy_curve(c).values)


def test_discrimination_curve():
    x = np.array([1.0, 2.0, 6.0])
    g = np.array([0.0, 1.5, 3.0, 7.0])
    got = discrimination_murphy_curve(x, 3.0, g).values
    assert np.allclose(got, stop_loss(x, g) - np.maximum(3.0 - g, 0.0))


def test_q_function_matches_definition():
    rng = np.random.default_rng(8)
    y, x = rng.exponential(size=80), np.round(rng.exponential(size=80), 1)
    s = PairedSample(y, x)
    d, r = normalised_residuals(s), midrank_transform(x)
    z = np.linspace(0, 1, 33)
    brute = np.array([np.mean(d * (1.0 - np.maximum(zz, r))) for zz in z])
    assert np.allclose(q_function(s, z).values, brute, atol=1e-14)
    assert q_function(s, [1.0]).values[0] == pytest.approx(0.0, abs=1e-15)


def test_sign_changes_basic():
    g = np.linspace(0, 1, 101)
    a = Curve("p", g, np.sin(2 * np.pi * g))
    zero = Curve("p", g, np.zeros_like(g))
    rep = sign_changes(a, zero, tol=1e-9)
    assert rep.sign_changes == 1
    assert rep.first_sign == 1
    assert rep.locations[0] == pytest.approx(0.5, abs=1e-9)


def test_sign_changes_narrow_runs():
    g = np.arange(7.0)
    c = Curve("t", g, np.array([1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0]))
    zero = Curve("t", g, np.zeros(7))
    rep = sign_changes(c, zero, tol=0.0)
    assert rep.sign_changes == 1 and rep.unresolved == [2.0]
    assert sign_changes(c, zero, tol=0.0, count_narrow=True).sign_changes == 3


def test_sign_changes_ignores_values_within_tolerance():
    g = np.linspace(0, 1, 5)
    c = Curve("p", g, np.array([0.0, 1e-12, -1e-12, 0.0, 0.0]))
    assert sign_changes(c, Curve("p", g, np.zeros(5)), tol=1e-9).sign_changes == 0


def test_curve_csv_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    lc = lorenz_curve(rng.exponential(size=97))
    lc.to_csv(tmp_path / "lc.csv")
    back = Curve.from_csv(tmp_path / "lc.csv", "p")
    assert np.array_equal(back.grid, lc.grid) and np.array_equal(back.values, lc.values)
    assert back.integral() == lc.integral()


def test_integral_of_square_exact():
    g = np.array([0.0, 0.5, 2.0])
    c = Curve("p", g, np.array([1.0, -1.0, 3.0]))
    fine = np.linspace(0, 2, 400001)
    assert c.integral_of_square() == pytest.approx(np.trapezoid(c(fine) ** 2, fine), rel=1e-8)


def test_curve_rejects_bad_grid():
    with pytest.raises(ValueError):
        Curve("p", np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        lorenz_curve([1.0]) - Curve("p", np.array([0.0, 0.5]), np.array([0.0, 1.0]))


def test_default_theta_grid_contains_data():
    g = default_theta_grid([1.5, 2.5], [0.25])
    assert {0.0, 0.25, 1.5, 2.5} <= set(g.tolist())
    assert g[-1] == pytest.approx(1.05 * 2.5)
