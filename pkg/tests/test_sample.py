import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import isotonic_regression

from predeval.sample import (
    EmptyInputError,
    LengthMismatchError,
    NegativeValueError,
    NonFiniteError,
    PairedSample,
    ecdf,
    midrank_transform,
    pav,
    quantile,
    rebalance,
    recalibrate,
    validate,
)


def brute_isotonic(v, w):
    """Best non-decreasing block-mean fit over all contiguous partitions."""
    n = len(v)
    best, best_sse = None, np.inf
    for cuts in itertools.product([0, 1], repeat=n - 1):
        edges = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        fit = np.empty(n)
        for a, b in zip(edges[:-1], edges[1:]):
            fit[a:b] = np.dot(v[a:b], w[a:b]) / w[a:b].sum()
        if np.all(np.diff(fit) >= -1e-15):
            sse = np.dot(w, (v - fit) ** 2)
            if sse < best_sse:
                best, best_sse = fit, sse
    return best


def test_validate_errors():
    with pytest.raises(EmptyInputError):
        validate([], [[]])
    with pytest.raises(LengthMismatchError):
        validate([1.0, 2.0], [[1.0]])
    with pytest.raises(NonFiniteError, match="row 1"):
        validate([1.0, np.nan], [[1.0, 2.0]])
    with pytest.raises(NegativeValueError):
        validate([1.0, 2.0], [[1.0, -2.0]])
    with pytest.raises(EmptyInputError):
        validate([1.0], {})


def test_validate_shapes_and_names():
    out = validate([1.0, 2.0], {"a": [1.0, 1.0], "b": [2.0, 0.0]})
    assert [s.name for s in out] == ["a", "b"]
    single = validate([1.0, 2.0], [0.5, 0.5])
    assert len(single) == 1 and single[0].name == "x1"


def test_unbiasedness_gap():
    s = PairedSample(np.array([1.0, 3.0]), np.array([2.0, 4.0]))
    assert s.unbiasedness_gap == pytest.approx(0.5)


def test_ecdf_and_quantile():
    d = ecdf([3.0, 1.0, 2.0, 2.0])
    assert np.allclose(d.cdf([0.5, 1.0, 2.0, 2.5, 3.0]), [0, 0.25, 0.75, 0.75, 1.0])
    assert np.allclose(d.left_cdf([1.0, 2.0]), [0.0, 0.25])
    assert quantile(d, 0.0) == 1.0
    assert quantile(d, 0.25) == 1.0
    assert quantile(d, 0.26) == 2.0
    assert quantile(d, 1.0) == 3.0
    with pytest.raises(ValueError):
        quantile(d, 1.5)


def test_midranks_with_ties():
    r = midrank_transform([5.0, 1.0, 5.0, 3.0])
    assert np.allclose(r, [0.75, 0.125, 0.75, 0.375])
    assert r.mean() == pytest.approx(0.5)


def test_pav_small_example():
    assert np.allclose(pav([1.0, 3.0, 2.0, 4.0]), [1.0, 2.5, 2.5, 4.0])
    assert np.allclose(pav([3.0, 2.0, 1.0]), [2.0, 2.0, 2.0])


def test_pav_against_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(500):
        n = int(rng.integers(1, 9))
        v = rng.normal(size=n)
        w = rng.uniform(0.2, 3.0, n)
        assert np.allclose(pav(v, w), brute_isotonic(v, w), atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(
    v=st.lists(st.floats(-100, 100), min_size=1, max_size=60),
    data=st.data(),
)
def test_pav_matches_scipy(v, data):
    v = np.array(v)
    w = np.array(data.draw(st.lists(st.floats(0.1, 10.0), min_size=v.size, max_size=v.size)))
    ours = pav(v, w)
    ref = isotonic_regression(v, weights=w).x
    assert np.all(np.diff(ours) >= -1e-12)
    assert np.allclose(ours, ref, atol=1e-9 * max(1.0, np.abs(v).max()))


def test_recalibrate_pools_ties_and_keeps_block_means():
    y = np.array([1.0, 0.0, 3.0, 2.0, 5.0, 4.0])
    x = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 0.5])
    fit = recalibrate(PairedSample(y, x))
    # tied x share one value
    assert fit.fitted[0] == fit.fitted[1]
    assert fit.fitted[2] == fit.fitted[3]
    for lo, hi, val, cnt in fit.blocks:
        members = (x >= lo) & (x <= hi)
        assert members.sum() == cnt
        assert y[members].mean() == pytest.approx(val)
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(fit.fitted[order]) >= 0)
    assert fit.fitted.mean() == pytest.approx(y.mean())


def test_recalibrate_bins():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, 1000)
    y = x + rng.normal(0, 0.1, 1000)
    fit = recalibrate(PairedSample(y, x), "bins:10")
    assert fit.n_blocks == 10
    assert fit.fitted.mean() == pytest.approx(y.mean())
    with pytest.raises(ValueError):
        recalibrate(PairedSample(y, x), "spline")


def test_rebalance_keeps_shape():
    a, b = rebalance([np.array([1.0, 3.0]), np.array([2.0, 2.0, 8.0])], 5.0)
    assert a.mean() == pytest.approx(5.0) and b.mean() == pytest.approx(5.0)
    assert np.allclose(a / a.sum(), [0.25, 0.75])
