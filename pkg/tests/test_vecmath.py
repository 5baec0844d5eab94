import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fmreg.errors import DimensionMismatch, InvalidTemperature, ZeroNorm
from fmreg.vecmath import cosine, l2_normalize, softmax

finite_vec = arrays(np.float64, st.integers(1, 32),
                    elements=st.floats(-1e6, 1e6)).filter(
                        lambda v: np.linalg.norm(v) > 1e-6)


def test_normalize_345():
    assert np.allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8], atol=1e-15)


def test_normalize_unit_passthrough():
    assert np.array_equal(l2_normalize([1.0, 0.0]), [1.0, 0.0])


def test_normalize_zero_raises():
    with pytest.raises(ZeroNorm):
        l2_normalize([0.0, 0.0])


@given(finite_vec)
@settings(max_examples=200)
def test_normalize_idempotent_bitwise(v):
    once = l2_normalize(v)
    twice = l2_normalize(once)
    assert np.array_equal(once, twice)
    assert abs(np.linalg.norm(once) - 1.0) <= 1e-12


def test_cosine_examples():
    assert cosine([1.0, 0.0], [1.0, 0.0]) == 1.0
    assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine([0.6, 0.8], [1.0, 0.0]) == pytest.approx(0.6, abs=1e-15)


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine([1.0, 0.0], [1.0, 0.0, 0.0])
    with pytest.raises(ZeroNorm):
        cosine([0.0, 0.0], [1.0, 0.0])


@given(finite_vec.flatmap(lambda a: st.tuples(
    st.just(a), arrays(np.float64, len(a), elements=st.floats(-1e6, 1e6)).filter(
        lambda v: np.linalg.norm(v) > 1e-6))))
def test_cosine_symmetric(pair):
    a, b = pair
    assert cosine(a, b) == cosine(b, a)
    assert -1.0 <= cosine(a, b) <= 1.0


@given(finite_vec, st.floats(1e-3, 1e3))
def test_cosine_positive_scaling(v, c):
    assert cosine(v, c * v) == pytest.approx(1.0, abs=1e-12)


def test_softmax_equal_scores():
    for k in (1, 3, 7):
        out = softmax([2.5] * k, 0.3)
        assert np.allclose(out, np.full(k, 1.0 / k), atol=1e-15)


def test_softmax_hand_case():
    out = softmax([math.log(2.0), 0.0], 1.0)
    assert np.allclose(out, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)


def test_softmax_large_inputs_stable():
    out = softmax([1000.0, 0.0], 1.0)
    assert np.all(np.isfinite(out))
    assert out[0] == pytest.approx(1.0, abs=1e-12)


def test_softmax_bad_tau():
    with pytest.raises(InvalidTemperature):
        softmax([1.0, 2.0], 0.0)
    with pytest.raises(InvalidTemperature):
        softmax([1.0, 2.0], -1.0)


@given(arrays(np.float64, st.integers(1, 200), elements=st.floats(-50, 50)),
       st.floats(1e-2, 1e2))
@settings(max_examples=200)
def test_softmax_sums_to_one(scores, tau):
    out = softmax(scores, tau)
    assert np.all(out >= 0)
    # strict positivity holds whenever the shifted logits stay above the
    # float64 underflow threshold
    if (np.max(scores) - np.min(scores)) / tau < 700:
        assert np.all(out > 0)
    assert abs(float(np.sum(out)) - 1.0) <= 1e-9


def test_softmax_sum_long_input():
    rng = np.random.default_rng(0)
    out = softmax(rng.uniform(-5, 5, 10_000), 0.7)
    assert abs(float(np.sum(out)) - 1.0) <= 1e-9


@given(arrays(np.float64, st.integers(2, 20), elements=st.floats(-5, 5)),
       st.floats(1e-2, 10), st.floats(1e-2, 10))
def test_softmax_argmax_invariance(scores, t1, t2):
    mx = np.max(scores)
    if np.sum(scores == mx) != 1:
        return
    assert np.argmax(softmax(scores, t1)) == np.argmax(softmax(scores, t2))
