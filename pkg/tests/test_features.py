import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersocial.errors import InvalidValue, SchemaMismatch
from hypersocial.features import (
    DEFAULT_SCHEMA,
    HIGH,
    LOW,
    FeatureSchema,
    FeatureVector,
    MinMaxScaler,
    ThresholdVector,
    label,
    labeled_vector,
    normalize,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestNormalize:
    def test_affine(self):
        assert normalize([0, 5, 10]) == [0.0, 0.5, 1.0]

    def test_spanning_unit_input_unchanged(self):
        assert normalize([0.0, 0.25, 1.0]) == [0.0, 0.25, 1.0]

    def test_compound_sentiment_rescale(self):
        xs = [-1.0, -0.5, 0.0, 0.3, 1.0]
        assert normalize(xs) == pytest.approx([(x + 1) / 2 for x in xs], abs=1e-15)

    def test_constant_maps_to_half(self):
        assert normalize([3.0, 3.0]) == [0.5, 0.5]

    @pytest.mark.parametrize("bad", [[float("nan")], [1.0, float("inf")], []])
    def test_rejects_bad_input(self, bad):
        with pytest.raises(InvalidValue):
            normalize(bad)

    @given(st.lists(finite, min_size=2, max_size=30))
    def test_order_preserving(self, xs):
        ys = normalize(xs)
        assert all(0.0 <= y <= 1.0 for y in ys)
        for a, b, ya, yb in zip(xs, xs[1:], ys, ys[1:]):
            if a < b:
                assert ya <= yb

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
    def test_idempotent_on_spanning_input(self, xs):
        xs = xs + [0.0, 1.0]
        assert normalize(normalize(xs)) == pytest.approx(normalize(xs), abs=1e-12)


def test_global_scaler_constant_column():
    sc = MinMaxScaler.fit(np.array([[0.0, 2.0], [10.0, 2.0]]))
    assert sc.transform(np.array([[5.0, 2.0]])).tolist() == [[0.5, 0.5]]


class TestLabel:
    def test_worked_example(self):
        # A = <1, 0.5>, T = <0, 0.75> -> <high, low>
        assert (label(1, 0), label(0.5, 0.75)) == (HIGH, LOW)

    def test_boundary_is_low(self):
        assert label(0.5, 0.5) == LOW

    def test_just_above(self):
        assert label(0.51, 0.5) == HIGH

    @given(finite, finite, finite)
    def test_monotone(self, a, b, t):
        lo, hi = sorted((a, b))
        assert not (label(lo, t) == HIGH and label(hi, t) == LOW)
        assert label(a, t) in (LOW, HIGH)


class TestLabeledVector:
    T = ThresholdVector.uniform(("score", "sentiment", "toxicity"), 0.5)

    def test_examples(self):
        assert labeled_vector(FeatureVector("u", (0.8, 0.7, 0.1)), self.T) == (HIGH, HIGH, LOW)
        assert labeled_vector(FeatureVector("u", (0.4, 0.9, 0.9)), self.T) == (LOW, HIGH, HIGH)
        assert labeled_vector(FeatureVector("u", (0.5, 0.5, 0.5)), self.T) == (LOW, LOW, LOW)

    def test_missing_feature(self):
        schema = FeatureSchema(("score", "sentiment"))
        with pytest.raises(SchemaMismatch):
            labeled_vector(FeatureVector("u", (0.1, 0.2), schema), self.T)

    @given(st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)), st.floats(0.01, 0.99))
    def test_invariant_under_increasing_transform(self, vals, t):
        f = lambda x: math.exp(3 * x) - 7  # noqa: E731 - strictly increasing
        tv = ThresholdVector.uniform(DEFAULT_SCHEMA.names, t)
        tv2 = ThresholdVector.uniform(DEFAULT_SCHEMA.names, f(t))
        a = labeled_vector(FeatureVector("u", vals), tv)
        b = labeled_vector(FeatureVector("u", tuple(f(v) for v in vals)), tv2)
        assert a == b


def test_schema_validation():
    with pytest.raises(SchemaMismatch):
        FeatureSchema(("a", "a"))
    with pytest.raises(SchemaMismatch):
        FeatureSchema(("a",), ("numeric",), ((0.0, math.inf),))
    with pytest.raises(SchemaMismatch):
        FeatureVector("u", (1, 2))
