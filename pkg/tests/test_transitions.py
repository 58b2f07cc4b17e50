import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersocial.errors import EmptyInput, InputError
from hypersocial.synth import SynthSpec, synth_labels
from hypersocial.transitions import (
    ArchetypeSequence,
    NullStats,
    TransitionMatrix,
    null_model,
    observed_transitions,
    replica_rng,
    sequences_from_assignments,
    shuffle_within_months,
    significance,
    transition_report,
)


def seq(user, *labels, start=1):
    return ArchetypeSequence(user, tuple((start + i, a) for i, a in enumerate(labels)))


def small_population(n=300, months=6, seed=0):
    return synth_labels(SynthSpec(n_users=n, months=months, n_threads=0, seed=seed)).sequences()


class TestObserved:
    def test_single_self_loop(self):
        m = observed_transitions([seq("u", "A", "A")])
        assert m.p("A", "A") == 1.0

    def test_counts_and_rows(self):
        m = observed_transitions([seq(1, "A", "B", "A"), seq(2, "A", "A")], names=["A", "B"])
        assert m.counts.tolist() == [[1, 1], [1, 0]]
        assert m.p("A", "B") == 0.5 and m.p("B", "A") == 1.0

    def test_gap_breaks_transition(self):
        gappy = ArchetypeSequence("u", ((1, "A"), (3, "B")))
        with pytest.raises(EmptyInput):
            observed_transitions([gappy])

    def test_undefined_row(self):
        m = observed_transitions([seq(1, "A", "B")], names=["A", "B"])
        assert m.defined.tolist() == [True, False]
        assert np.isnan(m.probs[1]).all()

    def test_row_stochastic(self):
        m = observed_transitions(small_population())
        sums = m.probs[m.defined].sum(axis=1)
        assert np.allclose(sums, 1.0, atol=1e-12)

    def test_non_increasing_months_rejected(self):
        with pytest.raises(InputError):
            ArchetypeSequence("u", ((2, "A"), (2, "B")))

    def test_from_assignments(self):
        seqs = sequences_from_assignments({("b", 2): "X", ("a", 1): "Y", ("b", 1): "Z"})
        assert [(s.user, s.steps) for s in seqs] == [("a", ((1, "Y"),)), ("b", ((1, "Z"), (2, "X")))]

    def test_unknown_label(self):
        with pytest.raises(InputError):
            observed_transitions([seq(1, "A", "Q")], names=["A"])


class TestShuffle:
    @given(st.lists(st.tuples(st.integers(1, 4), st.integers(0, 5)), min_size=1, max_size=60), st.integers(0, 2**32 - 1))
    def test_preserves_month_multisets(self, obs, seed):
        obs.sort(key=lambda x: x[0])
        months = np.array([m for m, _ in obs])
        labels = np.array([l for _, l in obs])
        out = shuffle_within_months(months, labels, replica_rng(seed, 0))
        for m in set(months.tolist()):
            assert sorted(out[months == m]) == sorted(labels[months == m])

    def test_copies_differ_from_observed(self):
        seqs = small_population()
        from hypersocial.transitions import _Encoded

        enc = _Encoded(seqs)
        same = sum(
            np.array_equal(shuffle_within_months(enc.months, enc.labels, replica_rng(0, r)), enc.labels)
            for r in range(50)
        )
        assert same == 0

    def test_degenerate_month_unchanged(self):
        months = np.array([1, 1, 1, 2, 2])
        labels = np.array([3, 3, 3, 1, 1])
        assert shuffle_within_months(months, labels, replica_rng(1, 1)).tolist() == labels.tolist()


class TestNullModel:
    def test_smoke_two_shuffles(self):
        null = null_model(small_population(50, 3), n_shuffles=2, seed=1)
        assert null.samples.shape[0] == 2
        assert np.isfinite(null.std[~np.isnan(null.std)]).all()

    def test_rejects_single_shuffle(self):
        with pytest.raises(ValueError):
            null_model(small_population(20, 3), n_shuffles=1)

    def test_bit_reproducible(self):
        seqs = small_population()
        a = transition_report(seqs, n_shuffles=40, seed=5)
        b = transition_report(seqs, n_shuffles=40, seed=5)
        assert [repr(r) for r in a.rows] == [repr(r) for r in b.rows]

    def test_seed_changes_null(self):
        seqs = small_population()
        a = null_model(seqs, 20, seed=1).samples
        b = null_model(seqs, 20, seed=2).samples
        assert not np.array_equal(a, b, equal_nan=True)

    def test_parallel_invariant(self):
        seqs = small_population()
        a = null_model(seqs, 30, seed=3, n_jobs=1).samples
        b = null_model(seqs, 30, seed=3, n_jobs=4).samples
        assert np.array_equal(a, b, equal_nan=True)

    def test_iid_labels_mostly_unremarkable(self):
        seqs = synth_labels(SynthSpec(n_users=3000, months=6, n_threads=0, seed=21)).sequences()
        rep = transition_report(seqs, n_shuffles=200, seed=4)
        zs = [abs(r.z) for r in rep.rows if r.testable]
        assert sum(z < 3 for z in zs) / len(zs) >= 0.99


class TestSignificance:
    names = ["A", "B"]

    def observed(self, probs):
        counts = np.array([[1, 1], [1, 1]])
        return TransitionMatrix(self.names, counts, np.asarray(probs, dtype=float))

    def test_obs_equals_mean(self):
        samples = np.array([[[0.4, 0.6], [0.5, 0.5]], [[0.6, 0.4], [0.5, 0.5]]])
        rep = significance(self.observed([[0.5, 0.5], [0.5, 0.5]]), NullStats(self.names, samples, 0, 2))
        row = rep.get("A", "A")
        assert row.z == 0.0 and row.p_normal == 0.5 and not row.significant
        assert row.p_empirical == 0.5

    def test_zero_std_untestable(self):
        samples = np.array([[[0.4, 0.6], [0.5, 0.5]], [[0.6, 0.4], [0.5, 0.5]]])
        rep = significance(self.observed([[0.5, 0.5], [0.9, 0.1]]), NullStats(self.names, samples, 0, 2))
        row = rep.get("B", "A")
        assert not row.testable and not row.significant

    def test_far_above_null_is_significant(self):
        rng = np.random.default_rng(0)
        samples = 0.5 + rng.normal(0, 0.01, size=(100, 2, 2))
        rep = significance(self.observed([[0.9, 0.1], [0.5, 0.5]]), NullStats(self.names, samples, 0, 100))
        assert rep.get("A", "A").significant
        assert not rep.get("A", "B").significant  # far below: one-sided test

    def test_planted_pair_detected(self):
        spec = SynthSpec(n_users=2000, months=8, n_threads=0, seed=2, planted={("Quiet Critic", "Respected Critic"): 0.3})
        rep = transition_report(synth_labels(spec).sequences(), n_shuffles=100, seed=0)
        assert rep.get("Quiet Critic", "Respected Critic").significant

    def test_outputs(self, tmp_path):
        rep = transition_report(small_population(100, 4), n_shuffles=10, seed=9)
        rep.write_csv(tmp_path / "t.csv")
        rep.write_meta(tmp_path / "m.json")
        with open(tmp_path / "t.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["from", "to", "obs", "null_mean", "null_std", "z", "p_normal", "p_empirical", "significant"]
        assert len(rows) == len(rep.rows)
        meta = json.loads((tmp_path / "m.json").read_text())
        assert (meta["seed"], meta["n_shuffles"], meta["alpha"]) == (9, 10, 0.01)
        assert "PCG64" in meta["rng"]
        for r in rep.rows:
            assert math.isnan(r.p_normal) or 0.0 <= r.p_normal <= 1.0
