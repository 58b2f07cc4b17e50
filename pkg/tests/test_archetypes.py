import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersocial.archetypes import (
    Archetype,
    ArchetypeCatalog,
    archetype_census,
    assign,
    assign_codes,
    default_catalog,
    match_by_distance,
    top_k_typical,
    typicality,
    typicality_array,
)
from hypersocial.errors import InputError, InvalidValue, NoMatchingArchetype, PrototypeUnavailable
from hypersocial.features import HIGH, LOW, DEFAULT_THRESHOLDS, FeatureSchema, FeatureVector

CAT = default_catalog()
unit = st.floats(0, 1)


def fv(*vals, user="u"):
    return FeatureVector(user, vals)


class TestCatalog:
    def test_table_order_and_codes(self):
        assert [(a.name, a.code) for a in CAT] == [
            ("Community Hero", "HHL"),
            ("Controversial Star", "HHH"),
            ("Respected Critic", "HLL"),
            ("Infamous Celebrity", "HLH"),
            ("Benevolent Underdog", "LHL"),
            ("Positive Provoker", "LHH"),
            ("Quiet Critic", "LLL"),
            ("Malcontent", "LLH"),
        ]

    def test_exhaustive(self):
        assert {a.labels for a in CAT} == set(itertools.product((LOW, HIGH), repeat=3))

    def test_non_exhaustive_rejected_when_flagged(self):
        with pytest.raises(InputError):
            ArchetypeCatalog(CAT.archetypes[:3])

    def test_config_round_trip(self, tmp_path):
        p = tmp_path / "cat.json"
        p.write_text(json.dumps(CAT.to_config()))
        again = ArchetypeCatalog.from_config(p)
        assert [(a.name, a.labels) for a in again] == [(a.name, a.labels) for a in CAT]

    def test_duplicate_tuples_rejected(self):
        a = Archetype("x", ("f",), (HIGH,))
        b = Archetype("y", ("f",), (HIGH,))
        with pytest.raises(InputError):
            ArchetypeCatalog([a, b], exhaustive=False)


class TestAssign:
    def test_examples(self):
        assert assign(fv(0.9, 0.8, 0.1), CAT).name == "Community Hero"
        assert assign(fv(0.1, 0.2, 0.9), CAT).name == "Malcontent"
        assert assign(fv(0.9, 0.2, 0.3), CAT).name == "Respected Critic"

    def test_non_exhaustive_unmatched(self):
        partial = ArchetypeCatalog(CAT.archetypes[:2], exhaustive=False)
        with pytest.raises(NoMatchingArchetype):
            assign(fv(0.1, 0.1, 0.1), partial)

    @given(unit, unit, unit)
    def test_total_and_sign_consistent(self, a, b, c):
        arch = assign(fv(a, b, c), CAT)
        for val, lab, t in zip((a, b, c), arch.labels, DEFAULT_THRESHOLDS.thresholds):
            assert (val > t) == (lab == HIGH)

    def test_vectorised_matches_scalar(self):
        rng = np.random.default_rng(0)
        vals = rng.random((500, 3))
        vals[:5] = 0.5
        idx = assign_codes(vals, CAT, [0.5] * 3)
        assert [CAT.names[i] for i in idx] == [assign(fv(*row), CAT).name for row in vals]


class TestDistance:
    proto = Archetype("Overzealous", ("sentiment", "toxicity"), (HIGH, LOW), (1.0, 0.5))
    schema = FeatureSchema(("sentiment", "toxicity"))

    def v(self, *vals):
        return FeatureVector("u", vals, self.schema)

    @pytest.mark.parametrize("d", ["euclidean", "cosine", "max_abs"])
    def test_identity(self, d):
        assert match_by_distance(self.v(1.0, 0.5), self.proto, d, 0.0)
        assert match_by_distance(self.v(1.0, 0.5), self.proto, d, 0.01)

    def test_euclidean_hand_value(self):
        assert not match_by_distance(self.v(0.9, 0.5), self.proto, "euclidean", 0.05)
        assert match_by_distance(self.v(0.9, 0.5), self.proto, "euclidean", 0.1 + 1e-12)

    def test_diameter_always_matches(self):
        rng = random.Random(1)
        for _ in range(200):
            x = self.v(rng.random(), rng.random())
            assert match_by_distance(x, self.proto, "euclidean", 2 ** 0.5)
            assert match_by_distance(x, self.proto, "max_abs", 1.0)

    @given(unit, unit)
    def test_eps_zero_iff_equal(self, a, b):
        assert match_by_distance(self.v(a, b), self.proto, "euclidean", 0.0) == ((a, b) == (1.0, 0.5))

    def test_missing_prototype(self):
        with pytest.raises(PrototypeUnavailable):
            match_by_distance(fv(0.1, 0.1, 0.1), CAT["Malcontent"], "euclidean", 0.1)


class TestTypicality:
    def test_hero_maximiser(self):
        assert typicality(fv(1.0, 1.0, 0.0), CAT["Community Hero"]) == 1.0

    def test_malcontent_hand_product(self):
        assert typicality(fv(0.2, 0.1, 0.9), CAT["Malcontent"]) == pytest.approx(0.8 * 0.9 * 0.9, abs=1e-15)

    def test_zero_contribution_annihilates(self):
        assert typicality(fv(0.0, 0.7, 0.2), CAT["Community Hero"]) == 0.0

    def test_literal_form_vanishes_at_stated_maximiser(self):
        assert typicality(fv(1.0, 1.0, 0.0), CAT["Community Hero"], rule="literal") == 0.0

    def test_rejects_unnormalised(self):
        with pytest.raises(InvalidValue):
            typicality(fv(1.2, 0.5, 0.5), CAT["Community Hero"])

    @given(unit, unit, unit)
    def test_bounds_and_array_agreement(self, a, b, c):
        for arch in CAT:
            t = typicality(fv(a, b, c), arch)
            assert 0.0 <= t <= 1.0
            assert typicality_array(np.array([[a, b, c]]), arch)[0] == pytest.approx(t, abs=1e-15)


class TestTopK:
    def test_ranking_and_ties(self):
        hero = CAT["Community Hero"]
        users = [fv(0.9, 0.9, 0.1, user=3), fv(0.9, 0.9, 0.1, user=1), fv(1.0, 1.0, 0.0, user=7), fv(0.6, 0.6, 0.4, user=2)]
        r = top_k_typical(users, hero, 3)
        assert [s.user for s in r.scores] == [7, 1, 3]
        assert not r.short

    def test_single_member(self):
        r = top_k_typical([fv(0.7, 0.7, 0.2, user=5)], CAT["Community Hero"], 1)
        assert [s.user for s in r.scores] == [5]

    def test_short_flag(self):
        r = top_k_typical([fv(0.7, 0.7, 0.2, user=5)], CAT["Community Hero"], 10)
        assert r.short and len(r.scores) == 1


class TestCensus:
    def test_sums_and_zero_rows(self):
        counts = archetype_census({1: "Malcontent", 2: "Malcontent", 3: CAT["Quiet Critic"]}, CAT)
        assert counts["Malcontent"] == 2 and counts["Quiet Critic"] == 1
        assert sum(counts.values()) == 3 and len(counts) == 8

    def test_single_user(self):
        assert archetype_census(["Community Hero"]) == {"Community Hero": 1}

    def test_uniform_generator_near_equal(self):
        from scipy.stats import chisquare

        rng = np.random.default_rng(11)
        idx = assign_codes(rng.random((8000, 3)), CAT, [0.5] * 3)
        counts = archetype_census([CAT.names[i] for i in idx], CAT)
        assert chisquare(list(counts.values())).pvalue > 0.001

    def test_outside_catalog(self):
        with pytest.raises(NoMatchingArchetype):
            archetype_census(["Nobody"], CAT)
