import numpy as np
import pytest
from hypothesis import given, strategies as st

from hypersocial.errors import EmptyInput, InputError, SchemaMismatch
from hypersocial.lexicon import (
    FAMILIES,
    Lexicon,
    ProfileScale,
    load_lexicon,
    mean_profile,
    population_profiles,
    profile,
    raw_profile,
    score_text,
    tokenize,
    word_counts,
    write_lexicon,
)
from hypersocial.synth import synthetic_lexicons

EMO = FAMILIES["emotion"]


def emo_lex():
    return Lexicon("tiny", "emotion", EMO, {
        "trust": (0, 0, 0, 0, 0, 0, 0, 1.0),
        "happy": (0, 0.5, 0, 0, 1.0, 0, 0, 0.25),
        "awful": (0.75, 0, 1.0, 0.5, 0, 0.5, 0, 0),
    })


words = st.lists(st.sampled_from(["trust", "happy", "awful", "the", "cat", "x1"]), max_size=12).map(" ".join)


class TestTokenize:
    def test_examples(self):
        assert tokenize("I TRUST you!") == ["i", "trust", "you"]
        assert tokenize("") == []
        assert tokenize("don't-stop") == ["don", "t", "stop"]

    def test_underscore_separates(self):
        assert tokenize("snake_case") == ["snake", "case"]

    def test_word_counts(self):
        assert word_counts("a b c") == (3, 3)
        assert word_counts("a a") == (2, 1)


class TestScoreText:
    def test_no_matches(self):
        assert score_text("the cat sat", emo_lex()).tolist() == [0.0] * 8

    def test_identity(self):
        assert tuple(score_text("happy", emo_lex())) == emo_lex().entries["happy"]

    def test_two_terms_sum(self):
        lex = emo_lex()
        want = np.add(lex.entries["happy"], lex.entries["awful"])
        assert score_text("Happy, AWFUL.", lex).tolist() == want.tolist()

    @given(words, words)
    def test_additive(self, a, b):
        lex = emo_lex()
        assert np.allclose(score_text(a + " " + b, lex), score_text(a, lex) + score_text(b, lex), atol=1e-12)


class TestProfile:
    def test_empty_corpus(self):
        with pytest.raises(EmptyInput):
            profile([], emo_lex())

    def test_silent_user_scores_zero(self):
        profs = population_profiles({"quiet": ["the cat"], "loud": ["happy trust", "awful"]}, emo_lex())
        assert profs["quiet"].values == (0.0,) * 8
        assert max(profs["loud"].values) == 1.0

    def test_mean_over_texts(self):
        assert raw_profile(["trust", "trust trust trust"], emo_lex())[-1] == 2.0

    def test_per_token_option(self):
        assert raw_profile(["trust the"], emo_lex(), per_token=True)[-1] == 0.5

    @given(st.lists(words, min_size=1, max_size=6), st.randoms())
    def test_permutation_invariant(self, texts, rnd):
        shuffled = texts[:]
        rnd.shuffle(shuffled)
        assert np.allclose(raw_profile(texts, emo_lex()), raw_profile(shuffled, emo_lex()), atol=1e-12)

    @given(st.dictionaries(st.integers(0, 20), st.lists(words, min_size=1, max_size=4), min_size=1, max_size=8))
    def test_ranges(self, corpus):
        lexes = synthetic_lexicons()
        lexes["tiny"] = emo_lex()
        for lex in lexes.values():
            for p in population_profiles(corpus, lex).values():
                lo, hi = (-1.0, 1.0) if lex.family == "moral" else (0.0, 1.0)
                assert all(lo <= v <= hi for v in p.values)

    def test_moral_is_mean_over_matched_words(self):
        moral = synthetic_lexicons()["moral"]
        pos = next(iter(t for t, v in moral.entries.items() if v[0] > 0))
        p = profile([f"{pos} {pos} filler"], moral)
        assert p.values == pytest.approx(moral.entries[pos])

    def test_scale_zero_anchor(self):
        sc = ProfileScale.fit(np.array([[2.0, 0.5], [4.0, 0.5]]))
        assert sc.apply(np.array([0.0, 0.5])).tolist() == [0.0, 1.0]

    def test_mean_profile(self):
        lex = emo_lex()
        a = profile(["trust"], lex, subject="a")
        b = profile(["the"], lex, subject="b")
        m = mean_profile([a, b], "arch")
        assert m["trust"] == 0.5 and m.subject == "arch"


class TestLoader:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "emo.tsv"
        write_lexicon(emo_lex(), p)
        again = load_lexicon(p, "emotion")
        assert dict(again.entries) == {k: tuple(map(float, v)) for k, v in emo_lex().entries.items()}

    def test_wrong_dimension_count(self, tmp_path):
        p = tmp_path / "pad.tsv"
        p.write_text("term\tvalence\tarousal\nhappy\t0.9\t0.1\n")
        with pytest.raises(SchemaMismatch):
            load_lexicon(p, "pad")

    def test_ragged_row(self, tmp_path):
        p = tmp_path / "pad.tsv"
        p.write_text("term\tvalence\tarousal\tdominance\nhappy\t0.9\t0.1\n")
        with pytest.raises(InputError, match=":2:"):
            load_lexicon(p, "pad")

    def test_domain_checked(self, tmp_path):
        p = tmp_path / "moral.tsv"
        p.write_text("term\t" + "\t".join(FAMILIES["moral"]) + "\nbad\t2\t0\t0\t0\t0\n")
        with pytest.raises(SchemaMismatch):
            load_lexicon(p, "moral")

    def test_case_folded_duplicates_sum(self, tmp_path):
        p = tmp_path / "pad.tsv"
        p.write_text("term\tvalence\tarousal\tdominance\nJoy\t0.5\t0\t0\njoy\t0.25\t0\t0\n")
        assert load_lexicon(p, "pad").entries["joy"] == (0.75, 0.0, 0.0)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "x.tsv"
        p.write_text("")
        with pytest.raises(InputError):
            load_lexicon(p, "pad")
