import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floatlab.metrics import (ErrorReport, Transcript, TranscriptWord, cer,
                              edit_distance, error_report, mean_confidence,
                              paired_permutation_test, tokenize, wer)

from conftest import naive_levenshtein


class TestEditDistance:
    def test_identity(self):
        assert edit_distance("kitten", "kitten") == 0

    def test_classic(self):
        assert edit_distance("kitten", "sitting") == 3

    def test_empty_sides(self):
        assert edit_distance("", "abc") == 3
        assert edit_distance("abc", "") == 3
        assert edit_distance("", "") == 0

    def test_works_on_word_lists(self):
        assert edit_distance(["a", "b", "c"], ["a", "x", "c"]) == 1

    def test_matches_oracle_on_seeded_pairs(self):
        rng = np.random.default_rng(1234)
        alphabet = "abc"
        for _ in range(300):
            n, m = rng.integers(0, 13, size=2)
            a = "".join(alphabet[i] for i in rng.integers(0, 3, size=n))
            b = "".join(alphabet[i] for i in rng.integers(0, 3, size=m))
            assert edit_distance(a, b) == naive_levenshtein(a, b)

    @given(st.text(alphabet="abcd", max_size=10),
           st.text(alphabet="abcd", max_size=10))
    def test_oracle_equivalence(self, a, b):
        assert edit_distance(a, b) == naive_levenshtein(a, b)

    @given(st.text(alphabet="ab", max_size=8),
           st.text(alphabet="ab", max_size=8))
    def test_symmetry(self, a, b):
        assert edit_distance(a, b) == edit_distance(b, a)

    @settings(max_examples=50)
    @given(st.text(alphabet="ab", max_size=6),
           st.text(alphabet="ab", max_size=6),
           st.text(alphabet="ab", max_size=6))
    def test_triangle_inequality(self, a, b, c):
        assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


class TestTokenize:
    def test_case_fold_and_punctuation(self):
        assert tokenize("Hello, World!") == ["hello", "world"]

    def test_inner_punctuation_kept(self):
        assert tokenize("don't stop") == ["don't", "stop"]

    def test_pure_punctuation_dropped(self):
        assert tokenize("a -- b") == ["a", "b"]


class TestWer:
    def test_identity(self):
        assert wer("the cat sat", "the cat sat") == 0.0

    def test_sub_plus_deletion(self):
        # 1 substitution + 1 deletion over 4 reference words
        assert wer("a b c d", "a x c") == 0.5

    def test_all_deleted(self):
        assert wer("hello", "") == 1.0

    def test_accepts_presplit_sequences(self):
        assert wer(["a", "b"], ["a", "b"]) == 0.0

    def test_can_exceed_one(self):
        assert wer("a", "x y z") == 3.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            wer("", "something")
        with pytest.raises(ValueError):
            wer("...", "something")  # tokenizes to nothing

    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=8))
    def test_identity_property(self, words):
        assert wer(words, list(words)) == 0.0


class TestCer:
    def test_identity(self):
        assert cer("abc", "abc") == 0.0

    def test_one_sub(self):
        assert cer("abc", "axc") == pytest.approx(1 / 3)

    def test_all_deleted(self):
        assert cer("ab", "") == 1.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            cer("", "x")


class TestTranscript:
    def test_mean_confidence(self):
        t = Transcript((TranscriptWord("a", 0.5), TranscriptWord("b", 0.7)))
        assert mean_confidence(t) == pytest.approx(0.6)

    def test_constant_mean(self):
        t = Transcript(tuple(TranscriptWord("w", 0.7751) for _ in range(100)))
        assert mean_confidence(t) == pytest.approx(0.7751)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mean_confidence(Transcript(()))

    def test_confidence_range_enforced(self):
        with pytest.raises(ValueError):
            Transcript((TranscriptWord("a", 1.5),))

    def test_json_shape(self):
        t = Transcript((TranscriptWord("hi", 1.0),))
        assert t.to_json_dict() == {"words": [{"text": "hi", "conf": 1.0}]}


class TestErrorReport:
    def test_counts_and_values(self):
        t = Transcript((TranscriptWord("the", 0.9), TranscriptWord("cat", 0.7)))
        rep = error_report("the cat sat", t)
        assert rep.n_ref_words == 3
        assert rep.n_hyp_words == 2
        assert rep.wer == pytest.approx(1 / 3)
        assert rep.mean_confidence == pytest.approx(0.8)

    def test_cer_over_joined_tokens(self):
        # reference "ab cd" vs hypothesis "ab" -> 2 of 4 chars missing
        t = Transcript((TranscriptWord("ab", 1.0),))
        rep = error_report("ab cd", t)
        assert rep.cer == pytest.approx(0.5)

    def test_empty_transcript_scores_total_loss(self):
        rep = error_report("abc def", Transcript(()))
        assert rep.wer == 1.0
        assert rep.cer == 1.0
        assert rep.mean_confidence == 0.0

    def test_json_keys(self):
        rep = ErrorReport(0.1, 0.2, 0.9, 10, 9)
        assert set(rep.to_json_dict()) == {
            "wer", "cer", "mean_confidence", "n_ref_words", "n_hyp_words"}


class TestPairedPermutationTest:
    def test_equal_samples_give_p_one(self):
        r = paired_permutation_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.p_value == 1.0
        assert r.statistic == 0.0

    def test_exhaustive_example(self):
        # 16 sign assignments; only the two all-same-sign ones reach |1|
        r = paired_permutation_test([0, 0, 0, 0], [1, 1, 1, 1])
        assert r.p_value == pytest.approx(2 / 16)
        assert r.permutations == 16
        assert "exact" in r.method

    def test_statistic_is_mean_difference(self):
        r = paired_permutation_test([2.0, 4.0], [1.0, 1.0])
        assert r.statistic == pytest.approx(2.0)

    def test_sampled_mode_uses_add_one_rule(self):
        a = list(range(20))
        b = [x + 0.01 for x in a]
        r = paired_permutation_test(a, b, permutations=200, seed=5)
        assert "sampled" in r.method
        assert r.permutations == 200
        # (count+1)/(201) is always a multiple of 1/201
        assert (r.p_value * 201) == pytest.approx(round(r.p_value * 201))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            paired_permutation_test([1, 2], [1, 2, 3])

    def test_single_pair_rejected(self):
        with pytest.raises(ValueError):
            paired_permutation_test([1], [2])

    def test_sampled_deterministic_for_seed(self):
        a = np.random.default_rng(0).normal(size=25).tolist()
        b = np.random.default_rng(1).normal(size=25).tolist()
        r1 = paired_permutation_test(a, b, permutations=500, seed=99)
        r2 = paired_permutation_test(a, b, permutations=500, seed=99)
        assert r1.p_value == r2.p_value

    def test_null_calibration(self):
        """Same-distribution draws should rarely look significant."""
        ok = 0
        trials = 40
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            a = rng.normal(size=12)
            b = rng.normal(size=12)
            r = paired_permutation_test(a.tolist(), b.tolist(),
                                        permutations=2000, seed=seed)
            assert 0.0 < r.p_value <= 1.0
            if r.p_value > 0.01:
                ok += 1
        assert ok >= 0.95 * trials

    @settings(max_examples=40)
    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=8))
    def test_p_value_in_unit_interval(self, a):
        b = [x + 0.5 for x in a]
        r = paired_permutation_test(a, b, permutations=64)
        assert 0.0 < r.p_value <= 1.0
