import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sagrade.text_pipeline import TokenizedDoc
from sagrade.vectorizer import (
    DimensionMismatchError,
    EmptyVocabularyError,
    FeatureVector,
    build_vocabulary,
    df_threshold,
    euclidean_distance,
    l2_normalize,
    vectorize_tf,
)


def doc(sid, *tokens):
    return TokenizedDoc(sid, tuple(tokens))


def brute_force_filter(docs, min_df):
    """Independent oracle: exact rational threshold on presence counts."""
    from fractions import Fraction

    df = {}
    for d in docs:
        for t in set(d.tokens):
            df[t] = df.get(t, 0) + 1
    thr = Fraction(str(min_df)) * len(docs)
    return sorted(t for t, c in df.items() if Fraction(c) >= thr)


class TestBuildVocabulary:
    def test_threshold_29_docs(self):
        # term in 2 of 29 docs is excluded at 10%, term in 3 is retained
        docs = [doc(f"d{i}", "common") for i in range(29)]
        for i in range(2):
            docs[i] = doc(f"d{i}", "common", "rare2")
        for i in range(3):
            docs[26 + i] = doc(f"d{26+i}", "common", "rare3")
        vocab = build_vocabulary(docs, 0.10)
        assert "rare2" not in vocab.terms
        assert "rare3" in vocab.terms

    def test_exact_integer_boundary(self):
        assert df_threshold(0.1, 30) == 3
        assert df_threshold(0.1, 29) == 3
        assert df_threshold(0.0, 29) == 0
        assert df_threshold(0.5, 4) == 2

    def test_zero_min_df_keeps_everything(self):
        docs = [doc("a", "x"), doc("b", "y")]
        vocab = build_vocabulary(docs, 0.0)
        assert vocab.terms == ("x", "y")

    def test_presence_not_multiplicity(self):
        docs = [doc("a", "x", "x", "x", "x")] + [doc(f"b{i}", "y") for i in range(9)]
        vocab = build_vocabulary(docs, 0.2)
        # x appears in 1 of 10 docs regardless of its 4 occurrences
        assert "x" not in vocab.terms
        assert "y" in vocab.terms

    def test_empty_vocabulary_error(self):
        docs = [doc("a", "x")] + [doc(f"b{i}") for i in range(9)]
        with pytest.raises(EmptyVocabularyError):
            build_vocabulary(docs, 0.5)

    def test_empty_docs_error(self):
        with pytest.raises(ValueError):
            build_vocabulary([], 0.1)

    def test_deterministic_lexicographic_order(self):
        docs = [doc("a", "zebra", "apple", "mango")]
        vocab = build_vocabulary(docs, 0.0)
        assert vocab.terms == ("apple", "mango", "zebra")

    def test_matches_brute_force_oracle_on_random_corpora(self):
        rng = np.random.default_rng(1234)
        alphabet = [f"w{i}" for i in range(20)]
        for trial in range(50):
            n_docs = int(rng.integers(1, 40))
            docs = [
                doc(
                    f"d{i}",
                    *rng.choice(alphabet, size=rng.integers(0, 12)).tolist(),
                )
                for i in range(n_docs)
            ]
            min_df = float(rng.choice([0.0, 0.05, 0.1, 0.25, 0.5]))
            expected = brute_force_filter(docs, min_df)
            if not expected and any(d.tokens for d in docs):
                with pytest.raises(EmptyVocabularyError):
                    build_vocabulary(docs, min_df)
                continue
            vocab = build_vocabulary(docs, min_df)
            assert list(vocab.terms) == expected, f"trial {trial}"


class TestVectorizeTf:
    def test_direct_count(self):
        vocab = build_vocabulary([doc("v", "a", "b", "c")], 0.0)
        v = vectorize_tf(doc("d", "a", "a", "b"), vocab)
        assert v.values.tolist() == [2.0, 1.0, 0.0]
        assert not v.is_zero

    def test_out_of_vocabulary_ignored(self):
        vocab = build_vocabulary([doc("v", "a")], 0.0)
        v = vectorize_tf(doc("d", "z", "q"), vocab)
        assert v.values.tolist() == [0.0]
        assert v.is_zero

    def test_token_order_invariant(self):
        vocab = build_vocabulary([doc("v", "a", "b", "c")], 0.0)
        v1 = l2_normalize(vectorize_tf(doc("d", "a", "b", "a"), vocab))
        v2 = l2_normalize(vectorize_tf(doc("d", "b", "a", "a"), vocab))
        assert np.array_equal(v1.values, v2.values)

    def test_duplication_scale_invariance(self):
        vocab = build_vocabulary([doc("v", "a", "b", "c")], 0.0)
        once = l2_normalize(vectorize_tf(doc("d", "a", "b"), vocab))
        twice = l2_normalize(vectorize_tf(doc("d", "a", "a", "b", "b"), vocab))
        assert np.allclose(once.values, twice.values, atol=1e-15)


class TestL2Normalize:
    def test_three_four_five(self):
        v = l2_normalize(FeatureVector("x", [3.0, 4.0]))
        assert v.values.tolist() == [0.6, 0.8]

    def test_zero_vector_flagged(self):
        v = l2_normalize(FeatureVector("x", [0.0, 0.0, 0.0]))
        assert v.values.tolist() == [0.0, 0.0, 0.0]
        assert v.is_zero

    @settings(max_examples=200)
    @given(
        st.lists(
            st.floats(min_value=-100, max_value=100, allow_nan=False),
            min_size=1,
            max_size=10,
        ).filter(lambda xs: any(abs(x) > 1e-6 for x in xs))
    )
    def test_unit_norm_property(self, values):
        v = l2_normalize(FeatureVector("x", values))
        assert abs(np.linalg.norm(v.values) - 1.0) < 1e-12


class TestEuclideanDistance:
    def test_unit_axes(self):
        assert math.isclose(
            euclidean_distance(FeatureVector("a", [1, 0]), FeatureVector("b", [0, 1])),
            math.sqrt(2),
        )

    def test_identity(self):
        v = FeatureVector("a", [1.5, 2.5, 3.5])
        assert euclidean_distance(v, v) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            euclidean_distance(FeatureVector("a", [1]), FeatureVector("b", [1, 2]))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            a, b, c = (FeatureVector(s, rng.normal(size=6)) for s in "abc")
            assert euclidean_distance(a, c) <= (
                euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12
            )

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        a = FeatureVector("a", rng.normal(size=4))
        b = FeatureVector("b", rng.normal(size=4))
        assert euclidean_distance(a, b) == euclidean_distance(b, a)
