"""Term-frequency vector space: document-frequency filtered vocabulary and
L2-normalized TF vectors with Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .text_pipeline import TokenizedDoc


class EmptyVocabularyError(ValueError):
    """Every term was filtered out: corpus/config mismatch."""


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class VocabularyIndex:
    """Lexicographically ordered retained terms plus per-term document counts.

    doc_frequency covers all observed terms (retained or not) so the filter is
    auditable; min_df_fraction is the retention threshold that was applied.
    """

    terms: tuple[str, ...]
    doc_frequency: dict[str, int]
    min_df_fraction: float
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def index_of(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "doc_frequency": dict(sorted(self.doc_frequency.items())),
            "min_df_fraction": self.min_df_fraction,
            "n_docs": self.n_docs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VocabularyIndex":
        return cls(
            terms=tuple(d["terms"]),
            doc_frequency={k: int(v) for k, v in d["doc_frequency"].items()},
            min_df_fraction=float(d["min_df_fraction"]),
            n_docs=int(d["n_docs"]),
        )


@dataclass(frozen=True)
class FeatureVector:
    """Dense non-negative vector over a VocabularyIndex."""

    source_id: str
    values: np.ndarray
    is_zero: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "values": self.values.tolist(),
            "is_zero": self.is_zero,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        return cls(d["source_id"], np.asarray(d["values"], dtype=float), bool(d["is_zero"]))


def df_threshold(min_df_fraction: float, n_docs: int) -> int:
    """Minimum document count for retention: ceil(min_df_fraction * n_docs),
    computed exactly to avoid float boundary drift (0.1 * 30 must give 3)."""
    frac = Fraction(str(min_df_fraction)) * n_docs
    return -(-frac.numerator // frac.denominator)


def build_vocabulary(docs: list[TokenizedDoc], min_df_fraction: float = 0.10) -> VocabularyIndex:
    """Index the distinct stems that appear in at least ceil(min_df * |docs|)
    documents, counting each document once per term."""
    if not docs:
        raise ValueError("cannot build a vocabulary from an empty document list")
    df: dict[str, int] = {}
    for doc in docs:
        for term in doc.distinct():
            df[term] = df.get(term, 0) + 1
    threshold = df_threshold(min_df_fraction, len(docs))
    retained = sorted(t for t, c in df.items() if c >= threshold)
    if df and not retained:
        raise EmptyVocabularyError(
            f"all {len(df)} terms fall below the document-frequency threshold {threshold}"
        )
    return VocabularyIndex(
        terms=tuple(retained),
        doc_frequency=df,
        min_df_fraction=min_df_fraction,
        n_docs=len(docs),
    )


def vectorize_tf(doc: TokenizedDoc, vocab: VocabularyIndex) -> FeatureVector:
    """Raw term-frequency vector; out-of-vocabulary tokens are ignored."""
    index = vocab.index_of()
    values = np.zeros(len(vocab), dtype=float)
    for token in doc.tokens:
        i = index.get(token)
        if i is not None:
            values[i] += 1.0
    return FeatureVector(doc.source_id, values, is_zero=not values.any())


def l2_normalize(v: FeatureVector) -> FeatureVector:
    norm = float(np.linalg.norm(v.values))
    if norm == 0.0:
        return FeatureVector(v.source_id, v.values.copy(), is_zero=True)
    return FeatureVector(v.source_id, v.values / norm, is_zero=False)


def euclidean_distance(a: FeatureVector | np.ndarray, b: FeatureVector | np.ndarray) -> float:
    av = a.values if isinstance(a, FeatureVector) else np.asarray(a, dtype=float)
    bv = b.values if isinstance(b, FeatureVector) else np.asarray(b, dtype=float)
    if av.shape != bv.shape:
        raise DimensionMismatchError(f"dimension mismatch: {av.shape} vs {bv.shape}")
    return float(np.sqrt(np.sum((av - bv) ** 2)))


def export_vocabulary_rows(vocab: VocabularyIndex) -> list[tuple[str, int, bool]]:
    """Rows for the `term,doc_frequency,retained` CSV export."""
    retained = set(vocab.terms)
    return [(t, c, t in retained) for t, c in sorted(vocab.doc_frequency.items())]
