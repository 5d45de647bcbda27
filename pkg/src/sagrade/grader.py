"""Similarity scoring against the model answer and the parametric mark model.

The predicted mark is y = beta0 + beta1 * h**beta2 where h is the count of
model-vocabulary stems missing from the student answer.  The human baseline
is the deviation of individual teacher grades from their per-answer average.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .text_pipeline import StopWordPolicy, TokenizedDoc, preprocess

GRADE_MIN = 0.0
GRADE_MAX = 5.0

BETA2_GRID = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0)


class UnderdeterminedFitError(ValueError):
    """Fewer than 3 distinct distances: the 3-parameter model is underdetermined."""


class UndefinedCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class ModelVocabulary:
    question_id: str
    stems: frozenset[str]

    @property
    def size(self) -> int:
        return len(self.stems)

    def to_dict(self) -> dict:
        return {"question_id": self.question_id, "stems": sorted(self.stems)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelVocabulary":
        return cls(d["question_id"], frozenset(d["stems"]))


@dataclass(frozen=True)
class SimilarityScore:
    answer_id: str
    matched: int
    hamming: int

    def to_dict(self) -> dict:
        return {"answer_id": self.answer_id, "matched": self.matched, "hamming": self.hamming}

    @classmethod
    def from_dict(cls, d: dict) -> "SimilarityScore":
        return cls(d["answer_id"], int(d["matched"]), int(d["hamming"]))


@dataclass
class MarkModelFit:
    question_id: str
    beta0: float
    beta1: float
    beta2: float
    mse_mm: float
    mse_tm: float
    per_distance_errors: dict[int, tuple[float, float]] = field(default_factory=dict)
    reliable: bool = False
    converged: bool = True
    fit_diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "beta0": self.beta0,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "mse_mm": self.mse_mm,
            "mse_tm": self.mse_tm,
            "per_distance_errors": {
                str(h): list(v) for h, v in sorted(self.per_distance_errors.items())
            },
            "reliable": self.reliable,
            "converged": self.converged,
            "fit_diagnostics": self.fit_diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkModelFit":
        return cls(
            question_id=d["question_id"],
            beta0=float(d["beta0"]),
            beta1=float(d["beta1"]),
            beta2=float(d["beta2"]),
            mse_mm=float(d["mse_mm"]),
            mse_tm=float(d["mse_tm"]),
            per_distance_errors={
                int(h): (float(v[0]), float(v[1]))
                for h, v in d["per_distance_errors"].items()
            },
            reliable=bool(d["reliable"]),
            converged=bool(d["converged"]),
            fit_diagnostics=d.get("fit_diagnostics", {}),
        )


@dataclass
class GradeStats:
    pearson_teacher: float
    pearson_distance_grade1: float | None
    pearson_distance_grade2: float | None
    agreement_matrix: dict[tuple[float, float], int]
    regression_mse: dict[str, float] = field(default_factory=dict)

    def diagonal_count(self) -> int:
        return sum(c for (g1, g2), c in self.agreement_matrix.items() if g1 == g2)

    def total(self) -> int:
        return sum(self.agreement_matrix.values())


def extract_model_vocabulary(
    question_id: str, model_answer_text: str, policy: StopWordPolicy
) -> ModelVocabulary:
    """Distinct stems of the preprocessed model answer."""
    doc = preprocess(model_answer_text, policy, source_id=question_id)
    if not doc.tokens:
        raise ValueError(
            f"model answer for question {question_id!r} is empty after preprocessing"
        )
    return ModelVocabulary(question_id, doc.distinct())


def hamming_distance(answer: TokenizedDoc, vocab: ModelVocabulary) -> SimilarityScore:
    """h = V - n where n counts model-vocabulary stems present in the answer."""
    n = len(answer.distinct() & vocab.stems)
    return SimilarityScore(answer.source_id, matched=n, hamming=vocab.size - n)


def mm_evaluate(beta0: float, beta1: float, beta2: float, h: float) -> float:
    """Predicted mark beta0 + beta1 * h**beta2, with 0**beta2 defined as 0."""
    if beta2 <= 0:
        raise ValueError(f"beta2 must be positive, got {beta2}")
    if h < 0:
        raise ValueError(f"distance must be non-negative, got {h}")
    term = 0.0 if h == 0 else float(h) ** beta2
    return beta0 + beta1 * term


def clamp_mark(mark: float) -> float:
    return min(max(mark, GRADE_MIN), GRADE_MAX)


def _mm_mse(beta: np.ndarray, h: np.ndarray, tm: np.ndarray) -> float:
    b0, b1, b2 = beta
    if b2 <= 0:
        return np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        pred = b0 + b1 * np.where(h == 0, 0.0, np.power(h, b2, where=h > 0))
    if not np.all(np.isfinite(pred)):
        return np.inf
    return float(np.mean((pred - tm) ** 2))


def _linear_init(h: np.ndarray, tm: np.ndarray, beta2: float) -> tuple[float, float]:
    """Least-squares beta0, beta1 at fixed beta2."""
    x = np.where(h == 0, 0.0, np.power(h.astype(float), beta2))
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, tm, rcond=None)
    return float(coef[0]), float(coef[1])


def fit_mm(
    scores: list[SimilarityScore],
    tm: list[float],
    question_id: str = "",
    max_evals: int = 20000,
) -> MarkModelFit:
    """Fit (beta0, beta1, beta2) minimizing mean squared error against TM.

    Multi-start: for each beta2 on a fixed grid, initialize beta0/beta1 by
    linear least squares, then refine all three with Nelder-Mead; the best
    final MSE wins.
    """
    if len(scores) != len(tm):
        raise ValueError("scores and TM lists differ in length")
    h = np.array([s.hamming for s in scores], dtype=float)
    y = np.array(tm, dtype=float)
    if len(set(h.tolist())) < 3:
        raise UnderdeterminedFitError(
            f"need >= 3 distinct distances, got {sorted(set(h.tolist()))}"
        )

    best = None
    evals_per_start = max(max_evals // len(BETA2_GRID), 2000)
    for beta2 in BETA2_GRID:
        start = np.array([*_linear_init(h, y, beta2), beta2])
        res = minimize(
            _mm_mse,
            start,
            args=(h, y),
            method="Nelder-Mead",
            options={
                "maxfev": evals_per_start,
                "xatol": 1e-12,
                "fatol": 1e-14,
            },
        )
        # the refinement must never lose to its own initialization
        start_mse = _mm_mse(start, h, y)
        if res.fun <= start_mse:
            cand, cand_mse, cand_ok = res.x, float(res.fun), bool(res.success)
        else:
            cand, cand_mse, cand_ok = start, start_mse, False
        if best is None or cand_mse < best[0]:
            best = (cand_mse, cand, res, cand_ok)

    mse, beta, res, converged = best
    fit = MarkModelFit(
        question_id=question_id,
        beta0=float(beta[0]),
        beta1=float(beta[1]),
        beta2=float(beta[2]),
        mse_mm=float(mse),
        mse_tm=float("nan"),
        converged=converged,
        fit_diagnostics={
            "n_answers": len(scores),
            "distinct_distances": sorted(set(int(v) for v in h)),
            "nfev": int(res.nfev),
            "final_simplex_spread": float(res.fun),
        },
    )
    fit.reliable = fit.beta2 > 1.0
    return fit


def tm_average(grade1: float, grade2: float) -> float:
    return (grade1 + grade2) / 2.0


def tm_baseline(grade_pairs: list[tuple[float, float]]) -> float:
    """Mean squared deviation of individual teacher grades from the per-answer
    average: (1/2N) sum_i [(g1-TM)^2 + (g2-TM)^2]."""
    if not grade_pairs:
        return 0.0
    total = 0.0
    for g1, g2 in grade_pairs:
        avg = tm_average(g1, g2)
        total += (g1 - avg) ** 2 + (g2 - avg) ** 2
    return total / (2 * len(grade_pairs))


def pearson(x: list[float], y: list[float]) -> float:
    if len(x) != len(y):
        raise ValueError("length mismatch")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.std(xa) == 0 or np.std(ya) == 0:
        raise UndefinedCorrelationError("zero variance in an argument")
    return float(np.corrcoef(xa, ya)[0, 1])


def _regression_mse(x: np.ndarray, y: np.ndarray) -> float:
    """MSE of the one-variable least-squares line y ~ a + b x."""
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(np.mean(resid**2))


def per_distance_errors(
    scores: list[SimilarityScore],
    grade_pairs: dict[str, tuple[float, float]],
    fit: MarkModelFit,
) -> dict[int, tuple[float, float]]:
    """Per-distance MSE of the model against TM and of individual teacher
    grades against TM."""
    by_h: dict[int, list[str]] = {}
    for s in scores:
        by_h.setdefault(s.hamming, []).append(s.answer_id)
    out: dict[int, tuple[float, float]] = {}
    for h, ids in sorted(by_h.items()):
        pred = mm_evaluate(fit.beta0, fit.beta1, fit.beta2, h)
        mm_errs = []
        tm_errs = []
        for aid in ids:
            g1, g2 = grade_pairs[aid]
            avg = tm_average(g1, g2)
            mm_errs.append((pred - avg) ** 2)
            tm_errs.extend([(g1 - avg) ** 2, (g2 - avg) ** 2])
        out[h] = (float(np.mean(mm_errs)), float(np.mean(tm_errs)))
    return out


def classify_reliability(
    fit: MarkModelFit, mean_tm_by_h: dict[int, float] | None = None
) -> tuple[str, list[str]]:
    """Unreliable iff beta2 <= 1; the grade-vs-distance trend supplements the
    verdict when distance data is available."""
    reasons = [f"beta2 = {fit.beta2:.5f} ({'>' if fit.beta2 > 1 else '<='} 1)"]
    verdict = "reliable" if fit.beta2 > 1.0 else "unreliable"
    if mean_tm_by_h and len(mean_tm_by_h) >= 2:
        hs = sorted(mean_tm_by_h)
        tms = [mean_tm_by_h[h] for h in hs]
        non_increasing = all(a >= b - 1e-12 for a, b in zip(tms, tms[1:]))
        if non_increasing:
            reasons.append("mean TM is non-increasing in distance")
        else:
            reasons.append("mean TM is not a decreasing function of distance")
    return verdict, reasons


def agreement_matrix(
    grade_pairs: list[tuple[float, float]],
    distances: list[int] | None = None,
) -> GradeStats:
    """Teacher agreement counts plus the correlation statistics."""
    counts: dict[tuple[float, float], int] = {}
    for g1, g2 in grade_pairs:
        key = (float(g1), float(g2))
        counts[key] = counts.get(key, 0) + 1
    g1s = [p[0] for p in grade_pairs]
    g2s = [p[1] for p in grade_pairs]
    try:
        teacher_corr = pearson(g1s, g2s)
    except UndefinedCorrelationError:
        teacher_corr = float("nan")
    stats = GradeStats(
        pearson_teacher=teacher_corr,
        pearson_distance_grade1=None,
        pearson_distance_grade2=None,
        agreement_matrix=counts,
    )
    stats.regression_mse["teacher2_on_teacher1"] = _regression_mse(
        np.asarray(g1s, dtype=float), np.asarray(g2s, dtype=float)
    )
    if distances is not None:
        hs = np.asarray(distances, dtype=float)
        try:
            stats.pearson_distance_grade1 = pearson(distances, g1s)
            stats.pearson_distance_grade2 = pearson(distances, g2s)
        except UndefinedCorrelationError:
            stats.pearson_distance_grade1 = float("nan")
            stats.pearson_distance_grade2 = float("nan")
        stats.regression_mse["grade1_on_distance"] = _regression_mse(
            hs, np.asarray(g1s, dtype=float)
        )
        stats.regression_mse["grade2_on_distance"] = _regression_mse(
            hs, np.asarray(g2s, dtype=float)
        )
    return stats
