"""End-to-end composition of the grading pipeline over a run artifact."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import clusterer, grader, reportgen, text_pipeline, vectorizer
from .corpus_io import Dataset, RunArtifact
from .grader import UnderdeterminedFitError

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    dataset_path: str = ""
    dataset_format: str = "canonical-csv"
    questions: list[str] | None = None
    stopwords_path: str | None = None
    spellmap_path: str | None = None
    user_extra: list[str] = field(default_factory=list)
    min_df_fraction: float = 0.10
    k: int | None = None  # None -> elbow selection
    k_max: int = 8
    restarts: int = 10
    max_iterations: int = 200
    seed: int = 42

    def to_dict(self) -> dict:
        return {
            "dataset_path": self.dataset_path,
            "dataset_format": self.dataset_format,
            "questions": self.questions,
            "stopwords_path": self.stopwords_path,
            "spellmap_path": self.spellmap_path,
            "user_extra": list(self.user_extra),
            "min_df_fraction": self.min_df_fraction,
            "k": self.k,
            "k_max": self.k_max,
            "restarts": self.restarts,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
        }


def _policies(
    question_text: str, config: PipelineConfig
) -> tuple[text_pipeline.StopWordPolicy, text_pipeline.StopWordPolicy]:
    """(grading policy, clustering policy): only the latter strips question words."""
    base = text_pipeline.load_stop_words(config.stopwords_path)
    smap = text_pipeline.load_spelling_map(config.spellmap_path)
    extra = frozenset(w.lower() for w in config.user_extra)
    grading = text_pipeline.make_policy("", base, extra, smap)
    clustering = text_pipeline.make_policy(question_text, base, extra, smap)
    return grading, clustering


def selected_questions(dataset: Dataset, config: PipelineConfig) -> list[str]:
    if config.questions:
        return [q for q in config.questions]
    return [q.question_id for q in dataset.questions]


def run_cluster_stage(run: RunArtifact, config: PipelineConfig) -> None:
    """Preprocess, vectorize and cluster each selected question's answers."""
    for qid in selected_questions(run.dataset, config):
        question = run.dataset.question(qid)
        answers = run.dataset.answers_for(qid)
        if not answers:
            log.warning("question %s: no answers, skipping", qid)
            continue
        _, cluster_policy = _policies(question.question_text, config)
        docs = [
            text_pipeline.preprocess(a.text, cluster_policy, source_id=a.answer_id)
            for a in answers
        ]
        vocab = vectorizer.build_vocabulary(docs, config.min_df_fraction)
        vectors = [
            vectorizer.l2_normalize(vectorizer.vectorize_tf(doc, vocab)) for doc in docs
        ]

        if config.k is not None:
            k = config.k
            curve = None
        else:
            k_max = min(config.k_max, len(vectors))
            base_cfg = clusterer.KMeansConfig(
                k=1,
                restarts=config.restarts,
                max_iterations=config.max_iterations,
                seed=config.seed,
            )
            k, curve = clusterer.select_k_elbow(vectors, k_max, base_cfg)
        clusters = clusterer.run_kmeans(
            vectors,
            clusterer.KMeansConfig(
                k=k,
                restarts=config.restarts,
                max_iterations=config.max_iterations,
                seed=config.seed,
            ),
        )
        tm_by_id = {a.answer_id: a.tm for a in answers}
        clusterer.label_clusters(clusters, tm_by_id)

        run.put_stage(qid, "vocabulary", vocab.to_dict())
        run.put_stage(qid, "vectors", {"vectors": [v.to_dict() for v in vectors]})
        doc = clusters.to_dict()
        if curve is not None:
            doc["elbow_curve"] = [[k_, e] for k_, e in curve]
        run.put_stage(qid, "clusters", doc)
        run.put_stage(
            qid,
            "frequencies",
            {
                "with_question_words": _freq_doc(question, answers, config, strip_question=False),
                "without_question_words": reportgen.word_frequencies(docs).to_dict(),
            },
        )
        log.info("question %s: k=%d distortion=%.6f", qid, k, clusters.final_distortion)


def _freq_doc(question, answers, config: PipelineConfig, strip_question: bool) -> dict:
    grading, clustering = _policies(question.question_text, config)
    policy = clustering if strip_question else grading
    docs = [
        text_pipeline.preprocess(a.text, policy, source_id=a.answer_id) for a in answers
    ]
    return reportgen.word_frequencies(docs).to_dict()


def run_grade_stage(run: RunArtifact, config: PipelineConfig) -> None:
    """Score answers against the model vocabulary and fit the mark model."""
    for qid in selected_questions(run.dataset, config):
        question = run.dataset.question(qid)
        answers = run.dataset.answers_for(qid)
        if not answers:
            continue
        grading_policy, _ = _policies(question.question_text, config)
        vocab = grader.extract_model_vocabulary(
            qid, question.model_answer_text, grading_policy
        )
        log.info("question %s: model vocabulary size V=%d", qid, vocab.size)
        docs = [
            text_pipeline.preprocess(a.text, grading_policy, source_id=a.answer_id)
            for a in answers
        ]
        scores = [grader.hamming_distance(doc, vocab) for doc in docs]
        grade_pairs = {a.answer_id: (a.grade1, a.grade2) for a in answers}
        tms = [a.tm for a in answers]

        run.put_stage(qid, "model_vocabulary", vocab.to_dict())
        run.put_stage(qid, "scores", {"scores": [s.to_dict() for s in scores]})

        stats = grader.agreement_matrix(
            [(a.grade1, a.grade2) for a in answers],
            distances=[s.hamming for s in scores] if len(answers) >= 2 else None,
        ) if len(answers) >= 2 else None
        if stats is not None:
            run.put_stage(
                qid,
                "stats",
                {
                    "pearson_teacher": stats.pearson_teacher,
                    "pearson_distance_grade1": stats.pearson_distance_grade1,
                    "pearson_distance_grade2": stats.pearson_distance_grade2,
                    "agreement_matrix": [
                        [g1, g2, c] for (g1, g2), c in sorted(stats.agreement_matrix.items())
                    ],
                    "regression_mse": stats.regression_mse,
                },
            )

        try:
            fit = grader.fit_mm(scores, tms, question_id=qid)
        except UnderdeterminedFitError as e:
            log.warning("question %s: %s", qid, e)
            run.put_stage(qid, "fit", {"error": str(e)})
            continue
        fit.mse_tm = grader.tm_baseline([(a.grade1, a.grade2) for a in answers])
        fit.per_distance_errors = grader.per_distance_errors(scores, grade_pairs, fit)
        verdict, reasons = grader.classify_reliability(
            fit, _mean_tm_by_h(scores, grade_pairs)
        )
        fit.fit_diagnostics["reliability_reasons"] = reasons
        doc = fit.to_dict()
        doc["verdict"] = verdict
        run.put_stage(qid, "fit", doc)
        log.info(
            "question %s: beta=(%.5f, %.5f, %.5f) mse_mm=%.5f mse_tm=%.5f %s",
            qid, fit.beta0, fit.beta1, fit.beta2, fit.mse_mm, fit.mse_tm, verdict,
        )


def _mean_tm_by_h(scores, grade_pairs) -> dict[int, float]:
    acc: dict[int, list[float]] = {}
    for s in scores:
        g1, g2 = grade_pairs[s.answer_id]
        acc.setdefault(s.hamming, []).append((g1 + g2) / 2.0)
    return {h: sum(v) / len(v) for h, v in acc.items()}


def run_report_stage(run: RunArtifact, config: PipelineConfig, out_dir: str | Path) -> None:
    """Emit the report bundle from stored stage outputs, never recomputing."""
    out_dir = Path(out_dir)
    fits = []
    for qid in selected_questions(run.dataset, config):
        stages = run.stages.get(qid, {})
        qdir = out_dir / qid
        qdir.mkdir(parents=True, exist_ok=True)
        freq = stages.get("frequencies")
        if freq:
            for key, scope in (
                ("with_question_words", "corpus_all"),
                ("without_question_words", "corpus_filtered"),
            ):
                table = reportgen.FrequencyTable(
                    scope=scope, rows=tuple((t, c) for t, c in freq[key]["rows"])
                )
                reportgen.emit_frequency_table(table, qdir)
        clusters_doc = stages.get("clusters")
        vectors_doc = stages.get("vectors")
        if clusters_doc and vectors_doc:
            clusters = clusterer.ClusterSet.from_dict(clusters_doc)
            vectors = [
                vectorizer.FeatureVector.from_dict(v) for v in vectors_doc["vectors"]
            ]
            reportgen.emit_cluster_report(clusters, vectors, qdir)
        scores_doc = stages.get("scores")
        fit_doc = stages.get("fit")
        if scores_doc:
            scores = [
                grader.SimilarityScore.from_dict(s) for s in scores_doc["scores"]
            ]
            grade_pairs = {
                a.answer_id: (a.grade1, a.grade2) for a in run.dataset.answers_for(qid)
            }
            fit = None
            if fit_doc and "error" not in fit_doc:
                fit = grader.MarkModelFit.from_dict(fit_doc)
                fits.append(fit)
                series = reportgen.mark_vs_distance_series(scores, grade_pairs, fit)
                reportgen.emit_series(series, "mark_vs_distance", qdir)
                mm_s, tm_s = reportgen.error_vs_distance_series(fit.per_distance_errors)
                reportgen.emit_series([mm_s, tm_s], "error_vs_distance", qdir)
            reportgen.emit_similarity_report(scores, grade_pairs, fit, qdir)
    if fits:
        out_dir.mkdir(parents=True, exist_ok=True)
        reportgen.emit_fit_report(fits, out_dir)
