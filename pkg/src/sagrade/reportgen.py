"""Report emission: word-frequency tables, cluster exports, and plot-ready
mark/error curves, as CSV with JSON mirrors."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clusterer import ClusterSet
from .grader import MarkModelFit, SimilarityScore, mm_evaluate, tm_average
from .text_pipeline import TokenizedDoc
from .vectorizer import FeatureVector


@dataclass(frozen=True)
class FrequencyTable:
    """Token counts within a scope, descending count then lexicographic."""

    scope: str
    rows: tuple[tuple[str, int], ...]

    def to_dict(self) -> dict:
        return {"scope": self.scope, "rows": [[t, c] for t, c in self.rows]}


@dataclass(frozen=True)
class PlotSeries:
    name: str
    points: tuple[tuple[float, float], ...]
    kind: str  # scatter | curve | bar

    def __post_init__(self):
        for x, y in self.points:
            if not (np.isfinite(x) and np.isfinite(y)):
                raise ValueError(f"series {self.name!r}: non-finite point ({x}, {y})")

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "points": [[x, y] for x, y in self.points]}


def word_frequencies(docs: list[TokenizedDoc], scope: str = "corpus") -> FrequencyTable:
    counts: dict[str, int] = {}
    for doc in docs:
        for t in doc.tokens:
            counts[t] = counts.get(t, 0) + 1
    rows = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return FrequencyTable(scope=scope, rows=rows)


def mark_vs_distance_series(
    scores: list[SimilarityScore],
    grade_pairs: dict[str, tuple[float, float]],
    fit: MarkModelFit,
    curve_step: float = 0.1,
) -> list[PlotSeries]:
    """Grade1/Grade2/TM scatters plus the fitted model curve sampled at the
    observed distances and on a dense grid."""
    g1_pts, g2_pts, tm_pts = [], [], []
    for s in sorted(scores, key=lambda s: (s.hamming, s.answer_id)):
        g1, g2 = grade_pairs[s.answer_id]
        g1_pts.append((float(s.hamming), float(g1)))
        g2_pts.append((float(s.hamming), float(g2)))
        tm_pts.append((float(s.hamming), tm_average(g1, g2)))
    observed = sorted({s.hamming for s in scores})
    h_max = observed[-1] if observed else 0
    grid = sorted(set(observed) | {round(x * curve_step, 10) for x in range(int(h_max / curve_step) + 1)})
    mm_pts = [(float(h), mm_evaluate(fit.beta0, fit.beta1, fit.beta2, h)) for h in grid]
    return [
        PlotSeries("Grade1", tuple(g1_pts), "scatter"),
        PlotSeries("Grade2", tuple(g2_pts), "scatter"),
        PlotSeries("TM", tuple(tm_pts), "scatter"),
        PlotSeries("MM", tuple(mm_pts), "curve"),
    ]


def error_vs_distance_series(
    per_distance: dict[int, tuple[float, float]]
) -> tuple[PlotSeries, PlotSeries]:
    hs = sorted(per_distance)
    mm = tuple((float(h), per_distance[h][0]) for h in hs)
    tm = tuple((float(h), per_distance[h][1]) for h in hs)
    return PlotSeries("MM error", mm, "bar"), PlotSeries("TM error", tm, "bar")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")


def emit_frequency_table(table: FrequencyTable, out_dir: Path) -> None:
    name = f"freq_{table.scope}"
    _write_csv(out_dir / f"{name}.csv", ["term", "count"], [[t, c] for t, c in table.rows])
    _write_json(out_dir / f"{name}.json", table.to_dict())


def emit_series(series: list[PlotSeries], stem: str, out_dir: Path) -> None:
    rows = []
    for s in series:
        for x, y in s.points:
            rows.append([s.name, x, y])
    _write_csv(out_dir / f"{stem}.csv", ["series", "x", "y"], rows)
    _write_json(out_dir / f"{stem}.json", [s.to_dict() for s in series])


def emit_cluster_report(
    clusters: ClusterSet, vectors: list[FeatureVector], out_dir: Path
) -> None:
    from .clusterer import export_cluster_rows

    rows = [
        [sid, idx, label, f"{dist:.12g}", str(is_proto).lower()]
        for sid, idx, label, dist, is_proto in export_cluster_rows(clusters, vectors)
    ]
    _write_csv(
        out_dir / "clusters.csv",
        ["source_id", "cluster_index", "label", "distance_to_centroid", "is_prototype"],
        rows,
    )
    _write_json(out_dir / "clusters.json", clusters.to_dict())


def emit_fit_report(fits: list[MarkModelFit], out_dir: Path) -> None:
    rows = [
        [
            f.question_id,
            f"{f.beta0:.12g}",
            f"{f.beta1:.12g}",
            f"{f.beta2:.12g}",
            f"{f.mse_mm:.12g}",
            f"{f.mse_tm:.12g}",
            str(f.reliable).lower(),
        ]
        for f in fits
    ]
    _write_csv(
        out_dir / "fits.csv",
        ["question_id", "beta0", "beta1", "beta2", "mse_mm", "mse_tm", "reliable"],
        rows,
    )
    _write_json(out_dir / "fits.json", [f.to_dict() for f in fits])


def emit_similarity_report(
    scores: list[SimilarityScore],
    grade_pairs: dict[str, tuple[float, float]],
    fit: MarkModelFit | None,
    out_dir: Path,
    name: str = "similarity",
) -> None:
    rows = []
    for s in sorted(scores, key=lambda s: s.answer_id):
        g1, g2 = grade_pairs[s.answer_id]
        pred = (
            f"{mm_evaluate(fit.beta0, fit.beta1, fit.beta2, s.hamming):.12g}"
            if fit
            else ""
        )
        rows.append([s.answer_id, s.matched, s.hamming, tm_average(g1, g2), g1, g2, pred])
    _write_csv(
        out_dir / f"{name}.csv",
        ["answer_id", "n", "h", "tm", "grade1", "grade2", "mm_prediction"],
        rows,
    )
