"""Teacher review HTTP service.

Exposes cluster summaries and flagged answers for a stored run, accepts
cluster-level feedback that propagates to members, and per-answer overrides
that always win.  All mutations append to a per-run audit log, which is the
source of truth: replaying it from empty state reproduces the review state.
"""

from __future__ import annotations

import io
import csv
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from . import clusterer, grader, reportgen, text_pipeline
from .corpus_io import RunArtifact, RunNotFoundError, load_run

FLAG_MIXED = "mixed-cluster"
FLAG_FAR = "far-from-centroid"
FLAG_GAP = "model-teacher-gap"

DEFAULT_FAR_PERCENTILE = 90.0
DEFAULT_GAP_THRESHOLD = 1.0


class ClusterFeedbackIn(BaseModel):
    mark: float | None = None
    feedback_text: str = ""
    version: int
    actor: str = "teacher"


class OverrideIn(BaseModel):
    mark: float
    note: str = ""
    version: int
    actor: str = "teacher"


@dataclass
class ReviewState:
    """Derived state: replay of the audit log."""

    cluster_feedback: dict[str, dict] = field(default_factory=dict)
    overrides: dict[str, dict] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    version: int = 0

    def apply(self, event: dict) -> None:
        self.events.append(event)
        self.version += 1
        if event["action"] == "cluster_feedback":
            self.cluster_feedback[event["cluster_id"]] = {
                "mark": event["mark"],
                "feedback_text": event["feedback_text"],
            }
        elif event["action"] == "override":
            self.overrides[event["answer_id"]] = {
                "mark": event["mark"],
                "note": event["note"],
            }

    @classmethod
    def replay(cls, events: list[dict]) -> "ReviewState":
        state = cls()
        for e in events:
            state.apply(e)
        return state


class _RunContext:
    """Cached run artifact plus its review state and a single-writer lock."""

    def __init__(self, run: RunArtifact, review_path: Path):
        self.run = run
        self.review_path = review_path
        self.lock = threading.Lock()
        events = []
        if review_path.exists():
            events = [
                json.loads(line)
                for line in review_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        self.state = ReviewState.replay(events)

    def append(self, event: dict) -> None:
        with open(self.review_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")
        self.state.apply(event)


def _question_for_cluster(run: RunArtifact, cluster_id: str) -> tuple[str, int]:
    qid, _, idx = cluster_id.rpartition(".")
    if not qid:
        raise HTTPException(422, f"cluster id {cluster_id!r} must look like '<question>.<index>'")
    try:
        return qid, int(idx)
    except ValueError:
        raise HTTPException(422, f"bad cluster index in {cluster_id!r}")


def _mm_prediction(run: RunArtifact, qid: str, answer_id: str) -> float | None:
    fit_doc = run.get_stage(qid, "fit")
    scores_doc = run.get_stage(qid, "scores")
    if not fit_doc or "error" in fit_doc or not scores_doc:
        return None
    h = next(
        (s["hamming"] for s in scores_doc["scores"] if s["answer_id"] == answer_id),
        None,
    )
    if h is None:
        return None
    raw = grader.mm_evaluate(fit_doc["beta0"], fit_doc["beta1"], fit_doc["beta2"], h)
    return grader.clamp_mark(raw)


def _cluster_summaries(run: RunArtifact, qid: str) -> list[dict]:
    doc = run.get_stage(qid, "clusters")
    if doc is None:
        raise HTTPException(404, f"no clustering output for question {qid!r}")
    clusters = clusterer.ClusterSet.from_dict(doc)
    scores_doc = run.get_stage(qid, "scores") or {"scores": []}
    h_by_id = {s["answer_id"]: s["hamming"] for s in scores_doc["scores"]}
    answers = {a.answer_id: a for a in run.dataset.answers_for(qid)}

    vectors_doc = run.get_stage(qid, "vectors")
    dists: dict[str, float] = {}
    if vectors_doc:
        for v in vectors_doc["vectors"]:
            j = clusters.assignments.get(v["source_id"])
            if j is not None:
                dists[v["source_id"]] = float(
                    np.linalg.norm(np.asarray(v["values"]) - clusters.centroids[j])
                )

    out = []
    for j in range(clusters.k):
        member_ids = clusters.members(j)
        proto = clusters.prototypes.get(j)
        freq: dict[str, int] = {}
        members = []
        for sid in member_ids:
            a = answers.get(sid)
            members.append(
                {
                    "answer_id": sid,
                    "text": a.text if a else "",
                    "h": h_by_id.get(sid),
                    "tm": a.tm if a else None,
                    "mm_prediction": _mm_prediction(run, qid, sid),
                    "distance_to_centroid": dists.get(sid),
                }
            )
        out.append(
            {
                "cluster_id": f"{qid}.{j}",
                "index": j,
                "label": clusters.labels.get(j, ""),
                "size": len(member_ids),
                "prototype_id": proto,
                "prototype_text": answers[proto].text if proto in answers else "",
                "frequency_table": _cluster_frequencies(run, qid, member_ids),
                "members": members,
            }
        )
    return out


def _cluster_frequencies(run: RunArtifact, qid: str, member_ids: list[str]) -> list:
    question = run.dataset.question(qid)
    policy = text_pipeline.make_policy(question.question_text)
    docs = [
        text_pipeline.preprocess(a.text, policy, source_id=a.answer_id)
        for a in run.dataset.answers_for(qid)
        if a.answer_id in set(member_ids)
    ]
    table = reportgen.word_frequencies(docs, scope="cluster")
    return [[t, c] for t, c in table.rows]


def _flag_queue(run: RunArtifact, qid: str, state: ReviewState,
                far_percentile: float, gap_threshold: float) -> list[dict]:
    doc = run.get_stage(qid, "clusters")
    scores_doc = run.get_stage(qid, "scores")
    if doc is None or scores_doc is None:
        raise HTTPException(404, f"clustering and grading stages required for {qid!r}")
    clusters = clusterer.ClusterSet.from_dict(doc)
    answers = {a.answer_id: a for a in run.dataset.answers_for(qid)}

    reasons: dict[str, list[str]] = {}

    for j in range(clusters.k):
        if clusters.labels.get(j) == clusterer.MIXED:
            for sid in clusters.members(j):
                reasons.setdefault(sid, []).append(FLAG_MIXED)

    vectors_doc = run.get_stage(qid, "vectors")
    if vectors_doc:
        by_cluster: dict[int, list[tuple[str, float]]] = {}
        for v in vectors_doc["vectors"]:
            j = clusters.assignments.get(v["source_id"])
            if j is None:
                continue
            d = float(np.linalg.norm(np.asarray(v["values"]) - clusters.centroids[j]))
            by_cluster.setdefault(j, []).append((v["source_id"], d))
        for j, pairs in by_cluster.items():
            if len(pairs) < 2:
                continue
            cutoff = float(np.percentile([d for _, d in pairs], far_percentile))
            for sid, d in pairs:
                if d > cutoff:
                    reasons.setdefault(sid, []).append(FLAG_FAR)

    for s in scores_doc["scores"]:
        pred = _mm_prediction(run, qid, s["answer_id"])
        a = answers.get(s["answer_id"])
        if pred is not None and a is not None and abs(pred - a.tm) > gap_threshold:
            reasons.setdefault(s["answer_id"], []).append(FLAG_GAP)

    queue = [
        {"answer_id": sid, "reasons": sorted(set(r))}
        for sid, r in sorted(reasons.items())
        if sid not in state.overrides
    ]
    return queue


def _effective_marks(run: RunArtifact, state: ReviewState) -> list[dict]:
    rows = []
    cluster_by_answer: dict[str, str] = {}
    for qid in sorted(run.stages):
        doc = run.get_stage(qid, "clusters")
        if not doc:
            continue
        for sid, j in doc["assignments"].items():
            cluster_by_answer[sid] = f"{qid}.{j}"
    for a in run.dataset.answers:
        override = state.overrides.get(a.answer_id)
        cfb = state.cluster_feedback.get(cluster_by_answer.get(a.answer_id, ""))
        feedback = cfb["feedback_text"] if cfb else ""
        if override is not None:
            source, mark = "override", override["mark"]
            feedback = override["note"] or feedback
        elif cfb is not None and cfb["mark"] is not None:
            source, mark = "cluster", cfb["mark"]
        else:
            source = "model"
            mark = _mm_prediction(run, a.question_id, a.answer_id)
        rows.append(
            {
                "answer_id": a.answer_id,
                "source": source,
                "mark": mark,
                "feedback": feedback,
            }
        )
    return rows


def create_app(store: str | Path, static_dir: str | Path | None = None,
               far_percentile: float = DEFAULT_FAR_PERCENTILE,
               gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> FastAPI:
    store = Path(store)
    app = FastAPI(title="sagrade review service", openapi_url="/spec")
    contexts: dict[str, _RunContext] = {}
    contexts_lock = threading.Lock()

    def ctx(run_id: str) -> _RunContext:
        with contexts_lock:
            if run_id not in contexts:
                try:
                    run = load_run(run_id, store)
                except RunNotFoundError:
                    raise HTTPException(404, f"run {run_id!r} not found")
                review = store / run_id / "review.jsonl"
                contexts[run_id] = _RunContext(run, review)
            return contexts[run_id]

    @app.get("/runs")
    def runs():
        from .corpus_io import list_runs

        return {"runs": list_runs(store)}

    @app.get("/runs/{run_id}/questions/{qid}/clusters")
    def clusters(run_id: str, qid: str):
        c = ctx(run_id)
        if qid not in {q.question_id for q in c.run.dataset.questions}:
            raise HTTPException(404, f"question {qid!r} not in run")
        return {
            "clusters": _cluster_summaries(c.run, qid),
            "version": c.state.version,
        }

    @app.post("/runs/{run_id}/clusters/{cluster_id}/feedback")
    def cluster_feedback(run_id: str, cluster_id: str, body: ClusterFeedbackIn):
        c = ctx(run_id)
        qid, idx = _question_for_cluster(c.run, cluster_id)
        doc = c.run.get_stage(qid, "clusters")
        if doc is None or not (0 <= idx < len(doc["centroids"])):
            raise HTTPException(404, f"cluster {cluster_id!r} not found")
        if body.mark is not None and not (0.0 <= body.mark <= 5.0):
            raise HTTPException(422, f"mark {body.mark} outside [0, 5]")
        with c.lock:
            if body.version != c.state.version:
                raise HTTPException(
                    409,
                    f"stale version token {body.version}, current {c.state.version}",
                )
            c.append(
                {
                    "action": "cluster_feedback",
                    "cluster_id": cluster_id,
                    "mark": body.mark,
                    "feedback_text": body.feedback_text,
                    "actor": body.actor,
                    "timestamp": time.time(),
                }
            )
            return {"version": c.state.version, "cluster_id": cluster_id}

    @app.post("/runs/{run_id}/answers/{answer_id}/override")
    def override(run_id: str, answer_id: str, body: OverrideIn):
        c = ctx(run_id)
        if answer_id not in {a.answer_id for a in c.run.dataset.answers}:
            raise HTTPException(404, f"answer {answer_id!r} not found")
        if not (0.0 <= body.mark <= 5.0):
            raise HTTPException(422, f"mark {body.mark} outside [0, 5]")
        with c.lock:
            if body.version != c.state.version:
                raise HTTPException(
                    409,
                    f"stale version token {body.version}, current {c.state.version}",
                )
            c.append(
                {
                    "action": "override",
                    "answer_id": answer_id,
                    "mark": body.mark,
                    "note": body.note,
                    "actor": body.actor,
                    "timestamp": time.time(),
                }
            )
            return {"version": c.state.version, "answer_id": answer_id}

    @app.get("/runs/{run_id}/questions/{qid}/flags")
    def flags(run_id: str, qid: str):
        c = ctx(run_id)
        if qid not in {q.question_id for q in c.run.dataset.questions}:
            raise HTTPException(404, f"question {qid!r} not in run")
        return {
            "flags": _flag_queue(c.run, qid, c.state, far_percentile, gap_threshold),
            "version": c.state.version,
        }

    @app.get("/runs/{run_id}/export")
    def export(run_id: str):
        c = ctx(run_id)
        rows = _effective_marks(c.run, c.state)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["answer_id", "source", "mark", "feedback"])
        for r in rows:
            writer.writerow([r["answer_id"], r["source"], r["mark"], r["feedback"]])
        return Response(content=buf.getvalue(), media_type="text/csv")

    @app.get("/runs/{run_id}/audit")
    def audit(run_id: str):
        c = ctx(run_id)
        return {"events": c.state.events, "version": c.state.version}

    if static_dir and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
