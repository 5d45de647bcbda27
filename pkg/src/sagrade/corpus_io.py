"""Dataset ingestion (canonical CSV/JSON plus the raw per-question layout)
and the on-disk run store."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

GRADE_MIN = 0.0
GRADE_MAX = 5.0


class DatasetFormatError(ValueError):
    """Malformed row, bad grade range, or referential-integrity failure."""


class RunNotFoundError(KeyError):
    pass


class RunCorruptionError(ValueError):
    """Stored dataset no longer matches the manifest checksum."""


@dataclass(frozen=True)
class QuestionRecord:
    question_id: str
    question_text: str
    model_answer_text: str

    def __post_init__(self):
        if not self.model_answer_text.strip():
            raise DatasetFormatError(f"question {self.question_id!r}: empty model answer")


@dataclass(frozen=True)
class StudentAnswer:
    answer_id: str
    question_id: str
    text: str
    grade1: float
    grade2: float

    def __post_init__(self):
        for name, g in (("grade1", self.grade1), ("grade2", self.grade2)):
            if not (GRADE_MIN <= g <= GRADE_MAX):
                raise DatasetFormatError(
                    f"answer {self.answer_id!r}: {name}={g} outside [0, 5]"
                )

    @property
    def tm(self) -> float:
        return (self.grade1 + self.grade2) / 2.0


@dataclass
class Dataset:
    questions: list[QuestionRecord]
    answers: list[StudentAnswer]

    def __post_init__(self):
        qids = [q.question_id for q in self.questions]
        if len(set(qids)) != len(qids):
            raise DatasetFormatError("duplicate question_id in dataset")
        known = set(qids)
        for a in self.answers:
            if a.question_id not in known:
                raise DatasetFormatError(
                    f"answer {a.answer_id!r} references unknown question {a.question_id!r}"
                )

    def question(self, question_id: str) -> QuestionRecord:
        for q in self.questions:
            if q.question_id == question_id:
                return q
        raise KeyError(question_id)

    def answers_for(self, question_id: str) -> list[StudentAnswer]:
        return [a for a in self.answers if a.question_id == question_id]

    def to_dict(self) -> dict:
        return {
            "questions": [
                {
                    "question_id": q.question_id,
                    "question_text": q.question_text,
                    "model_answer": q.model_answer_text,
                }
                for q in self.questions
            ],
            "answers": [
                {
                    "answer_id": a.answer_id,
                    "question_id": a.question_id,
                    "answer_text": a.text,
                    "grade1": a.grade1,
                    "grade2": a.grade2,
                }
                for a in self.answers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        try:
            questions = [
                QuestionRecord(q["question_id"], q["question_text"], q["model_answer"])
                for q in d["questions"]
            ]
            answers = [
                StudentAnswer(
                    a["answer_id"],
                    a["question_id"],
                    a["answer_text"],
                    float(a["grade1"]),
                    float(a["grade2"]),
                )
                for a in d["answers"]
            ]
        except KeyError as e:
            raise DatasetFormatError(f"missing field {e} in dataset document") from e
        return cls(questions, answers)


def _parse_grade(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError as e:
        raise DatasetFormatError(f"{where}: grade {raw!r} is not a number") from e


def parse_dataset(path: str | Path, format: str = "canonical-csv") -> Dataset:
    """Parse the canonical dataset.

    canonical-csv: `path` is a directory holding questions.csv and answers.csv.
    canonical-json: `path` is a single JSON document with both tables.
    Parsing is order-preserving and never mutates answer text.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if format == "canonical-json":
        with open(path, encoding="utf-8") as f:
            return Dataset.from_dict(json.load(f))
    if format != "canonical-csv":
        raise ValueError(f"unknown dataset format {format!r}")

    questions = []
    with open(path / "questions.csv", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(v is None for v in row.values()):
                raise DatasetFormatError(f"questions.csv line {lineno}: malformed row")
            questions.append(
                QuestionRecord(row["question_id"], row["question_text"], row["model_answer"])
            )
    answers = []
    with open(path / "answers.csv", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for lineno, row in enumerate(reader, start=2):
            if None in row or any(v is None for v in row.values()):
                raise DatasetFormatError(f"answers.csv line {lineno}: malformed row")
            where = f"answers.csv line {lineno}"
            answers.append(
                StudentAnswer(
                    row["answer_id"],
                    row["question_id"],
                    row["answer_text"],
                    _parse_grade(row["grade1"], where),
                    _parse_grade(row["grade2"], where),
                )
            )
    return Dataset(questions, answers)


def write_dataset_csv(dataset: Dataset, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "questions.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["question_id", "question_text", "model_answer"])
        for q in dataset.questions:
            writer.writerow([q.question_id, q.question_text, q.model_answer_text])
    with open(path / "answers.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["answer_id", "question_id", "answer_text", "grade1", "grade2"])
        for a in dataset.answers:
            writer.writerow([a.answer_id, a.question_id, a.text, a.grade1, a.grade2])


def _read_numbered_lines(path: Path) -> dict[str, str]:
    """Lines of the form '<id> <text>' keyed by id."""
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split(None, 1)
        out[parts[0]] = parts[1] if len(parts) > 1 else ""
    return out


def _find(base: Path, *candidates: str) -> Path | None:
    for rel in candidates:
        p = base / rel
        if p.exists():
            return p
    return None


def adapt_raw_layout(directory: str | Path) -> Dataset:
    """Adapt the public per-question distribution layout.

    Expected under `directory` (a `data/source_data`-style tree, with or
    without the `data/` prefix):
      questions[/questions]      one '<qid> <question text>' per line
      answers[/answers]          one '<qid> <model answer>' per line
      sent/<qid>                 student answers, one per line
      scores/<qid>/me, .../other per-grader scores, one per line
    The heuristics actually used are written to the run log.
    """
    base = Path(directory)
    if not base.exists():
        raise FileNotFoundError(base)

    qfile = _find(base, "questions", "questions/questions", "data/questions")
    afile = _find(base, "answers", "answers/answers", "data/answers")
    sent_dir = _find(base, "sent", "data/sent")
    scores_dir = _find(base, "scores", "data/scores")
    if qfile is None or qfile.is_dir() or afile is None or afile.is_dir():
        raise DatasetFormatError(f"no questions/answers files found under {base}")
    if sent_dir is None or scores_dir is None:
        raise DatasetFormatError(f"no sent/ or scores/ directory found under {base}")
    log.info(
        "raw layout: questions=%s answers=%s sent=%s scores=%s",
        qfile, afile, sent_dir, scores_dir,
    )

    question_texts = _read_numbered_lines(qfile)
    model_answers = _read_numbered_lines(afile)

    questions = []
    answers = []
    for qid in sorted(question_texts, key=lambda s: tuple(int(p) for p in s.split(".")) if s.replace(".", "").isdigit() else (s,)):
        sent = sent_dir / qid
        if not sent.exists():
            continue
        if qid not in model_answers:
            raise DatasetFormatError(f"question {qid}: no model answer line")
        questions.append(QuestionRecord(qid, question_texts[qid], model_answers[qid]))

        texts = [l for l in sent.read_text(encoding="utf-8").splitlines() if l.strip()]
        qscores = scores_dir / qid
        g1_file = _find(qscores, "me") if qscores.is_dir() else None
        g2_file = _find(qscores, "other") if qscores.is_dir() else None
        if g1_file is None or g2_file is None:
            raise DatasetFormatError(
                f"question {qid}: answers file {sent} has no matching score files "
                f"under {qscores} (expected me and other)"
            )
        g1 = [float(x) for x in g1_file.read_text().split()]
        g2 = [float(x) for x in g2_file.read_text().split()]
        if not (len(texts) == len(g1) == len(g2)):
            raise DatasetFormatError(
                f"question {qid}: count mismatch, {len(texts)} answers vs "
                f"{len(g1)}/{len(g2)} scores"
            )
        log.info("question %s: %d answers", qid, len(texts))
        for i, text in enumerate(texts, start=1):
            answers.append(StudentAnswer(f"{qid}.{i}", qid, text, g1[i - 1], g2[i - 1]))
    return Dataset(questions, answers)


def dataset_hash(dataset: Dataset) -> str:
    canon = json.dumps(dataset.to_dict(), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class RunArtifact:
    """One pipeline run: the ingested dataset plus per-question stage outputs.

    stages maps question_id -> stage name -> JSON-serializable document.
    Stage outputs are immutable once written.
    """

    run_id: str
    dataset: Dataset
    created_at: float
    stages: dict[str, dict[str, dict]] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def dataset_hash(self) -> str:
        return dataset_hash(self.dataset)

    def put_stage(self, question_id: str, stage: str, doc: dict) -> None:
        self.stages.setdefault(question_id, {})[stage] = doc

    def get_stage(self, question_id: str, stage: str) -> dict | None:
        return self.stages.get(question_id, {}).get(stage)


def _creation_time() -> float:
    """Wall clock, unless SOURCE_DATE_EPOCH pins it for reproducible runs."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    return float(epoch) if epoch else time.time()


def new_run(dataset: Dataset, config: dict | None = None) -> RunArtifact:
    """Content-address the run by dataset and effective config."""
    config = config or {}
    seed_doc = json.dumps({"dataset": dataset_hash(dataset), "config": config}, sort_keys=True)
    run_id = hashlib.sha256(seed_doc.encode()).hexdigest()[:16]
    return RunArtifact(run_id=run_id, dataset=dataset, created_at=_creation_time(), config=config)


def save_run(run: RunArtifact, store: str | Path) -> str:
    """Atomic write of the whole run directory (write-temp-then-rename)."""
    store = Path(store)
    store.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(dir=store, prefix=".tmp-"))
    try:
        manifest = {
            "run_id": run.run_id,
            "dataset_hash": run.dataset_hash,
            "created_at": run.created_at,
            "config": run.config,
            "questions": sorted(run.stages),
        }
        (tmp / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
        )
        (tmp / "dataset.json").write_text(
            json.dumps(run.dataset.to_dict(), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )
        for qid in sorted(run.stages):
            qdir = tmp / "stages" / qid
            qdir.mkdir(parents=True)
            for stage in sorted(run.stages[qid]):
                (qdir / f"{stage}.json").write_text(
                    json.dumps(run.stages[qid][stage], indent=2, sort_keys=True),
                    encoding="utf-8",
                )
        final = store / run.run_id
        if final.exists():
            shutil.rmtree(final)
        os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return run.run_id


def load_run(run_id: str, store: str | Path) -> RunArtifact:
    run_dir = Path(store) / run_id
    if not run_dir.exists():
        raise RunNotFoundError(f"run {run_id!r} not found in {store}")
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    dataset = Dataset.from_dict(json.loads((run_dir / "dataset.json").read_text(encoding="utf-8")))
    if dataset_hash(dataset) != manifest["dataset_hash"]:
        raise RunCorruptionError(
            f"run {run_id}: stored dataset does not match manifest checksum"
        )
    run = RunArtifact(
        run_id=manifest["run_id"],
        dataset=dataset,
        created_at=manifest["created_at"],
        config=manifest.get("config", {}),
    )
    stages_dir = run_dir / "stages"
    if stages_dir.exists():
        for qdir in sorted(stages_dir.iterdir()):
            for stage_file in sorted(qdir.glob("*.json")):
                run.put_stage(
                    qdir.name,
                    stage_file.stem,
                    json.loads(stage_file.read_text(encoding="utf-8")),
                )
    return run


def list_runs(store: str | Path) -> list[str]:
    store = Path(store)
    if not store.exists():
        return []
    return sorted(
        p.name for p in store.iterdir() if p.is_dir() and (p / "manifest.json").exists()
    )
