"""Command-line front end: ingest, cluster, grade, report, serve."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import corpus_io, pipeline

log = logging.getLogger("sagrade")


def _config_from(ctx_params: dict, config_file: str | None) -> pipeline.PipelineConfig:
    """Precedence: flags > config file > defaults."""
    cfg = pipeline.PipelineConfig()
    if config_file:
        doc = json.loads(Path(config_file).read_text(encoding="utf-8"))
        for key, value in doc.items():
            if hasattr(cfg, key):
                setattr(cfg, key, value)
    mapping = {
        "dataset": "dataset_path",
        "format": "dataset_format",
        "question": "questions",
        "k": "k",
        "k_max": "k_max",
        "seed": "seed",
        "min_df": "min_df_fraction",
        "stopwords": "stopwords_path",
        "spellmap": "spellmap_path",
    }
    for flag, attr in mapping.items():
        value = ctx_params.get(flag)
        if value is not None and value != ():
            if flag == "question":
                value = list(value)
            if flag == "k" and value == "auto":
                value = None
            elif flag == "k":
                value = int(value)
            setattr(cfg, attr, value)
    return cfg


def _store_path(store: str | None) -> Path:
    import os

    return Path(store or os.environ.get("SAGRADE_STORE", "./runs"))


common_options = [
    click.option("--question", multiple=True, help="Restrict to these question ids."),
    click.option("--seed", type=int, default=None, help="Pipeline random seed."),
    click.option("--min-df", type=float, default=None, help="Document-frequency filter fraction."),
    click.option("--stopwords", type=click.Path(exists=True), default=None),
    click.option("--spellmap", type=click.Path(exists=True), default=None),
    click.option("--store", type=click.Path(), default=None, help="Run store (or $SAGRADE_STORE)."),
    click.option("--config", "config_file", type=click.Path(exists=True), default=None),
]


def add_options(options):
    def wrapper(func):
        for option in reversed(options):
            func = option(func)
        return func

    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool):
    """Short-answer grading pipeline."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--dataset", type=click.Path(exists=True), help="Canonical dataset path.")
@click.option("--raw", type=click.Path(exists=True), help="Raw distribution directory.")
@click.option("--format", type=click.Choice(["canonical-csv", "canonical-json"]), default=None)
@add_options(common_options)
def ingest(dataset, raw, format, config_file, **params):
    """Parse a dataset and create a run in the store."""
    cfg = _config_from({**params, "dataset": dataset, "format": format}, config_file)
    try:
        if raw:
            ds = corpus_io.adapt_raw_layout(raw)
            cfg.dataset_path = str(raw)
            cfg.dataset_format = "raw"
        elif cfg.dataset_path:
            ds = corpus_io.parse_dataset(cfg.dataset_path, cfg.dataset_format)
        else:
            raise click.UsageError("one of --dataset or --raw is required")
        run = corpus_io.new_run(ds, cfg.to_dict())
        store = _store_path(params.get("store"))
        corpus_io.save_run(run, store)
    except (corpus_io.DatasetFormatError, FileNotFoundError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(
        f"run {run.run_id}: {len(ds.questions)} questions, {len(ds.answers)} answers"
    )


def _load_for_stage(params, config_file):
    cfg = _config_from(params, config_file)
    store = _store_path(params.get("store"))
    run_id = params.get("run")
    if not run_id:
        runs = corpus_io.list_runs(store)
        if not runs:
            raise click.UsageError(f"no runs in store {store}")
        run_id = runs[-1]
    run = corpus_io.load_run(run_id, store)
    # pipeline settings were fixed at ingest; flags may override
    saved = pipeline.PipelineConfig(**{
        k: v for k, v in run.config.items()
        if k in pipeline.PipelineConfig().__dict__
    }) if run.config else pipeline.PipelineConfig()
    for attr, value in vars(cfg).items():
        default = getattr(pipeline.PipelineConfig(), attr)
        if value != default:
            setattr(saved, attr, value)
    return run, saved, store


@main.command()
@click.option("--run", default=None, help="Run id (default: most recent).")
@click.option("--k", default=None, help="Cluster count, or 'auto' for elbow selection.")
@click.option("--k-max", type=int, default=None)
@add_options(common_options)
def cluster(config_file, **params):
    """Cluster each question's answers and label the clusters."""
    try:
        run, cfg, store = _load_for_stage(params, config_file)
        pipeline.run_cluster_stage(run, cfg)
        corpus_io.save_run(run, store)
    except (ValueError, KeyError, click.UsageError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    for qid in pipeline.selected_questions(run.dataset, cfg):
        doc = run.get_stage(qid, "clusters")
        if doc:
            k = len(doc["centroids"])
            how = "elbow" if "elbow_curve" in doc else "fixed"
            click.echo(f"{qid}: k={k} selected by {how}, distortion={doc['final_distortion']:.6f}")


@main.command()
@click.option("--run", default=None, help="Run id (default: most recent).")
@add_options(common_options)
def grade(config_file, **params):
    """Score answers against the model vocabulary and fit the mark model."""
    try:
        run, cfg, store = _load_for_stage(params, config_file)
        pipeline.run_grade_stage(run, cfg)
        corpus_io.save_run(run, store)
    except (ValueError, KeyError, click.UsageError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    exit_code = 0
    for qid in pipeline.selected_questions(run.dataset, cfg):
        scores = run.get_stage(qid, "scores")
        fit = run.get_stage(qid, "fit")
        if not scores:
            continue
        answers = {a.answer_id: a for a in run.dataset.answers_for(qid)}
        for s in scores["scores"]:
            a = answers[s["answer_id"]]
            click.echo(f"{qid} {s['answer_id']}: h={s['hamming']} tm={a.tm}")
        if fit and "error" in fit:
            click.echo(f"{qid}: fit error: {fit['error']}", err=True)
            exit_code = 1
        elif fit:
            click.echo(
                f"{qid}: beta0={fit['beta0']:.5f} beta1={fit['beta1']:.5f} "
                f"beta2={fit['beta2']:.5f} mse_mm={fit['mse_mm']:.5f} "
                f"mse_tm={fit['mse_tm']:.5f} {fit['verdict']}"
            )
    sys.exit(exit_code)


@main.command()
@click.option("--run", default=None, help="Run id (default: most recent).")
@click.option("--out", type=click.Path(), required=True, help="Report output directory.")
@add_options(common_options)
def report(config_file, out, **params):
    """Emit the report bundle from stored stage outputs."""
    try:
        run, cfg, store = _load_for_stage(params, config_file)
        pipeline.run_report_stage(run, cfg, out)
    except (ValueError, KeyError, click.UsageError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(f"report bundle written to {out}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--store", type=click.Path(), default=None)
@click.option("--ui", type=click.Path(exists=True), default=None,
              help="Directory with the built review UI, served at /.")
def serve(host, port, store, ui):
    """Run the teacher review service."""
    import uvicorn

    from .review_service import create_app

    app = create_app(_store_path(store), static_dir=ui)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
