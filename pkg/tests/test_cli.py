import json
import re

import pytest
from click.testing import CliRunner

from sagrade import cli
from sagrade.corpus_io import (
    Dataset,
    QuestionRecord,
    StudentAnswer,
    write_dataset_csv,
)
from fixtures import worked_example_dataset


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def dataset_dir(tmp_path):
    path = tmp_path / "dataset"
    path.mkdir()
    write_dataset_csv(worked_example_dataset(), path)
    return path


@pytest.fixture
def store(tmp_path):
    return tmp_path / "store"


def ingest(runner, dataset_dir, store):
    result = runner.invoke(
        cli.main, ["ingest", "--dataset", str(dataset_dir), "--store", str(store)]
    )
    assert result.exit_code == 0, result.output
    return result


class TestIngest:
    def test_counts_reported(self, runner, dataset_dir, store):
        result = ingest(runner, dataset_dir, store)
        assert "4 questions, 14 answers" in result.output

    def test_run_directory_created(self, runner, dataset_dir, store):
        result = ingest(runner, dataset_dir, store)
        run_id = re.search(r"run (\w+):", result.output).group(1)
        assert (store / run_id / "manifest.json").exists()

    def test_requires_source(self, runner, store):
        result = runner.invoke(cli.main, ["ingest", "--store", str(store)])
        assert result.exit_code != 0

    def test_bad_dataset_reports_error(self, runner, tmp_path, store):
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "questions.csv").write_text("question_id,question_text,model_answer_text\n")
        (bad / "answers.csv").write_text(
            "answer_id,question_id,answer_text,grade1,grade2\na,missing,t,9,3\n"
        )
        result = runner.invoke(
            cli.main, ["ingest", "--dataset", str(bad), "--store", str(store)]
        )
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_store_env_variable(self, runner, dataset_dir, store, monkeypatch):
        monkeypatch.setenv("SAGRADE_STORE", str(store))
        result = runner.invoke(cli.main, ["ingest", "--dataset", str(dataset_dir)])
        assert result.exit_code == 0, result.output
        assert any(store.iterdir())


class TestCluster:
    def test_fixed_k(self, runner, dataset_dir, store):
        ingest(runner, dataset_dir, store)
        result = runner.invoke(
            cli.main,
            ["cluster", "--store", str(store), "--question", "q3", "--k", "2"],
        )
        assert result.exit_code == 0, result.output
        assert "q3: k=2 selected by fixed" in result.output

    def test_auto_k_on_separated_groups(self, runner, tmp_path, store):
        # three groups of answers with disjoint vocabularies
        groups = [
            "apples oranges bananas fruit salad",
            "engines pistons gearbox torque clutch",
            "sonnet stanza meter rhyme couplet",
        ]
        answers = [
            StudentAnswer(f"a{g}{i}", "q1", groups[g], 3.0, 3.0)
            for g in range(3)
            for i in range(5)
        ]
        ds = Dataset(
            questions=[QuestionRecord("q1", "Describe something.", "fruit engines sonnet")],
            answers=answers,
        )
        path = tmp_path / "blobs"
        path.mkdir()
        write_dataset_csv(ds, path)
        runner.invoke(cli.main, ["ingest", "--dataset", str(path), "--store", str(store)])
        result = runner.invoke(
            cli.main, ["cluster", "--store", str(store), "--k", "auto", "--k-max", "6"]
        )
        assert result.exit_code == 0, result.output
        assert "q1: k=3 selected by elbow" in result.output

    def test_empty_store(self, runner, store):
        store.mkdir()
        result = runner.invoke(cli.main, ["cluster", "--store", str(store)])
        assert result.exit_code == 1
        assert "no runs" in result.output


class TestGrade:
    def test_underdetermined_question_fails(self, runner, dataset_dir, store):
        # q1 has only two distinct distances, too few to fit three parameters
        ingest(runner, dataset_dir, store)
        result = runner.invoke(
            cli.main, ["grade", "--store", str(store), "--question", "q1"]
        )
        assert result.exit_code == 1
        assert "fit error" in result.output

    def test_fit_reported(self, runner, dataset_dir, store):
        ingest(runner, dataset_dir, store)
        result = runner.invoke(
            cli.main, ["grade", "--store", str(store), "--question", "q3"]
        )
        assert result.exit_code == 0, result.output
        assert re.search(r"q3: beta0=[\d.-]+ beta1=[\d.-]+ beta2=[\d.-]+", result.output)
        assert "h=" in result.output


class TestReport:
    def test_bundle_written(self, runner, dataset_dir, store, tmp_path):
        ingest(runner, dataset_dir, store)
        runner.invoke(
            cli.main, ["cluster", "--store", str(store), "--question", "q3", "--k", "2"]
        )
        runner.invoke(cli.main, ["grade", "--store", str(store), "--question", "q3"])
        out = tmp_path / "report"
        result = runner.invoke(
            cli.main,
            ["report", "--store", str(store), "--question", "q3", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "q3" / "clusters.csv").exists()
        assert (out / "q3" / "similarity.csv").exists()
        assert (out / "q3" / "mark_vs_distance.csv").exists()
        assert (out / "fits.csv").exists()


class TestConfigPrecedence:
    def test_flag_beats_config_file(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"seed": 7, "min_df_fraction": 0.25}))
        cfg = cli._config_from({"seed": 9}, str(cfg_file))
        assert cfg.seed == 9
        assert cfg.min_df_fraction == 0.25

    def test_defaults_without_sources(self):
        cfg = cli._config_from({}, None)
        assert cfg.seed == 42
        assert cfg.min_df_fraction == 0.10

    def test_k_auto_maps_to_elbow(self):
        assert cli._config_from({"k": "auto"}, None).k is None
        assert cli._config_from({"k": "3"}, None).k == 3
