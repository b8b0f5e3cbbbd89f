import json

import pytest
from click.testing import CliRunner

from courserec.cli import main


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def art(tmp_path_factory, runner):
    """A tiny artifacts directory built entirely through the CLI."""
    out = tmp_path_factory.mktemp("cli_art")
    a = str(out)
    steps = [
        ["synth", "--artifacts", a, "--seed", "9", "--students", "80"],
        ["train-embedding", "--artifacts", a, "--dim", "12", "--epochs", "1"],
        ["train-lstm", "--artifacts", a, "--hidden", "12", "--epochs", "1",
         "--batch-size", "64"],
        ["train-baselines", "--artifacts", a],
    ]
    for argv in steps:
        res = runner.invoke(main, argv)
        assert res.exit_code == 0, f"{argv}: {res.output}"
    return out


def test_no_args_shows_usage_exit_2(runner):
    res = runner.invoke(main, [])
    assert res.exit_code == 2
    assert "Usage" in res.output


def test_unknown_command(runner):
    assert runner.invoke(main, ["frobnicate"]).exit_code == 2


def test_synth_outputs(art):
    for name in ["enrollments.csv", "catalog.csv", "equivalency.csv",
                 "ground_truth.json", "skipgram.zip", "lstm.zip", "ngram.txt"]:
        assert (art / name).exists(), name


def test_train_embedding_reports_losses(runner, art):
    res = runner.invoke(main, ["train-embedding", "--artifacts", str(art),
                               "--dim", "12", "--epochs", "1"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["dimension"] == 12
    assert len(payload["epoch_losses"]) == 1


def test_evaluate_all_models(runner, art):
    for model in ["lstm", "ngram", "popularity", "popularity-major"]:
        res = runner.invoke(main, ["evaluate", "--artifacts", str(art),
                                   "--model", model, "--breakdown", "major"])
        assert res.exit_code == 0, res.output
        payload = json.loads(res.output)
        assert 0.0 <= payload["mean_recall"] <= 1.0
        assert 0.0 <= payload["mrr"] <= 1.0
        assert payload["students"] > 0
        assert "by_major" in payload


def test_evaluate_writes_report(runner, art, tmp_path):
    out = tmp_path / "report.csv"
    res = runner.invoke(main, ["evaluate", "--artifacts", str(art),
                               "--model", "popularity", "--out", str(out)])
    assert res.exit_code == 0
    assert out.read_text().startswith("student_id,")


def test_validate_equivalency(runner, art):
    res = runner.invoke(main, ["validate-equivalency", "--artifacts", str(art)])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["pairs_evaluated"] > 0
    assert payload["median_rank"] >= 1.0


def test_query_command(runner, art):
    res = runner.invoke(main, ["query", "--artifacts", str(art),
                               "--interest", "SUBJ0", "--k", "3"])
    assert res.exit_code == 0, res.output
    lines = [l for l in res.output.splitlines() if l.strip()]
    assert len(lines) == 3
    assert lines[0].startswith("  1.")


def test_query_bad_filter(runner, art):
    res = runner.invoke(main, ["query", "--artifacts", str(art),
                               "--department", "Atlantis"])
    assert res.exit_code == 1
    assert "Atlantis" in res.output


def test_keywords_command(runner, art):
    res = runner.invoke(main, ["keywords", "--artifacts", str(art), "s00000"])
    assert res.exit_code == 0, res.output
    assert res.output.startswith("start:")


def test_project_command(runner, art, tmp_path):
    out = tmp_path / "proj.csv"
    res = runner.invoke(main, ["project", "--artifacts", str(art),
                               "--limit", "10", "--out", str(out)])
    assert res.exit_code == 0, res.output
    lines = out.read_text().splitlines()
    assert lines[0] == "student_id,major,x,y"
    assert 4 <= len(lines) <= 11


def test_export_embeddings(runner, art, tmp_path):
    out = tmp_path / "emb.txt"
    res = runner.invoke(main, ["export", "--artifacts", str(art), "--out", str(out)])
    assert res.exit_code == 0, res.output
    header = out.read_text().splitlines()[0].split()
    assert header[1] == "12"


def test_export_vocabulary(runner, art, tmp_path):
    out = tmp_path / "vocab.txt"
    res = runner.invoke(main, ["export", "--artifacts", str(art),
                               "--what", "vocabulary", "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "\t" in out.read_text().splitlines()[0]


def test_config_overrides(runner, art, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dimension": 7}))
    res = runner.invoke(main, ["train-embedding", "--artifacts", str(art),
                               "--config", str(cfg), "--epochs", "1"])
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["dimension"] == 7
    # restore the 12-dim model other tests rely on (module-scope fixture)
    res = runner.invoke(main, ["train-embedding", "--artifacts", str(art),
                               "--dim", "12", "--epochs", "1"])
    assert res.exit_code == 0

    cfg.write_text(json.dumps({"warp_factor": 9}))
    res = runner.invoke(main, ["train-embedding", "--artifacts", str(art),
                               "--config", str(cfg)])
    assert res.exit_code == 1
    assert "warp_factor" in res.output


def test_missing_artifacts_dir(runner, tmp_path):
    res = runner.invoke(main, ["evaluate", "--artifacts", str(tmp_path / "nope")])
    assert res.exit_code == 1
    assert "enrollments.csv" in res.output


def test_structured_error_on_bad_csv(runner, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("semester,student_id,major,entry_type,subject,course_number,grade\n"
                   "Winter 2015,a,M,New Freshman,S,1,B\n")
    res = runner.invoke(main, ["ingest", str(bad), "--artifacts", str(tmp_path / "a")])
    assert res.exit_code == 1
    assert "DataError" in res.output


def test_ingest_filters(runner, art, tmp_path):
    dst = tmp_path / "ingested"
    res = runner.invoke(main, ["ingest", str(art / "enrollments.csv"),
                               "--artifacts", str(dst),
                               "--catalog", str(art / "catalog.csv")])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["records"] > 0
    assert (dst / "enrollments.csv").exists()
    assert (dst / "catalog.csv").exists()
