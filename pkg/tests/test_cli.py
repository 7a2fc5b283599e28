from __future__ import annotations

import json

import pytest

from bugaug.cli import main
from bugaug.fixtures import generate_corpus
from bugaug.model import read_jsonl


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixture") / "corpus"
    generate_corpus(path, n_bugs=10, seed=11)
    return path


def _pipeline_args(corpus_dir, out_dir, extra=()):
    return [
        "pipeline",
        "--bugs", str(corpus_dir / "bugs.jsonl"),
        "--diffs", str(corpus_dir / "diffs"),
        "--links", str(corpus_dir / "links.jsonl"),
        "--out", str(out_dir),
        "--seed", "42",
        "--factor", "2",
        *extra,
    ]


def test_fixture_command_writes_inputs(tmp_path):
    out = tmp_path / "corpus"
    assert main(["fixture", "--out", str(out), "--bugs", "6", "--seed", "1"]) == 0
    assert (out / "bugs.jsonl").exists()
    assert (out / "links.jsonl").exists()
    assert (out / "diffs" / "changesets.jsonl").exists()


def test_ingest_then_extract(tmp_path, corpus_dir):
    out = tmp_path / "artifacts"
    code = main(
        [
            "ingest",
            "--bugs", str(corpus_dir / "bugs.jsonl"),
            "--diffs", str(corpus_dir / "diffs"),
            "--links", str(corpus_dir / "links.jsonl"),
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    for name in ("train_bugs.jsonl", "test_bugs.jsonl", "hunks.jsonl", "d_ori.jsonl", "qrels.txt"):
        assert (out / name).exists(), name

    structured_path = out / "structured.jsonl"
    assert main(["extract", "--corpus", str(out), "--out", str(structured_path)]) == 0
    records = list(read_jsonl(structured_path))
    assert records and all(r["samples"] for r in records)


def test_missing_input_exits_2_and_names_the_flag(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "ingest",
                "--bugs", str(tmp_path / "nope.jsonl"),
                "--diffs", str(tmp_path),
                "--links", str(tmp_path / "links.jsonl"),
                "--out", str(tmp_path / "out"),
            ]
        )
    assert exc.value.code == 2
    assert "--bugs" in capsys.readouterr().err


def test_runtime_failure_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "bugs.jsonl").write_text("{not json}\n", "utf-8")
    (bad / "links.jsonl").write_text("", "utf-8")
    (bad / "diffs").mkdir()
    code = main(
        [
            "ingest",
            "--bugs", str(bad / "bugs.jsonl"),
            "--diffs", str(bad / "diffs"),
            "--links", str(bad / "links.jsonl"),
            "--out", str(bad / "out"),
        ]
    )
    assert code == 1
    assert "ingest" in capsys.readouterr().err


def test_full_pipeline_produces_all_artifacts(tmp_path, corpus_dir, capsys):
    out = tmp_path / "run"
    assert main(_pipeline_args(corpus_dir, out)) == 0
    expected = [
        "train_bugs.jsonl", "test_bugs.jsonl", "hunks.jsonl", "links.jsonl", "changesets.jsonl",
        "d_ori.jsonl", "qrels.txt", "structured.jsonl", "d_aug.jsonl", "d_rep.jsonl",
        "augmented_reports.jsonl", "d_bl.jsonl", "balance_reports.jsonl", "stats.json",
        "run.txt", "metrics.json", "manifest.json",
    ]
    for name in expected:
        assert (out / name).exists(), name
    printed = capsys.readouterr().out
    for metric in ("mrr", "map", "p@1", "p@3", "p@5"):
        assert metric in printed
    metrics = json.loads((out / "metrics.json").read_text("utf-8"))
    assert set(metrics["metrics"]) == {"mrr", "map", "p@1", "p@3", "p@5"}

    d_ori = list(read_jsonl(out / "d_ori.jsonl"))
    d_aug = list(read_jsonl(out / "d_aug.jsonl"))
    d_rep = list(read_jsonl(out / "d_rep.jsonl"))
    assert len(d_aug) == 3 * len(d_ori)  # factor 2 -> (1+2)x
    assert len(d_rep) == 2 * len(d_ori)


def test_pipeline_rerun_without_force_is_a_noop(tmp_path, corpus_dir):
    out = tmp_path / "run"
    assert main(_pipeline_args(corpus_dir, out)) == 0
    manifest_before = (out / "manifest.json").read_bytes()
    stamp_before = (out / "d_aug.jsonl").stat().st_mtime_ns
    assert main(_pipeline_args(corpus_dir, out)) == 0
    assert (out / "manifest.json").read_bytes() == manifest_before
    assert (out / "d_aug.jsonl").stat().st_mtime_ns == stamp_before  # not recomputed


def test_pipeline_force_recomputes_identically(tmp_path, corpus_dir):
    out = tmp_path / "run"
    assert main(_pipeline_args(corpus_dir, out)) == 0
    manifest_before = (out / "manifest.json").read_bytes()
    assert main(_pipeline_args(corpus_dir, out, extra=["--force"])) == 0
    assert (out / "manifest.json").read_bytes() == manifest_before


def test_stats_and_eval_subcommands(tmp_path, corpus_dir):
    out = tmp_path / "run"
    assert main(_pipeline_args(corpus_dir, out)) == 0
    stats_out = tmp_path / "stats.json"
    assert main(
        ["stats", "--dataset", str(out / "d_bl.jsonl"), "--top-k", "5",
         "--out", str(stats_out), "--csv", str(tmp_path / "curves.csv")]
    ) == 0
    payload = json.loads(stats_out.read_text("utf-8"))
    assert "d_bl" in payload
    assert (tmp_path / "curves.csv").read_text("utf-8").startswith("dataset,kind,rank,key,count")

    metrics_out = tmp_path / "metrics2.json"
    assert main(
        ["eval", "--run", str(out / "run.txt"), "--qrels", str(out / "qrels.txt"),
         "--metrics", "mrr,p@1", "--out", str(metrics_out)]
    ) == 0
    loaded = json.loads(metrics_out.read_text("utf-8"))
    assert set(loaded["metrics"]) == {"mrr", "p@1"}
    assert loaded["per_bug"]


def test_retrieve_subcommand(tmp_path, corpus_dir):
    out = tmp_path / "run"
    assert main(_pipeline_args(corpus_dir, out)) == 0
    run_path = tmp_path / "run2.txt"
    assert main(
        ["retrieve", "--index", str(out), "--bugs", str(out / "test_bugs.jsonl"),
         "--top-n", "5", "--out", str(run_path)]
    ) == 0
    lines = run_path.read_text("utf-8").strip().splitlines()
    assert lines
    assert all(len(line.split()) == 4 for line in lines)


def test_augment_subcommand_with_shuffle_paraphraser(tmp_path, corpus_dir):
    out = tmp_path / "artifacts"
    main(
        ["ingest", "--bugs", str(corpus_dir / "bugs.jsonl"), "--diffs", str(corpus_dir / "diffs"),
         "--links", str(corpus_dir / "links.jsonl"), "--seed", "3", "--out", str(out)]
    )
    main(["extract", "--corpus", str(out), "--out", str(out / "structured.jsonl")])
    code = main(
        ["augment", "--corpus", str(out), "--structured", str(out / "structured.jsonl"),
         "--factor", "1", "--seed", "9", "--paraphraser", "shuffle",
         "--out", str(out / "d_aug.jsonl"), "--reports-out", str(out / "reports.jsonl")]
    )
    assert code == 0
    d_ori = list(read_jsonl(out / "d_ori.jsonl"))
    d_aug = list(read_jsonl(out / "d_aug.jsonl"))
    assert len(d_aug) == 2 * len(d_ori)
    reports = list(read_jsonl(out / "reports.jsonl"))
    assert reports and all("#aug" in r["id"] for r in reports)


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "bugaug" in capsys.readouterr().out
