"""CLI subcommands, exit codes, and output determinism."""

import hashlib
import json

import numpy as np
import pytest

from mstok.cli import main
from mstok.dataset import iter_dataset, read_index
from mstok.formats import read_codebook

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")


def _write_config(tmp_path, **overrides):
    config = {
        "inputs": [str(tmp_path / "corpus" / "*.rec")],
        "out_dir": str(tmp_path / "out"),
        "k": 8,
        "batch_size": 50,
        "mode": "weighted",
        "seed": 11,
        "max_iter": 200,
        "synth_per_stage": 3,
        "synth_duration": 300.0,
        "window_seconds": 300.0,
        "epochs": 200,
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def _run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    """One synth corpus + fit + tokenize shared by the read-only tests."""
    tmp_path = tmp_path_factory.mktemp("cli")
    config = _write_config(tmp_path)
    assert _run("synth", "--config", str(config), "--out", str(tmp_path / "corpus")) == 0
    assert _run("fit", "--config", str(config), "--out", str(tmp_path / "fit")) == 0
    assert (
        _run(
            "tokenize", "--config", str(config),
            "--codebook", str(tmp_path / "fit" / "codebook.mstcbk"),
            "--out", str(tmp_path / "tokens"),
        )
        == 0
    )
    return tmp_path, config


def test_fit_writes_codebook_and_report(cli_workspace):
    tmp_path, _ = cli_workspace
    codebook = read_codebook(tmp_path / "fit" / "codebook.mstcbk")
    assert codebook.k == 8
    assert codebook.channel_names == ["F3", "F4", "C3", "C4", "O1", "O2"]
    report = json.loads((tmp_path / "fit" / "fit_report.json").read_text())
    assert report["iterations"] >= 1
    assert len(report["inertia_trace"]) == report["iterations"]
    assert report["mode"] == "weighted"


def test_fit_rerun_is_byte_identical(cli_workspace, tmp_path):
    ws, config = cli_workspace
    assert _run("fit", "--config", str(config), "--out", str(tmp_path / "fit2")) == 0
    digest = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
    assert digest(tmp_path / "fit2" / "codebook.mstcbk") == digest(
        ws / "fit" / "codebook.mstcbk"
    )


def test_tokenize_windows_and_ids(cli_workspace):
    tmp_path, _ = cli_workspace
    index = read_index(tmp_path / "tokens")
    assert index["kind"] == "tokens"
    assert len(index["files"]) == 6
    for header, windows in iter_dataset(tmp_path / "tokens"):
        assert header["k"] == 8
        assert len(windows) == 1  # 300 s recording, 300 s window
        window = windows[0]
        assert len(window.tokens) == 30_000
        assert len(window.labels) == 10
        assert int(np.max(window.tokens)) < 8


def test_eval_reports_metrics(cli_workspace, capsys):
    tmp_path, config = cli_workspace
    code = _run(
        "eval", "--config", str(config),
        "--dataset", str(tmp_path / "tokens"),
        "--out", str(tmp_path / "eval"),
    )
    assert code == 0
    report = json.loads((tmp_path / "eval" / "metrics.json").read_text())
    assert report["representation"] == "tokens"
    assert report["test"]["accuracy"] >= 0.9
    assert "confusion" in report["test"]


def test_stats_rank_tables(cli_workspace, capsys):
    tmp_path, config = cli_workspace
    code = _run(
        "stats", "--config", str(config),
        "--dataset", str(tmp_path / "tokens"),
        "--out", str(tmp_path / "stats"),
    )
    assert code == 0
    text = (tmp_path / "stats" / "rank_tables.txt").read_text()
    assert "label 0" in text and "label 1" in text
    assert "microstate" in text
    out = capsys.readouterr().out
    assert "microstate" in out


def test_features_subcommand(tmp_path):
    config = _write_config(tmp_path, synth_per_stage=1, synth_duration=300.0)
    assert _run("synth", "--config", str(config), "--out", str(tmp_path / "corpus")) == 0
    assert _run(
        "features", "--config", str(config), "--out", str(tmp_path / "features")
    ) == 0
    index = read_index(tmp_path / "features")
    assert index["kind"] == "features"
    header, windows = next(iter(iter_dataset(tmp_path / "features")))
    assert header["n_bands"] == 6
    assert header["frames_per_window"] == 300
    assert len(windows[0].tokens) == 6 * 6 * 300  # channels x bands x frames


def test_missing_input_exit_code_2(tmp_path):
    config = _write_config(tmp_path, inputs=[str(tmp_path / "nowhere" / "*.rec")])
    assert _run("fit", "--config", str(config)) == 2


def test_bad_config_unknown_key(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"bogus_key": 1}')
    assert _run("fit", "--config", str(path)) == 2


def test_bad_codebook_path(tmp_path):
    config = _write_config(tmp_path, synth_per_stage=1)
    assert _run("synth", "--config", str(config), "--out", str(tmp_path / "corpus")) == 0
    code = _run(
        "tokenize", "--config", str(config),
        "--codebook", str(tmp_path / "missing.mstcbk"),
        "--out", str(tmp_path / "tokens"),
    )
    assert code == 2


def test_unlabeled_recording_contract_error(tmp_path):
    from conftest import make_recording
    from mstok.clustering import Codebook
    from mstok.formats import write_codebook, write_raw_recording

    rec = make_recording(
        np.random.default_rng(0).normal(size=(6, 30_000)),
        names=["F3", "F4", "C3", "C4", "O1", "O2"],
    )
    (tmp_path / "corpus").mkdir()
    write_raw_recording(rec, tmp_path / "corpus" / "rec.rec")
    cb = Codebook(
        centroids=np.random.default_rng(1).normal(size=(8, 6)).astype(np.float32),
        channel_names=["F3", "F4", "C3", "C4", "O1", "O2"],
    )
    write_codebook(cb, tmp_path / "cb.mstcbk")
    config = _write_config(tmp_path)
    code = _run(
        "tokenize", "--config", str(config),
        "--codebook", str(tmp_path / "cb.mstcbk"),
        "--out", str(tmp_path / "tokens"),
    )
    assert code == 3  # labels missing is a data-contract failure


def test_synth_csv_format_exercises_csv_ingest(tmp_path):
    config = _write_config(
        tmp_path, synth_format="csv", synth_per_stage=1, synth_duration=60.0,
        window_seconds=60.0, k=4, epochs=50,
        inputs=[str(tmp_path / "corpus" / "*.csv")],
    )
    assert _run("synth", "--config", str(config), "--out", str(tmp_path / "corpus")) == 0
    files = sorted((tmp_path / "corpus").glob("*.csv"))
    assert any("labels" in f.name for f in files)
    assert _run("fit", "--config", str(config), "--out", str(tmp_path / "fit")) == 0
    code = _run(
        "tokenize", "--config", str(config),
        "--codebook", str(tmp_path / "fit" / "codebook.mstcbk"),
        "--out", str(tmp_path / "tokens"),
    )
    assert code == 0
    header, windows = next(iter(iter_dataset(tmp_path / "tokens")))
    assert len(windows[0].tokens) == 6000
    assert len(windows[0].labels) == 2


def test_900s_recording_gives_three_windows(tmp_path):
    config = _write_config(
        tmp_path, synth_per_stage=1, synth_duration=900.0, k=4, epochs=10
    )
    assert _run("synth", "--config", str(config), "--out", str(tmp_path / "corpus")) == 0
    assert _run("fit", "--config", str(config), "--out", str(tmp_path / "fit")) == 0
    assert _run(
        "tokenize", "--config", str(config),
        "--codebook", str(tmp_path / "fit" / "codebook.mstcbk"),
        "--out", str(tmp_path / "tokens"),
    ) == 0
    for header, windows in iter_dataset(tmp_path / "tokens"):
        assert len(windows) == 3
        assert all(len(w.tokens) == 30_000 for w in windows)
        assert all(len(w.labels) == 10 for w in windows)
