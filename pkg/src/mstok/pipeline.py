"""Orchestration behind the CLI subcommands.

Each function here is the whole body of one subcommand, kept importable so
runs can be driven from Python as easily as from the shell.  File discovery
is glob-based and sorted, so a given config always visits recordings in the
same order and outputs are reproducible byte for byte.
"""

from __future__ import annotations

import glob
import json
from pathlib import Path

import numpy as np

from . import dataset as ds
from .analytics import (
    SoftmaxRegression,
    epoch_histograms,
    evaluate_predictions,
    format_rank_tables,
    rank_microstates,
    split_recordings,
)
from .config import PipelineConfig
from .edf import read_edf
from .errors import AlignmentError, ContractError, DataError, ParameterError
from .formats import (
    atomic_write_bytes,
    read_codebook,
    read_csv_recording,
    read_raw_recording,
    write_codebook,
    write_csv_recording,
    write_raw_recording,
)
from .recording import Recording
from .spectral import frequency_features
from .synth import SynthSpec, generate
from .tokenizer import LabeledWindow, MicrostateTokenizer, slice_windows, tokenize
from .validation import integral_count


def discover_inputs(config: PipelineConfig) -> list[Path]:
    paths: list[Path] = []
    for pattern in config.inputs:
        hits = sorted(glob.glob(pattern))
        if hits:
            paths.extend(Path(h) for h in hits)
        elif Path(pattern).exists():
            paths.append(Path(pattern))
        else:
            raise ParameterError(f"input not found: {pattern}")
    # label sidecars ride along with CSV recordings; a *.csv glob must not
    # pick them up as recordings in their own right
    paths = [p for p in paths if not p.name.endswith(".labels.csv")]
    if not paths:
        raise ParameterError("config lists no inputs")
    return sorted(set(paths))


def load_recording(path: Path, config: PipelineConfig) -> Recording:
    suffix = path.suffix.lower()
    if suffix == ".edf":
        return read_edf(path)
    if suffix == ".csv":
        rec = read_csv_recording(path, fs=config.csv_fs)
        sidecar = path.with_suffix(".labels.csv")
        if sidecar.exists():
            labels = [
                int(line.strip())
                for line in sidecar.read_text().splitlines()
                if line.strip()
            ]
            rec = Recording(
                channel_names=rec.channel_names,
                fs=rec.fs,
                data=rec.data,
                labels=np.asarray(labels, dtype=np.int64),
                label_rate=config.label_rate,
                meta=rec.meta,
            )
        return rec
    return read_raw_recording(path)


def _tokenizer(config: PipelineConfig) -> MicrostateTokenizer:
    return MicrostateTokenizer(
        n_states=config.k,
        batch_size=config.batch_size,
        channels=config.channels,
        band=None if config.band is None else tuple(config.band),
        target_fs=config.target_fs,
        average_reference=config.average_reference,
        mode=config.mode,
        max_iter=config.max_iter,
        tol=config.tol,
        random_state=config.seed,
    )


def _write_json(path, payload: dict) -> None:
    atomic_write_bytes(path, json.dumps(payload, indent=2, sort_keys=True).encode())


def cmd_fit(config: PipelineConfig) -> dict:
    """Ingest, condition, extract GFP peaks, fit the codebook, persist it."""
    paths = discover_inputs(config)
    recordings = [load_recording(p, config) for p in paths]
    tok = _tokenizer(config).fit(recordings)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    codebook_path = out_dir / "codebook.mstcbk"
    write_codebook(tok.codebook_, codebook_path)

    meta = tok.codebook_.meta
    report = {
        "inputs": [str(p) for p in paths],
        "k": config.k,
        "batch_size": config.batch_size,
        "mode": config.mode,
        "seed": config.seed,
        "iterations": meta["iterations"],
        "final_shift": meta["final_shift"],
        "converged": meta["converged"],
        "inertia_trace": meta["inertia_trace"],
        "codebook": str(codebook_path),
    }
    _write_json(out_dir / "fit_report.json", report)
    return report


def cmd_tokenize(config: PipelineConfig, codebook_path) -> dict:
    """Tokenize every input against a codebook and write the window dataset."""
    codebook = read_codebook(codebook_path)
    paths = discover_inputs(config)
    tok = _tokenizer(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    total_windows = 0
    for subject_id, path in enumerate(paths):
        rec = load_recording(path, config)
        if rec.labels is None:
            raise AlignmentError(f"{path}: recording carries no label stream")
        prepared = tok.prepare(rec)
        sequence = tokenize(codebook, prepared)
        if sequence.tokens.size and int(sequence.tokens.max()) >= codebook.k:
            raise ContractError(
                f"{path}: token id {int(sequence.tokens.max())} >= k={codebook.k}"
            )
        windows = slice_windows(
            sequence.tokens,
            rec.labels,
            fs=prepared.fs,
            label_rate=rec.label_rate,
            window_seconds=config.window_seconds,
            subject_id=subject_id,
        )
        name = f"{path.stem}.windows.txt"
        ds.write_window_file(
            out_dir / name,
            windows,
            {
                "kind": "tokens",
                "fs": prepared.fs,
                "label_rate": rec.label_rate,
                "window_seconds": config.window_seconds,
                "k": codebook.k,
                "pad_id": codebook.pad_id,
                "subject_id": subject_id,
                "source": str(path),
            },
        )
        entries.append(
            {"file": name, "n_windows": len(windows), "subject_id": subject_id}
        )
        total_windows += len(windows)

    ds.write_index(out_dir, entries, kind="tokens")
    return {"files": len(entries), "windows": total_windows, "out_dir": str(out_dir)}


def cmd_features(config: PipelineConfig) -> dict:
    """Band-power features per window, stored in the same text container."""
    paths = discover_inputs(config)
    tok = _tokenizer(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    total_windows = 0
    for subject_id, path in enumerate(paths):
        rec = load_recording(path, config)
        if rec.labels is None:
            raise AlignmentError(f"{path}: recording carries no label stream")
        prepared = tok.prepare(rec)
        tokens_per_window = integral_count(
            "fs * window_seconds", prepared.fs * config.window_seconds
        )
        labels_per_window = integral_count(
            "label_rate * window_seconds", rec.label_rate * config.window_seconds
        )
        n_windows = prepared.n_samples // tokens_per_window
        if len(rec.labels) < n_windows * labels_per_window:
            raise AlignmentError(f"{path}: label stream shorter than the windows")

        windows = []
        frames_per_window = None
        for w in range(n_windows):
            chunk = prepared.data[:, w * tokens_per_window : (w + 1) * tokens_per_window]
            feats = frequency_features(
                chunk,
                fs=prepared.fs,
                window_seconds=config.stft_window_seconds,
                overlap_ratio=config.stft_overlap,
                band_edges=[tuple(b) for b in config.band_edges],
            )
            frames_per_window = feats.shape[1] // len(config.band_edges)
            labels = rec.labels[w * labels_per_window : (w + 1) * labels_per_window]
            windows.append(
                LabeledWindow(
                    tokens=feats.reshape(-1),
                    labels=np.asarray(labels),
                    window_index=w,
                    subject_id=subject_id,
                )
            )
        name = f"{path.stem}.features.txt"
        ds.write_window_file(
            out_dir / name,
            windows,
            {
                "kind": "features",
                "fs": prepared.fs,
                "label_rate": rec.label_rate,
                "window_seconds": config.window_seconds,
                "n_channels": prepared.n_channels,
                "n_bands": len(config.band_edges),
                "frames_per_window": frames_per_window,
                "subject_id": subject_id,
                "source": str(path),
            },
        )
        entries.append(
            {"file": name, "n_windows": len(windows), "subject_id": subject_id}
        )
        total_windows += len(windows)

    ds.write_index(out_dir, entries, kind="features")
    return {"files": len(entries), "windows": total_windows, "out_dir": str(out_dir)}


def _epoch_examples_from_tokens(header: dict, windows) -> tuple[np.ndarray, np.ndarray]:
    k = int(header["k"])
    feats, labels = [], []
    for w in windows:
        h, lab = epoch_histograms(w, k, pad_id=int(header.get("pad_id", k)))
        if len(lab):
            feats.append(h)
            labels.append(lab)
    if not feats:
        return np.empty((0, k)), np.empty(0, dtype=np.int64)
    return np.concatenate(feats), np.concatenate(labels)


def _epoch_examples_from_features(header: dict, windows) -> tuple[np.ndarray, np.ndarray]:
    if not windows:  # short recordings produce no windows at all
        return np.empty((0, 0)), np.empty(0, dtype=np.int64)
    n_channels = int(header["n_channels"])
    n_bands = int(header["n_bands"])
    frames = int(header["frames_per_window"])
    feats, labels = [], []
    for w in windows:
        grid = np.asarray(w.tokens, dtype=np.float64).reshape(n_channels, n_bands, frames)
        n_labels = len(w.labels)
        per = integral_count("frames per label period", frames / n_labels)
        for i in range(n_labels):
            label = int(w.labels[i])
            if label < 0:
                continue
            feats.append(grid[:, :, i * per : (i + 1) * per].mean(axis=2).reshape(-1))
            labels.append(label)
    if not feats:
        return np.empty((0, n_channels * n_bands)), np.empty(0, dtype=np.int64)
    return np.asarray(feats), np.asarray(labels, dtype=np.int64)


def _collect_epochs(dataset_dir) -> tuple[dict[int, tuple[np.ndarray, np.ndarray]], str]:
    """Per-subject (features, labels) arrays from a windowed dataset."""
    index = ds.read_index(dataset_dir)
    kind = index["kind"]
    per_subject: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for header, windows in ds.iter_dataset(dataset_dir):
        subject = int(header["subject_id"])
        if kind == "tokens":
            X, y = _epoch_examples_from_tokens(header, windows)
        else:
            X, y = _epoch_examples_from_features(header, windows)
        if len(y):
            per_subject[subject] = (X, y)
    if not per_subject:
        raise DataError(f"{dataset_dir}: dataset yielded no scored epochs")
    return per_subject, kind


def _stack(per_subject, ids):
    pairs = [per_subject[s] for s in ids if s in per_subject]
    if not pairs:
        return None, None
    X = np.concatenate([p[0] for p in pairs])
    y = np.concatenate([p[1] for p in pairs])
    return X, y


def cmd_eval(config: PipelineConfig, dataset_dir) -> dict:
    """Train the softmax classifier on a 7:1:2 subject split and report."""
    per_subject, kind = _collect_epochs(dataset_dir)
    subjects = sorted(per_subject)
    train_ids, val_ids, test_ids = split_recordings(
        subjects, seed=config.seed, fractions=tuple(config.split)
    )
    X_train, y_train = _stack(per_subject, train_ids)
    if X_train is None:
        raise DataError("train split is empty")

    clf = SoftmaxRegression(
        learning_rate=config.learning_rate,
        epochs=config.epochs,
        random_state=config.seed,
    ).fit(X_train, y_train)

    report = {
        "dataset": str(dataset_dir),
        "representation": kind,
        "n_subjects": len(subjects),
        "split": {
            "train": train_ids,
            "val": val_ids,
            "test": test_ids,
        },
        "train_loss_final": clf.model_.loss_curve[-1] if clf.model_.loss_curve else None,
    }
    for split_name, ids in (("train", train_ids), ("val", val_ids), ("test", test_ids)):
        X, y = _stack(per_subject, ids)
        if X is None:
            report[split_name] = None
            continue
        ev = evaluate_predictions(y, clf.predict(X), n_classes=clf.model_.n_classes)
        report[split_name] = ev.to_dict() | {"n_epochs": int(len(y))}

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "metrics.json", report)
    return report


def cmd_stats(config: PipelineConfig, dataset_dir) -> dict:
    """Rank microstates per (subject-group, label) and export the tables."""
    index = ds.read_index(dataset_dir)
    if index["kind"] != "tokens":
        raise DataError("stats requires a token dataset, not features")

    entries = []
    k = None
    for header, windows in ds.iter_dataset(dataset_dir):
        k = int(header["k"])
        pad_id = int(header.get("pad_id", k))
        subject = int(header["subject_id"])
        group = subject // config.group_size
        for w in windows:
            n_labels = len(w.labels)
            if n_labels == 0:
                continue
            per = integral_count("tokens per label", len(w.tokens) / n_labels)
            for i in range(n_labels):
                label = int(w.labels[i])
                if label < 0:
                    continue
                segment = w.tokens[i * per : (i + 1) * per]
                entries.append((group, label, segment[segment != pad_id]))
    if k is None or not entries:
        raise DataError(f"{dataset_dir}: no scored token windows found")

    tables = rank_microstates(entries, k)
    text = format_rank_tables(tables)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_bytes(out_dir / "rank_tables.txt", text.encode())
    return {
        "tables": len(tables),
        "groups": sorted({t.group_id for t in tables}),
        "labels": sorted({t.label for t in tables}),
        "text": text,
    }


def cmd_synth(config: PipelineConfig) -> dict:
    """Emit a labeled synthetic corpus in the raw container or CSV form."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i in range(2 * config.synth_per_stage):
        stage = "W" if i % 2 == 0 else "N3"
        rec = generate(
            SynthSpec(
                stage=stage,
                duration=config.synth_duration,
                fs=config.synth_fs,
                channels=config.synth_channels,
                seed=config.seed * 1_000_003 + i,
            )
        )
        if config.synth_format == "raw":
            path = out_dir / f"rec{i:04d}_{stage}.rec"
            write_raw_recording(rec, path)
        else:
            path = out_dir / f"rec{i:04d}_{stage}.csv"
            write_csv_recording(rec, path)
            sidecar = path.with_suffix(".labels.csv")
            atomic_write_bytes(
                sidecar, ("\n".join(str(v) for v in rec.labels) + "\n").encode()
            )
        written.append(str(path))
    return {"files": written, "out_dir": str(out_dir)}
