"""On-disk windowed datasets.

One file per recording, newline-delimited:

* line 1 -- a JSON header: ``kind`` ("tokens" or "features"), ``fs``,
  ``label_rate``, ``window_seconds``, ``k`` (tokens only), ``subject_id``,
  ``n_windows``.
* one line per window -- three tab-separated fields:
  ``window_index``, the comma-joined label ids, and the comma-joined values
  (integer token ids, or float feature values for ``kind="features"``).

A directory of such files is tied together by ``index.json`` listing every
file with its window count and subject id.  Values are written with
``repr`` so floats survive the round trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, ParseError
from .formats import atomic_write_bytes
from .tokenizer import LabeledWindow

INDEX_NAME = "index.json"


def write_window_file(path, windows: list[LabeledWindow], header: dict) -> None:
    """Write one recording's windows; ``header`` must carry at least ``kind``."""
    if "kind" not in header:
        raise FormatError("window file header needs a 'kind' field")
    head = dict(header)
    head["n_windows"] = len(windows)
    lines = [json.dumps(head, sort_keys=True, separators=(",", ":"))]
    for w in windows:
        labels = ",".join(str(int(v)) for v in w.labels)
        if head["kind"] == "features":
            values = ",".join(repr(float(v)) for v in np.asarray(w.tokens).reshape(-1))
        else:
            values = ",".join(str(int(v)) for v in w.tokens)
        lines.append(f"{w.window_index}\t{labels}\t{values}")
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


def read_window_file(path) -> tuple[dict, list[LabeledWindow]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty window file", row=0)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: bad JSON header: {exc}", row=0) from None
    kind = header.get("kind")
    if kind not in ("tokens", "features"):
        raise FormatError(f"{path}: unknown dataset kind {kind!r}")

    windows = []
    for row, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(
                f"{path}: expected 3 tab-separated fields, got {len(parts)}",
                row=row,
            )
        idx = int(parts[0])
        labels = (
            np.array([int(v) for v in parts[1].split(",")], dtype=np.int64)
            if parts[1]
            else np.empty(0, dtype=np.int64)
        )
        if kind == "features":
            values = np.array([float(v) for v in parts[2].split(",")])
        else:
            values = np.array([int(v) for v in parts[2].split(",")], dtype=np.int32)
        windows.append(
            LabeledWindow(
                tokens=values,
                labels=labels,
                window_index=idx,
                subject_id=header.get("subject_id"),
            )
        )
    if len(windows) != header.get("n_windows", len(windows)):
        raise ParseError(
            f"{path}: header declares {header['n_windows']} windows, "
            f"found {len(windows)}"
        )
    return header, windows


def write_index(directory, entries: list[dict], kind: str) -> None:
    payload = json.dumps(
        {"kind": kind, "files": entries}, sort_keys=True, indent=2
    ).encode()
    atomic_write_bytes(Path(directory) / INDEX_NAME, payload)


def read_index(directory) -> dict:
    path = Path(directory) / INDEX_NAME
    if not path.exists():
        raise FormatError(f"{directory}: no {INDEX_NAME} present")
    return json.loads(path.read_text())


def iter_dataset(directory):
    """Yield ``(header, windows)`` per file listed in the directory index."""
    index = read_index(directory)
    for entry in index["files"]:
        yield read_window_file(Path(directory) / entry["file"])
