"""Text and binary containers.

Three formats live here:

* CSV recordings.  Layout is auto-detected from the first row: a non-numeric
  first row is treated as a channel-name header and columns are channels;
  otherwise each row is one channel.  CSV never carries labels.

* Raw recording container (magic ``MSTREC1\\n``): one JSON metadata line
  terminated by a newline, then the sample matrix as little-endian float32,
  row-major, then the label stream (if any) as little-endian int32.

* Codebook container (magic ``MSTCBK1\\n``): one JSON metadata line, then the
  centroid matrix as little-endian float32, row-major.  Writing then reading
  reproduces the codebook bit-exactly, metadata included.

All writers go through a temp-file-plus-rename so partially written outputs
never appear under the final name.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .clustering import Codebook
from .errors import (
    DataError,
    FormatError,
    ParameterError,
    ParseError,
    ShapeError,
    TruncationError,
)
from .recording import Recording

CODEBOOK_MAGIC = b"MSTCBK1\n"
RAW_MAGIC = b"MSTREC1\n"


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write ``payload`` to ``path`` via a same-directory temp file + rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_line(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode() + b"\n"


# ---------------------------------------------------------------------------
# CSV recordings


def _try_numeric_row(tokens: list[str]):
    values = []
    for tok in tokens:
        try:
            values.append(float(tok))
        except ValueError:
            return None
    return values


def read_csv_recording(path, fs: float, channel_names: list[str] | None = None) -> Recording:
    """Read a comma-separated numeric grid as a recording.

    With a header row the columns are channels and the header supplies the
    names; without one the rows are channels and ``channel_names`` (or
    generated ``ch0..chN`` names) apply.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: file is empty", row=0)

    first = [tok.strip() for tok in lines[0].split(",")]
    header = None
    rows: list[list[float]] = []
    start = 0
    parsed = _try_numeric_row(first)
    if parsed is None:
        header = first
        start = 1
        if len(lines) == 1:
            raise ParseError(f"{path}: header row but no data", row=1)
    else:
        rows.append(parsed)
        start = 1

    width = len(first)
    for i in range(start, len(lines)):
        tokens = [tok.strip() for tok in lines[i].split(",")]
        if len(tokens) != width:
            raise ParseError(
                f"{path}: ragged row has {len(tokens)} fields, expected {width}",
                row=i,
            )
        values = _try_numeric_row(tokens)
        if values is None:
            raise ParseError(f"{path}: non-numeric value", row=i)
        rows.append(values)

    grid = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(grid)):
        raise DataError(f"{path}: grid contains NaN or infinite values")

    if header is not None:
        data = grid.T
        names = header
    else:
        data = grid
        names = list(channel_names) if channel_names else [f"ch{i}" for i in range(len(grid))]
        if len(names) != data.shape[0]:
            raise ShapeError(
                f"{len(names)} channel names for {data.shape[0]} CSV rows"
            )
    return Recording(channel_names=names, fs=fs, data=data, meta={"source": str(path)})


def write_csv_recording(recording: Recording, path) -> None:
    """Column-layout CSV with a channel-name header row."""
    lines = [",".join(recording.channel_names)]
    for col in recording.data.T:
        lines.append(",".join(repr(float(v)) for v in col))
    atomic_write_bytes(path, ("\n".join(lines) + "\n").encode())


# ---------------------------------------------------------------------------
# Raw recording container


def write_raw_recording(recording: Recording, path) -> None:
    header = {
        "channel_names": list(recording.channel_names),
        "fs": recording.fs,
        "n_samples": recording.n_samples,
        "label_rate": recording.label_rate,
        "n_labels": 0 if recording.labels is None else int(len(recording.labels)),
    }
    parts = [RAW_MAGIC, _json_line(header)]
    parts.append(recording.data.astype("<f4").tobytes(order="C"))
    if recording.labels is not None:
        parts.append(recording.labels.astype("<i4").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def read_raw_recording(path) -> Recording:
    blob = Path(path).read_bytes()
    if not blob.startswith(RAW_MAGIC):
        raise FormatError(f"{path}: bad magic, not a raw recording container")
    nl = blob.find(b"\n", len(RAW_MAGIC))
    if nl < 0:
        raise FormatError(f"{path}: metadata line is unterminated")
    try:
        header = json.loads(blob[len(RAW_MAGIC) : nl].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: metadata line is not valid JSON: {exc}") from None

    names = header["channel_names"]
    n_samples = int(header["n_samples"])
    n_labels = int(header.get("n_labels", 0))
    body = blob[nl + 1 :]
    data_bytes = len(names) * n_samples * 4
    expected = data_bytes + n_labels * 4
    if len(body) < expected:
        raise TruncationError(
            f"{path}: payload truncated", expected=expected, actual=len(body)
        )
    data = np.frombuffer(body, dtype="<f4", count=len(names) * n_samples).reshape(
        len(names), n_samples
    )
    labels = None
    if n_labels:
        labels = np.frombuffer(body, dtype="<i4", count=n_labels, offset=data_bytes)
    return Recording(
        channel_names=list(names),
        fs=float(header["fs"]),
        data=data.astype(np.float64),
        labels=None if labels is None else labels.astype(np.int64),
        label_rate=header.get("label_rate"),
        meta={"source": str(path)},
    )


# ---------------------------------------------------------------------------
# Codebooks


def write_codebook(codebook: Codebook, path) -> None:
    """Persist a codebook; the metadata line carries all provenance."""
    if codebook.k < 1 or codebook.n_channels < 1:
        raise ParameterError("codebook must have k >= 1 and n_channels >= 1")
    distinct = np.unique(codebook.centroids, axis=0).shape[0]
    if distinct != codebook.k:
        raise DataError(
            f"centroid rows are not pairwise distinct ({distinct} of {codebook.k})"
        )
    header = {
        "k": codebook.k,
        "n_channels": codebook.n_channels,
        "pad_id": codebook.pad_id,
        "channel_names": codebook.channel_names,
        "meta": _jsonable(codebook.meta),
    }
    payload = CODEBOOK_MAGIC + _json_line(header)
    payload += codebook.centroids.astype("<f4").tobytes(order="C")
    atomic_write_bytes(path, payload)


def read_codebook(path) -> Codebook:
    blob = Path(path).read_bytes()
    if not blob.startswith(CODEBOOK_MAGIC):
        raise FormatError(f"{path}: bad magic, not a codebook file")
    nl = blob.find(b"\n", len(CODEBOOK_MAGIC))
    if nl < 0:
        raise FormatError(f"{path}: metadata line is unterminated")
    try:
        header = json.loads(blob[len(CODEBOOK_MAGIC) : nl].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: metadata line is not valid JSON: {exc}") from None

    k = int(header["k"])
    n_channels = int(header["n_channels"])
    body = blob[nl + 1 :]
    expected = k * n_channels * 4
    if len(body) != expected:
        raise TruncationError(
            f"{path}: centroid payload size mismatch",
            expected=expected,
            actual=len(body),
        )
    centroids = np.frombuffer(body, dtype="<f4").reshape(k, n_channels)
    return Codebook(
        centroids=centroids.copy(),
        channel_names=header.get("channel_names"),
        meta=header.get("meta", {}),
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(key): _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(value) for value in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        value = float(obj)
        if not math.isfinite(value):
            raise DataError("metadata contains non-finite numbers")
        return value
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        raise DataError("metadata contains non-finite numbers")
    return obj
