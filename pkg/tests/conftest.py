"""Shared fixtures: a hand-rolled EDF writer and small signal factories.

The EDF writer is deliberately independent of the reader under test -- it
assembles headers byte by byte from the format's documented offsets so that
parser round-trips actually prove something.
"""

from __future__ import annotations

import numpy as np
import pytest


def _pad(text: str, width: int) -> bytes:
    raw = text.encode("ascii")
    if len(raw) > width:
        raise ValueError(f"field {text!r} exceeds {width} bytes")
    return raw.ljust(width)


def build_edf_bytes(
    *,
    channel_labels,
    digital,
    physical_min,
    physical_max,
    digital_min,
    digital_max,
    samples_per_record,
    record_duration=1.0,
    n_records=None,
    version="0",
    drop_data_bytes=0,
):
    """Assemble a classic EDF byte blob.

    ``digital`` is an (n_signals, n_records * samples_per_record[i]) list of
    int arrays.  ``drop_data_bytes`` truncates the data section to provoke
    byte-accounting failures.
    """
    n_signals = len(channel_labels)
    if n_records is None:
        n_records = len(digital[0]) // samples_per_record[0] if digital[0] is not None else 0

    head = bytearray()
    head += _pad(str(version), 8)
    head += _pad("patient", 80)
    head += _pad("recording", 80)
    head += _pad("01.01.20", 8)
    head += _pad("00.00.00", 8)
    head += _pad(str(256 + 256 * n_signals), 8)
    head += _pad("", 44)
    head += _pad(str(n_records), 8)
    head += _pad(_format_number(record_duration), 8)
    head += _pad(str(n_signals), 4)
    assert len(head) == 256

    for values, width in (
        (channel_labels, 16),
        (["transducer"] * n_signals, 80),
        (["uV"] * n_signals, 8),
        ([_format_number(v) for v in physical_min], 8),
        ([_format_number(v) for v in physical_max], 8),
        ([str(int(v)) for v in digital_min], 8),
        ([str(int(v)) for v in digital_max], 8),
        ([""] * n_signals, 80),
        ([str(int(v)) for v in samples_per_record], 8),
        ([""] * n_signals, 32),
    ):
        for v in values:
            head += _pad(str(v), width)

    body = bytearray()
    for rec in range(n_records):
        for sig in range(n_signals):
            spr = samples_per_record[sig]
            chunk = np.asarray(digital[sig][rec * spr : (rec + 1) * spr], dtype="<i2")
            body += chunk.tobytes()
    if drop_data_bytes:
        body = body[: len(body) - drop_data_bytes]
    return bytes(head) + bytes(body)


def _format_number(value) -> str:
    """Shortest ASCII decimal that fits an 8-char EDF field."""
    if float(value) == int(value):
        return str(int(value))
    text = repr(float(value))
    if len(text) > 8:
        text = f"{float(value):.6g}"
    return text


def patch_bytes(blob: bytes, offset: int, replacement: bytes) -> bytes:
    out = bytearray(blob)
    out[offset : offset + len(replacement)] = replacement
    return bytes(out)


@pytest.fixture
def edf_writer(tmp_path):
    def _write(name="fixture.edf", **kwargs):
        path = tmp_path / name
        path.write_bytes(build_edf_bytes(**kwargs))
        return path

    return _write


def make_recording(data, fs=100.0, names=None, labels=None, label_rate=None):
    from mstok.recording import Recording

    data = np.asarray(data, dtype=np.float64)
    if names is None:
        names = [f"ch{i}" for i in range(data.shape[0])]
    return Recording(
        channel_names=names, fs=fs, data=data, labels=labels, label_rate=label_rate
    )
