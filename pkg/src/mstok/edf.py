"""Minimal EDF reader for continuous polysomnography exports.

Covers the classic 16-bit EDF layout only: a 256-byte fixed ASCII header,
256 header bytes per signal, then data records of little-endian two's
complement samples.  Annotation signals (label ``EDF Annotations``) are
skipped; their bytes are still accounted for when walking records.  EDF+D
discontinuous files, BDF/24-bit variants, and TAL parsing are out of scope.

Most public PSG corpora ship in this format, which is why it is the assumed
on-disk representation for sleep recordings here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CalibrationError, ParseError, TruncationError
from .recording import Recording

HEADER_SIZE = 256
ANNOTATION_LABEL = "EDF Annotations"

# (name, offset, length) of the fixed-header fields we consume.
_VERSION = (0, 8)
_N_RECORDS = (236, 8)
_RECORD_DURATION = (244, 8)
_N_SIGNALS = (252, 4)

# Widths of the per-signal header arrays, in file order.
_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dimension", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)


@dataclass
class EdfSignalHeader:
    label: str
    physical_min: float
    physical_max: float
    digital_min: int
    digital_max: int
    samples_per_record: int

    @property
    def is_annotation(self) -> bool:
        return self.label == ANNOTATION_LABEL


def _ascii_field(buf: bytes, offset: int, length: int) -> str:
    raw = buf[offset : offset + length]
    try:
        return raw.decode("ascii").strip()
    except UnicodeDecodeError:
        raise ParseError("header field is not ASCII", offset=offset) from None


def _ascii_int(buf: bytes, offset: int, length: int, what: str) -> int:
    text = _ascii_field(buf, offset, length)
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} is not numeric: {text!r}", offset=offset) from None


def _ascii_float(buf: bytes, offset: int, length: int, what: str) -> float:
    text = _ascii_field(buf, offset, length)
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{what} is not numeric: {text!r}", offset=offset) from None
    if not np.isfinite(value):
        raise ParseError(f"{what} is not finite: {text!r}", offset=offset)
    return value


def read_edf(path) -> Recording:
    """Parse an EDF file into a :class:`Recording`.

    The sampling rate is derived as samples-per-record divided by the record
    duration and must agree across all retained (non-annotation) signals.
    Digital samples are mapped to physical microvolts with the per-signal
    linear calibration
    ``physical = (digital - dmin) * (pmax - pmin) / (dmax - dmin) + pmin``.

    Raises
    ------
    ParseError
        Non-numeric header field, or signals with differing rates.
    CalibrationError
        A retained signal declares ``digital_min == digital_max``.
    TruncationError
        The data section is shorter than the header promises.
    """
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_SIZE:
        raise TruncationError(
            "fixed header incomplete", expected=HEADER_SIZE, actual=len(blob)
        )

    _ascii_field(blob, *_VERSION)  # tolerated but unused
    n_records = _ascii_int(blob, *_N_RECORDS, what="number of records")
    if n_records < 0:
        raise ParseError(
            f"number of records must be non-negative, got {n_records}",
            offset=_N_RECORDS[0],
        )
    record_duration = _ascii_float(blob, *_RECORD_DURATION, what="record duration")
    if record_duration <= 0:
        raise ParseError(
            f"record duration must be positive, got {record_duration}",
            offset=_RECORD_DURATION[0],
        )
    n_signals = _ascii_int(blob, *_N_SIGNALS, what="signal count")
    if n_signals < 1:
        raise ParseError(
            f"signal count must be at least 1, got {n_signals}",
            offset=_N_SIGNALS[0],
        )

    header_total = HEADER_SIZE + n_signals * HEADER_SIZE
    if len(blob) < header_total:
        raise TruncationError(
            "per-signal header incomplete", expected=header_total, actual=len(blob)
        )

    signals = _parse_signal_headers(blob, n_signals)

    samples_per_record = np.array([s.samples_per_record for s in signals])
    record_width = int(samples_per_record.sum())
    expected_bytes = n_records * record_width * 2
    actual_bytes = len(blob) - header_total
    if actual_bytes < expected_bytes:
        raise TruncationError(
            "data records truncated", expected=expected_bytes, actual=actual_bytes
        )

    kept = [i for i, s in enumerate(signals) if not s.is_annotation]
    if not kept:
        raise ParseError("file contains only annotation signals")

    rates = {signals[i].samples_per_record / record_duration for i in kept}
    if len(rates) > 1:
        raise ParseError(
            f"retained signals have differing sampling rates: {sorted(rates)}"
        )
    fs = rates.pop()

    for i in kept:
        sig = signals[i]
        if sig.digital_max == sig.digital_min:
            raise CalibrationError(
                f"signal {i} ({sig.label!r}) has degenerate digital range "
                f"[{sig.digital_min}, {sig.digital_max}]"
            )

    digital = np.frombuffer(
        blob, dtype="<i2", count=n_records * record_width, offset=header_total
    ).reshape(n_records, record_width)

    offsets = np.concatenate([[0], np.cumsum(samples_per_record)])
    data = np.empty((len(kept), n_records * signals[kept[0]].samples_per_record))
    for row, i in enumerate(kept):
        sig = signals[i]
        block = digital[:, offsets[i] : offsets[i + 1]].reshape(-1).astype(np.float64)
        gain = (sig.physical_max - sig.physical_min) / (
            sig.digital_max - sig.digital_min
        )
        data[row] = (block - sig.digital_min) * gain + sig.physical_min

    return Recording(
        channel_names=[signals[i].label for i in kept],
        fs=fs,
        data=data,
        meta={"source": str(path), "n_records": n_records},
    )


def _parse_signal_headers(blob: bytes, n_signals: int) -> list[EdfSignalHeader]:
    fields: dict[str, list] = {}
    offset = HEADER_SIZE
    for name, width in _SIGNAL_FIELDS:
        values = []
        for i in range(n_signals):
            start = offset + i * width
            if name in ("physical_min", "physical_max"):
                values.append(_ascii_float(blob, start, width, what=f"{name}[{i}]"))
            elif name in ("digital_min", "digital_max", "samples_per_record"):
                values.append(_ascii_int(blob, start, width, what=f"{name}[{i}]"))
            else:
                values.append(_ascii_field(blob, start, width))
        fields[name] = values
        offset += n_signals * width

    headers = []
    for i in range(n_signals):
        spr = fields["samples_per_record"][i]
        if spr < 1:
            raise ParseError(f"samples_per_record[{i}] must be positive, got {spr}")
        headers.append(
            EdfSignalHeader(
                label=fields["label"][i],
                physical_min=fields["physical_min"][i],
                physical_max=fields["physical_max"][i],
                digital_min=fields["digital_min"][i],
                digital_max=fields["digital_max"][i],
                samples_per_record=spr,
            )
        )
    return headers
