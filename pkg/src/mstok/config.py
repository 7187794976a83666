"""Declarative run configuration.

A single JSON document drives every subcommand; command-line flags override
individual fields.  Unknown keys are rejected outright so a typo cannot
silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParameterError
from .preprocessing import DEFAULT_CHANNELS
from .spectral import DEFAULT_BANDS


@dataclass
class PipelineConfig:
    # inputs / outputs
    inputs: list[str] = field(default_factory=list)  # paths or globs
    out_dir: str = "out"
    csv_fs: float = 100.0  # sampling rate assumed for CSV inputs

    # conditioning
    channels: list[str] = field(default_factory=lambda: list(DEFAULT_CHANNELS))
    band: list[float] | None = field(default_factory=lambda: [1.0, 40.0])
    target_fs: float | None = 100.0
    average_reference: bool = False

    # clustering
    k: int = 1000
    batch_size: int = 50
    max_iter: int = 300
    tol: float = 1e-4
    mode: str = "literal"
    seed: int = 0

    # windowing
    window_seconds: float = 300.0
    label_rate: float = 1.0 / 30.0

    # spectral baseline
    stft_window_seconds: float = 1.0
    stft_overlap: float = 0.0
    band_edges: list = field(default_factory=lambda: [list(b) for b in DEFAULT_BANDS])

    # analytics
    group_size: int = 30
    split: list[int] = field(default_factory=lambda: [7, 1, 2])
    learning_rate: float = 0.1
    epochs: int = 300

    # synth
    synth_per_stage: int = 4
    synth_duration: float = 300.0
    synth_fs: float = 100.0
    synth_channels: int = 6
    synth_format: str = "raw"

    def __post_init__(self):
        if self.mode not in ("literal", "weighted"):
            raise ParameterError(f"mode must be literal or weighted, got {self.mode!r}")
        if self.synth_format not in ("raw", "csv"):
            raise ParameterError(
                f"synth_format must be raw or csv, got {self.synth_format!r}"
            )
        if self.band is not None and len(self.band) != 2:
            raise ParameterError("band must be [low, high] or null")
        if len(self.split) != 3:
            raise ParameterError("split must be three numbers")
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")


_FIELDS = {f.name for f in dataclasses.fields(PipelineConfig)}


def load_config(path) -> PipelineConfig:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ParameterError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ParameterError("config document must be a JSON object")
    unknown = sorted(set(raw) - _FIELDS)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return PipelineConfig(**raw)
    except TypeError as exc:
        raise ParameterError(f"bad config: {exc}") from None
