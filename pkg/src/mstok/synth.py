"""Deterministic synthetic EEG for end-to-end exercises.

Two stage archetypes are generated: an alpha-dominated low-amplitude "wake"
signal and a delta-dominated high-amplitude "deep sleep" signal.  Each
channel is a sum of fixed-frequency sinusoids with channel-specific random
phases plus white Gaussian noise, and every recording carries a constant
label stream at one label per 30 s.

Randomness comes from a self-contained 64-bit counter generator (the
splitmix64 finalizer applied to ``stream_key + index``), so outputs are
bit-reproducible across platforms and library versions.  No entropy source
is consulted; everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .recording import Recording

LABEL_RATE = 1.0 / 30.0
STAGE_LABELS = {"W": 0, "N3": 1}

# Sinusoid frequencies sit on integer STFT bins (1 s Hann window) so spectral
# leakage stays inside the owning band, and safely above the 1 Hz filter edge.
_STAGE_PARAMS = {
    "W": {"freqs": (9.0, 10.0), "amplitude": 5.0},
    "N3": {"freqs": (2.0, 3.0), "amplitude": 40.0},
}
NOISE_SIGMA = 2.0

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    """The splitmix64 finalizer; bijective scramble of a 64-bit counter.

    Wraparound on multiply is the defined behavior, hence the errstate.
    """
    with np.errstate(over="ignore"):
        z = (x + _GOLDEN) & _MASK
        z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _MASK
        z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _MASK
        return z ^ (z >> np.uint64(31))


def _stream_key(seed: int, stream: int) -> np.ndarray:
    base = np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _splitmix64(
            _splitmix64(base) + np.uint64(stream & 0xFFFFFFFFFFFFFFFF)
        )[0]


def counter_uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` doubles in (0, 1], from counter values 0..n-1 of one stream."""
    key = _stream_key(seed, stream)
    with np.errstate(over="ignore"):
        counters = (np.arange(n, dtype=np.uint64) + key) & _MASK
    bits = _splitmix64(counters)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def counter_gaussians(seed: int, stream: int, n: int) -> np.ndarray:
    """Standard normals via Box-Muller on counter uniforms."""
    half = (n + 1) // 2
    u1 = counter_uniforms(seed, stream * 2 + 1, half)
    u2 = counter_uniforms(seed, stream * 2 + 2, half)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    pair = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return pair[:n]


@dataclass
class SynthSpec:
    """Recipe for one synthetic recording."""

    stage: str = "W"
    duration: float = 300.0
    fs: float = 100.0
    channels: int = 6
    seed: int = 0
    channel_names: tuple = ("F3", "F4", "C3", "C4", "O1", "O2")

    def __post_init__(self):
        if self.stage not in _STAGE_PARAMS:
            raise ParameterError(
                f"stage must be one of {sorted(_STAGE_PARAMS)}, got {self.stage!r}"
            )
        if self.duration <= 0 or self.fs <= 0:
            raise ParameterError("duration and fs must be positive")
        if self.channels < 2:
            raise ParameterError("need at least 2 channels")


def generate(spec: SynthSpec) -> Recording:
    """Build one stage-typed recording, fully determined by ``spec.seed``.

    W-like output sums 9 and 10 Hz sinusoids (5 uV amplitude each, giving
    about 5 uV RMS); N3-like sums 2 and 3 Hz at 40 uV.  Per-channel phases
    and the sigma = 2 uV white noise come from disjoint counter streams.
    Labels are constant per recording at one label per 30 s.
    """
    params = _STAGE_PARAMS[spec.stage]
    n = int(round(spec.duration * spec.fs))
    t = np.arange(n) / spec.fs
    names = list(spec.channel_names[: spec.channels])
    while len(names) < spec.channels:
        names.append(f"X{len(names)}")

    data = np.empty((spec.channels, n))
    for ch in range(spec.channels):
        phases = counter_uniforms(spec.seed, 1000 + ch, len(params["freqs"]))
        wave = np.zeros(n)
        for comp, freq in enumerate(params["freqs"]):
            wave += params["amplitude"] * np.sin(
                2.0 * np.pi * freq * t + 2.0 * np.pi * phases[comp]
            )
        noise = counter_gaussians(spec.seed, 2000 + ch, n) * NOISE_SIGMA
        data[ch] = wave + noise

    n_labels = int(np.floor(spec.duration * LABEL_RATE))
    labels = np.full(n_labels, STAGE_LABELS[spec.stage], dtype=np.int64)
    return Recording(
        channel_names=names,
        fs=spec.fs,
        data=data,
        labels=labels,
        label_rate=LABEL_RATE,
        meta={"stage": spec.stage, "seed": spec.seed},
    )


def generate_corpus(
    n_per_stage: int,
    duration: float = 300.0,
    fs: float = 100.0,
    channels: int = 6,
    seed: int = 0,
) -> list[Recording]:
    """Alternating W/N3 recordings with per-recording derived seeds."""
    corpus = []
    for i in range(2 * n_per_stage):
        stage = "W" if i % 2 == 0 else "N3"
        corpus.append(
            generate(
                SynthSpec(
                    stage=stage,
                    duration=duration,
                    fs=fs,
                    channels=channels,
                    seed=seed * 1_000_003 + i,
                )
            )
        )
    return corpus
