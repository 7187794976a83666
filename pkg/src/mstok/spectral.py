"""Frequency-domain baseline features.

A Hann-windowed short-time Fourier transform turns each channel into a
power spectrogram; band powers are then obtained by Simpson integration of
the in-band frequency bins per frame, and the per-channel band-power
matrices are flattened band-major and stacked into one feature matrix.

Power normalization
-------------------
The default ``scaling="radian"`` divides the squared one-sided spectrum by
2*pi, treating the transform as a function of angular frequency.  That is
unusual for discrete STFTs, where only relative band magnitudes matter
downstream, so ``scaling="density"`` is also available and gives the
conventional Hann periodogram (per-Hz power spectral density).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .recording import Recording
from .validation import as_float_vector, integral_count

#: Canonical EEG bands in Hz: delta, theta, alpha, sigma, beta, gamma.
DEFAULT_BANDS = (
    (0.5, 4.0),
    (4.0, 8.0),
    (8.0, 12.0),
    (12.0, 16.0),
    (16.0, 30.0),
    (30.0, 40.0),
)
BAND_NAMES = ("delta", "theta", "alpha", "sigma", "beta", "gamma")


@dataclass
class Spectrogram:
    power: np.ndarray  # (n_bins, n_frames)
    freq_axis: np.ndarray  # Hz, uniform spacing 1 / window_seconds
    time_axis: np.ndarray  # frame centers, seconds


@dataclass
class BandPowerMatrix:
    power: np.ndarray  # (n_bands, n_frames)
    band_edges: tuple


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    """Frames fully inside the signal; the trailing partial frame is dropped."""
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def stft_power(
    channel,
    fs: float,
    window_seconds: float = 1.0,
    overlap_ratio: float = 0.0,
    scaling: str = "radian",
) -> Spectrogram:
    """Hann-window STFT power of a single channel.

    Frames of ``fs * window_seconds`` samples advance by
    ``(1 - overlap_ratio) * fs * window_seconds`` samples; any incomplete
    trailing frame is discarded.  Each frame is multiplied by the periodic
    Hann window ``0.5 * (1 - cos(2*pi*j/W))`` and transformed; the one-sided
    squared magnitudes (doubled except at DC and Nyquist) are divided by
    2*pi (``scaling="radian"``) or by ``fs * sum(w**2)``
    (``scaling="density"``).

    With zero overlap the frame count equals duration / window_seconds
    whenever that is integral.
    """
    channel = as_float_vector(channel, "channel")
    if not 0 <= overlap_ratio < 1:
        raise ParameterError(
            f"overlap_ratio must lie in [0, 1), got {overlap_ratio}"
        )
    frame_len = integral_count("fs * window_seconds", fs * window_seconds)
    if frame_len < 2:
        raise ParameterError(f"window of {frame_len} samples is too short")
    hop = integral_count(
        "hop (1 - overlap_ratio) * fs * window_seconds",
        (1.0 - overlap_ratio) * fs * window_seconds,
    )
    if hop < 1:
        raise ParameterError("overlap leaves a hop of zero samples")
    if channel.size < frame_len:
        raise ParameterError(
            f"channel has {channel.size} samples, shorter than one "
            f"window of {frame_len}"
        )
    if scaling not in ("radian", "density"):
        raise ParameterError(f"unknown scaling {scaling!r}")

    n_frames = frame_count(channel.size, frame_len, hop)
    window = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(frame_len) / frame_len))
    starts = np.arange(n_frames) * hop
    frames = channel[starts[:, None] + np.arange(frame_len)[None, :]]
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = np.abs(spectrum) ** 2

    # one-sided: fold the mirrored bins in before normalizing
    power[:, 1:] *= 2.0
    if frame_len % 2 == 0:
        power[:, -1] /= 2.0
    if scaling == "radian":
        power /= 2.0 * np.pi
    else:
        power /= fs * float((window**2).sum())

    freq_axis = np.arange(power.shape[1]) * (fs / frame_len)
    time_axis = (starts + frame_len / 2.0) / fs
    return Spectrogram(power=power.T, freq_axis=freq_axis, time_axis=time_axis)


def simpson(y, dx: float) -> float:
    """Composite Simpson's rule on uniformly spaced samples.

    Consecutive pairs of intervals get the 3-point rule; with an even number
    of points the final odd interval is closed with a trapezoid.  Exact for
    cubics on odd point counts.
    """
    y = as_float_vector(y, "y")
    if y.size < 2:
        raise ParameterError(f"simpson needs at least 2 points, got {y.size}")
    if dx <= 0:
        raise ParameterError(f"dx must be positive, got {dx}")
    n_intervals = y.size - 1
    pairs = n_intervals // 2
    total = 0.0
    if pairs:
        left = y[0 : 2 * pairs - 1 : 2]
        mid = y[1 : 2 * pairs : 2]
        right = y[2 : 2 * pairs + 1 : 2]
        total += float((dx / 3.0) * (left + 4.0 * mid + right).sum())
    if n_intervals % 2:
        total += float(dx * (y[-2] + y[-1]) / 2.0)
    return total


def band_bins(freq_axis, band_edges=DEFAULT_BANDS) -> list[np.ndarray]:
    """Indices of the bins each band owns.

    Ownership is half-open, ``low <= f < high``, except the final band which
    also takes its upper edge; textually the band limits touch, and this
    rule gives every bin exactly one owner.  A band owning no bins raises.
    """
    freq_axis = as_float_vector(freq_axis, "freq_axis")
    owned = []
    for b, (low, high) in enumerate(band_edges):
        if not low < high:
            raise ParameterError(f"band {b} has empty range [{low}, {high})")
        if b == len(band_edges) - 1:
            mask = (freq_axis >= low) & (freq_axis <= high)
        else:
            mask = (freq_axis >= low) & (freq_axis < high)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            raise ParameterError(
                f"band {b} [{low}, {high}] Hz owns no frequency bins "
                f"(bin spacing {freq_axis[1] - freq_axis[0] if freq_axis.size > 1 else 'n/a'} Hz)"
            )
        owned.append(idx)
    return owned


def band_power(spec: Spectrogram, band_edges=DEFAULT_BANDS) -> BandPowerMatrix:
    """Integrate spectrogram rows over each band, frame by frame.

    Multi-bin bands use :func:`simpson` with the bin spacing as step; a band
    owning a single bin contributes that bin's power times the bin spacing.
    """
    if spec.freq_axis.size < 2:
        raise ParameterError("spectrogram needs at least 2 frequency bins")
    df = float(spec.freq_axis[1] - spec.freq_axis[0])
    owned = band_bins(spec.freq_axis, band_edges)
    n_frames = spec.power.shape[1]
    out = np.zeros((len(band_edges), n_frames))
    for b, idx in enumerate(owned):
        if idx.size == 1:
            out[b] = spec.power[idx[0]] * df
        else:
            rows = spec.power[idx]
            for t in range(n_frames):
                out[b, t] = simpson(rows[:, t], df)
    return BandPowerMatrix(power=out, band_edges=tuple(band_edges))


def frequency_features(
    source,
    fs: float | None = None,
    window_seconds: float = 1.0,
    overlap_ratio: float = 0.0,
    band_edges=DEFAULT_BANDS,
    scaling: str = "radian",
) -> np.ndarray:
    """Band-power features for every channel, stacked as rows.

    Each channel's (bands, frames) matrix is flattened band-major -- all of
    band 0 over time, then band 1, and so on -- giving one row of length
    ``n_bands * n_frames`` per channel.
    """
    if isinstance(source, Recording):
        data, fs = source.data, source.fs
    else:
        data = np.asarray(source, dtype=np.float64)
        if fs is None:
            raise ParameterError("fs is required when passing a bare matrix")
    if data.ndim != 2:
        raise ShapeError("source must be a (channels, samples) matrix")

    rows = []
    for channel in data:
        spec = stft_power(channel, fs, window_seconds, overlap_ratio, scaling)
        bp = band_power(spec, band_edges)
        rows.append(bp.power.reshape(-1))
    return np.asarray(rows)
