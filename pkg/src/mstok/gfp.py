"""Global field power: per-sample spread across channels, and its peaks.

GFP at sample i is the population standard deviation of the channel values
at that instant.  Its local maxima mark the moments of highest topographic
signal-to-noise, and the channel vectors at those moments are the training
units for the codebook.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ParameterError
from .recording import Recording
from .validation import as_float_matrix


@dataclass
class GfpSeries:
    values: np.ndarray
    fs: float


def gfp_values(data) -> np.ndarray:
    """Population (divide-by-N) standard deviation across channels.

    Population rather than sample normalization is the convention in the
    topographic literature; with N channels the variance divisor is N.
    """
    data = as_float_matrix(data, "data")
    if data.shape[0] < 2:
        raise ParameterError(
            f"GFP needs at least 2 channels, got {data.shape[0]}"
        )
    return data.std(axis=0)


def gfp_series(recording: Recording) -> GfpSeries:
    return GfpSeries(values=gfp_values(recording.data), fs=recording.fs)


def gfp_peaks(series) -> np.ndarray:
    """Indices of strict local maxima of a GFP curve.

    A run of equal values bounded by a rise on the left and a fall on the
    right counts once, at its first sample.  Endpoints are never peaks.
    Accepts a :class:`GfpSeries` or a bare vector.
    """
    values = np.asarray(getattr(series, "values", series), dtype=np.float64)
    if values.ndim != 1:
        raise ParameterError("GFP series must be 1-D")
    if values.size < 3:
        return np.empty(0, dtype=np.int64)
    steps = np.diff(values)
    moving = np.nonzero(steps)[0]
    if moving.size < 2:
        return np.empty(0, dtype=np.int64)
    direction = np.sign(steps[moving])
    crest = (direction[:-1] > 0) & (direction[1:] < 0)
    return (moving[:-1][crest] + 1).astype(np.int64)


def extract_peak_maps(source, peak_indices) -> np.ndarray:
    """Channel topographies at the given sample indices, one row per peak.

    ``source`` may be a :class:`Recording` or a (channels, samples) matrix.
    """
    data = source.data if isinstance(source, Recording) else as_float_matrix(source, "source")
    indices = np.asarray(peak_indices, dtype=np.int64)
    if indices.ndim != 1:
        raise ParameterError("peak_indices must be 1-D")
    if indices.size == 0:
        return np.empty((0, data.shape[0]))
    if indices.min() < 0 or indices.max() >= data.shape[1]:
        bad = indices[(indices < 0) | (indices >= data.shape[1])][0]
        raise BoundsError(
            f"peak index {bad} outside 0..{data.shape[1] - 1}"
        )
    return data[:, indices].T.copy()


def peak_maps(recording: Recording) -> np.ndarray:
    """Convenience: GFP peak topographies of a recording, (n_peaks, N)."""
    return extract_peak_maps(recording, gfp_peaks(gfp_values(recording.data)))
