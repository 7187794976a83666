"""The in-memory representation of a multichannel recording.

One class serves both raw parsed files and preprocessed signals: the payload
is always a channels-by-samples matrix in microvolts with a sampling rate,
channel names, and an optional label stream running at its own (usually much
slower) rate.  Preprocessing steps return new instances and pass any label
stream through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError
from .validation import check_positive


@dataclass
class Recording:
    """A multichannel signal plus optional labels.

    Parameters
    ----------
    channel_names : list of str
        One name per data row.
    fs : float
        Sampling rate in Hz, strictly positive.
    data : ndarray, shape (n_channels, n_samples)
        Physical values in microvolts.
    labels : ndarray or None
        Integer label ids at ``label_rate`` Hz.  Unscored spans use negative
        ids.  A trailing partial label period (labels slightly outrunning the
        signal) is tolerated.
    label_rate : float or None
        Labels per second; required when ``labels`` is present.
    """

    channel_names: list[str]
    fs: float
    data: np.ndarray
    labels: np.ndarray | None = None
    label_rate: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeError(f"data must be 2-D, got {self.data.ndim}-D")
        if len(self.channel_names) != self.data.shape[0]:
            raise ShapeError(
                f"{len(self.channel_names)} channel names for "
                f"{self.data.shape[0]} data rows"
            )
        self.fs = check_positive("fs", self.fs)
        if self.labels is not None:
            if self.label_rate is None:
                raise ParameterError("labels present but label_rate missing")
            self.label_rate = check_positive("label_rate", self.label_rate)
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.ndim != 1:
                raise ShapeError("labels must be 1-D")
            samples_per_label = self.fs / self.label_rate
            covered = len(self.labels) * samples_per_label
            if covered > self.n_samples + samples_per_label + 1e-9:
                raise ShapeError(
                    f"{len(self.labels)} labels cover {covered:.0f} samples but "
                    f"the signal has only {self.n_samples}"
                )
        elif self.label_rate is not None:
            self.label_rate = check_positive("label_rate", self.label_rate)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.n_samples / self.fs

    def replace_data(self, data: np.ndarray, fs: float | None = None) -> "Recording":
        """New recording with different samples; names and labels carry over."""
        return Recording(
            channel_names=list(self.channel_names),
            fs=self.fs if fs is None else fs,
            data=data,
            labels=self.labels,
            label_rate=self.label_rate,
            meta=dict(self.meta),
        )
