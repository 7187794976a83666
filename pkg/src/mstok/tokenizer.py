"""Turning continuous signals into microstate token sequences.

Every sample (not just GFP peaks) is mapped to the id of its nearest
centroid, so a recording of n samples becomes n discrete tokens at the
signal rate.  Windowing then cuts token and label streams into aligned
fixed-duration pieces, and padding right-fills short sequences with the
reserved id ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import gfp
from .clustering import Codebook, FitConfig, assign, batch_stream, streaming_fit
from .errors import AlignmentError, ContractError, ParameterError
from .preprocessing import (
    DEFAULT_CHANNELS,
    bandpass,
    canonical_channel_name,
    resample,
    select_channels,
)
from .recording import Recording
from .validation import as_int_vector, integral_count


@dataclass
class TokenSequence:
    """Microstate ids at the signal rate; ids run 0..k with k = padding."""

    tokens: np.ndarray
    fs: float


@dataclass
class LabeledWindow:
    tokens: np.ndarray
    labels: np.ndarray
    window_index: int
    subject_id: int | None = None


def tokenize(codebook: Codebook, recording: Recording) -> TokenSequence:
    """Assign every sample of ``recording`` to its nearest centroid.

    The recording's channel order must match the codebook's channel names
    (compared case-insensitively, montage decorations ignored); the first
    disagreement is reported.
    """
    if codebook.channel_names is not None:
        if len(recording.channel_names) != len(codebook.channel_names):
            raise ContractError(
                f"recording has {len(recording.channel_names)} channels but the "
                f"codebook was fitted on {len(codebook.channel_names)}"
            )
        for i, (got, want) in enumerate(
            zip(recording.channel_names, codebook.channel_names)
        ):
            if canonical_channel_name(got) != canonical_channel_name(want):
                raise ContractError(
                    f"channel {i}: recording has {got!r} where the codebook "
                    f"expects {want!r}"
                )
    elif recording.n_channels != codebook.n_channels:
        raise ContractError(
            f"recording has {recording.n_channels} channels but the codebook "
            f"has {codebook.n_channels}"
        )

    labels, _ = assign(codebook.centroids.astype(np.float64), recording.data.T)
    return TokenSequence(tokens=labels.astype(np.int32), fs=recording.fs)


def slice_windows(
    tokens,
    labels,
    fs: float,
    label_rate: float,
    window_seconds: float,
    subject_id: int | None = None,
    drop_unscored: bool = True,
) -> list[LabeledWindow]:
    """Cut aligned token/label streams into consecutive fixed windows.

    Both streams are anchored at time zero.  Window w takes tokens
    ``[w*fs*T, (w+1)*fs*T)`` and labels ``[w*label_rate*T, (w+1)*label_rate*T)``
    where T is ``window_seconds``; the trailing partial window is dropped.
    Both per-window counts must be integral.  Windows containing a negative
    (unscored) label are dropped when ``drop_unscored`` is set.

    Raises ``AlignmentError`` when the label stream ends before the last
    full token window.
    """
    tokens = np.asarray(getattr(tokens, "tokens", tokens))
    labels = as_int_vector(labels, "labels")
    tokens_per_window = integral_count("fs * window_seconds", fs * window_seconds)
    labels_per_window = integral_count(
        "label_rate * window_seconds", label_rate * window_seconds
    )
    if tokens_per_window < 1 or labels_per_window < 1:
        raise ParameterError("window_seconds too small for the given rates")

    n_windows = len(tokens) // tokens_per_window
    if len(labels) < n_windows * labels_per_window:
        raise AlignmentError(
            f"{n_windows} windows need {n_windows * labels_per_window} labels "
            f"but only {len(labels)} are present"
        )

    windows = []
    for w in range(n_windows):
        lab = labels[w * labels_per_window : (w + 1) * labels_per_window]
        if drop_unscored and (lab < 0).any():
            continue
        tok = tokens[w * tokens_per_window : (w + 1) * tokens_per_window]
        windows.append(
            LabeledWindow(
                tokens=np.array(tok),
                labels=np.array(lab),
                window_index=w,
                subject_id=subject_id,
            )
        )
    return windows


def pad_tokens(tokens, target_len: int, pad_id: int) -> np.ndarray:
    """Right-pad a token vector with ``pad_id`` to exactly ``target_len``."""
    tokens = np.asarray(getattr(tokens, "tokens", tokens))
    if tokens.ndim != 1:
        raise ParameterError("tokens must be 1-D")
    if target_len < len(tokens):
        raise ParameterError(
            f"target_len {target_len} is shorter than the sequence "
            f"({len(tokens)}); this operation never truncates"
        )
    out = np.full(target_len, pad_id, dtype=tokens.dtype if tokens.size else np.int32)
    out[: len(tokens)] = tokens
    return out


class MicrostateTokenizer(BaseEstimator, TransformerMixin):
    """Fit a microstate codebook on recordings and emit token sequences.

    ``fit`` runs the full conditioning chain on each recording -- channel
    selection, optional 1-40 Hz zero-phase bandpass, optional resampling --
    then collects the GFP-peak topographies and feeds them in batches to the
    streaming k-means.  ``transform`` applies the same conditioning and maps
    every sample to its nearest centroid.

    Parameters
    ----------
    n_states : int
        Number of centroids k; the padding id is k.
    batch_size : int
        Rows per streaming update step.
    channels : sequence of str
        Leads to extract, in output order.
    band : (low, high) or None
        Bandpass edges in Hz; None skips filtering.
    target_fs : float or None
        Resampling target in Hz; None keeps the native rate.
    average_reference : bool
        Subtract the instantaneous channel mean before peak extraction and
        assignment.  Off by default; GFP itself is unaffected either way.
    mode : {"literal", "weighted"}
        Streaming update rule (see :mod:`mstok.clustering`).
    max_iter, tol, random_state
        Passed to the streaming fit.
    """

    def __init__(
        self,
        n_states: int = 1000,
        batch_size: int = 50,
        channels=DEFAULT_CHANNELS,
        band=(1.0, 40.0),
        target_fs: float | None = 100.0,
        average_reference: bool = False,
        mode: str = "literal",
        max_iter: int = 300,
        tol: float = 1e-4,
        random_state: int = 0,
    ):
        self.n_states = n_states
        self.batch_size = batch_size
        self.channels = channels
        self.band = band
        self.target_fs = target_fs
        self.average_reference = average_reference
        self.mode = mode
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def prepare(self, recording: Recording) -> Recording:
        """The conditioning chain applied before both fitting and tokenizing."""
        out = select_channels(recording, self.channels)
        if self.band is not None:
            out = bandpass(out, *self.band)
        if self.target_fs is not None:
            out = resample(out, self.target_fs)
        if self.average_reference:
            out = out.replace_data(out.data - out.data.mean(axis=0, keepdims=True))
        return out

    def fit(self, X, y=None):
        """Fit the codebook.  ``X`` is a recording or a list of recordings."""
        recordings = [X] if isinstance(X, Recording) else list(X)
        if not recordings:
            raise ParameterError("fit needs at least one recording")

        def peak_rows():
            for rec in recordings:
                yield gfp.peak_maps(self.prepare(rec))

        config = FitConfig(
            k=self.n_states,
            batch_size=self.batch_size,
            max_iter=self.max_iter,
            tol=self.tol,
            mode=self.mode,
            seed=self.random_state,
        )
        codebook = streaming_fit(
            batch_stream(peak_rows(), self.batch_size),
            config,
            channel_names=list(self.channels),
        )
        codebook.meta.update(
            {
                "band": None if self.band is None else list(self.band),
                "fit_fs": self.target_fs or recordings[0].fs,
                "average_reference": self.average_reference,
            }
        )
        self.codebook_ = codebook
        self.n_iter_ = codebook.meta["iterations"]
        self.final_shift_ = codebook.meta["final_shift"]
        return self

    def transform(self, X):
        """Tokenize a recording (or list of recordings)."""
        if not hasattr(self, "codebook_"):
            raise NotFittedError("MicrostateTokenizer is not fitted yet")
        if isinstance(X, Recording):
            return tokenize(self.codebook_, self.prepare(X))
        return [tokenize(self.codebook_, self.prepare(rec)) for rec in X]

    @property
    def pad_id(self) -> int:
        if not hasattr(self, "codebook_"):
            raise NotFittedError("MicrostateTokenizer is not fitted yet")
        return self.codebook_.pad_id
