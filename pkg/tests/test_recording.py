"""Recording invariants and config validation."""

import numpy as np
import pytest

from mstok.clustering import FitConfig
from mstok.config import PipelineConfig, load_config
from mstok.errors import ParameterError, ShapeError
from mstok.recording import Recording


def test_channel_count_must_match_rows():
    with pytest.raises(ShapeError):
        Recording(channel_names=["a"], fs=10.0, data=np.zeros((2, 5)))


def test_fs_strictly_positive():
    with pytest.raises(ParameterError):
        Recording(channel_names=["a"], fs=0.0, data=np.zeros((1, 5)))


def test_labels_require_rate():
    with pytest.raises(ParameterError):
        Recording(
            channel_names=["a"], fs=10.0, data=np.zeros((1, 5)),
            labels=np.array([0]),
        )


def test_trailing_partial_label_period_tolerated():
    # 95 samples at 10 Hz with one label per 30 samples: 3 labels cover 90
    # samples; a 4th covers a partial trailing period and is still legal
    rec = Recording(
        channel_names=["a", "b"], fs=10.0, data=np.zeros((2, 95)),
        labels=np.array([0, 1, 0, 1]), label_rate=1 / 3,
    )
    assert rec.duration == pytest.approx(9.5)


def test_labels_overrunning_signal_rejected():
    with pytest.raises(ShapeError):
        Recording(
            channel_names=["a", "b"], fs=10.0, data=np.zeros((2, 95)),
            labels=np.array([0, 1, 0, 1, 0]), label_rate=1 / 3,
        )


def test_fit_config_validation():
    with pytest.raises(ParameterError):
        FitConfig(k=1)
    with pytest.raises(ParameterError):
        FitConfig(batch_size=0)
    with pytest.raises(ParameterError):
        FitConfig(tol=0.0)
    with pytest.raises(ParameterError):
        FitConfig(mode="fancy")


def test_pipeline_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.json"
    path.write_text('{"k": 8, "typo_field": true}')
    with pytest.raises(ParameterError, match="typo_field"):
        load_config(path)


def test_pipeline_config_defaults_are_valid():
    config = PipelineConfig()
    assert config.k == 1000
    assert config.batch_size == 50
    assert config.channels == ["F3", "F4", "C3", "C4", "O1", "O2"]
    assert config.band == [1.0, 40.0]
    assert config.label_rate == pytest.approx(1 / 30)


def test_pipeline_config_mode_validated():
    with pytest.raises(ParameterError):
        PipelineConfig(mode="other")
