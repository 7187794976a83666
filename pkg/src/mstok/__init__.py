"""EEG microstate tokenization toolkit.

Continuous multichannel EEG goes in; discrete microstate token sequences
come out.  A codebook of centroid topographies is fitted with streaming
k-means on global-field-power peaks, then applied per sample.  Alongside the
tokenizer live the classic band-power baseline, windowed dataset plumbing,
distribution analytics, a softmax classifier, and a synthetic signal
generator used by the end-to-end checks.
"""

from .analytics import (
    EvaluationReport,
    RankTable,
    SoftmaxModel,
    SoftmaxRegression,
    cohen_kappa,
    confusion_matrix,
    epoch_histograms,
    evaluate,
    evaluate_predictions,
    microstate_histogram,
    rank_microstates,
    split_recordings,
    train_softmax,
)
from .clustering import (
    Codebook,
    FitConfig,
    StreamingKMeans,
    assign,
    batch_kmeans,
    batch_stream,
    kmeanspp_init,
    streaming_fit,
)
from .edf import read_edf
from .errors import (
    AlignmentError,
    BoundsError,
    CalibrationError,
    ChannelLookupError,
    ContractError,
    DataError,
    FormatError,
    InsufficientDataError,
    MstokError,
    ParameterError,
    ParseError,
    ShapeError,
    TruncationError,
)
from .formats import (
    read_codebook,
    read_csv_recording,
    read_raw_recording,
    write_codebook,
    write_csv_recording,
    write_raw_recording,
)
from .gfp import extract_peak_maps, gfp_peaks, gfp_series, gfp_values, peak_maps
from .preprocessing import (
    DEFAULT_CHANNELS,
    bandpass,
    canonical_channel_name,
    resample,
    select_channels,
)
from .recording import Recording
from .spectral import (
    BAND_NAMES,
    DEFAULT_BANDS,
    BandPowerMatrix,
    Spectrogram,
    band_power,
    frequency_features,
    simpson,
    stft_power,
)
from .synth import SynthSpec, generate, generate_corpus
from .tokenizer import (
    LabeledWindow,
    MicrostateTokenizer,
    TokenSequence,
    pad_tokens,
    slice_windows,
    tokenize,
)

__version__ = "0.1.0"
