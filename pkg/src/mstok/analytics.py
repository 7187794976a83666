"""Distribution analytics and the desk-scale classifier.

Token streams are summarized two ways: occurrence histograms (the classifier
features) and per-group rank tables (which states dominate under which
label).  The classifier itself is a softmax regression trained by full-batch
gradient descent on the cross-entropy loss; evaluation reports accuracy,
Cohen's kappa, and the confusion matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import BoundsError, DataError, ParameterError, ShapeError
from .tokenizer import LabeledWindow
from .validation import as_float_matrix, as_int_vector, integral_count


def microstate_histogram(tokens, k: int, pad_id: int | None = None) -> np.ndarray:
    """Relative frequency of each state id in ``tokens``.

    Padding tokens are skipped; the result sums to 1, or is the zero vector
    when nothing but padding is present.  Ids outside 0..k-1 that are not
    the padding id are rejected.
    """
    tokens = as_int_vector(tokens, "tokens")
    if pad_id is None:
        pad_id = k
    real = tokens[tokens != pad_id]
    if real.size and (real.min() < 0 or real.max() >= k):
        bad = real[(real < 0) | (real >= k)][0]
        raise BoundsError(f"token id {bad} outside 0..{k - 1}")
    counts = np.bincount(real, minlength=k).astype(np.float64)
    total = counts.sum()
    return counts / total if total else counts


@dataclass
class RankTable:
    """Occurrence counts and descending-frequency ranks for one group+label."""

    group_id: int
    label: int
    counts: dict[int, int]
    ranks: list[int]  # ids ordered rank 1, 2, ...; zero-count ids excluded

    def rank_of(self, state: int) -> int | None:
        """1-based rank of a state, or None if it never occurred."""
        try:
            return self.ranks.index(state) + 1
        except ValueError:
            return None


def rank_microstates(entries, k: int, pad_id: int | None = None) -> list[RankTable]:
    """Per-(group, label) state rankings.

    ``entries`` is an iterable of ``(group_id, label, tokens)``.  Counts are
    pooled per key; ids sort by descending count with ties broken by
    ascending id, and rank 1 is the most frequent.  Ranks are 1-based.
    """
    if pad_id is None:
        pad_id = k
    pooled: dict[tuple[int, int], np.ndarray] = {}
    for group_id, label, tokens in entries:
        tokens = as_int_vector(tokens, "tokens")
        real = tokens[tokens != pad_id]
        if real.size and (real.min() < 0 or real.max() >= k):
            raise BoundsError("token id outside 0..k-1")
        key = (int(group_id), int(label))
        counts = np.bincount(real, minlength=k)
        if key in pooled:
            pooled[key] += counts
        else:
            pooled[key] = counts

    tables = []
    for (group_id, label), counts in sorted(pooled.items()):
        order = np.lexsort((np.arange(k), -counts))
        ranked = [int(i) for i in order if counts[i] > 0]
        tables.append(
            RankTable(
                group_id=group_id,
                label=label,
                counts={int(i): int(counts[i]) for i in ranked},
                ranks=ranked,
            )
        )
    return tables


def format_rank_tables(tables: list[RankTable], top_n: int = 20) -> str:
    """Aligned-column text: one row per state, one rank column per group.

    States shown are the union of each table's ``top_n`` most frequent.
    Absent states print ``-``.
    """
    if not tables:
        return "(no rank tables)\n"
    by_label: dict[int, list[RankTable]] = {}
    for table in tables:
        by_label.setdefault(table.label, []).append(table)

    blocks = []
    for label in sorted(by_label):
        group_tables = sorted(by_label[label], key=lambda t: t.group_id)
        shown = sorted({s for t in group_tables for s in t.ranks[:top_n]})
        header = ["microstate"] + [f"group{t.group_id}" for t in group_tables]
        rows = [header]
        for state in shown:
            row = [str(state)]
            for t in group_tables:
                r = t.rank_of(state)
                row.append("-" if r is None else str(r))
            rows.append(row)
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        lines = [f"label {label} (rank among groups)"]
        for r in rows:
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Softmax classifier


@dataclass
class SoftmaxModel:
    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    loss_curve: list[float] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_loss_and_grad(weights, bias, features, labels):
    """Mean cross-entropy of ``-sum_i p(i) log softmax(h_i)`` and its gradient.

    ``p`` is the one-hot true distribution, ``h`` the affine class scores.
    Returns ``(loss, grad_weights, grad_bias)``.
    """
    scores = features @ weights.T + bias
    probs = _softmax(scores)
    n = features.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.log(np.clip(picked, 1e-300, None)).mean())
    delta = probs
    delta[np.arange(n), labels] -= 1.0
    grad_w = delta.T @ features / n
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


def train_softmax(
    features,
    labels,
    learning_rate: float = 0.1,
    epochs: int = 200,
    seed: int = 0,
) -> SoftmaxModel:
    """Full-batch gradient descent from a zero-initialized model.

    With zero epochs the model predicts the uniform distribution and its
    loss is ``ln(n_classes)``.  Every class in 0..max(labels) must appear at
    least once.  ``seed`` is accepted for interface stability; the zero
    initialization makes training deterministic without it.
    """
    features = as_float_matrix(features, "features", allow_empty=False)
    labels = as_int_vector(labels, "labels")
    if len(labels) != features.shape[0]:
        raise ShapeError(
            f"{features.shape[0]} feature rows but {len(labels)} labels"
        )
    if not np.all(np.isfinite(features)):
        raise DataError("features contain non-finite values")
    if labels.min() < 0:
        raise DataError("labels must be non-negative ids")
    n_classes = int(labels.max()) + 1
    present = np.bincount(labels, minlength=n_classes)
    if (present == 0).any():
        missing = int(np.nonzero(present == 0)[0][0])
        raise DataError(f"class {missing} absent from training labels")
    if epochs < 0:
        raise ParameterError("epochs must be >= 0")

    weights = np.zeros((n_classes, features.shape[1]))
    bias = np.zeros(n_classes)
    curve = []
    for _ in range(epochs):
        loss, grad_w, grad_b = softmax_loss_and_grad(weights, bias, features, labels)
        curve.append(loss)
        weights -= learning_rate * grad_w
        bias -= learning_rate * grad_b
    return SoftmaxModel(weights=weights, bias=bias, loss_curve=curve)


def predict_proba(model: SoftmaxModel, features) -> np.ndarray:
    features = as_float_matrix(features, "features")
    return _softmax(features @ model.weights.T + model.bias)


def predict(model: SoftmaxModel, features) -> np.ndarray:
    return np.argmax(predict_proba(model, features), axis=1)


# ---------------------------------------------------------------------------
# Metrics


def confusion_matrix(y_true, y_pred, n_classes: int | None = None) -> np.ndarray:
    y_true = as_int_vector(y_true, "y_true")
    y_pred = as_int_vector(y_pred, "y_pred")
    if len(y_true) != len(y_pred):
        raise ShapeError("y_true and y_pred lengths differ")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (y_true, y_pred), 1)
    return matrix


def cohen_kappa(matrix) -> tuple[float, bool]:
    """Chance-corrected agreement from a confusion matrix (rows = truth).

    Returns ``(kappa, degenerate)``.  When the chance agreement p_e is 1
    (both marginals concentrated on a single class) kappa is reported as 1.0
    for perfect agreement and 0.0 otherwise, with the degeneracy flagged.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    total = matrix.sum()
    if total == 0:
        raise ParameterError("confusion matrix is empty")
    p_o = np.trace(matrix) / total
    p_e = float((matrix.sum(axis=1) * matrix.sum(axis=0)).sum()) / total**2
    if p_e >= 1.0 - 1e-15:
        return (1.0 if p_o >= 1.0 - 1e-15 else 0.0), True
    return float((p_o - p_e) / (1.0 - p_e)), False


@dataclass
class EvaluationReport:
    accuracy: float
    kappa: float
    confusion: np.ndarray
    per_class_recall: np.ndarray
    kappa_degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "kappa": self.kappa,
            "kappa_degenerate": self.kappa_degenerate,
            "confusion": self.confusion.tolist(),
            "per_class_recall": self.per_class_recall.tolist(),
        }


def evaluate(model: SoftmaxModel, features, labels) -> EvaluationReport:
    """Accuracy, Cohen's kappa, confusion matrix and per-class recall."""
    labels = as_int_vector(labels, "labels")
    preds = predict(model, features)
    return evaluate_predictions(labels, preds, n_classes=model.n_classes)


def evaluate_predictions(y_true, y_pred, n_classes: int | None = None) -> EvaluationReport:
    matrix = confusion_matrix(y_true, y_pred, n_classes)
    total = matrix.sum()
    accuracy = float(np.trace(matrix) / total)
    kappa, degenerate = cohen_kappa(matrix)
    row_sums = matrix.sum(axis=1)
    recall = np.divide(
        np.diag(matrix),
        row_sums,
        out=np.zeros(len(matrix), dtype=np.float64),
        where=row_sums > 0,
    )
    return EvaluationReport(
        accuracy=accuracy,
        kappa=kappa,
        confusion=matrix,
        per_class_recall=recall,
        kappa_degenerate=degenerate,
    )


class SoftmaxRegression(BaseEstimator, ClassifierMixin):
    """Estimator wrapper around :func:`train_softmax`.

    ``standardize=True`` z-scores each feature dimension with statistics
    from the training split; constant dimensions are left unscaled.
    """

    def __init__(
        self,
        learning_rate: float = 0.1,
        epochs: int = 200,
        standardize: bool = True,
        random_state: int = 0,
    ):
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.standardize = standardize
        self.random_state = random_state

    def fit(self, X, y):
        X = as_float_matrix(X, "X", allow_empty=False)
        y = as_int_vector(y, "y")
        if self.standardize:
            self.mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale == 0] = 1.0
            self.scale_ = scale
            X = (X - self.mean_) / self.scale_
        self.classes_ = np.arange(int(y.max()) + 1)
        self.model_ = train_softmax(
            X, y, self.learning_rate, self.epochs, self.random_state
        )
        return self

    def _prepare(self, X):
        if not hasattr(self, "model_"):
            raise NotFittedError("SoftmaxRegression is not fitted yet")
        X = as_float_matrix(X, "X")
        if self.standardize:
            X = (X - self.mean_) / self.scale_
        return X

    def predict(self, X):
        return predict(self.model_, self._prepare(X))

    def predict_proba(self, X):
        return predict_proba(self.model_, self._prepare(X))

    def evaluate(self, X, y) -> EvaluationReport:
        return evaluate_predictions(
            as_int_vector(y, "y"), self.predict(X), n_classes=self.model_.n_classes
        )


# ---------------------------------------------------------------------------
# Epoch-level examples and splits


def epoch_histograms(window: LabeledWindow, k: int, pad_id: int | None = None):
    """One histogram per label period inside a window.

    The window's tokens are divided evenly across its labels (the per-label
    token count must be integral); returns ``(histograms, labels)`` with one
    row per scored label.
    """
    n_labels = len(window.labels)
    if n_labels == 0:
        raise ParameterError("window carries no labels")
    per = integral_count(
        "tokens per label period", len(window.tokens) / n_labels
    )
    hists = []
    labels = []
    for i in range(n_labels):
        label = int(window.labels[i])
        if label < 0:
            continue
        segment = window.tokens[i * per : (i + 1) * per]
        hists.append(microstate_histogram(segment, k, pad_id))
        labels.append(label)
    return np.asarray(hists), np.asarray(labels, dtype=np.int64)


def split_recordings(ids, seed: int, fractions=(7, 1, 2)):
    """Deterministic shuffle of recording ids into train/val/test buckets.

    Bucket sizes follow ``fractions`` proportionally (train gets the
    rounding slack); every non-empty input yields a non-empty train bucket.
    """
    ids = list(ids)
    if len(fractions) != 3 or any(f < 0 for f in fractions) or sum(fractions) <= 0:
        raise ParameterError("fractions must be three non-negative numbers")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]
    total = float(sum(fractions))
    n_val = int(len(ids) * fractions[1] / total)
    n_test = int(len(ids) * fractions[2] / total)
    n_train = len(ids) - n_val - n_test
    train = shuffled[:n_train]
    val = shuffled[n_train : n_train + n_val]
    test = shuffled[n_train + n_val :]
    return train, val, test
