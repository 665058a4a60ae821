# ========================================
# FileName: evaluation.py
# Brief: Confusion matrices, scores, cross-validation and comparisons.
# =========================================

import io
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from rich.console import Console
from rich.table import Table

from .classifiers import Hyperparams, TrainedModel, fit
from .datasets import Dataset, kfold_split, normalize_apply, normalize_fit
from .errors import CrossValidationError, JetFDIError, LabelError, ShapeError
from ..utils.logging import setup_logger

logger = setup_logger()

BinaryCounts = namedtuple('BinaryCounts', ['TP', 'TN', 'FP', 'FN'])


# --------------------------------------------------------
# Confusion matrix and scores
# --------------------------------------------------------
@dataclass(frozen=True)
class ConfusionMatrix:
    """Raw counts, rows = actual class, columns = predicted class."""
    counts: np.ndarray
    class_names: tuple

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_class(self) -> int:
        return len(self.class_names)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.counts, columns=list(self.class_names),
                             index=list(self.class_names))
        frame.index.name = 'actual'
        return frame

    def to_csv(self, path: str):
        self.to_frame().to_csv(path)


def confusion(actual, predicted, n_class: Optional[int] = None,
              class_names: Optional[tuple] = None) -> ConfusionMatrix:
    """Count (actual, predicted) pairs.

    :param actual: True labels.
    :param predicted: Predicted labels.
    :param n_class: Number of classes; defaults to len(class_names).
    :param class_names: Class names; default to their indices.

    :return: The confusion matrix.
    :rtype: ConfusionMatrix
    """
    actual = np.asarray(actual, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if actual.shape != predicted.shape or actual.ndim != 1:
        raise ShapeError("actual and predicted labels differ in shape")
    if len(actual) == 0:
        raise ShapeError("no labels to compare")
    if n_class is None:
        if class_names is None:
            raise ShapeError("n_class or class_names is required")
        n_class = len(class_names)
    if class_names is None:
        class_names = tuple(str(i) for i in range(n_class))
    for name, labels in (('actual', actual), ('predicted', predicted)):
        bad = np.flatnonzero((labels < 0) | (labels >= n_class))
        if bad.size:
            raise LabelError(
                f"{name} label {labels[bad[0]]} at index {bad[0]} outside "
                f"[0, {n_class})")
    counts = np.zeros((n_class, n_class), dtype=int)
    np.add.at(counts, (actual, predicted), 1)
    return ConfusionMatrix(counts, tuple(class_names))


def row_normalized(cm: ConfusionMatrix) -> np.ndarray:
    """Percentages per actual class; empty rows stay at 0."""
    rows = cm.counts.sum(axis=1, keepdims=True)
    return np.divide(100.0 * cm.counts, rows,
                     out=np.zeros(cm.counts.shape), where=rows > 0)


def accuracy(cm: ConfusionMatrix) -> float:
    """Share of correct predictions, in percent."""
    if cm.total == 0:
        raise ShapeError("accuracy of an empty confusion matrix")
    return 100.0 * np.trace(cm.counts) / cm.total


def binary_reduction(cm: ConfusionMatrix, positive: int) -> BinaryCounts:
    """TP, TN, FP, FN with `positive` against all other classes."""
    counts = cm.counts
    tp = int(counts[positive, positive])
    fp = int(counts[:, positive].sum()) - tp
    fn = int(counts[positive, :].sum()) - tp
    tn = cm.total - tp - fp - fn
    return BinaryCounts(tp, tn, fp, fn)


def f1(cm: ConfusionMatrix, positive: int = 1) -> float:
    """2TP / (2TP + FP + FN), 0 when nothing was positive."""
    c = binary_reduction(cm, positive)
    denominator = 2 * c.TP + c.FP + c.FN
    return 2 * c.TP / denominator if denominator else 0.0


def macro_f1(cm: ConfusionMatrix) -> float:
    """Unweighted mean of the per-class F1 scores."""
    return float(np.mean([f1(cm, k) for k in range(cm.n_class)]))


def precision_recall(cm: ConfusionMatrix) -> tuple:
    """Per-class precision and recall, 0 where undefined."""
    counts = cm.counts.astype(float)
    diagonal = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    precision = np.divide(diagonal, predicted, out=np.zeros_like(diagonal),
                          where=predicted > 0)
    recall = np.divide(diagonal, actual, out=np.zeros_like(diagonal),
                       where=actual > 0)
    return precision, recall


def evaluate_model(model: TrainedModel, data: Dataset) -> tuple:
    """Score a model on a raw dataset.

    The dataset is normalised with the model statistics first.

    :return: (ConfusionMatrix, metrics dict)
    :rtype: tuple
    """
    if model.norm_stats is not None:
        data = normalize_apply(data, model.norm_stats)
    predicted = model.predict_batch(data)
    cm = confusion(data.labels, predicted, class_names=model.class_names)
    precision, recall = precision_recall(cm)
    metrics = {
        'algorithm': model.algorithm,
        'samples': cm.total,
        'accuracy': accuracy(cm),
        'f1': macro_f1(cm),
        'per_class': {
            name: {'precision': float(p), 'recall': float(r)}
            for name, p, r in zip(cm.class_names, precision, recall)},
    }
    return cm, metrics


# --------------------------------------------------------
# Cross-validation
# --------------------------------------------------------
@dataclass
class CVResult:
    """Validation accuracies (percent) of the k folds."""
    algorithm: str
    fold_scores: list
    fold_sizes: list

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_scores))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_scores))


def cross_validate(algorithm: str, dataset: Dataset, k: int = 5,
                   seed: int = 0, hp: Hyperparams = Hyperparams()
                   ) -> CVResult:
    """Stratified k-fold cross-validation of one algorithm.

    Normalisation is fitted on the training folds only. Folds are scored
    by accuracy.

    :param algorithm: One of the classifier names.
    :type algorithm: str

    :param dataset: Raw dataset.
    :type dataset: Dataset

    :param k: Number of folds.
    :type k: int

    :param seed: Fold shuffling seed.
    :type seed: int

    :param hp: Hyperparameters.
    :type hp: Hyperparams

    :return: Per-fold scores.
    :rtype: CVResult
    """
    scores, sizes = [], []
    for i, (train_idx, val_idx) in enumerate(kfold_split(dataset, k, seed)):
        try:
            train = dataset.subset(train_idx)
            stats = normalize_fit(train)
            model = fit(algorithm, normalize_apply(train, stats), hp)
            validation = normalize_apply(dataset.subset(val_idx), stats)
            cm = confusion(validation.labels,
                           model.predict_batch(validation),
                           class_names=dataset.class_names)
        except JetFDIError as e:
            raise CrossValidationError(i, e) from e
        scores.append(accuracy(cm))
        sizes.append(len(val_idx))
        logger.debug(f"{algorithm} fold {i}: {scores[-1]:.2f} %")
    return CVResult(algorithm, scores, sizes)


# --------------------------------------------------------
# Comparison
# --------------------------------------------------------
@dataclass
class ComparisonRow:
    algorithm: str
    accuracy: float = float('nan')
    f1: float = float('nan')
    training_time: float = float('nan')
    precision: Optional[np.ndarray] = None
    recall: Optional[np.ndarray] = None
    confusion: Optional[ConfusionMatrix] = None
    cv: Optional[CVResult] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class MetricsReport:
    rows: list = field(default_factory=list)
    class_names: tuple = ()

    def row(self, algorithm: str) -> ComparisonRow:
        for row in self.rows:
            if row.algorithm == algorithm:
                return row
        raise KeyError(algorithm)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{'classifier': r.algorithm, 'accuracy': r.accuracy,
              'f1': r.f1, 'train_time_s': r.training_time}
             for r in self.rows],
            columns=['classifier', 'accuracy', 'f1', 'train_time_s'])

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index=False, float_format="%.6f")

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            entry = {'classifier': r.algorithm, 'error': r.error}
            if not r.failed:
                entry['test'] = {'accuracy': r.accuracy, 'f1': r.f1}
                entry['train_time_s'] = r.training_time
                entry['per_class'] = {
                    name: {'precision': float(p), 'recall': float(q)}
                    for name, p, q in zip(self.class_names, r.precision,
                                          r.recall)}
            if r.cv is not None:
                entry['cv'] = {'fold_scores': r.cv.fold_scores,
                               'mean': r.cv.mean, 'std': r.cv.std}
            rows.append(entry)
        return {'class_names': list(self.class_names), 'rows': rows}


def _compare_one(algorithm, train, test, raw_train, hp, cv_folds, seed):
    row = ComparisonRow(algorithm)
    try:
        model = fit(algorithm, train, hp)
        cm = confusion(test.labels, model.predict_batch(test),
                       class_names=test.class_names)
        row.accuracy = accuracy(cm)
        row.f1 = macro_f1(cm)
        row.training_time = model.training_time
        row.precision, row.recall = precision_recall(cm)
        row.confusion = cm
        if cv_folds:
            row.cv = cross_validate(algorithm, raw_train, cv_folds, seed, hp)
    except (JetFDIError, np.linalg.LinAlgError) as e:
        row.error = str(e)
    return row


def compare(algorithms, train: Dataset, test: Dataset,
            hp: Hyperparams = Hyperparams(), cv_folds: Optional[int] = None,
            seed: int = 0, jobs: int = 1) -> MetricsReport:
    """Fit every algorithm on `train` and score it on `test`.

    Both sets are normalised with statistics fitted on `train`. A failing
    algorithm yields a failed row and does not stop the others. Rows are
    sorted by decreasing test accuracy, failed rows last.

    :param algorithms: Algorithm names.
    :param train: Raw training set.
    :param test: Raw test set.
    :param hp: Hyperparameters.
    :param cv_folds: When given, also cross-validate on `train`.
    :param seed: Fold seed.
    :param jobs: Parallel fits.

    :return: The comparison report.
    :rtype: MetricsReport
    """
    if train.class_names != test.class_names:
        raise ShapeError("train and test sets have different classes")
    stats = normalize_fit(train)
    normalized_train = normalize_apply(train, stats)
    normalized_test = normalize_apply(test, stats)
    rows = Parallel(n_jobs=jobs)(
        delayed(_compare_one)(algorithm, normalized_train, normalized_test,
                              train, hp, cv_folds, seed)
        for algorithm in algorithms)
    for row in rows:
        if row.failed:
            logger.error(f"{row.algorithm} failed: {row.error}")
    rows = sorted([r for r in rows if not r.failed],
                  key=lambda r: -r.accuracy) + \
        [r for r in rows if r.failed]
    return MetricsReport(rows, train.class_names)


# --------------------------------------------------------
# Rendering
# --------------------------------------------------------
def _export(table: Table) -> str:
    console = Console(record=True, width=120, file=io.StringIO(),
                      color_system=None)
    console.print(table)
    return console.export_text()


def render_confusion(cm: ConfusionMatrix) -> str:
    """Row-normalised percentages (counts in brackets) as text."""
    table = Table(title="Confusion matrix (rows: actual, %)")
    table.add_column("actual \\ predicted")
    for name in cm.class_names:
        table.add_column(name, justify="right")
    percent = row_normalized(cm)
    for i, name in enumerate(cm.class_names):
        table.add_row(name, *[f"{percent[i, j]:.1f} ({cm.counts[i, j]})"
                              for j in range(cm.n_class)])
    return _export(table)


def render_report(report: MetricsReport) -> str:
    """Comparison rows as an aligned text table."""
    with_cv = any(r.cv is not None for r in report.rows)
    table = Table(title="Classifier comparison")
    table.add_column("Classifier")
    table.add_column("Test accuracy (%)", justify="right")
    table.add_column("Test F1", justify="right")
    table.add_column("Training time (s)", justify="right")
    if with_cv:
        table.add_column("CV accuracy (%)", justify="right")
    for r in report.rows:
        if r.failed:
            cells = [r.algorithm, "failed", "", ""]
        else:
            cells = [r.algorithm, f"{r.accuracy:.2f}", f"{r.f1:.3f}",
                     f"{r.training_time:.3f}"]
        if with_cv:
            cells.append("" if r.cv is None else
                         f"{r.cv.mean:.2f} ± {r.cv.std:.2f}")
        table.add_row(*cells)
    return _export(table)
