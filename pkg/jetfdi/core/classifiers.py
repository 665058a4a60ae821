# ========================================
# FileName: classifiers.py
# Brief: LDA, linear SVM, KNN and CART classifiers with persistence.
# =========================================

import hashlib
import json
import math
import time
from collections import deque
from dataclasses import dataclass, asdict, fields, replace
from typing import Optional

import numpy as np

from .datasets import Dataset, NormStats
from .engine import SIGNALS
from .errors import (
    ConfigurationError, DivergenceError, ModelLoadError, NumericalError,
    ShapeError
)
from ..utils.logging import setup_logger

logger = setup_logger()

ALGORITHMS = ('lda', 'svm', 'knn', 'tree')
MODEL_FORMAT = 'jetfdi-model'
MODEL_VERSION = 1

SVM_SCHEDULES = ('optimal', 'pegasos')
KNN_METRICS = ('euclidean', 'manhattan')
TREE_IMPURITIES = ('gini', 'entropy')
# Queries per block of the KNN distance computation
_KNN_BLOCK = 32
# Hyperparameters that are an int or None
_OPTIONAL_INTS = ('tree_max_depth', 'tree_max_splits')


@dataclass(frozen=True)
class Hyperparams:
    """Hyperparameters of the four classifiers.

    `svm_schedule` is 'optimal' (step 1/(lambda*(t0 + t)) starting at
    `svm_eta0`) or 'pegasos' (step 1/(lambda*t) with projection on the
    ball of radius 1/sqrt(lambda)). `tree_max_depth` and `tree_max_splits`
    None mean unlimited; the tree grows level by level until it holds
    `tree_max_splits` internal nodes.
    """
    lda_shrinkage: float = 1e-3
    svm_C: float = 1.0
    svm_epochs: int = 40
    svm_batch: int = 16
    svm_schedule: str = 'optimal'
    svm_eta0: float = 0.1
    knn_k: int = 5
    knn_metric: str = 'euclidean'
    tree_max_depth: Optional[int] = 12
    tree_max_splits: Optional[int] = 100
    tree_min_leaf: int = 5
    tree_impurity: str = 'gini'
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.lda_shrinkage <= 1:
            raise ConfigurationError("lda_shrinkage must lie in [0, 1]")
        for name in ('svm_C', 'svm_eta0'):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        for name in ('svm_epochs', 'svm_batch', 'knn_k', 'tree_min_leaf'):
            if not getattr(self, name) >= 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.tree_max_depth is not None and self.tree_max_depth < 1:
            raise ConfigurationError("tree_max_depth must be >= 1 or None")
        if self.tree_max_splits is not None and self.tree_max_splits < 0:
            raise ConfigurationError("tree_max_splits must be >= 0 or None")
        if self.svm_schedule not in SVM_SCHEDULES:
            raise ConfigurationError(
                f"svm_schedule must be one of {SVM_SCHEDULES}")
        if self.knn_metric not in KNN_METRICS:
            raise ConfigurationError(
                f"knn_metric must be one of {KNN_METRICS}")
        if self.tree_impurity not in TREE_IMPURITIES:
            raise ConfigurationError(
                f"tree_impurity must be one of {TREE_IMPURITIES}")

    def with_overrides(self, overrides: dict) -> "Hyperparams":
        """Copy with values replaced, converted to the field types."""
        types = {f.name: type(getattr(self, f.name)) for f in fields(self)}
        changes = {}
        for name, value in overrides.items():
            if name not in types:
                raise ConfigurationError(f"unknown hyperparameter '{name}'")
            optional = name in _OPTIONAL_INTS
            if optional and value is None:
                changes[name] = None
                continue
            target = int if optional else types[name]
            try:
                changes[name] = target(value)
            except (TypeError, ValueError):
                raise ConfigurationError(
                    f"hyperparameter '{name}' expects {target.__name__}, "
                    f"got '{value}'")
        return replace(self, **changes)


@dataclass(frozen=True)
class TrainedModel:
    """A fitted classifier.

    :param algorithm: One of ALGORITHMS.
    :param class_names: Class labels, index 0 is healthy.
    :param feature_names: Features the model consumes, in order.
    :param payload: Algorithm parameters (numpy arrays and scalars).
    :param training_time: Wall-clock fit time, s.
    :param hyperparams: Hyperparameters used, as a dict.
    :param norm_stats: Statistics the inputs must be normalised with.
    :param dataset_checksum: Checksum of the training set.
    """
    algorithm: str
    class_names: tuple
    feature_names: tuple
    payload: dict
    training_time: float
    hyperparams: dict
    norm_stats: Optional[NormStats] = None
    dataset_checksum: Optional[str] = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def transform(self, raw, raw_names=SIGNALS) -> np.ndarray:
        """Select and normalise the model features from a raw vector.

        :param raw: Raw signal vector ordered as `raw_names`.
        :param raw_names: Names of the raw entries.

        :return: The model input vector.
        :rtype: numpy.ndarray
        """
        raw = np.asarray(raw, dtype=float)
        raw_names = tuple(raw_names)
        if raw.shape != (len(raw_names),):
            raise ShapeError(
                f"expected {len(raw_names)} raw values, got {raw.shape}")
        try:
            x = raw[[raw_names.index(n) for n in self.feature_names]]
        except ValueError:
            raise ShapeError(
                f"raw vector lacks some of {self.feature_names}")
        if self.norm_stats is not None:
            positions = [self.norm_stats.feature_names.index(n)
                         for n in self.feature_names]
            x = (x - self.norm_stats.mean[positions]) / \
                self.norm_stats.std[positions]
        return x

    def predict_batch(self, data) -> np.ndarray:
        """Labels of a normalised Dataset or feature matrix."""
        if isinstance(data, Dataset):
            if data.feature_names != self.feature_names:
                raise ShapeError(
                    f"dataset features {data.feature_names} differ from "
                    f"model features {self.feature_names}")
            X = data.features
        else:
            X = np.asarray(data, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(
                f"expected {self.n_features} features, got shape {X.shape}")
        if len(X) == 0:
            return np.empty(0, dtype=int)
        return _PREDICTORS[self.algorithm](self.payload, X)

    def predict(self, features) -> int:
        """Label of one normalised feature vector."""
        x = np.asarray(features, dtype=float)
        if x.shape != (self.n_features,):
            raise ShapeError(
                f"expected {self.n_features} features, got shape {x.shape}")
        return int(self.predict_batch(x[np.newaxis, :])[0])


def _check_training_set(train: Dataset, min_per_class: int):
    counts = train.class_counts()
    if len(train.class_names) < 2:
        raise ConfigurationError("at least 2 classes are required")
    small = [name for name, c in zip(train.class_names, counts)
             if c < min_per_class]
    if small:
        raise ConfigurationError(
            f"classes {small} have fewer than {min_per_class} samples")


def _model(algorithm, train: Dataset, payload: dict, start: float,
           hp: Hyperparams) -> TrainedModel:
    training_time = max(time.perf_counter() - start, 1e-9)
    logger.info(f"Fitted {algorithm} on {len(train)} samples in "
                f"{training_time:.3f} s")
    return TrainedModel(
        algorithm=algorithm,
        class_names=train.class_names,
        feature_names=train.feature_names,
        payload=payload,
        training_time=training_time,
        hyperparams=asdict(hp),
        norm_stats=train.norm_stats,
        dataset_checksum=train.checksum())


# --------------------------------------------------------
# Linear discriminant analysis
# --------------------------------------------------------
def fit_lda(train: Dataset, hp: Hyperparams = Hyperparams()
            ) -> TrainedModel:
    """Linear discriminant with shrunk pooled covariance.

    Scores are x.S^-1.mu_k - mu_k.S^-1.mu_k/2 + ln(pi_k).
    """
    _check_training_set(train, 2)
    start = time.perf_counter()
    X, y = train.features, train.labels
    K = len(train.class_names)
    means = np.vstack([X[y == k].mean(axis=0) for k in range(K)])
    centered = X - means[y]
    covariance = centered.T @ centered / (len(X) - K)
    covariance = (1 - hp.lda_shrinkage) * covariance + \
        hp.lda_shrinkage * np.diag(np.diag(covariance))
    try:
        if np.linalg.cond(covariance) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned")
        inverse = np.linalg.inv(covariance)
    except np.linalg.LinAlgError as e:
        raise NumericalError(
            f"pooled covariance is singular ({e}); increase lda_shrinkage "
            f"above {hp.lda_shrinkage}") from e
    inverse = (inverse + inverse.T) / 2
    priors = np.bincount(y, minlength=K) / len(y)
    payload = {'means': means, 'cov_inv': inverse,
               'log_priors': np.log(priors)}
    return _model('lda', train, payload, start, hp)


def _lda_scores(payload: dict, X: np.ndarray) -> np.ndarray:
    means, inverse = payload['means'], payload['cov_inv']
    A = means @ inverse
    return X @ A.T - 0.5 * np.sum(A * means, axis=1) + payload['log_priors']


def _predict_lda(payload: dict, X: np.ndarray) -> np.ndarray:
    return np.argmax(_lda_scores(payload, X), axis=1)


# --------------------------------------------------------
# Linear support vector machine
# --------------------------------------------------------
def _svm_objective(w, b, X, y, lam) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + b))
    return float(0.5 * lam * w @ w + hinge.mean())


def _fit_binary_svm(X, y, hp: Hyperparams, rng) -> tuple:
    n, d = X.shape
    lam = 1.0 / (hp.svm_C * n)
    if hp.svm_schedule == 'pegasos':
        def learning_rate(t):
            return 1.0 / (lam * t)
    else:
        t0 = 1.0 / (lam * hp.svm_eta0)

        def learning_rate(t):
            return 1.0 / (lam * (t0 + t))

    w, b = np.zeros(d), 0.0
    history = [_svm_objective(w, b, X, y, lam)]
    t = 0
    for epoch in range(hp.svm_epochs):
        order = rng.permutation(n)
        w_new, b_new = w.copy(), b
        for begin in range(0, n, hp.svm_batch):
            batch = order[begin:begin + hp.svm_batch]
            t += 1
            eta = learning_rate(t)
            Xb, yb = X[batch], y[batch]
            active = yb * (Xb @ w_new + b_new) < 1
            grad_w = lam * w_new - yb[active] @ Xb[active] / len(batch)
            grad_b = -yb[active].sum() / len(batch)
            w_new = w_new - eta * grad_w
            b_new = b_new - eta * grad_b
            if hp.svm_schedule == 'pegasos':
                norm = np.linalg.norm(w_new)
                if norm > 1.0 / math.sqrt(lam):
                    w_new *= 1.0 / (math.sqrt(lam) * norm)

        objective = _svm_objective(w_new, b_new, X, y, lam)
        if not math.isfinite(objective):
            raise DivergenceError(
                f"hinge objective is not finite at epoch {epoch} "
                f"(learning rate {eta:.3g}); lower svm_eta0")
        # Epochs that do not lower the objective are discarded.
        if objective < history[-1]:
            w, b = w_new, b_new
        history.append(min(objective, history[-1]))
    return w, b, history


def fit_linear_svm(train: Dataset, hp: Hyperparams = Hyperparams()
                   ) -> TrainedModel:
    """One-vs-rest linear SVMs trained by mini-batch subgradient descent
    on the L2-regularised hinge loss, lambda = 1/(C*n)."""
    _check_training_set(train, 2)
    start = time.perf_counter()
    X = train.features
    K = len(train.class_names)
    weights = np.zeros((K, X.shape[1]))
    bias = np.zeros(K)
    histories = []
    for k in range(K):
        y = np.where(train.labels == k, 1.0, -1.0)
        rng = np.random.default_rng([hp.seed, k])
        weights[k], bias[k], history = _fit_binary_svm(X, y, hp, rng)
        histories.append(history)
    payload = {'weights': weights, 'bias': bias,
               'objective_history': np.array(histories)}
    return _model('svm', train, payload, start, hp)


def _predict_svm(payload: dict, X: np.ndarray) -> np.ndarray:
    return np.argmax(X @ payload['weights'].T + payload['bias'], axis=1)


# --------------------------------------------------------
# k nearest neighbours
# --------------------------------------------------------
def fit_knn(train: Dataset, hp: Hyperparams = Hyperparams()
            ) -> TrainedModel:
    """Store the training set; prediction is a majority vote of the k
    nearest samples."""
    if hp.knn_k > len(train):
        raise ConfigurationError(
            f"knn_k = {hp.knn_k} exceeds the {len(train)} training samples")
    start = time.perf_counter()
    payload = {'X': train.features.copy(), 'y': train.labels.copy(),
               'k': int(hp.knn_k), 'metric': hp.knn_metric,
               'n_class': len(train.class_names)}
    return _model('knn', train, payload, start, hp)


def knn_distances(X_train: np.ndarray, queries: np.ndarray,
                  metric: str = 'euclidean') -> np.ndarray:
    """Distance from every query (rows) to every training sample."""
    diff = queries[:, np.newaxis, :] - X_train[np.newaxis, :, :]
    if metric == 'manhattan':
        return np.abs(diff).sum(axis=2)
    return np.sqrt((diff ** 2).sum(axis=2))


def _predict_knn(payload: dict, X: np.ndarray) -> np.ndarray:
    X_train, y_train = payload['X'], payload['y']
    k, K = int(payload['k']), int(payload['n_class'])
    classes = np.arange(K)
    labels = np.empty(len(X), dtype=int)
    for begin in range(0, len(X), _KNN_BLOCK):
        block = X[begin:begin + _KNN_BLOCK]
        distances = knn_distances(X_train, block, payload['metric'])
        # Stable sort: equal distances keep the training order.
        nearest = np.argsort(distances, axis=1, kind='stable')[:, :k]
        votes = y_train[nearest][:, :, np.newaxis] == classes
        nearest_distances = np.take_along_axis(distances, nearest, axis=1)
        counts = votes.sum(axis=1)
        spread = (votes * nearest_distances[:, :, np.newaxis]).sum(axis=1)
        spread = np.where(counts == counts.max(axis=1, keepdims=True),
                          spread, np.inf)
        labels[begin:begin + len(block)] = np.argmin(spread, axis=1)
    return labels


# --------------------------------------------------------
# CART decision tree
# --------------------------------------------------------
def impurity(counts: np.ndarray, criterion: str = 'gini') -> np.ndarray:
    """Gini or entropy impurity of class count vectors (last axis)."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts),
                  where=total > 0)
    if criterion == 'entropy':
        logs = np.log2(p, out=np.zeros_like(p), where=p > 0)
        return -(p * logs).sum(axis=-1)
    return 1.0 - (p ** 2).sum(axis=-1)


def _best_split(X: np.ndarray, y: np.ndarray, K: int, min_leaf: int,
                criterion: str) -> Optional[tuple]:
    """Split with the lowest weighted child impurity.

    Candidate thresholds are midpoints between adjacent distinct values.
    Returns (feature, threshold) or None.
    """
    n = len(y)
    onehot = np.eye(K)[y]
    total = onehot.sum(axis=0)
    best, best_score = None, np.inf
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind='stable')
        xs = X[order, j]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        n_left = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & \
            (n - n_left >= min_leaf)
        if not valid.any():
            continue
        score = (n_left * impurity(left, criterion) +
                 (n - n_left) * impurity(right, criterion)) / n
        score = np.where(valid, score, np.inf)
        i = int(np.argmin(score))
        if score[i] < best_score:
            threshold = (xs[i] + xs[i + 1]) / 2
            if threshold >= xs[i + 1]:
                threshold = xs[i]
            best, best_score = (j, float(threshold)), score[i]
    return best


def fit_tree(train: Dataset, hp: Hyperparams = Hyperparams()
             ) -> TrainedModel:
    """CART classification tree grown greedily.

    Nodes are split level by level. They stop splitting when pure, at
    `tree_max_depth`, or when no split leaves `tree_min_leaf` samples on
    both sides; growth stops once the tree holds `tree_max_splits` splits.
    Leaves predict their majority class, ties going to the lowest class
    index.
    """
    if len(train) == 0:
        raise ConfigurationError("cannot fit a tree on an empty dataset")
    start = time.perf_counter()
    X, y = train.features, train.labels
    K = len(train.class_names)
    feature, threshold, left, right, label = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        label.append(int(np.argmax(np.bincount(y[rows], minlength=K))))
        return len(feature) - 1

    queue = deque([(new_node(np.arange(len(y))), np.arange(len(y)), 0)])
    n_splits = 0
    while queue:
        if hp.tree_max_splits is not None and \
                n_splits >= hp.tree_max_splits:
            break
        node, rows, depth = queue.popleft()
        if np.all(y[rows] == y[rows[0]]):
            continue
        if hp.tree_max_depth is not None and depth >= hp.tree_max_depth:
            continue
        if len(rows) < 2 * hp.tree_min_leaf:
            continue
        split = _best_split(X[rows], y[rows], K, hp.tree_min_leaf,
                            hp.tree_impurity)
        if split is None:
            continue
        j, value = split
        goes_left = X[rows, j] <= value
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        feature[node], threshold[node] = j, value
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        n_splits += 1
        queue.append((left[node], left_rows, depth + 1))
        queue.append((right[node], right_rows, depth + 1))

    payload = {'feature': np.array(feature), 'threshold': np.array(threshold),
               'left': np.array(left), 'right': np.array(right),
               'label': np.array(label)}
    return _model('tree', train, payload, start, hp)


def _predict_tree(payload: dict, X: np.ndarray) -> np.ndarray:
    feature, threshold = payload['feature'], payload['threshold']
    left, right = payload['left'], payload['right']
    node = np.zeros(len(X), dtype=int)
    while True:
        internal = np.flatnonzero(feature[node] >= 0)
        if internal.size == 0:
            break
        current = node[internal]
        goes_left = X[internal, feature[current]] <= threshold[current]
        node[internal] = np.where(goes_left, left[current], right[current])
    return payload['label'][node]


_FITTERS = {'lda': fit_lda, 'svm': fit_linear_svm, 'knn': fit_knn,
            'tree': fit_tree}
_PREDICTORS = {'lda': _predict_lda, 'svm': _predict_svm,
               'knn': _predict_knn, 'tree': _predict_tree}


def fit(algorithm: str, train: Dataset,
        hp: Hyperparams = Hyperparams()) -> TrainedModel:
    """Fit `algorithm` (one of ALGORITHMS) on a normalised dataset."""
    try:
        fitter = _FITTERS[algorithm]
    except KeyError:
        raise ConfigurationError(
            f"unknown algorithm '{algorithm}', expected one of "
            f"{', '.join(ALGORITHMS)}")
    return fitter(train, hp)


def predict(model: TrainedModel, features) -> int:
    return model.predict(features)


def predict_batch(model: TrainedModel, data) -> np.ndarray:
    return model.predict_batch(data)


# --------------------------------------------------------
# Persistence
# --------------------------------------------------------
def _canonical_checksum(document: dict) -> str:
    text = json.dumps(document, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode()).hexdigest()


def _to_json(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def model_document(model: TrainedModel) -> dict:
    """JSON-ready content of a model, checksum excluded."""
    return {
        'format': MODEL_FORMAT,
        'version': MODEL_VERSION,
        'algorithm': model.algorithm,
        'class_names': list(model.class_names),
        'feature_names': list(model.feature_names),
        'norm_stats': None if model.norm_stats is None
        else model.norm_stats.to_dict(),
        'training_time': model.training_time,
        'dataset_checksum': model.dataset_checksum,
        'hyperparams': model.hyperparams,
        'payload': {k: _to_json(v) for k, v in model.payload.items()},
    }


def save_model(model: TrainedModel, path: str):
    """Write a model as a versioned, checksummed JSON document."""
    document = model_document(model)
    document['checksum'] = _canonical_checksum(document)
    with open(path, 'w') as f:
        json.dump(document, f, sort_keys=True, indent=1)
        f.write("\n")


def load_model(path: str) -> TrainedModel:
    """Read a model written by save_model.

    :raises ModelLoadError: unreadable file, unknown format or version,
        checksum mismatch.
    """
    try:
        with open(path, 'r') as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelLoadError(f"{path}: cannot read model ({e})") from e
    if not isinstance(document, dict):
        raise ModelLoadError(f"{path}: not a model document")
    if document.get('format') != MODEL_FORMAT:
        raise ModelLoadError(f"{path}: not a {MODEL_FORMAT} file")
    if document.get('version') != MODEL_VERSION:
        raise ModelLoadError(
            f"{path}: unsupported model version {document.get('version')}")
    checksum = document.pop('checksum', None)
    if checksum != _canonical_checksum(document):
        raise ModelLoadError(f"{path}: checksum mismatch")

    try:
        algorithm = document['algorithm']
        if algorithm not in ALGORITHMS:
            raise ModelLoadError(f"{path}: unknown algorithm '{algorithm}'")
        payload = {k: np.asarray(v) if isinstance(v, list) else v
                   for k, v in document['payload'].items()}
        norm_stats = None
        if document['norm_stats'] is not None:
            norm_stats = NormStats.from_dict(document['norm_stats'])
        return TrainedModel(
            algorithm=algorithm,
            class_names=tuple(document['class_names']),
            feature_names=tuple(document['feature_names']),
            payload=payload,
            training_time=float(document['training_time']),
            hyperparams=document['hyperparams'],
            norm_stats=norm_stats,
            dataset_checksum=document['dataset_checksum'])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelLoadError(f"{path}: malformed model ({e})") from e
