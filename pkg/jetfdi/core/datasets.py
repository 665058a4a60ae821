# ========================================
# FileName: datasets.py
# Brief: Labelled datasets: generation, cleaning, normalisation, folds.
# =========================================

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .engine import (
    SIGNALS, DEFAULT_STEP, EngineParams, CommandProfile, simulate
)
from .errors import (
    ConfigurationError, DataQualityError, JetFDIError, LabelError,
    RunGenerationError, ShapeError, StratificationError
)
from .faults import (
    ACTUATOR, DEFAULT_NOISE_LEVEL, FaultKind, FaultSchedule, FaultSpec
)
from ..utils.logging import setup_logger

logger = setup_logger()

HEALTHY = 'Healthy'
ONSET_RANGE = (0.1, 0.8)
FAULTY_FRACTION_RANGE = (0.2, 0.6)
# Levels of the random command profiles
COMMAND_RANGE = (0.5, 0.95)
# Command rise at the onset of a lock-in-place and its ramp time, s
LOCK_RISE_RANGE = (0.15, 0.3)
LOCK_RAMP = 1.0
MAX_DROPPED_FRACTION = 0.1
WINSOR_SIGMAS = 6.0


# --------------------------------------------------------
# Scenarios
# --------------------------------------------------------
@dataclass(frozen=True)
class FaultClass:
    """A labelled fault mode: `kind` on `target` with a magnitude drawn
    uniformly in `magnitude`."""
    name: str
    kind: FaultKind
    target: str
    magnitude: tuple


@dataclass(frozen=True)
class Scenario:
    name: str
    faults: tuple
    train_runs: int
    test_runs: int
    description: str = ""

    @property
    def class_names(self) -> tuple:
        return (HEALTHY,) + tuple(f.name for f in self.faults)


SCENARIOS = {
    'FD001': Scenario(
        'FD001',
        (FaultClass('LockInPlace', FaultKind.ACTUATOR_LOCK_IN_PLACE,
                    ACTUATOR, (0.0, 0.0)),
         FaultClass('Bias', FaultKind.ACTUATOR_OFFSET, ACTUATOR,
                    (0.05, 0.15))),
        train_runs=10, test_runs=3,
        description="Fuel supply faults: lock-in-place and offset"),
    'FD002': Scenario(
        'FD002',
        tuple(FaultClass(name, FaultKind.SENSOR_BIAS, name, (0.03, 0.06))
              for name in ('T2', 'T3', 'T5', 'P2')),
        train_runs=20, test_runs=5,
        description="Sensor bias faults on T2, T3, T5 and P2"),
    'T2': Scenario(
        'T2',
        (FaultClass('T2', FaultKind.SENSOR_GAIN, 'T2', (0.05, 0.05)),),
        train_runs=10, test_runs=3,
        description="T2 sensor amplified by 5 %"),
    'T3': Scenario(
        'T3',
        (FaultClass('T3Degraded', FaultKind.SENSOR_GAIN, 'T3',
                    (-0.06, -0.04)),
         FaultClass('T3Amplified', FaultKind.SENSOR_GAIN, 'T3',
                    (0.04, 0.06))),
        train_runs=10, test_runs=3,
        description="T3 sensor degraded or amplified by 4 to 6 %"),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown scenario '{name}', expected one of "
            f"{', '.join(SCENARIOS)}")


# --------------------------------------------------------
# Normalisation statistics
# --------------------------------------------------------
@dataclass(frozen=True)
class NormStats:
    """Per-feature z-score statistics. Features with zero variance are
    kept in the record with `retained` False."""
    feature_names: tuple
    mean: np.ndarray
    std: np.ndarray
    retained: np.ndarray

    @property
    def retained_names(self) -> tuple:
        return tuple(name for name, keep in
                     zip(self.feature_names, self.retained) if keep)

    def to_dict(self) -> dict:
        """Mapping of feature name to its statistics; `index` keeps the
        feature order through key-sorted JSON."""
        return {name: {'index': i, 'mean': float(m), 'std': float(s),
                       'retained': bool(r)}
                for i, (name, m, s, r) in enumerate(zip(
                    self.feature_names, self.mean, self.std,
                    self.retained))}

    @classmethod
    def from_dict(cls, content: dict) -> "NormStats":
        try:
            names = sorted(content, key=lambda n: content[n].get(
                'index', list(content).index(n)))
            return cls(
                feature_names=tuple(names),
                mean=np.array([content[n]['mean'] for n in names],
                              dtype=float),
                std=np.array([content[n]['std'] for n in names],
                             dtype=float),
                retained=np.array([content[n]['retained'] for n in names],
                                  dtype=bool))
        except (AttributeError, KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(
                f"malformed normalisation statistics ({e})") from e

    def save(self, path: str):
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "NormStats":
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))


# --------------------------------------------------------
# Dataset
# --------------------------------------------------------
@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int
    t: float
    run_id: int


@dataclass
class Dataset:
    """Feature matrix with per-sample labels, times and run ids.

    Rows of `features` follow `feature_names`; labels index `class_names`,
    0 being the healthy class.
    """
    features: np.ndarray
    labels: np.ndarray
    t: np.ndarray
    run_id: np.ndarray
    class_names: tuple
    feature_names: tuple = SIGNALS
    norm_stats: Optional[NormStats] = None
    scenario: Optional[str] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.t = np.asarray(self.t, dtype=float)
        self.run_id = np.asarray(self.run_id, dtype=int)
        self.class_names = tuple(self.class_names)
        self.feature_names = tuple(self.feature_names)
        if self.features.ndim != 2 or \
                self.features.shape[1] != len(self.feature_names):
            raise ShapeError(
                f"features of shape {self.features.shape} do not match "
                f"{len(self.feature_names)} feature names")
        n = self.features.shape[0]
        for name in ('labels', 't', 'run_id'):
            if getattr(self, name).shape != (n,):
                raise ShapeError(f"{name} must hold one entry per sample")
        if n:
            bad = np.flatnonzero((self.labels < 0) |
                                 (self.labels >= len(self.class_names)))
            if bad.size:
                raise LabelError(
                    f"label {self.labels[bad[0]]} at index {bad[0]} "
                    f"outside the {len(self.class_names)} declared classes")

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def samples(self):
        for x, y, t, r in zip(self.features, self.labels, self.t,
                              self.run_id):
            yield Sample(x, int(y), float(t), int(r))

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        return replace(self, features=self.features[indices],
                       labels=self.labels[indices], t=self.t[indices],
                       run_id=self.run_id[indices])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=len(self.class_names))

    def checksum(self) -> str:
        """sha256 of the feature matrix, labels and names."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        h.update(",".join(self.feature_names).encode())
        h.update(",".join(self.class_names).encode())
        return h.hexdigest()

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=list(self.feature_names))
        frame.insert(0, 't', self.t)
        frame['label'] = self.labels
        frame['run_id'] = self.run_id
        return frame

    def to_csv(self, path: str):
        """Write the samples as CSV and the class names next to it in
        `<path>.meta.json`."""
        self.to_frame().to_csv(path, index=False, float_format="%.6f")
        meta = {'scenario': self.scenario,
                'class_names': list(self.class_names)}
        if self.norm_stats is not None:
            meta['norm_stats'] = self.norm_stats.to_dict()
        with open(metadata_path(path), 'w') as f:
            json.dump(meta, f, indent=2)
            f.write("\n")

    @classmethod
    def from_csv(cls, path: str,
                 class_names: Optional[tuple] = None) -> "Dataset":
        """Read a dataset CSV.

        Class names come from `class_names`, then from the metadata file,
        then default to Healthy, Fault1, ... up to the largest label.
        """
        frame = pd.read_csv(path)
        for column in ('t', 'label', 'run_id'):
            if column not in frame.columns:
                raise ConfigurationError(
                    f"{path}: missing column '{column}'")
        feature_names = tuple(c for c in frame.columns
                              if c not in ('t', 'label', 'run_id'))
        meta = {}
        if os.path.exists(metadata_path(path)):
            with open(metadata_path(path), 'r') as f:
                meta = json.load(f)
        if class_names is None:
            class_names = meta.get('class_names')
        labels = frame['label'].to_numpy(dtype=int)
        if class_names is None:
            n_class = int(labels.max()) + 1 if len(labels) else 1
            class_names = (HEALTHY,) + tuple(
                f"Fault{i}" for i in range(1, n_class))
        norm_stats = None
        if 'norm_stats' in meta:
            norm_stats = NormStats.from_dict(meta['norm_stats'])
        return cls(
            features=frame[list(feature_names)].to_numpy(dtype=float),
            labels=labels,
            t=frame['t'].to_numpy(dtype=float),
            run_id=frame['run_id'].to_numpy(dtype=int),
            class_names=tuple(class_names),
            feature_names=feature_names,
            norm_stats=norm_stats,
            scenario=meta.get('scenario'))


def metadata_path(path: str) -> str:
    return str(path) + ".meta.json"


def concatenate(datasets) -> Dataset:
    """Stack datasets sharing class and feature names."""
    first = datasets[0]
    for other in datasets[1:]:
        if other.class_names != first.class_names or \
                other.feature_names != first.feature_names:
            raise ShapeError("datasets do not share classes and features")
    return replace(
        first,
        features=np.vstack([d.features for d in datasets]),
        labels=np.concatenate([d.labels for d in datasets]),
        t=np.concatenate([d.t for d in datasets]),
        run_id=np.concatenate([d.run_id for d in datasets]))


def select_features(dataset: Dataset, names) -> Dataset:
    """Keep the given feature columns, in the given order."""
    names = tuple(names)
    unknown = [n for n in names if n not in dataset.feature_names]
    if unknown:
        raise ConfigurationError(f"unknown features {unknown}")
    columns = [dataset.feature_names.index(n) for n in names]
    return replace(dataset, features=dataset.features[:, columns],
                   feature_names=names)


def relabel_for_component(dataset: Dataset, class_name: str) -> Dataset:
    """Binary one-vs-rest dataset: `class_name` against everything else.

    Samples of the other fault classes become healthy for this component.
    """
    if class_name not in dataset.class_names[1:]:
        raise ConfigurationError(
            f"'{class_name}' is not a fault class of the dataset "
            f"({', '.join(dataset.class_names[1:])})")
    positive = dataset.class_names.index(class_name)
    return replace(dataset,
                   labels=(dataset.labels == positive).astype(int),
                   class_names=(HEALTHY, class_name))


# --------------------------------------------------------
# Generation
# --------------------------------------------------------
def _lock_excursion(profile: CommandProfile, rng: np.random.Generator,
                    t_start: float, t_end: float) -> CommandProfile:
    """Raise the command at the onset of a lock-in-place and hold it up to
    the end of the window, so that the held flow departs from the demand.
    """
    if t_end <= t_start:
        return profile
    base = profile.value(t_start)
    raised = base + float(rng.uniform(*LOCK_RISE_RANGE))
    ramp = min(LOCK_RAMP, (t_end - t_start) / 2)
    knots = [(t, v) for t, v in zip(profile.times, profile.values)
             if t < t_start]
    knots += [(t_start, base), (t_start + ramp, raised), (t_end, raised)]
    knots += [(t, v) for t, v in zip(profile.times, profile.values)
              if t > t_end]
    times, values = zip(*knots)
    return CommandProfile(times, values)


def _generate_run(scenario: Scenario, run_id: int, class_index: int,
                  duration: float, dt: float, seed: int,
                  noise_level: float, params: EngineParams) -> tuple:
    rng = np.random.default_rng([seed, run_id])
    fault = scenario.faults[class_index - 1] if class_index > 0 else None
    locked = fault is not None and \
        fault.kind is FaultKind.ACTUATOR_LOCK_IN_PLACE
    # Lock-in-place runs leave room for the command rise.
    high = COMMAND_RANGE[1] - (LOCK_RISE_RANGE[1] if locked else 0.0)
    profile = CommandProfile.random(rng, duration, low=COMMAND_RANGE[0],
                                    high=high)

    specs = ()
    if fault is not None:
        magnitude = float(rng.uniform(*fault.magnitude))
        onset = float(rng.uniform(*ONSET_RANGE)) * duration
        length = float(rng.uniform(*FAULTY_FRACTION_RANGE)) * duration
        specs = (FaultSpec(fault.kind, fault.target, magnitude, onset,
                           min(onset + length, duration)),)
        if locked:
            profile = _lock_excursion(profile, rng, specs[0].t_start,
                                      specs[0].t_end)
    schedule = FaultSchedule(specs, noise_level)

    try:
        trajectory = simulate(profile, duration, dt, params,
                              faults=schedule, seed=[seed, run_id, 1])
    except JetFDIError as e:
        raise RunGenerationError(run_id, e) from e

    labels = np.zeros(len(trajectory), dtype=int)
    for spec in specs:
        inside = (trajectory.t >= spec.t_start) & (trajectory.t < spec.t_end)
        labels[inside] = class_index
    return trajectory.signals, labels, trajectory.t


def generate_dataset(scenario: str, n_runs: int,
                     duration: float = 100.0, dt: float = DEFAULT_STEP,
                     seed: int = 0,
                     noise_level: float = DEFAULT_NOISE_LEVEL,
                     run_offset: int = 0,
                     params: EngineParams = EngineParams(),
                     jobs: int = 1) -> Dataset:
    """Simulate labelled runs of a fault scenario.

    Classes are assigned to runs in equal shares (shuffled). Each run gets
    a random command profile, and faulty runs one fault whose magnitude,
    onset and length are drawn at random. Samples are labelled faulty
    only inside the fault window.

    :param scenario: Scenario name (FD001, FD002, T2 or T3).
    :type scenario: str

    :param n_runs: Number of runs.
    :type n_runs: int

    :param duration: Run length, s.
    :type duration: float

    :param dt: Sampling period, s.
    :type dt: float

    :param seed: Seed. Run `i` draws from the stream (seed, run id).
    :type seed: int

    :param noise_level: Measurement noise level.
    :type noise_level: float

    :param run_offset: Id of the first run. Test sets use ids following
        those of the training set.
    :type run_offset: int

    :param params: Engine constants.
    :type params: EngineParams

    :param jobs: Number of parallel workers.
    :type jobs: int

    :return: The dataset.
    :rtype: Dataset
    """
    preset = get_scenario(scenario)
    if n_runs < 1:
        raise ConfigurationError(f"n_runs must be >= 1, got {n_runs}")

    n_class = len(preset.class_names)
    order = np.random.default_rng([seed, run_offset, n_runs]).permutation(
        n_runs)
    run_classes = order % n_class
    run_ids = [run_offset + i for i in range(n_runs)]

    logger.info(f"Generating {n_runs} runs of scenario {preset.name} "
                f"({duration} s at dt={dt} s)")
    results = Parallel(n_jobs=jobs)(
        delayed(_generate_run)(preset, run_id, int(class_index), duration,
                               dt, seed, noise_level, params)
        for run_id, class_index in zip(run_ids, run_classes))

    features = [signals for signals, _, _ in results]
    labels = [labels for _, labels, _ in results]
    times = [t for _, _, t in results]
    run_column = [np.full(len(t), run_id) for run_id, t in
                  zip(run_ids, times)]
    return Dataset(
        features=np.vstack(features) if features else
        np.empty((0, len(SIGNALS))),
        labels=np.concatenate(labels),
        t=np.concatenate(times),
        run_id=np.concatenate(run_column),
        class_names=preset.class_names,
        scenario=preset.name)


# --------------------------------------------------------
# Cleaning
# --------------------------------------------------------
@dataclass
class CleanReport:
    """Rows dropped as (run_id, t) and values winsorized as
    (run_id, t, feature, original, clamped)."""
    dropped: list = field(default_factory=list)
    winsorized: list = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.dropped and not self.winsorized

    def to_dict(self) -> dict:
        return {
            'dropped': [{'run_id': r, 't': t} for r, t in self.dropped],
            'winsorized': [
                {'run_id': r, 't': t, 'feature': f, 'original': o,
                 'clamped': c}
                for r, t, f, o, c in self.winsorized]}


def clean(dataset: Dataset) -> tuple:
    """Drop non-finite rows and winsorize outliers.

    Values further than 6 standard deviations from the median of their
    run are clamped to that bound, per feature.

    :param dataset: Dataset to clean.
    :type dataset: Dataset

    :return: The cleaned dataset and a CleanReport.
    :rtype: tuple
    """
    report = CleanReport()
    n = len(dataset)
    finite = np.all(np.isfinite(dataset.features), axis=1)
    for i in np.flatnonzero(~finite):
        report.dropped.append((int(dataset.run_id[i]), float(dataset.t[i])))
    if n and (~finite).sum() > MAX_DROPPED_FRACTION * n:
        raise DataQualityError(
            f"{(~finite).sum()} of {n} rows hold non-finite values "
            f"(more than {MAX_DROPPED_FRACTION:.0%})")
    if report.dropped:
        logger.warning(f"Dropped {len(report.dropped)} non-finite rows")

    cleaned = dataset.subset(np.flatnonzero(finite))
    features = cleaned.features.copy()
    for run in np.unique(cleaned.run_id):
        rows = np.flatnonzero(cleaned.run_id == run)
        block = features[rows]
        median = np.median(block, axis=0)
        std = block.std(axis=0)
        for j, name in enumerate(cleaned.feature_names):
            if std[j] == 0:
                continue
            low = median[j] - WINSOR_SIGMAS * std[j]
            high = median[j] + WINSOR_SIGMAS * std[j]
            column = block[:, j]
            for i in np.flatnonzero((column < low) | (column > high)):
                clamped = min(max(column[i], low), high)
                report.winsorized.append(
                    (int(run), float(cleaned.t[rows[i]]), name,
                     float(column[i]), float(clamped)))
                features[rows[i], j] = clamped
    if report.winsorized:
        logger.warning(f"Winsorized {len(report.winsorized)} values")
    return replace(cleaned, features=features), report


# --------------------------------------------------------
# Normalisation
# --------------------------------------------------------
def normalize_fit(dataset: Dataset) -> NormStats:
    """z-score statistics of the training set (population std).

    Zero-variance features are flagged as not retained.
    """
    if len(dataset) == 0:
        raise DataQualityError("cannot fit normalisation on an empty set")
    mean = dataset.features.mean(axis=0)
    std = dataset.features.std(axis=0)
    retained = std > 1e-12 * np.maximum(1.0, np.abs(mean))
    for name in np.asarray(dataset.feature_names)[~retained]:
        logger.warning(f"Feature {name} has zero variance, dropped")
    if not retained.any():
        raise DataQualityError("every feature has zero variance")
    return NormStats(dataset.feature_names, mean, std, retained)


def _stats_columns(dataset: Dataset, stats: NormStats) -> tuple:
    names = stats.retained_names
    missing = [n for n in names if n not in dataset.feature_names]
    if missing:
        raise ShapeError(f"dataset lacks normalised features {missing}")
    columns = [dataset.feature_names.index(n) for n in names]
    positions = [stats.feature_names.index(n) for n in names]
    return names, columns, positions


def normalize_apply(dataset: Dataset, stats: NormStats) -> Dataset:
    """Normalise with given statistics, keeping retained features only."""
    names, columns, positions = _stats_columns(dataset, stats)
    features = (dataset.features[:, columns] - stats.mean[positions]) / \
        stats.std[positions]
    return replace(dataset, features=features, feature_names=names,
                   norm_stats=stats)


def denormalize(dataset: Dataset, stats: NormStats) -> Dataset:
    """Invert normalize_apply on the retained features."""
    names, columns, positions = _stats_columns(dataset, stats)
    features = dataset.features[:, columns] * stats.std[positions] + \
        stats.mean[positions]
    return replace(dataset, features=features, feature_names=names,
                   norm_stats=None)


# --------------------------------------------------------
# Correlation
# --------------------------------------------------------
@dataclass(frozen=True)
class CorrelationMatrix:
    values: np.ndarray
    feature_names: tuple
    constant: tuple = ()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=list(self.feature_names),
                            columns=list(self.feature_names))

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, float_format="%.6f")


def correlation_matrix(dataset: Dataset) -> CorrelationMatrix:
    """Pearson correlation of the features.

    Constant features get zero correlation with the others and are listed
    in `constant`.
    """
    if len(dataset) < 2:
        raise DataQualityError("correlation needs at least 2 samples")
    X = dataset.features
    centered = X - X.mean(axis=0)
    std = X.std(axis=0)
    constant = std == 0
    scale = np.where(constant, 1.0, std)
    z = centered / scale
    values = z.T @ z / len(X)
    values[constant, :] = 0.0
    values[:, constant] = 0.0
    np.fill_diagonal(values, 1.0)
    values = np.clip((values + values.T) / 2, -1.0, 1.0)
    flagged = tuple(np.asarray(dataset.feature_names)[constant].tolist())
    for name in flagged:
        logger.warning(f"Feature {name} is constant, correlation set to 0")
    return CorrelationMatrix(values, dataset.feature_names, flagged)


# --------------------------------------------------------
# Folds
# --------------------------------------------------------
def kfold_split(dataset, k: int, seed: int = 0) -> list:
    """Stratified k-fold partition.

    Indices of each class are shuffled then dealt to the folds in turn,
    continuing from the fold where the previous class stopped, so both
    per-class and overall fold sizes differ by at most one.

    :param dataset: Dataset or label array.
    :param k: Number of folds.
    :type k: int
    :param seed: Shuffle seed.
    :type seed: int

    :return: List of (train_indices, validation_indices).
    :rtype: list
    """
    labels = dataset.labels if isinstance(dataset, Dataset) else \
        np.asarray(dataset, dtype=int)
    n = len(labels)
    if k < 2 or k > n:
        raise ConfigurationError(f"k must lie in [2, {n}], got {k}")

    classes, counts = np.unique(labels, return_counts=True)
    small = classes[counts < k]
    if small.size:
        raise StratificationError(
            f"classes {small.tolist()} have fewer than {k} samples")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=int)
    offset = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(labels == c))
        fold_of[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k

    folds = []
    for i in range(k):
        validation = np.flatnonzero(fold_of == i)
        train = np.flatnonzero(fold_of != i)
        folds.append((train, validation))
    return folds
