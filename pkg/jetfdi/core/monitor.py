# ========================================
# FileName: monitor.py
# Brief: Multiple-model online health monitor of engine components.
# =========================================

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifiers import TrainedModel, load_model
from .engine import SIGNALS
from .errors import (
    BankError, ConfigurationError, ModelLoadError, NonFiniteSampleError,
    ShapeError, StreamError
)
from .faults import FaultSchedule
from ..utils.logging import setup_logger
from ..utils.parsing import parse_yaml_file

logger = setup_logger()

GREEN = 'green'
RED = 'red'
DEFAULT_DEBOUNCE = 5
MAX_MALFORMED_FRACTION = 0.05
MIN_ROWS_BEFORE_ABORT = 20


# --------------------------------------------------------
# Bank
# --------------------------------------------------------
@dataclass(frozen=True)
class BankEntry:
    """One monitored component.

    :param component: Component name, e.g. 'T2'.
    :param model_path: Path of the trained model.
    :param features: Raw signals handed to the model, all by default.
    :param debounce: Consecutive verdicts needed to change status.
    """
    component: str
    model_path: str
    features: tuple = SIGNALS
    debounce: int = DEFAULT_DEBOUNCE


@dataclass(frozen=True)
class BankConfig:
    entries: tuple
    dt: float = 0.1


def load_bank_config(path: str) -> BankConfig:
    """Read a bank description.

    The YAML document holds `dt`, a default `debounce` and a list of
    `components`, each with `name`, `model` and optional `features` and
    `debounce`. Model paths are relative to the configuration file.
    """
    content = parse_yaml_file(path)
    base = os.path.dirname(os.path.abspath(path))
    default_debounce = content.get('debounce', DEFAULT_DEBOUNCE)
    components = content.get('components') or []
    if not isinstance(components, list):
        raise ConfigurationError(f"{path}: 'components' must be a list")
    entries = []
    for i, item in enumerate(components):
        if not isinstance(item, dict) or 'name' not in item or \
                'model' not in item:
            raise ConfigurationError(
                f"{path}: component {i} needs 'name' and 'model'")
        features = item.get('features') or SIGNALS
        entries.append(BankEntry(
            component=str(item['name']),
            model_path=os.path.join(base, str(item['model'])),
            features=tuple(features),
            debounce=int(item.get('debounce', default_debounce))))
    return BankConfig(tuple(entries), float(content.get('dt', 0.1)))


@dataclass(frozen=True)
class BankMember:
    component: str
    model: TrainedModel
    features: tuple
    debounce: int


@dataclass(frozen=True)
class Bank:
    members: tuple
    dt: float = 0.1

    @property
    def components(self) -> tuple:
        return tuple(m.component for m in self.members)

    def without(self, component: str) -> "Bank":
        return Bank(tuple(m for m in self.members
                          if m.component != component), self.dt)


def build_bank(config: BankConfig, models: Optional[dict] = None) -> Bank:
    """Load and check the models of a bank.

    :param config: Bank description.
    :type config: BankConfig

    :param models: Already loaded models keyed by component, used instead
        of reading `model_path`.
    :type models: dict

    :return: The bank.
    :rtype: Bank
    """
    if not config.entries:
        raise BankError("a bank must monitor at least one component")
    if not config.dt > 0:
        raise BankError(f"stream period must be positive, got {config.dt}")
    members, seen = [], set()
    for entry in config.entries:
        name = entry.component
        if name in seen:
            raise BankError(f"duplicate component '{name}'")
        seen.add(name)
        if entry.debounce < 1:
            raise BankError(f"{name}: debounce must be >= 1")
        unknown = [f for f in entry.features if f not in SIGNALS]
        if unknown:
            raise BankError(f"{name}: unknown features {unknown}")

        if models is not None and name in models:
            model = models[name]
        else:
            try:
                model = load_model(entry.model_path)
            except ModelLoadError as e:
                raise BankError(f"{name}: {e}") from e
            except FileNotFoundError as e:
                raise BankError(
                    f"{name}: missing model {entry.model_path}") from e

        missing = [f for f in model.feature_names
                   if f not in entry.features]
        if missing:
            raise BankError(
                f"{name}: model needs features {missing} not provided "
                f"by the entry")
        if model.norm_stats is not None:
            unfitted = [f for f in model.feature_names
                        if f not in model.norm_stats.feature_names]
            if unfitted:
                raise BankError(
                    f"{name}: no normalisation statistics for {unfitted}")
        members.append(BankMember(name, model, tuple(entry.features),
                                  entry.debounce))
    logger.info(f"Bank of {len(members)} classifiers: "
                f"{', '.join(m.component for m in members)}")
    return Bank(tuple(members), config.dt)


# --------------------------------------------------------
# Verdicts and debounce
# --------------------------------------------------------
@dataclass(frozen=True)
class Verdict:
    label: int
    class_name: str

    @property
    def faulty(self) -> bool:
        return self.label != 0


def process_sample(bank: Bank, features, t: float) -> dict:
    """Raw verdict of every bank model on one 12-signal sample.

    :param bank: Classifier bank.
    :type bank: Bank

    :param features: Raw signals in the order of SIGNALS.

    :param t: Sample time, s.
    :type t: float

    :return: Verdict per component.
    :rtype: dict
    """
    raw = np.asarray(features, dtype=float)
    if raw.shape != (len(SIGNALS),):
        raise ShapeError(
            f"expected {len(SIGNALS)} signals, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise NonFiniteSampleError(f"non-finite sample at t={t}")
    verdicts = {}
    for member in bank.members:
        subset = raw[[SIGNALS.index(f) for f in member.features]]
        x = member.model.transform(subset, raw_names=member.features)
        label = member.model.predict(x)
        verdicts[member.component] = Verdict(
            label, member.model.class_names[label])
    return verdicts


@dataclass(frozen=True)
class DebounceState:
    """Lamp status and the number of consecutive verdicts disagreeing
    with it."""
    status: str = GREEN
    streak: int = 0


def debounce(history: DebounceState, faulty: bool, M: int) -> DebounceState:
    """Switch status after M consecutive verdicts of the other kind."""
    if M < 1:
        raise ConfigurationError(f"debounce must be >= 1, got {M}")
    disagrees = faulty if history.status == GREEN else not faulty
    if not disagrees:
        return DebounceState(history.status, 0)
    streak = history.streak + 1
    if streak >= M:
        return DebounceState(RED if history.status == GREEN else GREEN, 0)
    return DebounceState(history.status, streak)


@dataclass
class Episode:
    """A Red period of one component."""
    component: str
    first_verdict_t: float
    detected_t: float
    class_name: str
    cleared_t: Optional[float] = None

    @property
    def latency(self) -> float:
        return self.detected_t - self.first_verdict_t

    def to_dict(self) -> dict:
        return {'first_verdict_t': self.first_verdict_t,
                'detected_t': self.detected_t,
                'cleared_t': self.cleared_t,
                'latency_s': self.latency,
                'class': self.class_name}


@dataclass(frozen=True)
class HealthStatus:
    t: float
    states: dict
    verdicts: dict
    onsets: dict


class Monitor:
    """Stateful debounced monitor over a bank.

    :param bank: Classifier bank.
    :param debounce_override: When given, replaces every entry debounce.
    """

    def __init__(self, bank: Bank, debounce_override: Optional[int] = None):
        self.bank = bank
        self.debounce = {
            m.component: debounce_override or m.debounce
            for m in bank.members}
        self.states = {c: DebounceState() for c in bank.components}
        self.streak_start = {c: None for c in bank.components}
        self.episodes = {c: [] for c in bank.components}
        self.faulty_verdicts = {c: 0 for c in bank.components}
        self.samples = 0

    def open_episode(self, component: str) -> Optional[Episode]:
        episodes = self.episodes[component]
        if episodes and episodes[-1].cleared_t is None:
            return episodes[-1]
        return None

    def step(self, features, t: float) -> HealthStatus:
        verdicts = process_sample(self.bank, features, t)
        self.samples += 1
        for component, verdict in verdicts.items():
            state = self.states[component]
            if verdict.faulty:
                self.faulty_verdicts[component] += 1
            if state.status == GREEN and verdict.faulty and \
                    state.streak == 0:
                self.streak_start[component] = t
            new_state = debounce(state, verdict.faulty,
                                 self.debounce[component])
            if state.status == GREEN and new_state.status == RED:
                self.episodes[component].append(Episode(
                    component, self.streak_start[component], t,
                    verdict.class_name))
                logger.info(f"{component} turned red at t={t:.3f} s "
                            f"({verdict.class_name})")
            elif state.status == RED and new_state.status == GREEN:
                self.open_episode(component).cleared_t = t
                logger.info(f"{component} back to green at t={t:.3f} s")
            self.states[component] = new_state
        return HealthStatus(
            t=t,
            states={c: s.status for c, s in self.states.items()},
            verdicts=verdicts,
            onsets={c: (e.detected_t if e is not None else None)
                    for c, e in ((c, self.open_episode(c))
                                 for c in self.bank.components)})


# --------------------------------------------------------
# Stream processing
# --------------------------------------------------------
@dataclass
class MonitorSummary:
    samples: int = 0
    rows: int = 0
    malformed: int = 0
    nonfinite: int = 0
    components: dict = field(default_factory=dict)

    @property
    def n_episodes(self) -> int:
        return sum(len(c['episodes']) for c in self.components.values())

    @property
    def faults_detected(self) -> bool:
        return self.n_episodes > 0

    @property
    def exit_code(self) -> int:
        return 2 if self.faults_detected else 0

    def to_dict(self) -> dict:
        return {'samples': self.samples, 'rows': self.rows,
                'malformed': self.malformed, 'nonfinite': self.nonfinite,
                'episodes': self.n_episodes,
                'components': self.components}


def _status_records(status: HealthStatus) -> list:
    return [{'t': status.t, 'component': component,
             'status': status.states[component],
             'class': verdict.class_name}
            for component, verdict in status.verdicts.items()]


def _parse_rows(lines):
    """Yield (t, features) or None for malformed rows.

    The format is detected from the first non-blank line: a JSON object
    starts JSONL records, anything else is a CSV header.
    """
    lines = (line for line in lines if line.strip())
    try:
        first = next(lines)
    except StopIteration:
        return

    if first.lstrip().startswith('{'):
        for line in _chain(first, lines):
            try:
                record = json.loads(line)
                t = float(record['t'])
                features = [float(v) for v in record['features']]
                if len(features) != len(SIGNALS):
                    raise ValueError("wrong feature count")
            except (ValueError, KeyError, TypeError):
                yield None
                continue
            yield t, features
        return

    header = next(csv.reader([first]))
    header = [h.strip() for h in header]
    missing = [c for c in ('t',) + SIGNALS if c not in header]
    if missing:
        raise StreamError(f"CSV header lacks columns {missing}")
    columns = [header.index(c) for c in SIGNALS]
    t_column = header.index('t')
    for row in csv.reader(lines):
        if len(row) != len(header):
            yield None
            continue
        try:
            t = float(row[t_column])
            features = [float(row[i]) for i in columns]
        except ValueError:
            yield None
            continue
        yield t, features


def _chain(first, rest):
    yield first
    yield from rest


def monitor_stream(lines, bank: Bank, sink=None,
                   debounce_override: Optional[int] = None
                   ) -> MonitorSummary:
    """Run the monitor over a telemetry stream.

    :param lines: Iterable of text lines, trajectory CSV or JSONL
        `{"t": .., "features": [12 numbers]}`.
    :param bank: Classifier bank.
    :type bank: Bank
    :param sink: Writable text stream receiving one JSON status record
        per component and sample.
    :param debounce_override: Debounce for every component.
    :type debounce_override: int

    :return: The run summary.
    :rtype: MonitorSummary
    """
    monitor = Monitor(bank, debounce_override)
    summary = MonitorSummary()

    def too_many_malformed():
        return summary.malformed > MAX_MALFORMED_FRACTION * summary.rows

    for parsed in _parse_rows(lines):
        summary.rows += 1
        if parsed is None:
            summary.malformed += 1
            logger.warning(f"Skipped malformed row {summary.rows}")
            if summary.rows >= MIN_ROWS_BEFORE_ABORT and too_many_malformed():
                raise StreamError(
                    f"{summary.malformed} malformed rows out of "
                    f"{summary.rows}, aborting")
            continue
        t, features = parsed
        try:
            status = monitor.step(features, t)
        except NonFiniteSampleError:
            summary.nonfinite += 1
            logger.warning(f"Skipped non-finite sample at t={t}")
            continue
        if sink is not None:
            for record in _status_records(status):
                sink.write(json.dumps(record) + "\n")

    if summary.rows and too_many_malformed():
        raise StreamError(
            f"{summary.malformed} malformed rows out of {summary.rows}")

    summary.samples = monitor.samples
    summary.components = {
        c: {'status': monitor.states[c].status,
            'faulty_verdicts': monitor.faulty_verdicts[c],
            'episodes': [e.to_dict() for e in monitor.episodes[c]]}
        for c in bank.components}
    return summary


# --------------------------------------------------------
# Scoring helpers
# --------------------------------------------------------
def component_truth(schedule: FaultSchedule, t, components) -> np.ndarray:
    """Whether each component is faulty at each time (rows: times)."""
    t = np.asarray(t, dtype=float)
    truth = np.zeros((len(t), len(components)), dtype=bool)
    for j, component in enumerate(components):
        for spec in schedule.specs:
            if spec.target == component:
                truth[:, j] |= (t >= spec.t_start) & (t < spec.t_end)
    return truth


def joint_accuracy(verdicts, truth) -> float:
    """Percentage of samples where every component verdict is right."""
    verdicts = np.asarray(verdicts, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if verdicts.shape != truth.shape or verdicts.size == 0:
        raise ShapeError("verdicts and truth must share a non-empty shape")
    if verdicts.ndim == 1:
        verdicts, truth = verdicts[:, None], truth[:, None]
    return 100.0 * float(np.mean(np.all(verdicts == truth, axis=1)))


def run_bank(bank: Bank, signals: np.ndarray, t) -> np.ndarray:
    """Raw faulty verdicts of a bank over a signal matrix (rows: times)."""
    verdicts = np.zeros((len(t), len(bank.members)), dtype=bool)
    for i, (row, t_i) in enumerate(zip(signals, t)):
        result = process_sample(bank, row, float(t_i))
        verdicts[i] = [result[c].faulty for c in bank.components]
    return verdicts
