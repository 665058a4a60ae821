# ========================================
# FileName: faults.py
# Brief: Time-windowed actuator and sensor faults, measurement noise.
# =========================================

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .engine import SIGNALS
from .errors import FaultSpecError, FaultScheduleError, FaultMisuseError

# Identifier of the fuel supply actuator
ACTUATOR = 'FSS'
DEFAULT_NOISE_LEVEL = 0.02
MAX_MAGNITUDE = 0.5
OFFSET_RANGE = (0.05, 0.15)
# Ambient boundary conditions, recorded as the model constants
AMBIENT = ('P1', 'T1')
_AMBIENT_COLUMNS = [SIGNALS.index(name) for name in AMBIENT]


class FaultKind(str, Enum):
    SENSOR_BIAS = 'SensorBias'
    SENSOR_GAIN = 'SensorGain'
    ACTUATOR_LOCK_IN_PLACE = 'ActuatorLockInPlace'
    ACTUATOR_OFFSET = 'ActuatorOffset'

    @property
    def is_sensor(self) -> bool:
        return self in (FaultKind.SENSOR_BIAS, FaultKind.SENSOR_GAIN)

    @property
    def is_actuator(self) -> bool:
        return not self.is_sensor


@dataclass(frozen=True)
class FaultSpec:
    """One fault active on `target` over [t_start, t_end).

    :param kind: Fault kind.
    :param target: A monitored signal for sensor faults, 'FSS' for
        actuator faults.
    :param magnitude: Relative magnitude, e.g. 0.05 for +5 %. Ignored by
        lock-in-place.
    :param t_start: Onset time, s.
    :param t_end: End of the window (excluded), s.
    """
    kind: FaultKind
    target: str
    magnitude: float
    t_start: float
    t_end: float

    def __post_init__(self):
        try:
            object.__setattr__(self, 'kind', FaultKind(self.kind))
        except ValueError:
            raise FaultSpecError(f"unknown fault kind '{self.kind}'")
        for name in ('magnitude', 't_start', 't_end'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or \
                    not math.isfinite(value):
                raise FaultSpecError(f"{name} must be a finite number")
        if not self.t_start < self.t_end:
            raise FaultSpecError(
                f"t_start ({self.t_start}) must precede t_end ({self.t_end})")
        if self.kind.is_sensor and self.target not in SIGNALS:
            raise FaultSpecError(
                f"{self.kind.value} must target a sensor among "
                f"{', '.join(SIGNALS)}, got '{self.target}'")
        if self.kind.is_actuator and self.target != ACTUATOR:
            raise FaultSpecError(
                f"{self.kind.value} must target the fuel actuator "
                f"'{ACTUATOR}', got '{self.target}'")
        if abs(self.magnitude) > MAX_MAGNITUDE:
            raise FaultSpecError(
                f"magnitude {self.magnitude} outside "
                f"[-{MAX_MAGNITUDE}, {MAX_MAGNITUDE}]")
        if self.kind is FaultKind.ACTUATOR_OFFSET and \
                not OFFSET_RANGE[0] <= self.magnitude <= OFFSET_RANGE[1]:
            raise FaultSpecError(
                f"actuator offset magnitude {self.magnitude} outside "
                f"[{OFFSET_RANGE[0]}, {OFFSET_RANGE[1]}]")

    def is_active(self, t: float) -> bool:
        return self.t_start <= t < self.t_end

    def to_text(self) -> str:
        return (f"{self.kind.value},{self.target},{self.magnitude!r},"
                f"{self.t_start!r},{self.t_end!r}")

    @classmethod
    def from_text(cls, line: str) -> "FaultSpec":
        parts = [part.strip() for part in line.split(',')]
        if len(parts) != 5:
            raise FaultSpecError(
                f"expected 'kind,target,magnitude,t_start,t_end', "
                f"got '{line.strip()}'")
        kind, target, magnitude, t_start, t_end = parts
        try:
            numbers = [float(magnitude), float(t_start), float(t_end)]
        except ValueError:
            raise FaultSpecError(f"non-numeric field in '{line.strip()}'")
        return cls(kind, target, *numbers)


def apply_sensor_fault(value: float, spec: FaultSpec, t: float,
                       nominal: Optional[float] = None) -> float:
    """Corrupt a sensor reading.

    :param value: Reading in signal units.
    :type value: float

    :param spec: Sensor fault.
    :type spec: FaultSpec

    :param t: Time, s.
    :type t: float

    :param nominal: Healthy value of the signal at the current operating
        point, the scale of a bias. Defaults to `value`.
    :type nominal: float

    :return: The corrupted reading, unchanged outside the window.
    :rtype: float
    """
    if not spec.kind.is_sensor:
        raise FaultMisuseError(
            f"{spec.kind.value} is not a sensor fault")
    if not spec.is_active(t):
        return value
    if spec.kind is FaultKind.SENSOR_GAIN:
        return value * (1.0 + spec.magnitude)
    nominal = value if nominal is None else nominal
    return value + spec.magnitude * nominal


def apply_actuator_fault(commanded_flow: float, last_healthy_flow: float,
                         spec: FaultSpec, t: float) -> float:
    """Corrupt the flow delivered by the fuel supply.

    :param commanded_flow: Flow demanded, L/hr.
    :type commanded_flow: float

    :param last_healthy_flow: Flow at the onset of the fault, L/hr.
    :type last_healthy_flow: float

    :param spec: Actuator fault.
    :type spec: FaultSpec

    :param t: Time, s.
    :type t: float

    :return: The delivered flow in L/hr.
    :rtype: float
    """
    if not spec.kind.is_actuator:
        raise FaultMisuseError(
            f"{spec.kind.value} is not an actuator fault")
    if not spec.is_active(t):
        return commanded_flow
    if spec.kind is FaultKind.ACTUATOR_LOCK_IN_PLACE:
        return last_healthy_flow
    return commanded_flow * (1.0 + spec.magnitude)


def add_measurement_noise(value, noise_level: float,
                          rng: np.random.Generator):
    """Add zero-mean white Gaussian noise of std noise_level/2 * |value|.

    Works on scalars and arrays alike.
    """
    if noise_level < 0:
        raise FaultScheduleError(
            f"noise level must be non-negative, got {noise_level}")
    if noise_level == 0:
        return value
    scale = noise_level / 2.0 * np.abs(value)
    noisy = value + scale * rng.standard_normal(np.shape(value))
    if np.ndim(noisy) == 0:
        return float(noisy)
    return noisy


@dataclass(frozen=True)
class FaultSchedule:
    """Ordered fault specs and the measurement noise level."""
    specs: tuple = field(default_factory=tuple)
    noise_level: float = DEFAULT_NOISE_LEVEL

    def __post_init__(self):
        object.__setattr__(self, 'specs', tuple(self.specs))
        if not (math.isfinite(self.noise_level) and self.noise_level >= 0):
            raise FaultScheduleError(
                f"noise level must be non-negative, got {self.noise_level}")
        for i, a in enumerate(self.specs):
            if not isinstance(a, FaultSpec):
                raise FaultScheduleError(
                    f"entry {i} is not a FaultSpec: {a!r}")
            for b in self.specs[:i]:
                if a.target == b.target and a.t_start < b.t_end and \
                        b.t_start < a.t_end:
                    raise FaultScheduleError(
                        f"overlapping faults on '{a.target}': "
                        f"[{b.t_start}, {b.t_end}) and "
                        f"[{a.t_start}, {a.t_end})")

    def __len__(self):
        return len(self.specs)

    def active_faults(self, t: float) -> list:
        return [spec for spec in self.specs if spec.is_active(t)]

    def actuator_active(self, t: float) -> bool:
        return any(spec.kind.is_actuator for spec in self.active_faults(t))

    def apply_to_command(self, commanded_flow: float,
                         last_healthy_flow: float, t: float) -> float:
        flow = commanded_flow
        for spec in self.active_faults(t):
            if spec.kind.is_actuator:
                flow = apply_actuator_fault(flow, last_healthy_flow, spec, t)
        return flow

    def corrupt(self, signals: np.ndarray, t: float,
                rng: np.random.Generator) -> np.ndarray:
        """Sensor faults then noise on one healthy signal vector."""
        return apply_faults_to_sample(signals, signals, self, t, rng)

    def to_text(self) -> str:
        lines = [f"noise={self.noise_level!r}"]
        lines += [spec.to_text() for spec in self.specs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FaultSchedule":
        """Parse the flat schedule format.

        One `kind,target,magnitude,t_start,t_end` per line plus an optional
        `noise=<level>` line. Blank lines and `#` comments are ignored.
        """
        specs = []
        noise_level = DEFAULT_NOISE_LEVEL
        for number, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if line.startswith('noise'):
                try:
                    noise_level = float(line.split('=', 1)[1])
                except (IndexError, ValueError):
                    raise FaultScheduleError(
                        f"line {number}: expected 'noise=<level>'")
                continue
            try:
                specs.append(FaultSpec.from_text(line))
            except FaultSpecError as e:
                raise FaultSpecError(f"line {number}: {e}") from e
        return cls(tuple(specs), noise_level)

    @classmethod
    def load(cls, path: str) -> "FaultSchedule":
        with open(path, 'r') as f:
            return cls.from_text(f.read())

    def save(self, path: str):
        with open(path, 'w') as f:
            f.write(self.to_text())


def active_faults(schedule: FaultSchedule, t: float) -> list:
    """Specs of `schedule` whose window contains t, in schedule order."""
    return schedule.active_faults(t)


def apply_faults_to_sample(signals, nominal, schedule: FaultSchedule,
                           t: float, rng: np.random.Generator) -> np.ndarray:
    """Apply every active sensor fault then measurement noise.

    The ambient channels carry no measurement noise.

    :param signals: Signal vector in the order of SIGNALS.
    :param nominal: Healthy signal vector, scale of the bias faults.
    :param schedule: Fault schedule.
    :param t: Time, s.
    :param rng: Noise stream.

    :return: The measured vector.
    :rtype: numpy.ndarray
    """
    measured = np.array(signals, dtype=float)
    for spec in schedule.active_faults(t):
        if spec.kind.is_sensor:
            i = SIGNALS.index(spec.target)
            measured[i] = apply_sensor_fault(measured[i], spec, t,
                                             nominal=nominal[i])
    noisy = add_measurement_noise(measured, schedule.noise_level, rng)
    noisy[_AMBIENT_COLUMNS] = measured[_AMBIENT_COLUMNS]
    return noisy
