# ========================================
# FileName: engine.py
# Brief: Three-state dynamic model of a single spool turbojet.
# =========================================

import math
from dataclasses import dataclass, fields, replace, asdict
from functools import lru_cache
from typing import Optional, TYPE_CHECKING

import numpy as np
import pandas as pd

from .errors import (
    ModelDomainError, SingularityError, IntegrationError,
    SimulationError, SteadyStateError, ConfigurationError
)
from .fuel_supply import FuelSupplyState, fuel_supply_step, lph_to_kgs
from ..utils.logging import setup_logger
from ..utils.parsing import parse_key_value_file

if TYPE_CHECKING:
    from .faults import FaultSchedule

logger = setup_logger()

# Monitored signals, in the column order of every trajectory and dataset.
SIGNALS = ('mf', 'P1', 'T1', 'P2', 'T2', 'P3', 'T3',
           'P4', 'T4', 'P5', 'T5', 'N')

MAX_STEP = 0.1
DEFAULT_STEP = 0.1

# rad/s to rpm, squared
_RPM_FACTOR = (60.0 / (2.0 * math.pi)) ** 2
_RELATIVE_STEP = 1e-6
_MIN_COUPLING = 0.05
# Fuel flow of the initial guess scaling, kg/s
_DESIGN_FUEL_RATE = 0.0044


@dataclass(frozen=True)
class EngineParams:
    """Constants of the engine model.

    Units: R and cp in kJ/(kg.K), V1 and V2 in m^3, I in kg.m^2, LHV in
    kJ/kg, m_ref in kg/s, P1 in kPa, T1 in K, N_ref in rpm. `a_c` is the
    slope of the compressor flow correction, `K_t` and `K_n` the turbine
    and nozzle flow capacities in kg.K^0.5/(s.kPa).
    """
    R: float = 0.287
    V1: float = 0.24
    V2: float = 0.36
    I: float = 3.2e-4
    gamma: float = 1.4
    cp: float = 1.075
    LHV: float = 43000.0
    sigma_cc: float = 0.96
    m_ref: float = 0.5
    P1: float = 101.0
    T1: float = 300.0
    eta_c: float = 0.75
    eta_t: float = 0.80
    eta_cc: float = 0.98
    N_ref: float = 78000.0
    a_c: float = 0.1
    K_t: float = 0.05641
    K_n: float = 0.1284

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == 'a_c':
                if not (math.isfinite(value) and value >= 0):
                    raise ConfigurationError(
                        f"a_c must be non-negative, got {value}")
            elif not (math.isfinite(value) and value > 0):
                raise ConfigurationError(
                    f"{f.name} must be strictly positive, got {value}")
        if not 1.0 < self.gamma < 2.0:
            raise ConfigurationError(
                f"gamma must lie in (1, 2), got {self.gamma}")
        if self.sigma_cc > 1.0:
            raise ConfigurationError(
                f"sigma_cc must lie in (0, 1], got {self.sigma_cc}")
        for name in ('eta_c', 'eta_t', 'eta_cc'):
            if getattr(self, name) > 1.0:
                raise ConfigurationError(
                    f"{name} must lie in (0, 1], got {getattr(self, name)}")

    @property
    def kappa(self) -> float:
        """Isentropic exponent (gamma - 1)/gamma."""
        return (self.gamma - 1.0) / self.gamma

    @classmethod
    def from_file(cls, path: str) -> "EngineParams":
        """Load parameters from a flat `key = value` file.

        Keys not present keep their default value.

        :param path: Path to the parameter file.
        :type path: str

        :return: The parameters.
        :rtype: EngineParams
        """
        names = [f.name for f in fields(cls)]
        values = parse_key_value_file(path, allowed_keys=names)
        for key, value in values.items():
            if not isinstance(value, (int, float)) or \
                    isinstance(value, bool):
                raise ConfigurationError(
                    f"{path}: '{key}' must be numeric, got '{value}'")
        return cls(**{k: float(v) for k, v in values.items()})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EngineState:
    """Compressor exit pressure P2 (kPa), turbine exit pressure P4 (kPa)
    and shaft speed N (rpm)."""
    P2: float
    P4: float
    N: float

    def as_array(self) -> np.ndarray:
        return np.array([self.P2, self.P4, self.N], dtype=float)

    @classmethod
    def from_array(cls, x) -> "EngineState":
        return cls(float(x[0]), float(x[1]), float(x[2]))

    def is_admissible(self, params: EngineParams) -> bool:
        x = self.as_array()
        return bool(np.all(np.isfinite(x)) and self.P2 >= params.P1
                    and self.P4 >= params.P1 and self.N > 0)


@dataclass(frozen=True)
class StationConditions:
    """Algebraic station quantities for one engine state.

    Temperatures in K, pressures in kPa, mass flows in kg/s, works in kJ/s
    and temperature rates in K/s.
    """
    T2: float
    T3: float
    T4: float
    T5: float
    P3: float
    P5: float
    mdot_c: float
    mdot_t: float
    mdot_n: float
    W_c: float
    W_t: float
    dT2_dt: float = 0.0
    dT4_dt: float = 0.0


@dataclass(frozen=True)
class StateDerivative:
    dP2_dt: float
    dP4_dt: float
    dN_dt: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dP2_dt, self.dP4_dt, self.dN_dt], dtype=float)


@lru_cache(maxsize=8)
def critical_pressure_ratio(gamma: float) -> float:
    """Static to total pressure ratio at which a nozzle chokes."""
    return (2.0 / (gamma + 1.0)) ** (gamma / (gamma - 1.0))


def _mass_flow_parameter(r: float, gamma: float) -> float:
    value = (2.0 / (gamma - 1.0)) * (
        r ** (2.0 / gamma) - r ** ((gamma + 1.0) / gamma))
    return math.sqrt(max(value, 0.0))


def flow_function(r: float, gamma: float) -> float:
    """Compressible flow function normalised to 1 at choking.

    :param r: Downstream to upstream pressure ratio.
    :type r: float

    :param gamma: Heat capacity ratio.
    :type gamma: float

    :return: 0 without pressure drop, 1 once choked.
    :rtype: float
    """
    if r >= 1.0:
        return 0.0
    r_crit = critical_pressure_ratio(gamma)
    r = max(r, r_crit)
    return _mass_flow_parameter(r, gamma) / \
        _mass_flow_parameter(r_crit, gamma)


def _stations(P2: float, P4: float, N: float, fuel_rate: float,
              params: EngineParams, strict: bool = True) -> StationConditions:
    p = params
    k = p.kappa

    # Compressor
    pressure_ratio = P2 / p.P1
    if pressure_ratio < 1.0:
        if strict:
            raise ModelDomainError(
                "compressor",
                f"pressure ratio P2/P1 = {pressure_ratio:.6f} < 1")
        pressure_ratio = 1.0
    mdot_c = p.m_ref * (N / p.N_ref) * (1.0 - p.a_c * (pressure_ratio - 1.0))
    mdot_c = max(mdot_c, 0.0)
    T2 = p.T1 * (1.0 + (pressure_ratio ** k - 1.0) / p.eta_c)
    W_c = mdot_c * p.cp * (T2 - p.T1)

    # Combustor
    P3 = p.sigma_cc * P2
    if mdot_c + fuel_rate > 0:
        T3 = (fuel_rate * p.LHV * p.eta_cc + mdot_c * p.cp * T2) / \
            ((mdot_c + fuel_rate) * p.cp)
    else:
        T3 = T2

    # Turbine
    turbine_ratio = P4 / P3
    mdot_t = p.K_t * P3 / math.sqrt(T3) * flow_function(turbine_ratio,
                                                         p.gamma)
    T4 = T3 * (1.0 - p.eta_t * (1.0 - min(turbine_ratio, 1.0) ** k))
    W_t = mdot_t * p.cp * (T3 - T4)

    # Nozzle
    nozzle_ratio = p.P1 / P4
    mdot_n = p.K_n * P4 / math.sqrt(T4) * flow_function(nozzle_ratio,
                                                        p.gamma)
    r_crit = critical_pressure_ratio(p.gamma)
    P5 = P4 * r_crit if nozzle_ratio < r_crit else p.P1
    T5 = T4 * (P5 / P4) ** k

    return StationConditions(
        T2=T2, T3=T3, T4=T4, T5=T5, P3=P3, P5=P5,
        mdot_c=mdot_c, mdot_t=mdot_t, mdot_n=mdot_n, W_c=W_c, W_t=W_t)


def _temperature_sensitivities(state: EngineState, fuel_rate: float,
                               params: EngineParams) -> tuple:
    """Partial derivatives of T2 and T4 with respect to the state.

    Returns (dT2/dP2, dT4/dP2, dT4/dP4, dT4/dN). The first one is exact, the
    T4 ones are central differences.
    """
    p = params
    pressure_ratio = max(state.P2 / p.P1, 1.0)
    g2 = p.T1 * p.kappa * pressure_ratio ** (p.kappa - 1.0) / \
        (p.eta_c * p.P1)

    def t4(P2, P4, N):
        return _stations(P2, P4, N, fuel_rate, p, strict=False).T4

    e = _RELATIVE_STEP
    P2, P4, N = state.P2, state.P4, state.N
    h2 = (t4(P2 * (1 + e), P4, N) - t4(P2 * (1 - e), P4, N)) / (2 * e * P2)
    h4 = (t4(P2, P4 * (1 + e), N) - t4(P2, P4 * (1 - e), N)) / (2 * e * P4)
    hN = (t4(P2, P4, N * (1 + e)) - t4(P2, P4, N * (1 - e))) / (2 * e * N)
    return g2, h2, h4, hN


def evaluate_components(state: EngineState, fuel_rate: float,
                        params: EngineParams = EngineParams(),
                        state_rate: Optional[StateDerivative] = None
                        ) -> StationConditions:
    """One pass of the component relations.

    :param state: Engine state.
    :type state: EngineState

    :param fuel_rate: Fuel mass flow burnt, in kg/s.
    :type fuel_rate: float

    :param params: Engine constants.
    :type params: EngineParams

    :param state_rate: Rate of change of the state. When given, the
        temperature rates dT2/dt and dT4/dt are obtained from it by the
        chain rule, otherwise they are zero.
    :type state_rate: StateDerivative

    :return: The station conditions.
    :rtype: StationConditions
    """
    if fuel_rate < 0:
        raise ModelDomainError(
            "combustor", f"negative fuel flow {fuel_rate} kg/s")
    stations = _stations(state.P2, state.P4, state.N, fuel_rate, params)
    if state_rate is None:
        return stations

    g2, h2, h4, hN = _temperature_sensitivities(state, fuel_rate, params)
    return replace(
        stations,
        dT2_dt=g2 * state_rate.dP2_dt,
        dT4_dt=(h2 * state_rate.dP2_dt + h4 * state_rate.dP4_dt
                + hN * state_rate.dN_dt))


def state_derivatives(state: EngineState, stations: StationConditions,
                      params: EngineParams = EngineParams()
                      ) -> StateDerivative:
    """Right-hand side of the pressure and rotor balances.

    Works are converted from kJ/s to W so that dN/dt comes out in rpm/s.

    :param state: Engine state.
    :type state: EngineState

    :param stations: Station conditions of the same state.
    :type stations: StationConditions

    :param params: Engine constants.
    :type params: EngineParams

    :return: The state derivative.
    :rtype: StateDerivative
    """
    if state.N == 0:
        raise SingularityError("shaft speed N = 0 in the rotor balance")
    s = stations
    p = params
    dP2_dt = (p.R / p.V1) * ((s.mdot_c - s.mdot_t) * s.T2
                             + s.mdot_c * s.dT2_dt)
    dP4_dt = (p.R / p.V2) * ((s.mdot_t - s.mdot_n) * s.T4
                             + s.mdot_t * s.dT4_dt)
    dN_dt = (1.0 / state.N) * _RPM_FACTOR * (s.W_t - s.W_c) * 1000.0 / p.I
    return StateDerivative(dP2_dt, dP4_dt, dN_dt)


def resolve_derivatives(state: EngineState, fuel_rate: float,
                        params: EngineParams = EngineParams()) -> tuple:
    """Station conditions and state derivative with consistent
    temperature rates.

    The temperature rates appearing in the pressure balances depend on the
    pressure rates themselves. Both are solved together at the current
    state, from the sensitivities of T2 and T4 to P2, P4 and N, rather
    than by backward differences of the temperatures across the previous
    step. The returned derivative satisfies the balances exactly.

    :return: (StationConditions, StateDerivative)
    :rtype: tuple
    """
    p = params
    stations = evaluate_components(state, fuel_rate, p)
    base = state_derivatives(state, stations, p)
    g2, h2, h4, hN = _temperature_sensitivities(state, fuel_rate, p)

    coupling_2 = 1.0 - (p.R / p.V1) * stations.mdot_c * g2
    coupling_4 = 1.0 - (p.R / p.V2) * stations.mdot_t * h4
    if min(coupling_2, coupling_4) < _MIN_COUPLING:
        raise SingularityError(
            "temperature-rate coupling is singular "
            f"({coupling_2:.3f}, {coupling_4:.3f})")

    dP2_dt = base.dP2_dt / coupling_2
    dN_dt = base.dN_dt
    dP4_dt = (base.dP4_dt + (p.R / p.V2) * stations.mdot_t
              * (h2 * dP2_dt + hN * dN_dt)) / coupling_4

    stations = replace(stations,
                       dT2_dt=g2 * dP2_dt,
                       dT4_dt=h2 * dP2_dt + h4 * dP4_dt + hN * dN_dt)
    return stations, state_derivatives(state, stations, p)


def relative_derivative_norm(state: EngineState,
                             derivative: StateDerivative) -> float:
    """Largest derivative relative to its state, in 1/s."""
    return float(np.max(np.abs(derivative.as_array() / state.as_array())))


def rk4_step(fn, x: np.ndarray, dt: float) -> np.ndarray:
    """Fixed step fourth order Runge-Kutta update of dx/dt = fn(x)."""
    k1 = fn(x)
    k2 = fn(x + dt / 2 * k1)
    k3 = fn(x + dt / 2 * k2)
    k4 = fn(x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_step(state: EngineState, fuel_rate: float, dt: float,
                   params: EngineParams = EngineParams()) -> EngineState:
    """Advance the engine state by `dt` seconds at constant fuel flow.

    :param state: Current state.
    :type state: EngineState

    :param fuel_rate: Fuel mass flow burnt during the step, kg/s.
    :type fuel_rate: float

    :param dt: Time step in (0, 0.1] s.
    :type dt: float

    :param params: Engine constants.
    :type params: EngineParams

    :return: The new state.
    :rtype: EngineState
    """
    if not 0 < dt <= MAX_STEP:
        raise ConfigurationError(
            f"time step must lie in (0, {MAX_STEP}] s, got {dt}")

    def rhs(x):
        _, derivative = resolve_derivatives(
            EngineState.from_array(x), fuel_rate, params)
        return derivative.as_array()

    x = state.as_array()
    try:
        x_new = rk4_step(rhs, x, dt)
    except (ModelDomainError, SingularityError, OverflowError) as e:
        raise IntegrationError(
            f"right-hand side failed during step: {e}",
            dt=dt, state=state) from e

    new_state = EngineState.from_array(x_new)
    if not new_state.is_admissible(params):
        raise IntegrationError(
            "state left its admissible domain",
            dt=dt, state=new_state, derivative=(x_new - x) / dt)
    return new_state


def _initial_guess(fuel_rate: float, params: EngineParams) -> np.ndarray:
    f = fuel_rate / _DESIGN_FUEL_RATE
    return np.array([params.P1 * (1.0 + 0.9 * f),
                     params.P1 * (1.0 + 0.15 * f),
                     0.9 * params.N_ref * f])


def _balance_residual(x: np.ndarray, fuel_rate: float,
                      params: EngineParams) -> np.ndarray:
    s = _stations(x[0], x[1], x[2], fuel_rate, params)
    p = params
    return np.array([(s.mdot_c - s.mdot_t) / p.m_ref,
                     (s.mdot_t - s.mdot_n) / p.m_ref,
                     (s.W_t - s.W_c) / (p.m_ref * p.cp * p.T1)])


def _newton(x: np.ndarray, fuel_rate: float, params: EngineParams,
            max_iter: int) -> tuple:
    """Damped Newton iteration on the mass and power balances.

    Returns the last iterate and its residual norm.
    """
    def admissible(y):
        return y[0] > params.P1 and y[1] > params.P1 and y[2] > 0

    residual = _balance_residual(x, fuel_rate, params)
    norm = float(np.linalg.norm(residual))
    for iteration in range(max_iter):
        if norm < 1e-13:
            break

        jacobian = np.empty((3, 3))
        for j in range(3):
            h = 1e-7 * x[j]
            y = x.copy()
            y[j] += h
            jacobian[:, j] = (_balance_residual(y, fuel_rate, params)
                              - residual) / h
        try:
            step = np.linalg.solve(jacobian, -residual)
        except np.linalg.LinAlgError:
            break

        damping = 1.0
        while damping > 1e-4:
            y = x + damping * step
            if admissible(y):
                trial = _balance_residual(y, fuel_rate, params)
                trial_norm = float(np.linalg.norm(trial))
                if trial_norm < norm:
                    break
            damping /= 2
        else:
            logger.debug(f"Newton stalled at iteration {iteration}, "
                         f"residual {norm:.3e}")
            break
        x, residual, norm = y, trial, trial_norm

    return x, norm


def _relax(x: np.ndarray, fuel_rate: float, params: EngineParams,
           horizon: float = 200.0, dt: float = 0.05) -> np.ndarray:
    """Pseudo-transient continuation: integrate towards equilibrium."""
    state = EngineState.from_array(x)
    for _ in range(int(round(horizon / dt))):
        state = integrate_step(state, fuel_rate, dt, params)
        _, derivative = resolve_derivatives(state, fuel_rate, params)
        if relative_derivative_norm(state, derivative) < 1e-6:
            break
    return state.as_array()


def steady_state(fuel_rate: float, params: EngineParams = EngineParams(),
                 tol: float = 1e-8, max_iter: int = 100) -> EngineState:
    """Equilibrium of the engine at a constant fuel flow.

    :param fuel_rate: Fuel mass flow in kg/s.
    :type fuel_rate: float

    :param params: Engine constants.
    :type params: EngineParams

    :param tol: Bound on the relative derivative norm, 1/s.
    :type tol: float

    :param max_iter: Newton iteration budget per attempt.
    :type max_iter: int

    :return: The equilibrium state.
    :rtype: EngineState
    """
    if not fuel_rate > 0:
        raise SteadyStateError(
            f"no powered equilibrium for fuel flow {fuel_rate} kg/s",
            math.inf)

    def converged(x):
        state = EngineState.from_array(x)
        if not state.is_admissible(params):
            return None
        try:
            _, derivative = resolve_derivatives(state, fuel_rate, params)
        except (ModelDomainError, SingularityError):
            return None
        if relative_derivative_norm(state, derivative) < tol:
            return state
        return None

    x, norm = _newton(_initial_guess(fuel_rate, params), fuel_rate,
                      params, max_iter)
    state = converged(x)
    if state is not None:
        return state

    logger.debug(f"Newton from the initial guess failed for "
                 f"{fuel_rate} kg/s (residual {norm:.3e}), relaxing")
    try:
        x = _relax(_initial_guess(fuel_rate, params), fuel_rate, params)
    except IntegrationError as e:
        raise SteadyStateError(
            f"relaxation towards equilibrium failed: {e}", norm) from e
    x, norm = _newton(x, fuel_rate, params, max_iter)
    state = converged(x)
    if state is None:
        raise SteadyStateError(
            f"no equilibrium found for fuel flow {fuel_rate} kg/s", norm)
    return state


@dataclass(frozen=True)
class CommandProfile:
    """Fuel command schedule (pulse fraction) over time.

    `kind` is 'linear' for linear interpolation between knots or 'step'
    for a zero order hold of each knot value. `value` holds the end values
    outside the knots, but a linear profile is only defined up to its last
    knot while a step profile holds its last value indefinitely.
    """
    times: tuple
    values: tuple
    kind: str = 'linear'

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.size == 0 or times.shape != values.shape:
            raise ConfigurationError(
                "a command profile needs matching, non-empty knot times "
                "and values")
        if np.any(np.diff(times) <= 0):
            raise ConfigurationError(
                "command profile knot times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("command profile values must be finite")
        if self.kind not in ('linear', 'step'):
            raise ConfigurationError(
                f"unknown command profile kind '{self.kind}'")
        object.__setattr__(self, 'times', tuple(times.tolist()))
        object.__setattr__(self, 'values', tuple(values.tolist()))

    def value(self, t: float) -> float:
        if self.kind == 'step':
            index = np.searchsorted(self.times, t, side='right') - 1
            return self.values[max(int(index), 0)]
        return float(np.interp(t, self.times, self.values))

    def covers(self, duration: float) -> bool:
        """Whether the profile is defined over [0, duration]."""
        if len(self.times) == 1:
            return True
        if self.kind == 'step':
            return self.times[0] <= 0.0
        return self.times[0] <= 0.0 and self.times[-1] >= duration

    @classmethod
    def constant(cls, command: float) -> "CommandProfile":
        return cls((0.0,), (command,))

    @classmethod
    def steps(cls, changes) -> "CommandProfile":
        """Piecewise constant profile from (time, command) pairs."""
        times, values = zip(*changes)
        return cls(times, values, kind='step')

    @classmethod
    def random(cls, rng: np.random.Generator, duration: float,
               spacing: float = 10.0, low: float = 0.5,
               high: float = 0.95) -> "CommandProfile":
        """Random piecewise linear profile with a knot every `spacing`
        seconds, levels drawn uniformly in [low, high]."""
        n_knots = int(math.ceil(duration / spacing)) + 1
        times = np.arange(n_knots) * spacing
        return cls(tuple(times), tuple(rng.uniform(low, high, n_knots)))

    @classmethod
    def from_csv(cls, path: str, kind: str = 'linear') -> "CommandProfile":
        """Load a profile from a CSV file with columns `t,command`."""
        frame = pd.read_csv(path)
        missing = {'t', 'command'} - set(frame.columns)
        if missing:
            raise ConfigurationError(
                f"{path}: missing columns {sorted(missing)}")
        return cls(tuple(frame['t']), tuple(frame['command']), kind=kind)


@dataclass
class Trajectory:
    """Sampled signals of one simulation.

    :param t: Sample times, s.
    :param signals: Recorded signals (faults and noise included), one row
        per sample in the order of SIGNALS.
    :param clean: The same signals without sensor faults nor noise.
    :param final_state: Engine state after the last sample.
    """
    t: np.ndarray
    signals: np.ndarray
    clean: np.ndarray
    final_state: Optional[EngineState] = None

    def __len__(self):
        return len(self.t)

    def column(self, name: str, clean: bool = False) -> np.ndarray:
        matrix = self.clean if clean else self.signals
        return matrix[:, SIGNALS.index(name)]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.signals, columns=list(SIGNALS))
        frame.insert(0, 't', self.t)
        return frame

    def to_csv(self, path: str):
        self.to_frame().to_csv(path, index=False, float_format="%.6f")

    @classmethod
    def from_csv(cls, path: str) -> "Trajectory":
        frame = pd.read_csv(path)
        missing = [c for c in ('t',) + SIGNALS if c not in frame.columns]
        if missing:
            raise ConfigurationError(f"{path}: missing columns {missing}")
        signals = frame[list(SIGNALS)].to_numpy(dtype=float)
        return cls(frame['t'].to_numpy(dtype=float), signals, signals.copy())


def simulate(profile: CommandProfile, duration: float,
             dt: float = DEFAULT_STEP,
             params: EngineParams = EngineParams(),
             faults: Optional["FaultSchedule"] = None,
             seed=None,
             fuel_supply: Optional[FuelSupplyState] = None,
             initial_state: Optional[EngineState] = None) -> Trajectory:
    """Simulate the engine and its fuel supply under a command profile.

    Each sample records the signals at t_k. The fuel flow column is the
    flow demanded from the fuel supply in L/hr; actuator faults change the
    flow actually burnt. Sensor faults and measurement noise are applied
    only when a fault schedule is given, an absent schedule yields the
    healthy noise-free baseline.

    :param profile: Fuel command schedule.
    :type profile: CommandProfile

    :param duration: Simulated time, s. round(duration/dt) samples.
    :type duration: float

    :param dt: Sampling and integration step, s.
    :type dt: float

    :param params: Engine constants.
    :type params: EngineParams

    :param faults: Fault schedule, None for a clean baseline.
    :type faults: FaultSchedule

    :param seed: Seed of the measurement noise stream.

    :param fuel_supply: Fuel supply parameters; its flow is replaced by the
        settled flow of the initial command.
    :type fuel_supply: FuelSupplyState

    :param initial_state: Initial engine state. Defaults to the equilibrium
        at the initial fuel flow.
    :type initial_state: EngineState

    :return: The sampled trajectory.
    :rtype: Trajectory
    """
    if duration < 0:
        raise ConfigurationError(f"duration must be >= 0, got {duration}")
    if not 0 < dt <= MAX_STEP:
        raise ConfigurationError(
            f"time step must lie in (0, {MAX_STEP}] s, got {dt}")
    if not profile.covers(duration):
        raise ConfigurationError(
            f"command profile does not cover [0, {duration}] s")

    n_samples = int(round(duration / dt))
    rng = np.random.default_rng(seed)
    fss = (fuel_supply or FuelSupplyState()).settled(profile.value(0.0), dt)
    demanded = fss.y
    last_healthy = demanded
    was_active = False
    state = initial_state
    if state is None:
        state = steady_state(lph_to_kgs(demanded), params)

    t = np.arange(n_samples) * dt
    signals = np.empty((n_samples, len(SIGNALS)))
    clean = np.empty((n_samples, len(SIGNALS)))
    for k in range(n_samples):
        t_k = t[k]
        burnt = demanded
        if faults is not None:
            # The held flow is the demand at the first faulty sample.
            active = faults.actuator_active(t_k)
            if not (active and was_active):
                last_healthy = demanded
            was_active = active
            burnt = faults.apply_to_command(demanded, last_healthy, t_k)
        fuel_rate = lph_to_kgs(burnt)

        try:
            s = evaluate_components(state, fuel_rate, params)
        except ModelDomainError as e:
            raise SimulationError(t_k, e) from e
        clean[k] = (demanded, params.P1, params.T1, state.P2, s.T2, s.P3,
                    s.T3, state.P4, s.T4, s.P5, s.T5, state.N)
        if faults is not None:
            signals[k] = faults.corrupt(clean[k], t_k, rng)
        else:
            signals[k] = clean[k]

        fss, next_demanded = fuel_supply_step(profile.value(t_k), fss, dt)
        try:
            state = integrate_step(state, fuel_rate, dt, params)
        except IntegrationError as e:
            raise SimulationError(t_k, e) from e
        demanded = next_demanded

    logger.debug(f"Simulated {n_samples} samples, final state {state}")
    return Trajectory(t=t, signals=signals, clean=clean, final_state=state)
