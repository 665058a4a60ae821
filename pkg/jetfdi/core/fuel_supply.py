# ========================================
# FileName: fuel_supply.py
# Brief: First order plus dead time surrogate of the fuel supply system.
# =========================================

import math
from dataclasses import dataclass, replace

from .errors import ConfigurationError

# kg per litre of kerosene-type fuel
FUEL_DENSITY = 0.8


def lph_to_kgs(flow: float, density: float = FUEL_DENSITY) -> float:
    """Convert a volumetric fuel flow in L/hr to a mass flow in kg/s."""
    return flow / 3600.0 * density


def kgs_to_lph(flow: float, density: float = FUEL_DENSITY) -> float:
    """Convert a mass flow in kg/s to a volumetric flow in L/hr."""
    return flow * 3600.0 / density


@dataclass(frozen=True)
class FuelSupplyState:
    """State of the fuel supply servo.

    The command is a pulse fraction in [0, 1]. The delivered flow `y`
    follows a first order lag of gain `K_gain` (L/hr per unit command) and
    time constant `tau` applied to the command delayed by `theta` seconds.

    :param command_history: Commands still travelling through the dead
        time, oldest first.
    :param y: Delivered flow in L/hr.
    :param lower: Lower saturation bound in L/hr.
    :param upper: Upper saturation bound in L/hr.
    """
    K_gain: float = 20.0
    tau: float = 0.8
    theta: float = 0.2
    command_history: tuple = ()
    y: float = 0.0
    lower: float = 0.0
    upper: float = 20.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.theta < 0:
            raise ConfigurationError(
                f"theta must be non-negative, got {self.theta}")
        if not self.lower < self.upper:
            raise ConfigurationError(
                "saturation bounds must satisfy lower < upper")
        if not self.lower <= self.y <= self.upper:
            raise ConfigurationError(
                f"flow {self.y} L/hr outside saturation bounds "
                f"[{self.lower}, {self.upper}]")

    def delay_steps(self, dt: float) -> int:
        """Number of samples covering the dead time."""
        return int(round(self.theta / dt))

    def clip(self, flow: float) -> float:
        return min(max(flow, self.lower), self.upper)

    def settled(self, command: float, dt: float) -> "FuelSupplyState":
        """State after holding `command` long enough to reach steady state.

        :param command: Pulse fraction, clamped to [0, 1].
        :type command: float

        :param dt: Sampling period in seconds.
        :type dt: float

        :return: The settled state.
        :rtype: FuelSupplyState
        """
        command = _clamp_command(command)
        return replace(
            self,
            command_history=(command,) * self.delay_steps(dt),
            y=self.clip(self.K_gain * command))


def _clamp_command(command: float) -> float:
    if math.isnan(command):
        return 0.0
    return min(max(float(command), 0.0), 1.0)


def fuel_supply_step(command: float, fss: FuelSupplyState,
                     dt: float) -> tuple:
    """Advance the fuel supply servo by one sample.

    The lag is discretised exactly for a command held over the sample, so
    a unit step reaches `K_gain*(1 - exp(-1))` one time constant after the
    dead time has elapsed.

    :param command: Pulse fraction, clamped to [0, 1].
    :type command: float

    :param fss: Current servo state.
    :type fss: FuelSupplyState

    :param dt: Sampling period in seconds.
    :type dt: float

    :return: The new state and the delivered flow in L/hr.
    :rtype: tuple
    """
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")

    n_delay = fss.delay_steps(dt)
    history = tuple(fss.command_history)[-n_delay:] if n_delay else ()
    # Missing entries mean the servo was at rest.
    history = (0.0,) * (n_delay - len(history)) + history

    history = history + (_clamp_command(command),)
    delayed, history = history[0], history[1:]

    decay = math.exp(-dt / fss.tau)
    y = decay * fss.y + (1.0 - decay) * fss.K_gain * delayed
    y = fss.clip(y)
    return replace(fss, command_history=history, y=y), y
