# ========================================
# FileName: simulate.py
# Brief: CLI command simulating the engine under a command profile.
# =========================================

import os

import rich

from ..utils.logging import setup_logger
from ..utils.manifest import write_manifest
from ..utils.misc import ensure_parent
from ..core.engine import (
    CommandProfile, EngineParams, simulate, steady_state
)
from ..core.faults import FaultSchedule
from ..core.fuel_supply import lph_to_kgs
from ._constants import ENGINE, FAULT, FILE, FUEL

logger = setup_logger()


def command_simulate(output, duration, dt, command=None, profile=None,
                     faults=None, params=None, seed=0, initial_fuel=None):
    """Simulate one trajectory and write it as CSV.

    :param output: Trajectory CSV path.
    :type output: str

    :param duration: Simulated time, s.
    :type duration: float

    :param dt: Time step, s.
    :type dt: float

    :param command: Constant pulse command in [0, 1].
    :type command: float

    :param profile: CSV command profile, used instead of `command`.
    :type profile: str

    :param faults: Fault schedule file.
    :type faults: str

    :param params: Engine parameter file.
    :type params: str

    :param seed: Measurement noise seed.
    :type seed: int

    :param initial_fuel: Fuel flow (L/hr) of the starting equilibrium.
    :type initial_fuel: float
    """
    inputs = []
    if profile is not None:
        command_profile = CommandProfile.from_csv(profile)
        inputs.append(profile)
    else:
        command_profile = CommandProfile.constant(
            0.7 if command is None else command)

    engine_params = EngineParams()
    if params is not None:
        engine_params = EngineParams.from_file(params)
        inputs.append(params)

    schedule = None
    if faults is not None:
        schedule = FaultSchedule.load(faults)
        inputs.append(faults)
        rich.print(f"{FAULT} {len(schedule)} fault(s), noise level "
                   f"{schedule.noise_level}")

    initial_state = None
    if initial_fuel is not None:
        initial_state = steady_state(lph_to_kgs(initial_fuel), engine_params)
        rich.print(f"{FUEL} Starting from the equilibrium at "
                   f"{initial_fuel} L/hr (N = {initial_state.N:.0f} rpm)")

    logger.info(f"Simulating {duration} s at dt={dt} s")
    trajectory = simulate(command_profile, duration, dt, engine_params,
                          faults=schedule, seed=seed,
                          initial_state=initial_state)
    directory = ensure_parent(output)
    trajectory.to_csv(output)

    if len(trajectory):
        rich.print(f"{ENGINE} Final shaft speed: "
                   f"{trajectory.column('N')[-1]:.0f} rpm")
    rich.print(f"{FILE} Trajectory: {output} ({len(trajectory)} samples)")
    write_manifest(directory, 'simulate', inputs=inputs, outputs=[output],
                   seeds={'noise': seed},
                   parameters={'duration': duration, 'dt': dt,
                               'command': command,
                               'initial_fuel': initial_fuel,
                               'engine': engine_params.to_dict()})
    return os.path.abspath(output)
