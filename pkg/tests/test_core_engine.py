# ========================================
# FileName: test_core_engine.py
# Brief: Test the engine model, integrator and simulator
# =========================================

import os
import tempfile
import unittest

import numpy as np

from jetfdi.core.engine import (
    SIGNALS, CommandProfile, EngineParams, EngineState, StationConditions,
    Trajectory, evaluate_components, integrate_step, relative_derivative_norm,
    resolve_derivatives, simulate, state_derivatives, steady_state
)
from jetfdi.core.errors import (
    ConfigurationError, ModelDomainError, SingularityError, SteadyStateError
)
from jetfdi.core.faults import FaultKind, FaultSchedule, FaultSpec
from jetfdi.core.fuel_supply import lph_to_kgs
from ._common import FUEL_RATES, write_lines


def stations(**values):
    base = dict(T2=300.0, T3=900.0, T4=800.0, T5=780.0, P3=190.0, P5=101.0,
                mdot_c=0.5, mdot_t=0.5, mdot_n=0.5, W_c=50.0, W_t=50.0)
    base.update(values)
    return StationConditions(**base)


class TestEngineParams(unittest.TestCase):

    def test_defaults(self):
        params = EngineParams()
        self.assertEqual(params.V1, 0.24)
        self.assertAlmostEqual(params.kappa, 0.4 / 1.4)

    def test_invalid(self):
        with self.assertRaises(ConfigurationError):
            EngineParams(V1=0.0)
        with self.assertRaises(ConfigurationError):
            EngineParams(gamma=2.5)
        with self.assertRaises(ConfigurationError):
            EngineParams(eta_c=1.2)

    def test_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_lines(os.path.join(tmp, "engine.txt"),
                               ["# larger plenum", "V1 = 0.48", "",
                                "T1 = 288.15"])
            params = EngineParams.from_file(path)
            self.assertEqual(params.V1, 0.48)
            self.assertEqual(params.T1, 288.15)
            self.assertEqual(params.V2, 0.36)

            bad = write_lines(os.path.join(tmp, "bad.txt"), ["Vx = 1"])
            with self.assertRaises(ConfigurationError):
                EngineParams.from_file(bad)


class TestComponents(unittest.TestCase):
    """Algebraic station relations."""

    def test_no_compression_no_fuel(self):
        s = evaluate_components(EngineState(101.0, 101.0, 30000.0), 0.0)
        self.assertAlmostEqual(s.T2, 300.0)
        self.assertAlmostEqual(s.W_c, 0.0)

    def test_combustor_pressure_loss(self):
        s = evaluate_components(EngineState(202.0, 120.0, 50000.0), 0.003)
        self.assertAlmostEqual(s.P3, 193.92, places=9)

    def test_compressor_temperature(self):
        s = evaluate_components(EngineState(202.0, 120.0, 50000.0), 0.003)
        expected = 300.0 * (1 + (2 ** (0.4 / 1.4) - 1) / 0.75)
        self.assertAlmostEqual(s.T2, expected, places=9)
        self.assertAlmostEqual(s.T2, 387.6, delta=0.1)

    def test_domain_errors(self):
        with self.assertRaises(ModelDomainError) as context:
            evaluate_components(EngineState(90.0, 110.0, 40000.0), 0.003)
        self.assertEqual(context.exception.station, "compressor")
        with self.assertRaises(ModelDomainError):
            evaluate_components(EngineState(200.0, 110.0, 40000.0), -1e-3)


class TestStateDerivatives(unittest.TestCase):
    """Pressure and rotor balances."""

    state = EngineState(200.0, 115.0, 40000.0)

    def test_mass_balance_equilibrium(self):
        d = state_derivatives(self.state, stations(mdot_c=0.4, mdot_t=0.4))
        self.assertEqual(d.dP2_dt, 0.0)

    def test_power_balance(self):
        d = state_derivatives(self.state, stations(W_c=60.0, W_t=60.0))
        self.assertEqual(d.dN_dt, 0.0)

    def test_compressor_plenum(self):
        d = state_derivatives(
            self.state, stations(mdot_c=0.51, mdot_t=0.5, T2=400.0))
        self.assertAlmostEqual(d.dP2_dt, 0.287 / 0.24 * 0.01 * 400.0,
                               places=9)
        self.assertAlmostEqual(d.dP2_dt, 4.783, delta=1e-3)

    def test_rotor(self):
        d = state_derivatives(self.state, stations(W_c=50.0, W_t=51.0))
        expected = (1 / 40000.0) * (60 / (2 * np.pi)) ** 2 * 1000 / 3.2e-4
        self.assertAlmostEqual(d.dN_dt, expected, places=6)
        self.assertAlmostEqual(d.dN_dt, 7.12e3, delta=10.0)

    def test_doubling_plenum_halves_pressure_rate(self):
        s = stations(mdot_c=0.52, mdot_t=0.5, T2=390.0, dT2_dt=12.0)
        base = state_derivatives(self.state, s)
        large = state_derivatives(self.state, s, EngineParams(V1=0.48))
        self.assertAlmostEqual(large.dP2_dt, base.dP2_dt / 2, places=12)
        self.assertEqual(large.dP4_dt, base.dP4_dt)

    def test_speed_rises_only_with_turbine_surplus(self):
        rng = np.random.default_rng(2)
        for W_c, W_t in rng.uniform(0.0, 100.0, (50, 2)):
            d = state_derivatives(self.state, stations(W_c=W_c, W_t=W_t))
            self.assertEqual(d.dN_dt > 0, W_t > W_c)

    def test_zero_speed(self):
        with self.assertRaises(SingularityError):
            state_derivatives(EngineState(200.0, 115.0, 0.0), stations())

    def test_resolved_rates_satisfy_balances(self):
        state = steady_state(FUEL_RATES[1])
        s, d = resolve_derivatives(state, FUEL_RATES[3])
        again = state_derivatives(state, s)
        np.testing.assert_allclose(again.as_array(), d.as_array())


class TestSteadyState(unittest.TestCase):

    def test_derivative_vanishes(self):
        for fuel_rate in FUEL_RATES:
            state = steady_state(fuel_rate)
            _, d = resolve_derivatives(state, fuel_rate)
            self.assertLess(relative_derivative_norm(state, d), 1e-8)

    def test_speed_increases_with_fuel(self):
        speeds = [steady_state(f).N for f in FUEL_RATES]
        self.assertTrue(all(a < b for a, b in zip(speeds, speeds[1:])))
        self.assertTrue(all(10000 < n < 120000 for n in speeds))

    def test_turbine_inlet_temperature_increases_with_fuel(self):
        temperatures = [evaluate_components(steady_state(f), f).T3
                        for f in FUEL_RATES]
        self.assertTrue(all(a < b for a, b in
                            zip(temperatures, temperatures[1:])))

    def test_no_fuel(self):
        with self.assertRaises(SteadyStateError):
            steady_state(0.0)


class TestIntegrator(unittest.TestCase):

    def test_fixed_point(self):
        state = steady_state(FUEL_RATES[2])
        after = integrate_step(state, FUEL_RATES[2], 0.1)
        np.testing.assert_allclose(after.as_array(), state.as_array(),
                                   rtol=1e-8)

    def test_euler_consistency(self):
        state = steady_state(FUEL_RATES[1])
        dt = 1e-4
        after = integrate_step(state, FUEL_RATES[2], dt)
        _, d = resolve_derivatives(state, FUEL_RATES[2])
        euler = (after.as_array() - state.as_array()) / dt
        self.assertLess(np.linalg.norm(euler - d.as_array()),
                        1e-2 * np.linalg.norm(d.as_array()))

    def test_fourth_order(self):
        start = steady_state(FUEL_RATES[1])

        def final(dt, horizon=1.0):
            state = start
            for _ in range(int(round(horizon / dt))):
                state = integrate_step(state, FUEL_RATES[2], dt)
            return state.as_array()

        reference = final(0.1 / 32)
        coarse = np.max(np.abs(final(0.1) - reference) / reference)
        fine = np.max(np.abs(final(0.05) - reference) / reference)
        self.assertGreaterEqual(coarse / fine, 12.0)

    def test_step_bounds(self):
        state = steady_state(FUEL_RATES[1])
        with self.assertRaises(ConfigurationError):
            integrate_step(state, FUEL_RATES[1], 0.2)
        with self.assertRaises(ConfigurationError):
            integrate_step(state, FUEL_RATES[1], 0.0)


class TestCommandProfile(unittest.TestCase):

    def test_linear_and_step(self):
        linear = CommandProfile((0.0, 10.0), (0.5, 0.9))
        self.assertAlmostEqual(linear.value(5.0), 0.7)
        self.assertAlmostEqual(linear.value(20.0), 0.9)
        step = CommandProfile.steps([(0.0, 0.5), (10.0, 0.9)])
        self.assertEqual(step.value(9.99), 0.5)
        self.assertEqual(step.value(10.0), 0.9)

    def test_invalid(self):
        with self.assertRaises(ConfigurationError):
            CommandProfile((1.0, 0.0), (0.5, 0.6))
        with self.assertRaises(ConfigurationError):
            CommandProfile((), ())

    def test_coverage(self):
        step = CommandProfile.steps([(0.0, 0.6), (3.0, 0.8)])
        self.assertTrue(step.covers(200.0))
        late = CommandProfile.steps([(1.0, 0.6), (2.0, 0.7)])
        self.assertFalse(late.covers(5.0))
        linear = CommandProfile((0.0, 10.0), (0.5, 0.9))
        self.assertTrue(linear.covers(10.0))
        self.assertFalse(linear.covers(20.0))

    def test_random_profile_levels(self):
        rng = np.random.default_rng(0)
        profile = CommandProfile.random(rng, 100.0)
        self.assertTrue(profile.covers(100.0))
        self.assertTrue(all(0.5 <= v <= 0.95 for v in profile.values))

    def test_from_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_lines(os.path.join(tmp, "profile.csv"),
                               ["t,command", "0,0.6", "50,0.8"])
            profile = CommandProfile.from_csv(path)
            self.assertAlmostEqual(profile.value(25.0), 0.7)


class TestSimulate(unittest.TestCase):

    def test_sample_count(self):
        trajectory = simulate(CommandProfile.constant(0.7), 100.0, 0.1)
        self.assertEqual(len(trajectory), 1000)
        self.assertEqual(trajectory.signals.shape, (1000, len(SIGNALS)))
        self.assertAlmostEqual(trajectory.t[-1], 99.9)

    def test_zero_duration(self):
        trajectory = simulate(CommandProfile.constant(0.7), 0.0)
        self.assertEqual(len(trajectory), 0)

    def test_constant_command_stays_at_equilibrium(self):
        trajectory = simulate(CommandProfile.constant(0.7), 10.0)
        expected = steady_state(lph_to_kgs(14.0))
        np.testing.assert_allclose(trajectory.final_state.as_array(),
                                   expected.as_array(), rtol=1e-6)
        np.testing.assert_allclose(trajectory.column('mf'), 14.0)

    def test_converges_to_steady_state(self):
        for command in (0.55, 0.6, 0.7, 0.8, 0.9):
            profile = CommandProfile.steps([(0.0, command - 0.05),
                                            (1.0, command)])
            trajectory = simulate(profile, 200.0)
            state = trajectory.final_state
            fuel_rate = lph_to_kgs(20.0 * command)
            _, d = resolve_derivatives(state, fuel_rate)
            self.assertLess(relative_derivative_norm(state, d), 1e-6)
            np.testing.assert_allclose(
                state.as_array(), steady_state(fuel_rate).as_array(),
                rtol=1e-3)

    def test_deterministic_with_faults(self):
        schedule = FaultSchedule(
            (FaultSpec(FaultKind.SENSOR_BIAS, 'T2', 0.05, 2.0, 6.0),), 0.02)
        a = simulate(CommandProfile.constant(0.7), 10.0, faults=schedule,
                     seed=3)
        b = simulate(CommandProfile.constant(0.7), 10.0, faults=schedule,
                     seed=3)
        np.testing.assert_array_equal(a.signals, b.signals)

    def test_sensor_fault_leaves_dynamics(self):
        schedule = FaultSchedule(
            (FaultSpec(FaultKind.SENSOR_BIAS, 'T2', 0.05, 2.0, 6.0),), 0.0)
        clean = simulate(CommandProfile.constant(0.7), 10.0)
        faulty = simulate(CommandProfile.constant(0.7), 10.0,
                          faults=schedule)
        np.testing.assert_array_equal(faulty.clean, clean.clean)
        inside = (faulty.t >= 2.0) & (faulty.t < 6.0)
        np.testing.assert_allclose(faulty.column('T2')[inside],
                                   1.05 * clean.column('T2')[inside])
        np.testing.assert_array_equal(faulty.column('T2')[~inside],
                                      clean.column('T2')[~inside])

    def test_actuator_offset_changes_dynamics(self):
        schedule = FaultSchedule(
            (FaultSpec(FaultKind.ACTUATOR_OFFSET, 'FSS', 0.1, 1.0, 10.0),),
            0.0)
        clean = simulate(CommandProfile.constant(0.7), 10.0)
        faulty = simulate(CommandProfile.constant(0.7), 10.0,
                          faults=schedule)
        np.testing.assert_allclose(faulty.column('mf'), clean.column('mf'))
        self.assertGreater(faulty.column('N')[-1], clean.column('N')[-1])

    def test_lock_in_place_holds_flow(self):
        profile = CommandProfile.steps([(0.0, 0.6), (3.0, 0.8)])
        schedule = FaultSchedule(
            (FaultSpec(FaultKind.ACTUATOR_LOCK_IN_PLACE, 'FSS', 0.0,
                       2.0, 20.0),), 0.0)
        clean = simulate(profile, 20.0)
        locked = simulate(profile, 20.0, faults=schedule)
        # Flow held at 12 L/hr while the demand rises to 16 L/hr.
        expected = steady_state(lph_to_kgs(12.0))
        np.testing.assert_allclose(locked.final_state.as_array(),
                                   expected.as_array(), rtol=1e-3)
        self.assertLess(locked.column('N')[-1], clean.column('N')[-1])

    def test_lock_holds_demand_of_onset_sample(self):
        profile = CommandProfile.steps([(0.0, 0.5), (0.5, 0.9)])
        schedule = FaultSchedule(
            (FaultSpec(FaultKind.ACTUATOR_LOCK_IN_PLACE, 'FSS', 0.0,
                       1.0, 30.0),), 0.0)
        locked = simulate(profile, 30.0, faults=schedule)
        onset = int(np.flatnonzero(locked.t >= 1.0)[0])
        held = locked.column('mf')[onset]
        # The demand is still rising through the onset.
        self.assertGreater(held - locked.column('mf')[onset - 1], 0.3)
        final = locked.final_state.as_array()
        expected = steady_state(lph_to_kgs(held))
        np.testing.assert_allclose(final, expected.as_array(), rtol=1e-3)
        previous = steady_state(lph_to_kgs(locked.column('mf')[onset - 1]))
        self.assertFalse(np.allclose(final, previous.as_array(), rtol=1e-3))

    def test_rejects_uncovered_profile(self):
        profile = CommandProfile((5.0, 10.0), (0.6, 0.7))
        with self.assertRaises(ConfigurationError):
            simulate(profile, 20.0)

    def test_larger_plenum_slows_pressure(self):
        profile = CommandProfile.steps([(0.0, 0.6), (1.0, 0.8)])
        base = simulate(profile, 3.0)
        large = simulate(profile, 3.0, params=EngineParams(V1=0.48))
        k = int(round(1.5 / 0.1))
        rise_base = base.column('P2')[k] - base.column('P2')[0]
        rise_large = large.column('P2')[k] - large.column('P2')[0]
        self.assertNotAlmostEqual(rise_base, rise_large, places=6)

    def test_csv_round_trip(self):
        trajectory = simulate(CommandProfile.constant(0.6), 2.0)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.csv")
            trajectory.to_csv(path)
            loaded = Trajectory.from_csv(path)
        self.assertEqual(len(loaded), 20)
        np.testing.assert_allclose(loaded.signals, trajectory.signals,
                                   atol=1e-6)
