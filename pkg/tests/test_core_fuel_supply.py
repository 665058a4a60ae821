# ========================================
# FileName: test_core_fuel_supply.py
# Brief: Test the fuel supply servo model
# =========================================

import math
import unittest

from jetfdi.core.errors import ConfigurationError
from jetfdi.core.fuel_supply import (
    FuelSupplyState, fuel_supply_step, kgs_to_lph, lph_to_kgs
)


def run_steps(command, n, fss=None, dt=0.1):
    fss = fss or FuelSupplyState()
    outputs = []
    for _ in range(n):
        fss, y = fuel_supply_step(command, fss, dt)
        outputs.append(y)
    return fss, outputs


class TestFuelSupplyStep(unittest.TestCase):
    """Dead time, lag and saturation of the servo."""

    def test_zero_command(self):
        _, outputs = run_steps(0.0, 50)
        self.assertTrue(all(y == 0.0 for y in outputs))

    def test_dead_time(self):
        _, outputs = run_steps(1.0, 2)
        self.assertEqual(outputs, [0.0, 0.0])

    def test_one_time_constant_after_dead_time(self):
        fss, outputs = run_steps(1.0, 10)
        self.assertAlmostEqual(outputs[-1], 20.0 * (1 - math.exp(-1)),
                               places=9)
        self.assertGreater(outputs[2], 0.0)

    def test_converges_to_gain(self):
        _, outputs = run_steps(0.5, 200)
        self.assertAlmostEqual(outputs[-1], 10.0, places=6)

    def test_saturation(self):
        fss = FuelSupplyState(K_gain=40.0)
        _, outputs = run_steps(1.0, 200, fss)
        self.assertEqual(outputs[-1], 20.0)
        self.assertLessEqual(max(outputs), 20.0)

    def test_command_clamped(self):
        _, above = run_steps(3.0, 100)
        _, unit = run_steps(1.0, 100)
        self.assertEqual(above, unit)
        _, below = run_steps(-1.0, 20)
        self.assertTrue(all(y == 0.0 for y in below))

    def test_settled_state_is_fixed_point(self):
        fss = FuelSupplyState().settled(0.7, 0.1)
        self.assertAlmostEqual(fss.y, 14.0)
        _, outputs = run_steps(0.7, 30, fss)
        for y in outputs:
            self.assertAlmostEqual(y, 14.0, places=12)

    def test_invalid_parameters(self):
        with self.assertRaises(ConfigurationError):
            FuelSupplyState(tau=0.0)
        with self.assertRaises(ConfigurationError):
            FuelSupplyState(theta=-0.1)
        with self.assertRaises(ConfigurationError):
            fuel_supply_step(1.0, FuelSupplyState(), 0.0)


class TestUnits(unittest.TestCase):

    def test_conversion(self):
        self.assertAlmostEqual(lph_to_kgs(36.0), 0.008)
        self.assertAlmostEqual(kgs_to_lph(lph_to_kgs(12.3)), 12.3)
