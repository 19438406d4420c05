import math
import os
import unittest
import numpy as np
from dynheight.arith import INFINITY, Place, normalize
from dynheight.canonical import canonical_height
from dynheight.description import load_system
from dynheight.errors import DomainNotClosedError
from dynheight.local import (contributing_places, decompose_height, local_discrepancy_bound,
        local_green, s_operator_fixed_point)
from dynheight.systems import PolyMapPN, PolynomialSystem

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')

def newton():
    """(x^2 + y^2 : 2xy), whose certificates need the denominator 2"""
    return PolynomialSystem([PolyMapPN([[(1, (2, 0)), (1, (0, 2))], [(2, (1, 1))]])])

class PlacesTestCase(unittest.TestCase):
    def test_no_denominators(self):
        system = load_system(os.path.join(FIXTURES, 'pair_p1.json'))
        self.assertEqual(contributing_places(system), [INFINITY])

    def test_denominator(self):
        self.assertEqual(contributing_places(newton()), [INFINITY, Place.finite(2)])

    def test_bounds(self):
        C, certified = local_discrepancy_bound(newton(), INFINITY)
        self.assertTrue(certified)
        self.assertAlmostEqual(C, math.log(2))
        C, certified = local_discrepancy_bound(newton(), Place.finite(2))
        self.assertAlmostEqual(C, math.log(2))
        C, _ = local_discrepancy_bound(newton(), Place.finite(3))
        self.assertEqual(C, 0)

class LocalGreenTestCase(unittest.TestCase):
    def setUp(self):
        self.power = load_system(os.path.join(FIXTURES, 'power2.json'))

    def test_power_map(self):
        estimate = local_green(self.power, (2, 3), INFINITY)
        self.assertAlmostEqual(estimate.value, math.log(3))
        self.assertTrue(estimate.certified)

    def test_scaling(self):
        for place, factor in ((INFINITY, math.log(2)), (Place.finite(2), -math.log(2)), (Place.finite(3), 0.0)):
            base = local_green(self.power, (2, 3), place).value
            scaled = local_green(self.power, (4, 6), place).value
            self.assertAlmostEqual(scaled, base + factor)

    def test_fixed_point(self):
        system = newton()
        self.assertAlmostEqual(local_green(system, (1, 1), INFINITY).value, math.log(2))
        self.assertAlmostEqual(local_green(system, (1, 1), Place.finite(2)).value, -math.log(2))

    def test_requires_polynomial_system(self):
        k3 = load_system(os.path.join(FIXTURES, 'k3_222.json'))
        with self.assertRaises(ValueError):
            local_green(k3, (0, 1), INFINITY)

class DecompositionTestCase(unittest.TestCase):
    def test_sum_of_local_heights(self):
        system = newton()
        x = normalize([[1, 2]])
        decomposition = decompose_height(system, x, 1e-4)
        self.assertEqual(sorted(decomposition.local, key=lambda v: v.sort_key()), [INFINITY, Place.finite(2)])
        height = canonical_height(system, x, 1e-4)
        self.assertAlmostEqual(decomposition.total, height.value,
                               delta=decomposition.error_radius + height.error_radius + 1e-9)

    def test_threads(self):
        system = newton()
        x = normalize([[1, 2]])
        serial = decompose_height(system, x, 1e-3)
        parallel = decompose_height(system, x, 1e-3, threads=2)
        self.assertEqual(serial.as_dict(), parallel.as_dict())

    def test_fixed_point_sums_to_zero(self):
        decomposition = decompose_height(newton(), normalize([[1, 1]]), 1e-6)
        self.assertAlmostEqual(decomposition.total, 0.0)

class SOperatorTestCase(unittest.TestCase):
    def setUp(self):
        self.images = {'a': ['b'], 'b': ['a']}
        self.gamma = {'a': 1.0, 'b': 0.0}

    def test_two_cycle(self):
        solution = s_operator_fixed_point(['a', 'b'], self.images, self.gamma, 2)
        self.assertAlmostEqual(solution.exact['a'], -2 / 3)
        self.assertAlmostEqual(solution.exact['b'], -1 / 3)
        self.assertAlmostEqual(solution.iterated['a'], -2 / 3, places=11)
        self.assertEqual(solution.contraction_violations, 0)
        self.assertTrue(solution.sup_bound_holds)

    def test_not_closed(self):
        with self.assertRaises(DomainNotClosedError):
            s_operator_fixed_point(['a'], {'a': ['b']}, {'a': 1.0}, 2)

    def test_degree(self):
        with self.assertRaises(ValueError):
            s_operator_fixed_point(['a', 'b'], self.images, self.gamma, 1)

    def test_random_closed_systems(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n, k = int(rng.integers(1, 9)), int(rng.integers(1, 4))
            d = k + int(rng.integers(1, 4))
            domain = list(range(n))
            images = {x: [int(z) for z in rng.integers(0, n, size=k)] for x in domain}
            gamma = {x: float(rng.uniform(-1, 1)) for x in domain}
            solution = s_operator_fixed_point(domain, images, gamma, d)
            for x in domain:
                self.assertAlmostEqual(solution.exact[x], solution.iterated[x], delta=1e-10)
            self.assertTrue(solution.sup_bound_holds)
            self.assertEqual(solution.contraction_violations, 0)

    def test_initial_values(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n, k = int(rng.integers(1, 9)), int(rng.integers(1, 4))
            d = k + int(rng.integers(1, 4))
            domain = list(range(n))
            images = {x: [int(z) for z in rng.integers(0, n, size=k)] for x in domain}
            gamma = {x: float(rng.uniform(-1, 1)) for x in domain}
            start = {x: float(rng.uniform(-10, 10)) for x in domain}
            zero = s_operator_fixed_point(domain, images, gamma, d)
            other = s_operator_fixed_point(domain, images, gamma, d, initial=start)
            for x in domain:
                self.assertAlmostEqual(zero.iterated[x], other.iterated[x], delta=1e-11)
            self.assertEqual(other.contraction_violations, 0)

class RandomDecompositionTestCase(unittest.TestCase):
    def test_random_points(self):
        system = newton()
        for x in system.sample_points(np.random.default_rng(19), 20):
            decomposition = decompose_height(system, x, 1e-4)
            height = canonical_height(system, x, 1e-4)
            self.assertAlmostEqual(decomposition.total, height.value,
                                   delta=decomposition.error_radius + height.error_radius + 1e-9)
