import math
import os
import unittest
import numpy as np
from fractions import Fraction
from dynheight.arith import normalize, point_from_affine
from dynheight.description import load_system
from dynheight.errors import OrbitEvaluationError
from dynheight.orbits import (BUDGET_EXCEEDED, MarginReport, TransitionMatrix, Verdict, closed_sub_orbit,
        find_periodic_points, forward_orbit, henon_inequality_check, henon_sample,
        is_f_periodic, orbit_verdict, perron_vector)
from dynheight.systems import HenonSystem, LattesSystem, PolyMapPN, PolynomialSystem

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')

def fixture(name):
    return load_system(os.path.join(FIXTURES, name))

class ForwardOrbitTestCase(unittest.TestCase):
    def setUp(self):
        self.power = fixture('power2.json')
        self.pair = fixture('pair_p1.json')
        # (x : y) -> (y^2 : x^2)
        self.swap = PolynomialSystem([PolyMapPN([[(1, (0, 2))], [(1, (2, 0))]])])

    def test_two_cycle(self):
        report = forward_orbit(self.swap, normalize([[0, 1]]))
        self.assertTrue(report.closed)
        self.assertEqual(report.nodes, [normalize([[0, 1]]), normalize([[1, 0]])])
        self.assertEqual(report.edges, [(0, 0, 1), (1, 0, 0)])
        self.assertEqual(orbit_verdict(report), Verdict.PERIODIC)
        self.assertIsNone(closed_sub_orbit(report))

    def test_preperiodic(self):
        report = forward_orbit(self.power, normalize([[1, -1]]))
        self.assertTrue(report.closed)
        self.assertEqual(len(report.nodes), 2)
        self.assertEqual(orbit_verdict(report), Verdict.NOT_PERIODIC)
        self.assertEqual(closed_sub_orbit(report), [normalize([[1, 1]])])

    def test_node_budget(self):
        report = forward_orbit(self.pair, normalize([[0, 1]]), budget=5)
        self.assertEqual(report.status, BUDGET_EXCEEDED)
        self.assertEqual(report.reason, 'nodes')
        self.assertEqual(len(report.nodes), 5)
        self.assertEqual(is_f_periodic(self.pair, normalize([[0, 1]]), budget=5), Verdict.BUDGET_EXCEEDED)

    def test_digit_budget(self):
        report = forward_orbit(self.pair, normalize([[2, 3]]), digit_budget=8)
        self.assertEqual(report.reason, 'digits')

    def test_height_cutoff(self):
        report = forward_orbit(self.pair, normalize([[2, 3]]), height_cutoff=1.0)
        self.assertEqual(report.reason, 'height')
        self.assertEqual(len(report.nodes), 1)

    def test_threads(self):
        serial = forward_orbit(self.pair, normalize([[0, 1]]), budget=40)
        parallel = forward_orbit(self.pair, normalize([[0, 1]]), budget=40, threads=4)
        self.assertEqual(serial.nodes, parallel.nodes)
        self.assertEqual(serial.edges, parallel.edges)

    def test_evaluation_error(self):
        system = PolynomialSystem([PolyMapPN([[(1, (2, 0))], [(1, (1, 1))]])])
        with self.assertRaises(OrbitEvaluationError) as context:
            forward_orbit(system, normalize([[0, 1]]))
        self.assertEqual(context.exception.node, normalize([[0, 1]]))
        self.assertEqual(context.exception.map_index, 0)

class PeriodicPointsTestCase(unittest.TestCase):
    def test_power_map(self):
        points = find_periodic_points(fixture('power2.json'), math.log(2))
        self.assertEqual(points, [normalize([[0, 1]]), normalize([[1, 0]]), normalize([[1, 1]])])

    def test_representatives(self):
        swap = PolynomialSystem([PolyMapPN([[(1, (0, 2))], [(1, (2, 0))]])])
        points = find_periodic_points(swap, 0)
        self.assertIn(normalize([[0, 1]]), points)
        self.assertNotIn(normalize([[1, 0]]), points)

class TransitionMatrixTestCase(unittest.TestCase):
    def test_from_orbit(self):
        swap = PolynomialSystem([PolyMapPN([[(1, (0, 2))], [(1, (2, 0))]])])
        A = TransitionMatrix.from_orbit(forward_orbit(swap, normalize([[0, 1]])), 1)
        self.assertEqual(A.entries, ((0, 1), (1, 0)))
        self.assertEqual(perron_vector(A), [Fraction(1, 2), Fraction(1, 2)])

    def test_scalar(self):
        self.assertEqual(perron_vector(TransitionMatrix(((2, 0), (0, 2)), 2)), [Fraction(1, 2), Fraction(1, 2)])

    def test_eigenvector(self):
        A = TransitionMatrix(((1, 2), (1, 0)), 2)
        c = perron_vector(A)
        self.assertEqual(c, [Fraction(2, 3), Fraction(1, 3)])
        self.assertEqual([sum(A.entries[i][j] * c[j] for j in range(2)) for i in range(2)],
                         [2 * v for v in c])

    def test_invalid(self):
        with self.assertRaises(ValueError):
            TransitionMatrix(((1, 2), (0, 0)), 2)
        with self.assertRaises(ValueError):
            TransitionMatrix(((1,), (1,)), 2)

class HenonTestCase(unittest.TestCase):
    def setUp(self):
        self.system = HenonSystem(1, 0)

    def test_margin(self):
        report = henon_inequality_check(self.system, [normalize([[1, 2, 1]])])
        self.assertAlmostEqual(report.minimum, math.log(5) - 2.5 * math.log(2))
        self.assertEqual(report.evaluated, 1)

    def test_sample(self):
        points = henon_sample(500, seed=3)
        self.assertEqual(points, henon_sample(500, seed=3))
        report = henon_inequality_check(self.system, points)
        self.assertEqual(report.evaluated + report.skipped, 500)
        self.assertTrue(report.bounded_below)
        self.assertEqual(len(report.buckets), 8)

class PerronVectorTestCase(unittest.TestCase):
    def test_random_matrices(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n, k = int(rng.integers(1, 7)), int(rng.integers(1, 5))
            columns = [rng.multinomial(k, [1 / n] * n) for _ in range(n)]
            A = TransitionMatrix(tuple(tuple(int(columns[j][i]) for j in range(n)) for i in range(n)), k)
            c = perron_vector(A)
            self.assertEqual(sum(c), 1)
            self.assertTrue(all(v >= 0 for v in c))
            self.assertEqual([sum(A.entries[i][j] * c[j] for j in range(n)) for i in range(n)],
                             [k * v for v in c])

    def test_power_iteration(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            k = n + int(rng.integers(0, 5))
            columns = [1 + rng.multinomial(k - n, [1 / n] * n) for _ in range(n)]
            A = TransitionMatrix(tuple(tuple(int(columns[j][i]) for j in range(n)) for i in range(n)), k)
            matrix = np.array(A.entries, dtype=float) / k
            c = np.full(n, 1 / n)
            for _ in range(2000):
                c = matrix @ c
            np.testing.assert_allclose([float(v) for v in perron_vector(A)], c / c.sum(), atol=1e-9)

class FiniteOrbitTestCase(unittest.TestCase):
    def setUp(self):
        self.k3 = fixture('k3_222.json')
        self.origin = point_from_affine([0, 0, 0], (1, 1, 1))

    def test_k3_origin(self):
        report = forward_orbit(self.k3, self.origin)
        self.assertTrue(report.closed)
        self.assertEqual(len(report.nodes), 7)
        self.assertEqual(orbit_verdict(report), Verdict.PERIODIC)
        self.assertEqual(is_f_periodic(self.k3, self.origin), Verdict.PERIODIC)

    def test_every_orbit_point(self):
        nodes = set(forward_orbit(self.k3, self.origin).nodes)
        for y in nodes:
            self.assertEqual(is_f_periodic(self.k3, y), Verdict.PERIODIC)
            self.assertEqual(set(forward_orbit(self.k3, y).nodes), nodes)

    def test_lattes_orbits(self):
        lattes = LattesSystem(0, 1)
        points = find_periodic_points(lattes, math.log(5))
        self.assertEqual(set(points), {normalize([[0, 1]]), normalize([[1, 0]])})
        for x in points:
            for y in forward_orbit(lattes, x).nodes:
                self.assertEqual(is_f_periodic(lattes, y), Verdict.PERIODIC)

    def test_bound_log_five(self):
        power = fixture('power2.json')
        self.assertEqual(find_periodic_points(power, math.log(5)),
                         [normalize([[0, 1]]), normalize([[1, 0]]), normalize([[1, 1]])])
        self.assertEqual(find_periodic_points(fixture('pair_p1.json'), math.log(5)), [normalize([[1, 0]])])

    def test_monotone_in_bound(self):
        swap = PolynomialSystem([PolyMapPN([[(1, (0, 2))], [(1, (2, 0))]])])
        for system in (fixture('power2.json'), LattesSystem(0, 1), swap):
            previous = set()
            for H in range(1, 6):
                current = set(find_periodic_points(system, math.log(H)))
                self.assertLessEqual(previous, current)
                previous = current

class MarginReportTestCase(unittest.TestCase):
    def report(self, upper):
        buckets = [(0.0, 1.0, 5, 0.0, 0.5), (1.0, 2.0, 5, 0.2, 0.6), (2.0, 3.0, 0, None, None),
                   (3.0, 4.0, 5, upper, upper + 0.5), (4.0, 5.0, 5, upper + 0.1, upper + 0.6)]
        return MarginReport(min(0.0, upper), 0.0, buckets, 0, 20)

    def test_upper_half_against_lower_half(self):
        self.assertTrue(self.report(-0.5).bounded_below)
        self.assertTrue(self.report(3.0).bounded_below)
        # the top bucket alone stays above the global minimum here
        self.assertFalse(self.report(-1.5).bounded_below)

    def test_single_bucket(self):
        self.assertTrue(MarginReport(0.0, 0.0, [(0.0, 1.0, 3, 0.0, 0.0)], 0, 3).bounded_below)
        self.assertFalse(MarginReport(0.0, 0.0, [(0.0, 1.0, 0, None, None)], 0, 0).bounded_below)
