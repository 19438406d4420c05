import os
import unittest
import numpy as np
from dynheight.arith import normalize, point_from_affine
from dynheight.description import load_system
from dynheight.errors import ConstructionFailedError, DegenerateFiberError, OffSurfaceError
from dynheight.k3 import K3TrilinearSystem, K3WheelerSystem, build_wheeler_through, k3_involution_step

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')

def affine(*values):
    return point_from_affine(list(values), (1, 1, 1))

class InvolutionStepTestCase(unittest.TestCase):
    def test_second_root(self):
        self.assertEqual(k3_involution_step((1, -3, 2), (1, 1)), (2, 1))
        self.assertEqual(k3_involution_step((1, -3, 2), (2, 1)), (1, 1))

    def test_root_at_infinity(self):
        self.assertEqual(k3_involution_step((0, 1, -2), (1, 0)), (2, 1))

    def test_double_root(self):
        self.assertEqual(k3_involution_step((1, -2, 1), (1, 1)), (1, 1))

    def test_not_a_root(self):
        with self.assertRaises(OffSurfaceError):
            k3_involution_step((1, -3, 2), (3, 1))

    def test_degenerate(self):
        with self.assertRaises(DegenerateFiberError):
            k3_involution_step((0, 0, 0), (1, 1))

class TrilinearTestCase(unittest.TestCase):
    def setUp(self):
        self.system = load_system(os.path.join(FIXTURES, 'k3_222.json'))

    def test_base_points(self):
        self.assertEqual(len(self.system.base_points), 2)
        self.assertTrue(all(self.system.contains(x) for x in self.system.base_points))
        self.assertFalse(self.system.contains(affine(1, 1, 1)))

    def test_origin_images(self):
        origin = affine(0, 0, 0)
        self.assertEqual(self.system.evaluate(0, origin), affine(1, 0, 0))
        self.assertEqual(self.system.evaluate(1, origin), affine(0, 1, 0))
        self.assertEqual(self.system.evaluate(2, origin), affine(0, 0, 1))
        # the fiber over (1, 1) is tangent at z = 0
        self.assertEqual(self.system.evaluate(2, affine(1, 1, 0)), affine(1, 1, 0))

    def test_involutions(self):
        x = self.system.base_points[1]
        for i in range(3):
            y = self.system.evaluate(i, x)
            self.assertTrue(self.system.contains(y))
            self.assertEqual(self.system.evaluate(i, y), x)

    def test_off_surface_base_point(self):
        with self.assertRaises(OffSurfaceError):
            K3TrilinearSystem.from_affine('x*(1-x) + y*(1-y) + z*(1-z) - x*y*z', [affine(1, 1, 1)])

    def test_reducible(self):
        with self.assertRaises(ValueError):
            K3TrilinearSystem.from_affine('x*y')
        with self.assertRaises(ValueError):
            K3TrilinearSystem.from_affine('x**3 + y + z')

    def test_sample_points(self):
        points = self.system.sample_points(np.random.default_rng(1), 20)
        self.assertEqual(len(points), 20)
        self.assertTrue(all(self.system.contains(x) for x in points))

class WheelerTestCase(unittest.TestCase):
    def setUp(self):
        self.point = normalize([[1, 2, 3], [1, -1, 2]])
        self.system = build_wheeler_through(self.point, seed=7)

    def test_construction(self):
        self.assertEqual(self.system.kind, 'k3_wheeler')
        self.assertEqual(self.system.degree, 4.0)
        self.assertEqual(self.system.bidegrees, ((1, 1), (2, 2)))
        self.assertTrue(self.system.contains(self.point))

    def test_involutions(self):
        for i in range(2):
            y = self.system.evaluate(i, self.point)
            self.assertNotEqual(y, self.point)
            self.assertTrue(self.system.contains(y))
            self.assertEqual(y.coords[i], self.point.coords[i])
            self.assertEqual(self.system.evaluate(i, y), self.point)

    def test_form_order(self):
        reordered = K3WheelerSystem(list(reversed(self.system.forms)))
        self.assertEqual(reordered.bidegrees, ((1, 1), (2, 2)))
        self.assertEqual(reordered.describe()['forms'], self.system.describe()['forms'])

    def test_degree_five(self):
        system = build_wheeler_through(self.point, seed=3, bidegrees=((1, 2), (2, 1)))
        self.assertEqual(system.kind, 'k3_12_21')
        self.assertEqual(system.degree, 5.0)
        y = system.evaluate(0, self.point)
        self.assertEqual(system.evaluate(0, y), self.point)

    def test_off_surface(self):
        x = normalize([[1, 0, 0], [0, 0, 1]])
        if not self.system.contains(x):
            with self.assertRaises(OffSurfaceError):
                K3WheelerSystem(self.system.forms, base_points=[x])

class RandomInvolutionTestCase(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def assert_involutions(self, system, x):
        checked = 0
        for i in range(system.k):
            try:
                y = system.evaluate(i, x)
            except DegenerateFiberError:
                continue
            self.assertTrue(system.contains(y))
            self.assertEqual(system.evaluate(i, y), x)
            checked += 1
        return checked

    def test_trilinear_walk(self):
        system = load_system(os.path.join(FIXTURES, 'k3_222.json'))
        points = system.sample_points(self.rng, 200)
        self.assertEqual(len(points), 200)
        self.assertGreater(sum(self.assert_involutions(system, x) for x in points), 400)

    def test_surfaces_through_random_points(self):
        built = 0
        for seed in range(200):
            factors = [[int(c) for c in self.rng.integers(-9, 10, size=3)] for _ in range(2)]
            if not all(any(f) for f in factors):
                continue
            point = normalize(factors)
            try:
                system = build_wheeler_through(point, seed=seed)
            except ConstructionFailedError:
                continue
            self.assertEqual(self.assert_involutions(system, point), 2)
            built += 1
        self.assertGreater(built, 150)
