import math
import unittest
from fractions import Fraction
from dynheight.arith import normalize
from dynheight.orbits import henon_sample
from dynheight.errors import IndeterminatePointError, SingularCurveError
from dynheight.systems import (CompositeSystem, HenonSystem, LattesSystem, PolyMapPN,
        PolynomialSystem, check_morphism, lattes_duplication, power_map)

def binary(*polys):
    """Map of P^1 from lists of (coefficient, (e0, e1)) terms"""
    return PolyMapPN([list(poly) for poly in polys])

class PolyMapTestCase(unittest.TestCase):
    def test_apply(self):
        f = binary([(1, (2, 0)), (1, (0, 2))], [(1, (0, 2))])
        self.assertEqual(f.apply((2, 3)), (13, 9))
        self.assertEqual(f.degree, 2)
        self.assertEqual(f.coefficient_norms(), [2, 1])

    def test_not_homogeneous(self):
        with self.assertRaises(ValueError):
            binary([(1, (2, 0))], [(1, (0, 1))])

    def test_from_rational(self):
        f = PolyMapPN.from_rational([[(Fraction(1, 2), (1, 0))], [(Fraction(1, 3), (0, 1))]])
        self.assertEqual(f.apply((1, 1)), (3, 2))

    def test_equality(self):
        self.assertEqual(power_map(1, 2), binary([(1, (2, 0))], [(1, (0, 2))]))
        self.assertNotEqual(power_map(1, 2), power_map(1, 3))

class MorphismTestCase(unittest.TestCase):
    def test_projective_line(self):
        self.assertTrue(check_morphism(power_map(1, 3)))
        self.assertFalse(check_morphism(binary([(1, (2, 0))], [(1, (1, 1))])))

    def test_projective_plane(self):
        self.assertTrue(check_morphism(power_map(2, 2)))
        f = PolyMapPN([[(1, (2, 0, 0))], [(1, (0, 2, 0))], [(1, (1, 1, 0))]])
        self.assertFalse(check_morphism(f))

    def test_lattes(self):
        self.assertTrue(check_morphism(lattes_duplication(0, 1)))

class LattesTestCase(unittest.TestCase):
    def setUp(self):
        self.system = LattesSystem(0, 1)

    def test_duplication(self):
        # 2 (2, 3) = (0, 1) on y^2 = x^3 + 1
        self.assertEqual(self.system.evaluate(0, normalize([[2, 1]])), normalize([[0, 1]]))
        # the point at infinity is fixed
        self.assertEqual(self.system.evaluate(0, normalize([[1, 0]])), normalize([[1, 0]]))

    def test_torsion_point(self):
        # (-1, 0) has order two
        self.assertEqual(self.system.evaluate(0, normalize([[-1, 1]])), normalize([[1, 0]]))

    def test_singular(self):
        with self.assertRaises(SingularCurveError):
            LattesSystem(-3, 2)

    def test_degree(self):
        self.assertEqual((self.system.k, self.system.degree), (1, 4.0))

class PolynomialSystemTestCase(unittest.TestCase):
    def test_degree_must_exceed_map_count(self):
        with self.assertRaises(ValueError):
            PolynomialSystem([power_map(1, 1)])
        with self.assertRaises(ValueError):
            PolynomialSystem([power_map(1, 2), power_map(2, 2)])

    def test_indeterminacy(self):
        system = PolynomialSystem([binary([(1, (2, 0))], [(1, (1, 1))])])
        with self.assertRaises(IndeterminatePointError):
            system.evaluate(0, normalize([[0, 1]]))

    def test_height(self):
        system = PolynomialSystem([power_map(1, 2)], weight=2.0)
        self.assertAlmostEqual(system.height(normalize([[2, 3]])), 2 * math.log(3))

    def test_fingerprint(self):
        first = PolynomialSystem([power_map(1, 2)])
        second = PolynomialSystem([power_map(1, 2)])
        self.assertEqual(first.fingerprint(), second.fingerprint())
        self.assertEqual(len(first.fingerprint()), 32)
        self.assertNotEqual(first.fingerprint(), PolynomialSystem([power_map(1, 3)]).fingerprint())

class HenonTestCase(unittest.TestCase):
    def setUp(self):
        self.system = HenonSystem(1, 0)

    def test_inverse(self):
        x = normalize([[1, 2, 1]])
        y = self.system.evaluate(0, x)
        self.assertEqual(y, normalize([[2, 5, 1]]))
        self.assertEqual(self.system.evaluate(1, y), x)

    def test_line_at_infinity(self):
        self.assertFalse(self.system.contains(normalize([[1, 0, 0]])))
        with self.assertRaises(IndeterminatePointError):
            self.system.evaluate(0, normalize([[1, 0, 0]]))

    def test_not_a_line_bundle(self):
        self.assertFalse(self.system.line_bundle)
        self.assertEqual(self.system.degree, 2.5)

    def test_closure_maps(self):
        phi, phi_inverse = self.system.closure_maps()
        self.assertEqual(normalize([phi.apply((1, 2, 1))]), normalize([[2, 5, 1]]))
        self.assertEqual(normalize([phi_inverse.apply((2, 5, 1))]), normalize([[1, 2, 1]]))

class CompositeTestCase(unittest.TestCase):
    def test_words(self):
        base = PolynomialSystem([power_map(1, 2), binary([(1, (2, 0)), (1, (0, 2))], [(1, (0, 2))])])
        system = CompositeSystem(base, [(0, 1), (1,)], (1.0,), 8)
        x = normalize([[2, 1]])
        self.assertEqual(system.evaluate(0, x), normalize([[17, 1]]))
        self.assertEqual(system.evaluate(1, x), normalize([[5, 1]]))
        self.assertEqual(system.describe()['words'], [[0, 1], [1]])

def chord(P, Q, a):
    """Sum of two affine points of y^2 = x^3 + ax + b, None when it is the point at infinity"""
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2:
        if y1 + y2 == 0:
            return None
        slope = (3 * x1 * x1 + a) / (2 * y1)
    else:
        slope = (y2 - y1) / (x2 - x1)
    x3 = slope * slope - x1 - x2
    return x3, slope * (x1 - x3) - y1

class GroupLawTestCase(unittest.TestCase):
    def setUp(self):
        # (3, 5) has infinite order on y^2 = x^3 - 2
        self.system = LattesSystem(0, -2)
        P = (Fraction(3), Fraction(5))
        self.multiples = [None, P]
        for _ in range(99):
            self.multiples.append(chord(self.multiples[-1], P, 0))

    def test_duplication_matches_tangent(self):
        for Q in self.multiples[1:]:
            double = chord(Q, Q, 0)
            self.assertEqual(self.system.evaluate(0, normalize([[Q[0], 1]])), normalize([[double[0], 1]]))

    def test_duplication_matches_multiples(self):
        for n in range(1, 51):
            x = normalize([[self.multiples[n][0], 1]])
            self.assertEqual(self.system.evaluate(0, x), normalize([[self.multiples[2 * n][0], 1]]))

class HenonInverseTestCase(unittest.TestCase):
    def setUp(self):
        self.system = HenonSystem(Fraction(-3, 2), 2)

    def test_inverse_on_sample(self):
        for x in henon_sample(500, bound=40, seed=5, denominator_bound=7):
            self.assertEqual(self.system.evaluate(1, self.system.evaluate(0, x)), x)
            self.assertEqual(self.system.evaluate(0, self.system.evaluate(1, x)), x)

    def test_closure_maps_not_morphisms(self):
        for f in self.system.closure_maps():
            self.assertFalse(check_morphism(f))
