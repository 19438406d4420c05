"""Module for polynomial dynamical systems over Q

Morphisms of P^N given by homogeneous integer polynomials, the Lattes
duplication map on the x-line of an elliptic curve, Henon maps of the
affine plane, and systems whose maps are words in another system's maps."""
from dynheight import DynamicalSystem
from dynheight.arith import ProjPoint, normalize, normalize_factor
from dynheight.canonical import find_nullstellensatz_certificates
from dynheight.errors import IndeterminatePointError, SingularCurveError

import logging
import math
from fractions import Fraction
from functools import reduce
from sympy import Matrix, Poly, groebner, symbols
from sympy.polys.multivariate_resultants import MacaulayResultant

logger = logging.getLogger(__name__)

def _lcm(values):
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)

class PolyMapPN:
    """Self-map of P^N given by N+1 homogeneous polynomials of equal degree

    Each polynomial is a sparse list of (coefficient, exponents) terms with
    integer coefficients."""

    def __init__(self, polys, morphism=True):
        polys = [tuple((int(c), tuple(int(e) for e in exps)) for c, exps in poly if c != 0)
                 for poly in polys]
        self.N = len(polys) - 1
        degrees = {sum(exps) for poly in polys for _, exps in poly}
        if len(degrees) != 1:
            raise ValueError('polynomials are not homogeneous of a common degree: {}'.format(sorted(degrees)))
        for poly in polys:
            for _, exps in poly:
                if len(exps) != self.N + 1:
                    raise ValueError('monomial {} has the wrong number of variables'.format(exps))
        self.polys = tuple(polys)
        self.degree = degrees.pop()
        self.morphism = morphism

    @classmethod
    def from_rational(cls, polys, morphism=True):
        """Build from rational coefficients by clearing a common denominator"""
        polys = [[(Fraction(c), exps) for c, exps in poly] for poly in polys]
        denominator = _lcm(c.denominator for poly in polys for c, _ in poly)
        return cls([[(int(c * denominator), exps) for c, exps in poly] for poly in polys],
                   morphism=morphism)

    def apply(self, lift):
        """Image of an integer lift, without normalization"""
        powers = [[1] for _ in lift]
        for v, power in zip(lift, powers):
            for _ in range(self.degree):
                power.append(power[-1] * v)
        image = []
        for poly in self.polys:
            total = 0
            for c, exps in poly:
                term = c
                for power, e in zip(powers, exps):
                    term *= power[e]
                total += term
            image.append(total)
        return tuple(image)

    def coefficient(self, j, exps):
        return sum(c for c, e in self.polys[j] if e == tuple(exps))

    def coefficient_norms(self):
        """l^1 norm of the coefficient vector of each polynomial"""
        return [sum(abs(c) for c, _ in poly) for poly in self.polys]

    def as_sympy(self, gens):
        exprs = []
        for poly in self.polys:
            expr = 0
            for c, exps in poly:
                term = c
                for g, e in zip(gens, exps):
                    term = term * g**e
                expr += term
            exprs.append(expr)
        return exprs

    def describe(self):
        description = {'polys': [[{'c': str(c), 'e': list(exps)} for c, exps in poly]
                                 for poly in self.polys]}
        if not self.morphism:
            description['morphism'] = False
        return description

    def __eq__(self, other):
        return isinstance(other, PolyMapPN) and \
            [sorted(p) for p in self.polys] == [sorted(p) for p in other.polys]

    def __hash__(self):
        return hash(tuple(tuple(sorted(p)) for p in self.polys))

def power_map(N, p):
    """Coordinate-wise p-th power map of P^N (multiplication by p on the torus)"""
    polys = []
    for i in range(N + 1):
        exps = [0] * (N + 1)
        exps[i] = p
        polys.append([(1, tuple(exps))])
    return PolyMapPN(polys)

def lattes_duplication(a, b):
    """Duplication map x(P) -> x(2P) of y^2 = x^3 + ax + b on the x-line P^1"""
    a, b = Fraction(a), Fraction(b)
    if 4 * a**3 + 27 * b**2 == 0:
        raise SingularCurveError('y^2 = x^3 + ({})x + ({}) is singular'.format(a, b))
    numerator = [(1, (4, 0)), (-2 * a, (2, 2)), (-8 * b, (1, 3)), (a * a, (0, 4))]
    denominator = [(4, (3, 1)), (4 * a, (1, 3)), (4 * b, (0, 4))]
    return PolyMapPN.from_rational([numerator, denominator])

def _sylvester_resultant(f):
    """Resultant of two binary forms of the same degree"""
    delta = f.degree
    rows = []
    for j in range(2):
        coefficients = [f.coefficient(j, (delta - i, i)) for i in range(delta + 1)]
        for shift in range(delta):
            rows.append([0] * shift + coefficients + [0] * (delta - 1 - shift))
    return Matrix(rows).det()

def _groebner_has_only_trivial_zero(exprs, gens):
    """Whether the homogeneous ideal contains a power of every variable"""
    basis = groebner(exprs, *gens, order='grevlex')
    pure = set()
    for g in basis.exprs:
        leading = Poly(g, *gens).monoms(order='grevlex')[0]
        support = [i for i, e in enumerate(leading) if e]
        if len(support) == 1:
            pure.add(support[0])
    return len(pure) == len(gens)

def check_morphism(f):
    """Whether 0 is the only common zero of the polynomials of f

    Returns True or False, or None when the certificate search of higher
    dimensional spaces reaches its degree cap."""
    if f.N == 1:
        return _sylvester_resultant(f) != 0
    if f.N == 2:
        gens = symbols('x0:3')
        exprs = f.as_sympy(gens)
        if any(e == 0 for e in exprs):
            return False
        macaulay = MacaulayResultant(exprs, list(gens))
        matrix = macaulay.get_matrix()
        if matrix.det() != 0:
            return True
        if macaulay.get_submatrix(matrix).det() != 0:
            return False
        # the extraneous factor vanishes, so the quotient is undetermined
        logger.debug('Macaulay extraneous factor vanishes, using a Groebner basis')
        return _groebner_has_only_trivial_zero(exprs, gens)
    certificates = find_nullstellensatz_certificates(f)
    if certificates is None:
        return None
    return True

class PolynomialSystem(DynamicalSystem):
    """Dynamical system of polynomial morphisms of P^N

    The degree of the system is the sum of the degrees of its maps."""

    def __init__(self, maps, weight=1.0):
        if not maps:
            raise ValueError('a system needs at least one map')
        N = {f.N for f in maps}
        if len(N) != 1:
            raise ValueError('maps act on projective spaces of different dimension')
        self.poly_maps = tuple(maps)
        self.k = len(maps)
        self.degree = float(sum(f.degree for f in maps))
        self.dims = (N.pop(),)
        self.weights = (float(weight),)
        if self.degree <= self.k:
            raise ValueError('degree {} does not exceed the number of maps {}'.format(self.degree, self.k))

    def apply_lift(self, i, lift):
        image = self.poly_maps[i].apply(lift)
        if not any(image):
            raise IndeterminatePointError('map {} vanishes at {}'.format(i, lift))
        return image

    def evaluate(self, i, x):
        return ProjPoint((normalize_factor(self.apply_lift(i, x.coords[0])),))

    def sample_points(self, rng, count, around=()):
        points = list(around)
        n = self.dims[0] + 1
        while len(points) < count:
            vector = [int(v) for v in rng.integers(-50, 51, size=n)]
            if any(vector):
                points.append(normalize([vector]))
        return points[:count]

    def describe(self):
        return {'type': 'poly_pn', 'dimension': self.dims[0],
                'maps': [f.describe() for f in self.poly_maps],
                'weights': list(self.weights)}

class LattesSystem(PolynomialSystem):
    """Lattes map of P^1 descending from duplication on y^2 = x^3 + ax + b"""

    def __init__(self, a, b, weight=1.0):
        self.a, self.b = Fraction(a), Fraction(b)
        super().__init__([lattes_duplication(self.a, self.b)], weight=weight)

    def describe(self):
        return {'type': 'lattes', 'a': str(self.a), 'b': str(self.b),
                'weights': list(self.weights)}

class HenonSystem(DynamicalSystem):
    """Henon map phi(x, y) = (y, y^2 + b + ax) together with its inverse

    The state space is the affine plane inside P^2, with the naive height of
    (x : y : 1).  The pair only satisfies
    h(phi x) + h(phi^-1 x) >= 5/2 h(x) - O(1), so it is registered as an
    inequality-only system of degree 5/2."""
    k = 2
    degree = 2.5
    dims = (2,)
    weights = (1.0,)
    line_bundle = False

    def __init__(self, a, b):
        self.a, self.b = Fraction(a), Fraction(b)
        if self.a == 0:
            raise ValueError('a Henon map needs a != 0')

    def contains(self, x):
        return x.dims == self.dims and x.coords[0][2] != 0

    def evaluate(self, i, x):
        if not self.contains(x):
            raise IndeterminatePointError('{} lies on the line at infinity'.format(x))
        (X, Y), = x.affine()
        if i == 0:
            image = (Y, Y * Y + self.b + self.a * X)
        elif i == 1:
            image = ((Y - self.b - X * X) / self.a, X)
        else:
            raise IndexError('Henon systems have two maps')
        return normalize([[image[0], image[1], 1]])

    def closure_maps(self):
        """Birational extensions of phi and phi^-1 to P^2"""
        a, b = self.a, self.b
        phi = PolyMapPN.from_rational([
            [(1, (0, 1, 1))],
            [(1, (0, 2, 0)), (b, (0, 0, 2)), (a, (1, 0, 1))],
            [(1, (0, 0, 2))]], morphism=False)
        phi_inverse = PolyMapPN.from_rational([
            [(1, (0, 1, 1)), (-b, (0, 0, 2)), (-1, (2, 0, 0))],
            [(a, (1, 0, 1))],
            [(a, (0, 0, 2))]], morphism=False)
        return [phi, phi_inverse]

    def sample_points(self, rng, count, around=()):
        points = list(around)
        while len(points) < count:
            x, y = (Fraction(int(rng.integers(-100, 101)), int(rng.integers(1, 101))) for _ in range(2))
            points.append(normalize([[x, y, 1]]))
        return points[:count]

    def describe(self):
        return {'type': 'henon', 'a': str(self.a), 'b': str(self.b)}

class CompositeSystem(DynamicalSystem):
    """System whose maps are words in the maps of a base system

    A word (i_1, ..., i_r) applies f_{i_1} first.  The height functional and
    the degree are given explicitly, which allows real line bundles such as
    (2 + sqrt 3) L_1 - L_2."""

    def __init__(self, base, words, weights, degree):
        self.base = base
        self.words = tuple(tuple(word) for word in words)
        self.k = len(self.words)
        self.degree = float(degree)
        self.dims = base.dims
        self.weights = tuple(float(r) for r in weights)
        if self.degree <= self.k:
            raise ValueError('degree {} does not exceed the number of maps {}'.format(self.degree, self.k))

    @property
    def base_points(self):
        return self.base.base_points

    def contains(self, x):
        return self.base.contains(x)

    def evaluate(self, i, x):
        for j in self.words[i]:
            x = self.base.evaluate(j, x)
        return x

    def sample_points(self, rng, count, around=()):
        return self.base.sample_points(rng, count, around=around)

    def describe(self):
        return {'type': 'composite', 'base': self.base.describe(),
                'words': [list(w) for w in self.words],
                'weights': list(self.weights), 'degree': self.degree}
