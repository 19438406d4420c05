"""Module for K3 surfaces with involutions from double covers

Each involution swaps the two points of a fiber of a degree-two
projection, computed exactly by the residual-intersection step on a binary
quadratic form."""
from dynheight import DynamicalSystem
from dynheight.arith import ProjPoint, normalize_factor
from dynheight.config import RETRY_CAP, SAMPLE_WALK_DEPTH
from dynheight.errors import (ConstructionFailedError, DegenerateFiberError,
        DynHeightError, OffSurfaceError)

import itertools
import logging
import math
import numpy as np
from fractions import Fraction
from sympy import Poly, symbols, sympify

logger = logging.getLogger(__name__)

def k3_involution_step(form, root):
    """Second root of A u^2 + B uv + C v^2 given one root (u0 : v0)

    A double root is returned unchanged."""
    A, B, C = form
    u0, v0 = root
    if A == 0 and B == 0 and C == 0:
        raise DegenerateFiberError('the fiber form vanishes identically')
    if A * u0 * u0 + B * u0 * v0 + C * v0 * v0 != 0:
        raise OffSurfaceError('({}:{}) is not a root of {}'.format(u0, v0, form))
    if v0 != 0:
        other = (-(B * v0 + A * u0), A * v0)
    else:
        other = (-C, B)
    return normalize_factor(other)

def _monomials(n, degree):
    """Exponent vectors of the monomials of a given degree in n variables"""
    return [e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) == degree]

def _monomial_value(values, exps):
    result = 1
    for v, e in zip(values, exps):
        if e:
            result *= v**e
    return result

def _walk_sample(system, starts, rng, count, depth=SAMPLE_WALK_DEPTH):
    """Points reached by random words of bounded length from the start points"""
    starts = [x for x in starts if system.contains(x)]
    if not starts:
        raise ValueError('no start point on the surface to sample from')
    points = []
    attempts = 0
    while len(points) < count and attempts < 20 * count:
        attempts += 1
        x = starts[int(rng.integers(len(starts)))]
        previous = None
        try:
            for _ in range(int(rng.integers(depth + 1))):
                i = int(rng.integers(system.k))
                if i == previous:
                    i = (i + 1) % system.k
                x = system.evaluate(i, x)
                previous = i
        except DynHeightError:
            continue
        points.append(x)
    return points

class K3TrilinearSystem(DynamicalSystem):
    """K3 surface of tridegree (2,2,2) in P^1 x P^1 x P^1 with its three involutions

    Coefficients are keyed by (a, b, c), the degrees in u of the monomial
    u_1^a v_1^(2-a) u_2^b v_2^(2-b) u_3^c v_3^(2-c), where x_i = u_i / v_i."""
    k = 3
    degree = 5.0
    dims = (1, 1, 1)

    def __init__(self, coefficients, base_points=(), weights=(1.0, 1.0, 1.0)):
        self.coefficients = {tuple(key): int(c) for key, c in coefficients.items() if c != 0}
        if not self.coefficients:
            raise ValueError('the defining form is zero')
        for key in self.coefficients:
            if len(key) != 3 or not all(0 <= e <= 2 for e in key):
                raise ValueError('{} is not a (2,2,2) monomial'.format(key))
        self.base_points = tuple(base_points)
        self.weights = tuple(float(r) for r in weights)
        for x in self.base_points:
            if not self.contains(x):
                raise OffSurfaceError('base point {} is not on the surface'.format(x))

    @classmethod
    def from_affine(cls, equation, base_points=(), weights=(1.0, 1.0, 1.0)):
        """Surface from an affine equation in x, y, z"""
        gens = symbols('x y z')
        poly = Poly(sympify(equation), *gens)
        factors = [] if poly.is_zero else poly.factor_list()[1]
        if len(factors) != 1 or factors[0][1] != 1:
            raise ValueError('{} is not irreducible over Q'.format(equation))
        terms = [(Fraction(int(c.p), int(c.q)), exps) for exps, c in poly.terms()]
        if any(e > 2 for _, exps in terms for e in exps):
            raise ValueError('{} has degree > 2 in some variable'.format(equation))
        denominator = 1
        for c, _ in terms:
            denominator = denominator * c.denominator // math.gcd(denominator, c.denominator)
        return cls({exps: int(c * denominator) for c, exps in terms},
                   base_points=base_points, weights=weights)

    def _factor_monomial(self, factor, e):
        u, v = factor
        return u**e * v**(2 - e)

    def value(self, x):
        return sum(c * self._factor_monomial(x.coords[0], a)
                   * self._factor_monomial(x.coords[1], b)
                   * self._factor_monomial(x.coords[2], e)
                   for (a, b, e), c in self.coefficients.items())

    def contains(self, x):
        return x.dims == self.dims and self.value(x) == 0

    def fiber_form(self, i, x):
        """Binary quadratic in the i-th factor with the other two fixed at x"""
        form = [0, 0, 0]
        others = [j for j in range(3) if j != i]
        for key, c in self.coefficients.items():
            weight = c
            for j in others:
                weight *= self._factor_monomial(x.coords[j], key[j])
            form[2 - key[i]] += weight
        return tuple(form)

    def evaluate(self, i, x):
        factor = k3_involution_step(self.fiber_form(i, x), x.coords[i])
        coords = list(x.coords)
        coords[i] = factor
        return ProjPoint(tuple(coords))

    def sample_points(self, rng, count, around=()):
        return _walk_sample(self, list(self.base_points) + list(around), rng, count)

    def affine_equation(self):
        x, y, z = symbols('x y z')
        expr = sum(c * x**a * y**b * z**e for (a, b, e), c in self.coefficients.items())
        return str(expr)

    def describe(self):
        return {'type': 'k3_222', 'equation': self.affine_equation(),
                'base_points': [str(x) for x in self.base_points],
                'weights': list(self.weights)}

def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])

def _proportional(a, b):
    return _cross(a, b) == (0, 0, 0)

class K3WheelerSystem(DynamicalSystem):
    """K3 surface in P^2 x P^2 cut out by two forms, with its two involutions

    Bidegrees (1,1) and (2,2) give Wheeler's surfaces (degree 4); bidegrees
    (1,2) and (2,1) give degree 5.  Forms are dicts {(ex, ey): coefficient}
    with exponent triples ex, ey."""
    k = 2
    dims = (2, 2)
    DEGREES = {((1, 1), (2, 2)): 4.0, ((1, 2), (2, 1)): 5.0}

    def __init__(self, forms, base_points=(), weights=(1.0, 1.0)):
        self.forms = tuple({(tuple(ex), tuple(ey)): int(c) for (ex, ey), c in form.items() if c != 0}
                           for form in forms)
        if len(self.forms) != 2 or not all(self.forms):
            raise ValueError('two nonzero forms are required')
        bidegrees = []
        for form in self.forms:
            degrees = {(sum(ex), sum(ey)) for ex, ey in form}
            if len(degrees) != 1:
                raise ValueError('form is not bihomogeneous: {}'.format(sorted(degrees)))
            bidegrees.append(degrees.pop())
        order = sorted(range(2), key=lambda j: bidegrees[j])
        self.forms = tuple(self.forms[j] for j in order)
        self.bidegrees = tuple(bidegrees[j] for j in order)
        if self.bidegrees not in self.DEGREES:
            raise ValueError('unsupported bidegrees {}'.format(self.bidegrees))
        self.degree = self.DEGREES[self.bidegrees]
        self.weights = tuple(float(r) for r in weights)
        self.base_points = tuple(base_points)
        for x in self.base_points:
            if not self.contains(x):
                raise OffSurfaceError('base point {} is not on the surface'.format(x))

    @property
    def kind(self):
        return 'k3_wheeler' if self.degree == 4.0 else 'k3_12_21'

    @staticmethod
    def form_value(form, x, y):
        return sum(c * _monomial_value(x, ex) * _monomial_value(y, ey) for (ex, ey), c in form.items())

    def contains(self, x):
        return x.dims == self.dims and \
            all(self.form_value(form, x.coords[0], x.coords[1]) == 0 for form in self.forms)

    def _fiber(self, moving):
        """The forms of degree one and two in the moving factor"""
        degree_in_moving = [bidegree[moving] for bidegree in self.bidegrees]
        line = self.forms[degree_in_moving.index(1)]
        conic = self.forms[degree_in_moving.index(2)]
        return line, conic

    def evaluate(self, i, x):
        """sigma_1 (i = 0) fixes the first factor, sigma_2 (i = 1) the second"""
        moving = 1 - i
        fixed = x.coords[i]
        line, conic = self._fiber(moving)

        def restrict(form, w):
            if moving == 1:
                return self.form_value(form, fixed, w)
            return self.form_value(form, w, fixed)

        p0 = x.coords[moving]
        ell = tuple(restrict(line, e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        if not any(ell):
            raise DegenerateFiberError('the fiber over {} is a whole plane'.format(fixed))
        if restrict(line, p0) != 0 or restrict(conic, p0) != 0:
            raise OffSurfaceError('{} is not on the surface'.format(x))
        for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            w = _cross(ell, e)
            if any(w) and not _proportional(w, p0):
                break
        C = restrict(conic, w)
        B = restrict(conic, tuple(a + b for a, b in zip(p0, w))) - C
        s, t = k3_involution_step((0, B, C), (1, 0))
        image = normalize_factor([s * a + t * b for a, b in zip(p0, w)])
        coords = list(x.coords)
        coords[moving] = image
        return ProjPoint(tuple(coords))

    def sample_points(self, rng, count, around=()):
        return _walk_sample(self, list(self.base_points) + list(around), rng, count)

    def describe(self):
        return {'type': self.kind,
                'forms': [[{'c': str(c), 'ex': list(ex), 'ey': list(ey)}
                           for (ex, ey), c in sorted(form.items())] for form in self.forms],
                'base_points': [str(x) for x in self.base_points],
                'weights': list(self.weights)}

def _random_form_through(rng, point, bidegree):
    """Random small-coefficient form of the given bidegree vanishing at point"""
    monomials = [(ex, ey) for ex in _monomials(3, bidegree[0]) for ey in _monomials(3, bidegree[1])]
    coefficients = [int(c) for c in rng.integers(-3, 4, size=len(monomials))]
    values = [_monomial_value(point.coords[0], ex) * _monomial_value(point.coords[1], ey)
              for ex, ey in monomials]
    candidates = [j for j, v in enumerate(values) if v != 0]
    pivot = candidates[int(rng.integers(len(candidates)))]
    rest = sum(c * v for j, (c, v) in enumerate(zip(coefficients, values)) if j != pivot)
    coefficients = [c * values[pivot] for c in coefficients]
    coefficients[pivot] = -rest
    return {m: c for m, c in zip(monomials, coefficients) if c != 0}

def build_wheeler_through(point, seed, bidegrees=((1, 1), (2, 2)), retry_cap=RETRY_CAP):
    """Random K3 surface of the given bidegrees through a point of P^2 x P^2

    Retries until both involutions are defined at the point."""
    rng = np.random.default_rng(seed)
    for attempt in range(retry_cap):
        forms = [_random_form_through(rng, point, bidegree) for bidegree in bidegrees]
        if not all(forms):
            continue
        try:
            system = K3WheelerSystem(forms, base_points=(point,))
            for i in range(2):
                image = system.evaluate(i, point)
                if image == point:
                    raise DegenerateFiberError('{} is fixed by sigma_{}'.format(point, i + 1))
        except (DynHeightError, ValueError) as e:
            logger.debug('attempt %d rejected: %s', attempt, e)
            continue
        return system
    raise ConstructionFailedError('no surface through {} after {} attempts'.format(point, retry_cap))
