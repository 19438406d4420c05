"""Module for exact arithmetic on rational points

Points of products of projective spaces over Q are kept as coprime integer
vectors whose first nonzero entry is positive.  Heights are natural
logarithms of exact integers."""
from dynheight.errors import DegeneratePointError

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from sympy import isprime, multiplicity

def log_abs(n):
    """log |n| for a nonzero integer or Fraction

    math.log splits big integers into exponent and mantissa, so the result
    has full double accuracy for any size."""
    if isinstance(n, Fraction):
        return math.log(abs(n.numerator)) - math.log(n.denominator)
    return math.log(abs(n))

@dataclass(frozen=True)
class ProjPoint:
    """A point of P^N1 x ... x P^Nm over Q in canonical coordinates

    Build points with normalize(); the constructor checks signs but not
    coprimality, which normalize() guarantees."""
    coords: tuple

    def __post_init__(self):
        for factor in self.coords:
            if not any(factor):
                raise DegeneratePointError('factor {} is zero'.format(factor))
            if next(c for c in factor if c != 0) < 0:
                raise ValueError('factor {} is not sign normalized'.format(factor))

    @property
    def dims(self):
        return tuple(len(factor) - 1 for factor in self.coords)

    def factor(self, j):
        return self.coords[j]

    def sort_key(self):
        return (tuple(max(abs(c) for c in factor) for factor in self.coords), self.coords)

    def max_bits(self):
        return max(abs(c).bit_length() for factor in self.coords for c in factor)

    def affine(self):
        """Affine coordinates (x_0/x_N, ..., x_{N-1}/x_N) of each factor

        A factor on the hyperplane at infinity gives None."""
        values = []
        for factor in self.coords:
            if factor[-1] == 0:
                values.append(None)
            else:
                values.append(tuple(Fraction(c, factor[-1]) for c in factor[:-1]))
        return tuple(values)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        factors = ['(' + ':'.join(str(c) for c in factor) + ')' for factor in self.coords]
        if len(factors) == 1:
            return factors[0]
        return '(' + ','.join(factors) + ')'

def normalize_factor(raw):
    """Canonical primitive integer vector proportional to raw"""
    values = [Fraction(v) for v in raw]
    if not any(values):
        raise DegeneratePointError('all coordinates of {} are zero'.format(list(raw)))
    denominator = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values), 1)
    integers = [int(v * denominator) for v in values]
    g = reduce(math.gcd, integers)
    integers = [c // g for c in integers]
    if next(c for c in integers if c != 0) < 0:
        integers = [-c for c in integers]
    return tuple(integers)

def normalize(raw):
    """Canonical representative of a point given per factor by rationals"""
    return ProjPoint(tuple(normalize_factor(factor) for factor in raw))

def point_from_affine(values, dims):
    """Point of a product of projective spaces from affine coordinates

    values lists the affine coordinates of all factors in order; each factor
    P^N consumes N of them and gets 1 appended."""
    values = list(values)
    if len(values) != sum(dims):
        raise ValueError('expected {} affine coordinates, got {}'.format(sum(dims), len(values)))
    raw, start = [], 0
    for n in dims:
        raw.append(values[start:start + n] + [1])
        start += n
    return normalize(raw)

@dataclass(frozen=True)
class Place:
    """A place of Q: a prime p, or the archimedean place when p is None"""
    p: object = None

    def __post_init__(self):
        if self.p is not None and not isprime(self.p):
            raise ValueError('{} is not prime'.format(self.p))

    @classmethod
    def finite(cls, p):
        return cls(int(p))

    @classmethod
    def infinite(cls):
        return cls(None)

    @property
    def archimedean(self):
        return self.p is None

    def sort_key(self):
        return (0, 0) if self.p is None else (1, self.p)

    def __str__(self):
        return 'inf' if self.p is None else str(self.p)

INFINITY = Place.infinite()

def ord_p(value, p):
    """p-adic valuation of a nonzero integer or Fraction"""
    value = Fraction(value)
    return multiplicity(p, value.numerator) - multiplicity(p, value.denominator)

def local_log_norm(lift, place):
    """log max_i |x_i|_v for a nonzero vector of integers or rationals"""
    entries = [Fraction(c) for c in lift if c != 0]
    if not entries:
        raise DegeneratePointError('lift {} is zero'.format(list(lift)))
    if place.archimedean:
        return max(log_abs(c) for c in entries)
    return -min(ord_p(c, place.p) for c in entries) * math.log(place.p)

def factor_heights(x):
    """Naive height of every factor of x"""
    return tuple(math.log(max(abs(c) for c in factor)) for factor in x.coords)

def naive_height(x):
    """Logarithmic naive height, summed over the factors"""
    return sum(factor_heights(x))

def _projective_points(n, bound):
    """Canonical points of P^n with max |x_i| <= bound, ordered by (max, coords)"""
    for m in range(1, bound + 1):
        for vector in itertools.product(range(-m, m + 1), repeat=n + 1):
            if max(abs(c) for c in vector) != m:
                continue
            if next(c for c in vector if c != 0) < 0:
                continue
            if reduce(math.gcd, vector) != 1:
                continue
            yield vector

def _height_bound(B):
    """Largest integer H with log H <= B"""
    H = int(math.floor(math.exp(B)))
    while math.log(H + 1) <= B + 1e-12:
        H += 1
    while H > 1 and math.log(H) > B + 1e-12:
        H -= 1
    return max(H, 1)

def enumerate_bounded(space, B):
    """All points of a product of projective spaces with naive height <= B

    Each point is emitted once, in a deterministic order: lexicographic in
    (max |x_i|, coordinates) on a single P^N, and in the product order of the
    factor lists for products."""
    if B < 0:
        raise ValueError('height bound must be nonnegative')
    dims = (space,) if isinstance(space, int) else tuple(space)
    H = _height_bound(B)
    if len(dims) == 1:
        for vector in _projective_points(dims[0], H):
            yield ProjPoint((vector,))
        return

    factors = [[(math.log(max(abs(c) for c in v)), v) for v in _projective_points(n, H)]
               for n in dims]
    for combination in itertools.product(*factors):
        if sum(h for h, _ in combination) <= B + 1e-12:
            yield ProjPoint(tuple(v for _, v in combination))
