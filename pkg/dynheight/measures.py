"""Module for potentials and equilibrium measures on P^1(C)

Potentials are homogeneous functions G on C^2 - {0} with
G(ca, cb) = G(a, b) + log|c|, stored on two charts: u0(z) = G(z, 1) and
u1(w) = G(1, w), each sampled on a square grid over [-1.5, 1.5]^2.  One
iteration is

    G_(n+1)(a, b) = (1/d) sum_i G_n(F_i(a, b)),

which is the pull-back of the metric with the log-ratio to the reference
metric folded into the homogeneous lift.  The measure is dd^c u, computed by
the five-point Laplacian."""
from dynheight.config import GRID_EXTENT, GRID_RESOLUTION, INTERPOLATION_SLACK
from dynheight.errors import (ExceptionalPointError, GridTooCoarseError,
        RootFindingError)

import logging
import math
import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction
from scipy.ndimage import map_coordinates
from sympy import binomial, expand, sqrt

logger = logging.getLogger(__name__)

OVERLAP = (0.8, 1.25)

class RationalMapP1:
    """Rational map z -> P(z) / Q(z) of P^1 with complex coefficients

    Coefficients are in ascending powers of z; the degree is
    max(deg P, deg Q) and the homogeneous lift is
    (a, b) -> (b^deg P(a/b), b^deg Q(a/b))."""

    def __init__(self, numerator, denominator=(1,)):
        self.numerator = np.array(numerator, dtype=complex)
        self.denominator = np.array(denominator, dtype=complex)
        self.degree = max(self._degree(self.numerator), self._degree(self.denominator))
        if self.degree < 1:
            raise ValueError('a rational map of P^1 needs degree at least 1')
        self.numerator = np.pad(self.numerator, (0, self.degree + 1 - len(self.numerator)))[:self.degree + 1]
        self.denominator = np.pad(self.denominator, (0, self.degree + 1 - len(self.denominator)))[:self.degree + 1]

    @staticmethod
    def _degree(coefficients):
        nonzero = np.nonzero(coefficients)[0]
        return int(nonzero[-1]) if len(nonzero) else -1

    @classmethod
    def from_poly_map(cls, f):
        """Complex form of an integer PolyMapPN on P^1, coordinates (z : 1)"""
        if f.N != 1:
            raise ValueError('only maps of P^1 have a complex chart here')
        numerator = [0] * (f.degree + 1)
        denominator = [0] * (f.degree + 1)
        for target, poly in zip((numerator, denominator), f.polys):
            for c, (j, _) in poly:
                target[j] += c
        return cls(numerator, denominator)

    def lift(self, a, b):
        """Homogeneous image (A, B) of arrays a, b"""
        A = np.zeros(np.broadcast(a, b).shape, dtype=complex)
        B = np.zeros_like(A)
        for j in range(self.degree + 1):
            term = a**j * b**(self.degree - j)
            A += self.numerator[j] * term
            B += self.denominator[j] * term
        return A, B

    def __call__(self, z):
        A, B = self.lift(np.asarray(z, dtype=complex), np.ones_like(z, dtype=complex))
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(B != 0, A / np.where(B != 0, B, 1), complex(np.inf))

class P1System:
    """k rational maps of P^1 whose degrees sum to d > k"""

    def __init__(self, maps, degree=None):
        self.maps = list(maps)
        self.k = len(self.maps)
        total = sum(f.degree for f in self.maps)
        if degree is not None and degree != total:
            raise ValueError('declared degree {} differs from the sum {} of the map degrees'.format(degree, total))
        self.degree = total
        if self.degree <= self.k:
            raise ValueError('degree {} does not exceed the number of maps {}'.format(self.degree, self.k))

    @classmethod
    def from_system(cls, system):
        maps = getattr(system, 'poly_maps', None)
        if maps is None or system.dims != (1,):
            raise ValueError('potentials are computed for polynomial systems of P^1 only')
        return cls([RationalMapP1.from_poly_map(f) for f in maps])

    @classmethod
    def quadratic(cls, c):
        """The single map z^2 + c"""
        return cls([RationalMapP1([c, 0, 1])])

def _axis(resolution, extent):
    return np.linspace(-extent, extent, resolution)

def _mesh(resolution, extent):
    axis = _axis(resolution, extent)
    # rows are imaginary parts, columns real parts
    return axis[None, :] + 1j * axis[:, None]

@dataclass
class GridPotential:
    """Two-chart samples of a homogeneous potential

    values[0] holds u0(z) = G(z, 1) and values[1] holds u1(w) = G(1, w)."""
    values: np.ndarray
    resolution: int
    extent: float = GRID_EXTENT
    iterations: int = 0
    contraction: list = field(default_factory=list)
    contraction_ok: bool = True
    disagreement: float = None

    @classmethod
    def initial(cls, kind='zero', resolution=GRID_RESOLUTION, extent=GRID_EXTENT):
        """Start potential: 'zero' (u = 0, i.e. log max(|a|, |b|)) or 'fubini_study'"""
        if kind == 'zero':
            values = np.zeros((2, resolution, resolution))
        elif kind == 'fubini_study':
            u = 0.5 * np.log1p(np.abs(_mesh(resolution, extent))**2)
            values = np.stack([u, u])
        else:
            raise ValueError('unknown initial potential {!r}'.format(kind))
        return cls(values, resolution, extent)

    @property
    def spacing(self):
        return 2 * self.extent / (self.resolution - 1)

    def mesh(self):
        return _mesh(self.resolution, self.extent)

    def _index(self, z):
        scale = (self.resolution - 1) / (2 * self.extent)
        return np.stack([(z.imag + self.extent) * scale, (z.real + self.extent) * scale])

    def green(self, a, b):
        """G(a, b) by interpolation in the chart where the quotient is at most 1"""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
        first = np.abs(a) <= np.abs(b)
        result = np.empty(a.shape)
        if first.any():
            z = a[first] / b[first]
            result[first] = map_coordinates(self.values[0], self._index(z), order=1, mode='nearest') \
                + np.log(np.abs(b[first]))
        if (~first).any():
            w = b[~first] / a[~first]
            result[~first] = map_coordinates(self.values[1], self._index(w), order=1, mode='nearest') \
                + np.log(np.abs(a[~first]))
        return result

    def __call__(self, z):
        """u0(z) = G(z, 1) at finite points, nan at infinity"""
        z = np.asarray(z, dtype=complex)
        finite = np.isfinite(z)
        result = np.full(z.shape, np.nan)
        result[finite] = self.green(z[finite], np.ones(finite.sum()))
        return result

    def overlap_disagreement(self):
        """Largest |u0(z) - u1(1/z) - log|z|| over grid nodes in the overlap annulus"""
        z = self.mesh()
        ring = (np.abs(z) >= OVERLAP[0]) & (np.abs(z) <= OVERLAP[1])
        other = map_coordinates(self.values[1], self._index(1 / z[ring]), order=1, mode='nearest') \
            + np.log(np.abs(z[ring]))
        return float(np.abs(self.values[0][ring] - other).max(initial=0.0))

    def stitched(self):
        """Copy with both charts averaged on the overlap annulus"""
        z = self.mesh()
        ring = (np.abs(z) >= OVERLAP[0]) & (np.abs(z) <= OVERLAP[1])
        values = self.values.copy()
        from_second = map_coordinates(self.values[1], self._index(1 / z[ring]), order=1, mode='nearest') \
            + np.log(np.abs(z[ring]))
        from_first = map_coordinates(self.values[0], self._index(1 / z[ring]), order=1, mode='nearest') \
            + np.log(np.abs(z[ring]))
        values[0][ring] = 0.5 * (self.values[0][ring] + from_second)
        values[1][ring] = 0.5 * (self.values[1][ring] + from_first)
        return GridPotential(values, self.resolution, self.extent, self.iterations,
                             list(self.contraction), self.contraction_ok, self.overlap_disagreement())

class _PullBack:
    """Precomputed images of the grid nodes of both charts under every map"""

    def __init__(self, system, potential):
        z = potential.mesh().ravel()
        one = np.ones_like(z)
        self.images = []
        for a, b in ((z, one), (one, z)):
            self.images.append([f.lift(a, b) for f in system.maps])
        self.degree = system.degree
        self.shape = potential.values.shape

    def apply(self, potential):
        values = np.zeros(self.shape)
        for chart, images in enumerate(self.images):
            total = sum(potential.green(A, B) for A, B in images)
            values[chart] = (total / self.degree).reshape(self.shape[1:])
        return values

def iterate_potential(system, n, init='zero', resolution=GRID_RESOLUTION, extent=GRID_EXTENT,
                      slack=INTERPOLATION_SLACK, burn_in=3):
    """n pull-back iterations of a start potential under a P1System

    The sup-norm of successive differences must shrink by at least
    (k/d)(1 + slack) per step after burn_in steps; violations are logged
    and reported through contraction_ok, never hidden."""
    if resolution < 64:
        raise ValueError('grid resolution must be at least 64')
    potential = init if isinstance(init, GridPotential) else GridPotential.initial(init, resolution, extent)
    pull_back = _PullBack(system, potential)
    rate = system.k / system.degree * (1 + slack)
    contraction = list(potential.contraction)
    ok = potential.contraction_ok
    values = potential.values
    for step in range(n):
        updated = pull_back.apply(GridPotential(values, potential.resolution, potential.extent))
        difference = float(np.abs(updated - values).max())
        if contraction and step >= burn_in and contraction[-1] > 1e-10 \
                and difference > rate * contraction[-1]:
            ok = False
            logger.warning('step %d: difference %.3g exceeds %.3g times the previous %.3g',
                           step, difference, rate, contraction[-1])
        contraction.append(difference)
        values = updated
        logger.debug('potential step %d: sup difference %.3g', step, difference)
    result = GridPotential(values, potential.resolution, potential.extent,
                           potential.iterations + n, contraction, ok)
    result.disagreement = result.overlap_disagreement()
    return result

@dataclass
class GridMeasure:
    """dd^c of a grid potential: per-node masses of both charts"""
    points: np.ndarray
    masses: np.ndarray
    raw_mass: float
    clipped_mass: float

    @property
    def discrete(self):
        return DiscreteMeasure(self.points, self.masses)

    def density(self, spacing):
        return self.masses / spacing**2

def measure_from_potential(potential, tolerance=0.05):
    """Equilibrium measure of a potential by the five-point Laplacian

    Chart 0 covers |z| < 1.25 and chart 1 covers |w| <= 0.8, so every point
    of P^1 is counted once.  Negative masses are clipped and reported."""
    potential = potential.stitched()
    h = potential.spacing
    z = potential.mesh()
    points, masses = [], []
    for chart, values in enumerate(potential.values):
        laplacian = np.zeros_like(values)
        laplacian[1:-1, 1:-1] = (values[2:, 1:-1] + values[:-2, 1:-1] + values[1:-1, 2:]
                                 + values[1:-1, :-2] - 4 * values[1:-1, 1:-1])
        mass = laplacian / (2 * math.pi)
        interior = np.zeros(values.shape, dtype=bool)
        interior[1:-1, 1:-1] = True
        if chart == 0:
            selected = interior & (np.abs(z) < OVERLAP[1])
            where = z[selected]
        else:
            selected = interior & (np.abs(z) <= OVERLAP[0])
            w = z[selected]
            with np.errstate(divide='ignore'):
                where = np.where(w != 0, 1 / np.where(w != 0, w, 1), complex(np.inf))
        points.append(where)
        masses.append(mass[selected])
    points = np.concatenate(points)
    masses = np.concatenate(masses)
    raw = float(masses.sum())
    clipped = float(-masses[masses < 0].sum())
    if abs(raw - 1) > tolerance:
        raise GridTooCoarseError('Laplacian mass {:.4f} deviates from 1 by more than {}'.format(raw, tolerance))
    if clipped:
        logger.info('clipped negative mass %.3g', clipped)
    masses = np.clip(masses, 0, None)
    return GridMeasure(points, masses / masses.sum(), raw, clipped)

class DiscreteMeasure:
    """Probability measure with finitely many atoms on P^1; infinity is complex('inf')"""

    def __init__(self, points, weights=None):
        self.points = np.asarray(points, dtype=complex).ravel()
        if weights is None:
            weights = np.ones(len(self.points))
        weights = np.asarray(weights, dtype=float).ravel()
        if len(weights) != len(self.points) or not len(weights):
            raise ValueError('a measure needs one weight per atom and at least one atom')
        if (weights < 0).any():
            raise ValueError('weights must be nonnegative')
        self.weights = weights / weights.sum()

    @classmethod
    def uniform_circle(cls, n, radius=1.0):
        """n equally weighted atoms at radius times the n-th roots of unity"""
        return cls(radius * np.exp(2j * np.pi * np.arange(n) / n))

    @property
    def atoms(self):
        return list(zip(self.points, self.weights))

    def integrate(self, values):
        """Integral of a function given by its values at the atoms"""
        return float(np.dot(self.weights, values))

    def __len__(self):
        return len(self.points)

def to_sphere(z):
    """Stereographic image on the unit sphere, infinity at the north pole"""
    z = np.asarray(z, dtype=complex).ravel()
    finite = np.isfinite(z)
    result = np.tile(np.array([0.0, 0.0, 1.0]), (len(z), 1))
    w = z[finite]
    r2 = np.abs(w)**2
    result[finite] = np.stack([2 * w.real, 2 * w.imag, r2 - 1], axis=1) / (r2 + 1)[:, None]
    return result

def test_centers(count=32):
    """Fibonacci lattice of centers on the sphere"""
    j = np.arange(count) + 0.5
    height = 1 - 2 * j / count
    angle = math.pi * (1 + math.sqrt(5)) * j
    radius = np.sqrt(1 - height**2)
    return np.stack([radius * np.cos(angle), radius * np.sin(angle), height], axis=1)

TEST_RADIUS = 0.75

def test_integrals(measure, centers=None, radius=TEST_RADIUS):
    """Integrals of the hat functions max(0, 1 - chordal distance / radius)

    The hats are bounded by 1 and (1/radius)-Lipschitz for the chordal metric."""
    if centers is None:
        centers = test_centers()
    points = to_sphere(measure.points)
    distances = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
    hats = np.clip(1 - distances / radius, 0, None)
    return measure.weights @ hats

def test_statistic(first, second):
    """max over the test dictionary of |int f d first - int f d second|"""
    return float(np.abs(test_integrals(first) - test_integrals(second)).max())

def _companion_roots(coefficients):
    """Roots of a batch of polynomials of equal degree, ascending coefficients"""
    coefficients = np.asarray(coefficients, dtype=complex)
    count, length = coefficients.shape
    degree = length - 1
    if degree == 0:
        return np.zeros((count, 0), dtype=complex)
    monic = coefficients[:, :-1] / coefficients[:, -1:]
    companion = np.zeros((count, degree, degree), dtype=complex)
    companion[:, 0, :] = -monic[:, ::-1]
    companion[:, np.arange(1, degree), np.arange(degree - 1)] = 1
    return np.linalg.eigvals(companion)

def _preimages_under(f, targets, tolerance=1e-13):
    """All f-preimages of every target with multiplicity, deg f per target"""
    targets = np.asarray(targets, dtype=complex)
    finite = np.isfinite(targets)
    polys = np.zeros((len(targets), f.degree + 1), dtype=complex)
    polys[finite] = f.numerator[None, :] - targets[finite, None] * f.denominator[None, :]
    polys[~finite] = f.denominator[None, :]
    scale = np.abs(polys).max(axis=1, keepdims=True)
    scale[scale == 0] = 1
    polys = polys / scale
    roots = np.full((len(targets), f.degree), complex(np.inf))
    degrees = np.array([max((j for j in range(f.degree + 1) if abs(row[j]) > tolerance), default=-1)
                        for row in polys])
    if (degrees < 0).any():
        raise RootFindingError('{} has a whole fiber'.format(targets[degrees < 0][0]))
    for degree in np.unique(degrees):
        rows = np.nonzero(degrees == degree)[0]
        roots[rows, :degree] = _companion_roots(polys[rows, :degree + 1])
    return roots.ravel()

def preimage_multiset(system, a, depth, failure_rate=1e-3):
    """All d^depth iterated preimages of a under the maps, with multiplicity

    Roots missing from a fiber because of a degree drop sit at infinity."""
    level = np.array([complex(a)])
    for _ in range(depth):
        level = np.concatenate([_preimages_under(f, level) for f in system.maps])
        failed = np.isnan(level).sum()
        if failed > failure_rate * len(level):
            raise RootFindingError('{} of {} roots failed'.format(failed, len(level)))
        if failed:
            logger.warning('%d of %d roots failed', failed, len(level))
            level = level[~np.isnan(level)]
    return level

def is_exceptional(system, a, tolerance=1e-9):
    """Whether the grand orbit of a is finite, found from two levels of preimages"""
    points = [complex(a)]
    for z in np.concatenate([preimage_multiset(system, a, 1), preimage_multiset(system, a, 2)]):
        if not any(_same_point(z, p, tolerance) for p in points):
            points.append(z)
            if len(points) > 2:
                return False
    return True

def _same_point(z, w, tolerance):
    if np.isinf(z) or np.isinf(w):
        return bool(np.isinf(z) and np.isinf(w))
    return abs(z - w) <= tolerance * max(1.0, abs(z), abs(w))

def equidistribution_experiment(system, a, depth, measure, exceptional=()):
    """Test statistic between the depth-n preimage measure of a and a reference measure"""
    a = complex(a)
    if any(_same_point(a, complex(e), 1e-12) for e in exceptional) or is_exceptional(system, a):
        raise ExceptionalPointError('{} is in the exceptional set'.format(a))
    if isinstance(measure, GridMeasure):
        measure = measure.discrete
    empirical = DiscreteMeasure(preimage_multiset(system, a, depth))
    statistic = test_statistic(empirical, measure)
    logger.info('depth %d: %d preimages, statistic %.4g', depth, len(empirical), statistic)
    return statistic

def equidistribution_table(system, a, depths, measure, exceptional=()):
    """(depth, statistic) rows of equidistribution_experiment"""
    return [(n, equidistribution_experiment(system, a, n, measure, exceptional)) for n in depths]

SILVERMAN_ROOT = 2 + math.sqrt(3)
SILVERMAN_LAMBDA = 7 + 4 * math.sqrt(3)

CLAIM_SEQUENCES = {
    'one': (lambda n: 1.0, 1.0),
    'harmonic': (lambda n: 1.0 / (n + 1), 0.0),
    'alternating': (lambda n: 1.0 + (-1)**n / 2.0**n, 1.0),
}

def _claim_weights(n, lam):
    """C(2n, i) lam^(n-i) / 16^n for i = 0..2n

    Powers of lam are taken as even powers of sqrt(lam), which is 2 + sqrt 3
    for the balanced lambda."""
    root = SILVERMAN_ROOT if abs(lam - SILVERMAN_LAMBDA) < 1e-12 else math.sqrt(lam)
    return np.array([float(Fraction(math.comb(2 * n, i), 16**n)) * root**(2 * (n - i)) for i in range(2 * n + 1)])

def binomial_current_claim(s, limit, n_max, lam=SILVERMAN_LAMBDA):
    """Rows (n, t_2n, |t_2n - limit|) of t_2n = 16^-n sum_(i<=n) C(2n, i) lam^(n-i) s_(n-i)

    For lam = 7 + 4 sqrt 3 the weights over all i <= 2n sum to 1, and the
    residual is taken from the tail form to avoid cancellation."""
    if not lam > 1:
        raise ValueError('lambda must exceed 1')
    if isinstance(s, str):
        s, limit = CLAIM_SEQUENCES[s]
    balanced = abs(lam - SILVERMAN_LAMBDA) < 1e-12
    rows = []
    for n in range(n_max + 1):
        weights = _claim_weights(n, lam)
        values = np.array([s(n - i) for i in range(n + 1)])
        t = float(np.dot(weights[:n + 1], values))
        if balanced:
            residual = abs(float(np.dot(weights[:n + 1], values - limit)) - limit * float(weights[n + 1:].sum()))
        else:
            residual = abs(t - limit)
        rows.append((n, t, residual))
    return rows

def verify_binomial_identity(n):
    """(sqrt(lam) + 1/sqrt(lam))^(2n) = sum_i C(2n, i) lam^(n-i) for lam = 7 + 4 sqrt 3, exactly"""
    lam, inverse = 7 + 4 * sqrt(3), 7 - 4 * sqrt(3)
    total = sum(binomial(2 * n, i) * (lam**(n - i) if i <= n else inverse**(i - n))
                for i in range(2 * n + 1))
    return expand(total - 16**n) == 0
