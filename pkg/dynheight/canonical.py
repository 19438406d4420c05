"""Module for canonical heights of dynamical systems of several morphisms

The canonical height is the limit of d^-l sum_{f in F_l} h_L(f(x)).  It is
evaluated through the telescoped series

    h^(x) = h_L(x) + sum_m d^(-m-1) sum_{f in F_m} eps(f(x)),
    eps(y) = sum_i h_L(f_i(y)) - d h_L(y),

on the deduplicated orbit DAG.  A node of multiplicity mu at depth m whose
remaining tail mu C d^-m / (d-k) is below the current threshold is not
expanded and its tail is added to the error radius."""
from dynheight.config import (DEPTH_CAP, DIGIT_BUDGET, NODE_BUDGET, SAFETY_FACTOR,
        SAMPLE_SIZE, TARGET_ERROR)
from dynheight.errors import (DynHeightError, InequalityOnlySystemError, OffSurfaceError,
        OrbitEvaluationError, ZeroDenominatorError)

import itertools
import logging
import math
import threading
import numpy as np
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from sympy import Rational, sqrt, zeros

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class NullstellensatzCertificate:
    """Identity denominator * x_i^m = sum_j multipliers[j] * F_j

    multipliers[j] is a sparse list of (integer coefficient, exponents)."""
    i: int
    m: int
    denominator: int
    multipliers: tuple

    def norm(self):
        return sum(abs(c) for multiplier in self.multipliers for c, _ in multiplier)

def _exponents(n, degree):
    return [e for e in itertools.product(range(degree, -1, -1), repeat=n) if sum(e) == degree]

def _solve_certificate(f, i, m):
    """Multipliers of degree m - deg f expressing x_i^m, or None"""
    n = f.N + 1
    source = _exponents(n, m - f.degree)
    target = {e: row for row, e in enumerate(_exponents(n, m))}
    A = zeros(len(target), n * len(source))
    for j, poly in enumerate(f.polys):
        for col, g in enumerate(source):
            for c, exps in poly:
                A[target[tuple(a + b for a, b in zip(g, exps))], j * len(source) + col] += c
    b = zeros(len(target), 1)
    b[target[tuple(m if t == i else 0 for t in range(n))], 0] = 1
    try:
        solution, params = A.gauss_jordan_solve(b)
    except ValueError:
        return None
    solution = solution.subs({p: 0 for p in params})
    values = [Fraction(int(v.p), int(v.q)) for v in (Rational(s) for s in solution)]
    denominator = reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in values), 1)
    multipliers = tuple(
        tuple((int(v * denominator), g) for g, v in zip(source, values[j * len(source):(j + 1) * len(source)]) if v)
        for j in range(n))
    return NullstellensatzCertificate(i, m, denominator, multipliers)

def find_nullstellensatz_certificates(f, cap=None):
    """Certificates D_i x_i^m_i = sum_j G_ij F_j for every coordinate x_i

    Exact linear algebra over Q, trying m = deg f, deg f + 1, ... up to the
    cap (N+1)(deg f - 1) + 1 by default.  Returns None when some coordinate
    has no certificate below the cap."""
    if cap is None:
        cap = (f.N + 1) * (f.degree - 1) + 1
    certificates = []
    for i in range(f.N + 1):
        for m in range(f.degree, cap + 1):
            certificate = _solve_certificate(f, i, m)
            if certificate is not None:
                certificates.append(certificate)
                break
        else:
            logger.debug('no certificate for x_%d up to degree %d', i, cap)
            return None
    return certificates

@dataclass(frozen=True)
class MapConstants:
    """Height constants of a morphism F of P^N with a certificate

    For coprime integer x, gcd F(x) divides denominator and
    deg log|x| - log(certificate_norm / denominator) <= log|F(x)| <= deg log|x| + log(coefficient_norm)."""
    coefficient_norm: int
    denominator: int
    certificate_norm: int

def map_constants(f):
    """MapConstants of f, or None without certificates"""
    certificates = find_nullstellensatz_certificates(f)
    if certificates is None:
        return None
    denominator = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in certificates), 1)
    norm = max(c.norm() * (denominator // c.denominator) for c in certificates)
    return MapConstants(max(f.coefficient_norms()), denominator, norm)

@dataclass(frozen=True)
class DiscrepancyBound:
    """|sum_i h_L(f_i x) - d h_L(x)| <= C, proven when certified"""
    C: float
    certified: bool
    upper: float = None
    lower: float = None

def epsilon(system, y, images=None):
    """sum_i h_L(f_i y) - d h_L(y)"""
    if images is None:
        images = [system.evaluate(i, y) for i in range(system.k)]
    return sum(system.height(z) for z in images) - system.degree * system.height(y)

def _certified_bound(system):
    maps = getattr(system, 'poly_maps', None)
    if maps is None or any(not f.morphism for f in maps):
        return None
    constants = []
    for f in maps:
        c = map_constants(f)
        if c is None:
            return None
        constants.append(c)
    weight = abs(system.weights[0])
    upper = weight * sum(math.log(c.coefficient_norm) for c in constants)
    lower = weight * sum(math.log(c.certificate_norm) for c in constants)
    return DiscrepancyBound(max(upper, lower, 0.0), True, upper, lower)

def _empirical_bound(system, sample_size, seed, around):
    rng = np.random.default_rng(seed)
    worst = None
    try:
        points = system.sample_points(rng, sample_size, around=around)
    except ValueError as e:
        logger.warning('cannot sample the state space: %s', e)
        points = []
    for y in points:
        try:
            value = abs(epsilon(system, y))
        except DynHeightError:
            continue
        worst = value if worst is None else max(worst, value)
    if worst is None:
        logger.warning('no usable sample point, discrepancy bound is infinite')
        return DiscrepancyBound(math.inf, False)
    return DiscrepancyBound(SAFETY_FACTOR * worst, False)

_bounds = {}
_bounds_lock = threading.Lock()

def compute_discrepancy_bound(system, sample_size=SAMPLE_SIZE, seed=0, around=()):
    """Constant C with |sum_i h_L(f_i x) - d h_L(x)| <= C

    Polynomial systems of P^N get a certified C from coefficient norms and
    Nullstellensatz certificates; every other system gets an uncertified
    empirical maximum over sample points times a safety factor."""
    if not system.line_bundle:
        raise InequalityOnlySystemError('{} only satisfies a height inequality'.format(type(system).__name__))
    key = (system.fingerprint(), sample_size, seed, tuple(around))
    with _bounds_lock:
        if key in _bounds:
            return _bounds[key]
    bound = _certified_bound(system)
    if bound is None:
        bound = _empirical_bound(system, sample_size, seed, around)
        logger.warning('using uncertified empirical discrepancy bound C = %.6g', bound.C)
    else:
        logger.debug('certified discrepancy bound C = %.6g', bound.C)
    with _bounds_lock:
        _bounds[key] = bound
    return bound

@dataclass
class HeightEstimate:
    """Canonical height value with its error radius

    certified means |value - h^(x)| <= error_radius is proven: the constant C
    is certified and no budget was exhausted."""
    value: float
    error_radius: float
    certified: bool
    iterations: int
    orbit_nodes_visited: int
    discrepancy_C: float
    closed_orbit: int = None
    truncated: bool = False

    def as_dict(self):
        return {'value': self.value, 'error_radius': self.error_radius,
                'certified': self.certified, 'iterations': self.iterations,
                'orbit_nodes_visited': self.orbit_nodes_visited,
                'discrepancy_C': self.discrepancy_C, 'closed_orbit': self.closed_orbit,
                'truncated': self.truncated}

class OrbitSeries:
    """Telescoped canonical-height series over a memoized orbit DAG

    The memo of expanded nodes persists across evaluations, so refining the
    pruning threshold only evaluates the new part of the tree."""

    def __init__(self, system, C, node_budget=NODE_BUDGET, digit_budget=DIGIT_BUDGET):
        self.system = system
        self.C = C
        self.node_budget = node_budget
        self.digit_budget = digit_budget
        self.memo = {}
        self.exhausted = None

    def expand(self, y):
        """(eps(y), images of y), or None once a budget is exhausted"""
        if y in self.memo:
            return self.memo[y]
        if self.exhausted:
            return None
        if len(self.memo) >= self.node_budget:
            self.exhausted = 'nodes'
            logger.warning('node budget %d exhausted', self.node_budget)
            return None
        eps, images = self.entry(y)
        if any(z.max_bits() > self.digit_budget for z in images):
            self.exhausted = 'digits'
            logger.warning('digit budget of %d bits exhausted', self.digit_budget)
            return None
        self.memo[y] = (eps, tuple(images))
        return self.memo[y]

    def entry(self, y):
        """(eps(y), images of y) without budget checks"""
        images = []
        for i in range(self.system.k):
            try:
                images.append(self.system.evaluate(i, y))
            except DynHeightError as e:
                raise OrbitEvaluationError(y, i, e) from e
        return epsilon(self.system, y, images), images

    def initial(self, x):
        return self.system.height(x)

    def evaluate(self, x, threshold, depth_cap=DEPTH_CAP):
        """(value, error radius, depth reached, truncated) at a pruning threshold"""
        d, k, C = self.system.degree, self.system.k, self.C
        value = self.initial(x)
        radius = 0.0
        level = {x: 1.0}
        depth = 0
        truncated = False
        while level:
            tail_unit = C / d**depth / (d - k) if C else 0.0
            if depth == depth_cap:
                radius += sum(level.values()) * tail_unit
                truncated = True
                break
            next_level = defaultdict(float)
            for y, mu in level.items():
                tail = mu * tail_unit
                if tail <= threshold:
                    radius += tail
                    continue
                entry = self.expand(y)
                if entry is None:
                    radius += tail
                    continue
                eps, images = entry
                value += mu * eps / d**(depth + 1)
                for z in images:
                    next_level[z] += mu
            level = next_level
            depth += 1
        return value, radius, depth, truncated or self.exhausted is not None

class HeightCache:
    """Shared memo of canonical heights, safe for concurrent callers

    Concurrent inserts of the same key keep the last value."""

    def __init__(self):
        self._values = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(system, x, target_error):
        return (system.fingerprint(), x.coords, float(target_error))

    def get(self, system, x, target_error):
        with self._lock:
            return self._values.get(self.key(system, x, target_error))

    def put(self, system, x, target_error, estimate):
        with self._lock:
            self._values[self.key(system, x, target_error)] = estimate

    def __len__(self):
        with self._lock:
            return len(self._values)

def closure_cutoff(system, bound):
    """Bound on |h_L| over finite orbits, or None when C is infinite

    Points of a finite orbit have canonical height 0, hence
    |h_L| <= C / (d - k); uncertified constants are doubled."""
    if not math.isfinite(bound.C):
        return None
    return bound.C / (system.degree - system.k) * (1.0 if bound.certified else 2.0) + 1e-9

def sample_anchor(system, x):
    """Extra start points for empirical sampling when the system has none"""
    return () if system.base_points else (x,)

def canonical_height(system, x, target_error=TARGET_ERROR, *, bound=None, depth_cap=DEPTH_CAP,
                     node_budget=NODE_BUDGET, digit_budget=DIGIT_BUDGET, cache=None, rounds=10,
                     sample_size=SAMPLE_SIZE):
    """Canonical height h^_{L,F}(x) within target_error when certified

    A forward orbit that closes within the node budget gives exactly 0.
    Budget exhaustion never raises: the estimate is returned with an honest
    radius and certified = False."""
    if not system.line_bundle:
        raise InequalityOnlySystemError('{} has no canonical height'.format(type(system).__name__))
    if not target_error > 0:
        raise ValueError('target error must be positive, got {}'.format(target_error))
    if not system.contains(x):
        raise OffSurfaceError('{} is not on the state space of the system'.format(x))
    if cache is not None:
        cached = cache.get(system, x, target_error)
        if cached is not None:
            return cached
    if bound is None:
        bound = compute_discrepancy_bound(system, sample_size, around=sample_anchor(system, x))
    C = bound.C
    report = forward_orbit(system, x, budget=node_budget, digit_budget=digit_budget,
                           height_cutoff=closure_cutoff(system, bound))
    if report.status == 'closed':
        logger.debug('orbit of %s closes with %d points', x, len(report.nodes))
        estimate = HeightEstimate(0.0, 0.0, True, 0, len(report.nodes), C, closed_orbit=len(report.nodes))
    else:
        series = OrbitSeries(system, C, node_budget=node_budget, digit_budget=digit_budget)
        threshold = target_error / 4
        for attempt in range(rounds):
            value, radius, depth, truncated = series.evaluate(x, threshold, depth_cap)
            logger.debug('round %d: threshold %.3g value %.12g radius %.3g depth %d nodes %d',
                         attempt, threshold, value, radius, depth, len(series.memo))
            if radius <= target_error or truncated:
                break
            threshold /= 4
        certified = bound.certified and not truncated and radius <= target_error
        if radius > target_error:
            logger.warning('radius %.3g exceeds target %.3g at %s', radius, target_error, x)
        estimate = HeightEstimate(value, radius, certified, depth, len(series.memo), C, truncated=truncated)
    if cache is not None:
        cache.put(system, x, target_error, estimate)
    return estimate

def check_functional_equation(system, x, target_error=TARGET_ERROR, **kwargs):
    """Residual |sum_i h^(f_i x) - d h^(x)| of the canonical functional equation"""
    if kwargs.get('bound') is None:
        kwargs['bound'] = compute_discrepancy_bound(system, kwargs.get('sample_size', SAMPLE_SIZE),
                                                    around=sample_anchor(system, x))
    base = canonical_height(system, x, target_error, **kwargs)
    images = [canonical_height(system, system.evaluate(i, x), target_error, **kwargs)
              for i in range(system.k)]
    residual = abs(sum(e.value for e in images) - system.degree * base.value)
    logger.info('functional equation residual %.3g at %s', residual, x)
    return residual

ALPHA = 2 + sqrt(3)
SILVERMAN_DEGREE = ALPHA**2
EXPECTED_RATIO = 1 + sqrt(3)

def silverman_systems(system):
    """The k = 1 systems (S, s2 o s1, E+) and (S, s1 o s2, E-) of a Wheeler surface

    E+ = (2 + sqrt 3) L1 - L2 and E- = -L1 + (2 + sqrt 3) L2, both of degree 7 + 4 sqrt 3."""
    if getattr(system, 'degree', None) != 4.0 or system.k != 2:
        raise ValueError('Silverman heights need a Wheeler surface')
    from dynheight.systems import CompositeSystem
    alpha, degree = float(ALPHA), float(SILVERMAN_DEGREE.expand())
    plus = CompositeSystem(system, [(0, 1)], (alpha, -1.0), degree)
    minus = CompositeSystem(system, [(1, 0)], (-1.0, alpha), degree)
    return plus, minus

def silverman_heights(system, x, target_error=TARGET_ERROR, **kwargs):
    """Estimates of h^+(x) and h^-(x)"""
    return tuple(canonical_height(s, x, target_error, **kwargs) for s in silverman_systems(system))

@dataclass
class SilvermanRatio:
    ratio: float
    expected: float
    error_radius: float
    plus: HeightEstimate
    minus: HeightEstimate
    height: HeightEstimate

def wheeler_silverman_ratio(system, x, target_error=TARGET_ERROR, **kwargs):
    """(h^+ + h^-) / h^_L, which is 1 + sqrt 3 off finite orbits"""
    height = canonical_height(system, x, target_error, **kwargs)
    if height.closed_orbit is not None or abs(height.value) <= height.error_radius:
        raise ZeroDenominatorError('h^_L({}) is indistinguishable from 0'.format(x))
    plus, minus = silverman_heights(system, x, target_error, **kwargs)
    numerator = plus.value + minus.value
    ratio = numerator / height.value
    radius = (plus.error_radius + minus.error_radius + abs(ratio) * height.error_radius) \
        / (abs(height.value) - height.error_radius)
    return SilvermanRatio(ratio, float(EXPECTED_RATIO), radius, plus, minus, height)

def factor_canonical_heights(system, x, target_error=TARGET_ERROR, **kwargs):
    """Canonical heights of L1 and L2 on a Wheeler surface, with an error radius

    L1 = (alpha E+ + E-) / (alpha^2 - 1) and L2 = (E+ + alpha E-) / (alpha^2 - 1)."""
    plus, minus = silverman_heights(system, x, target_error, **kwargs)
    alpha = float(ALPHA)
    scale = alpha * alpha - 1
    h1 = (alpha * plus.value + minus.value) / scale
    h2 = (plus.value + alpha * minus.value) / scale
    radius = (alpha + 1) * (plus.error_radius + minus.error_radius) / scale
    return h1, h2, radius

def check_wheeler_picard(system, x, target_error=TARGET_ERROR, **kwargs):
    """Residual of h^_L1(s2 x) = -h^_L1(x) + 4 h^_L2(x), with its allowance"""
    h1, h2, radius = factor_canonical_heights(system, x, target_error, **kwargs)
    image_h1, _, image_radius = factor_canonical_heights(system, system.evaluate(1, x), target_error, **kwargs)
    residual = abs(image_h1 - (-h1 + 4 * h2))
    return residual, image_radius + 5 * radius

from dynheight.orbits import forward_orbit  # noqa: E402
