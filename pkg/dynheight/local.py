"""Module for local canonical heights at the places of Q

For a polynomial system of P^N and a place v, the local Green function of a
lift x~ of x is

    g_v(x~) = log ||x~||_v + psi_v(x),
    psi_v(x) = sum_m d^(-m-1) sum_{f in F_m} eps_v(f(x)),
    eps_v(y) = sum_i log ||F_i(y~)||_v - d log ||y~||_v,

where eps_v does not depend on the lift y~.  The scaling law
g_v(c x~) = g_v(x~) + log |c|_v holds by construction, and on coprime lifts
the g_v sum to the canonical height.  Only the archimedean place and the
primes dividing the certificate denominators contribute."""
from dynheight.arith import INFINITY, Place, ProjPoint, local_log_norm, normalize, normalize_factor, ord_p
from dynheight.canonical import (OrbitSeries, closure_cutoff, compute_discrepancy_bound,
        map_constants)
from dynheight.config import (DEPTH_CAP, DIGIT_BUDGET, NODE_BUDGET, SAFETY_FACTOR,
        SAMPLE_SIZE, TARGET_ERROR)
from dynheight.errors import DomainNotClosedError, DynHeightError, OrbitEvaluationError
from dynheight.orbits import forward_orbit

import logging
import math
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from sympy import factorint

logger = logging.getLogger(__name__)

@dataclass
class LocalHeightEstimate:
    place: Place
    value: float
    error_radius: float
    iterations: int
    certified: bool = True
    truncated: bool = False

    def as_dict(self):
        return {'place': str(self.place), 'value': self.value, 'error_radius': self.error_radius,
                'iterations': self.iterations, 'certified': self.certified,
                'truncated': self.truncated}

def _require_polynomial(system):
    if getattr(system, 'poly_maps', None) is None:
        raise ValueError('local heights need a polynomial system of P^N')

class LocalOrbitSeries(OrbitSeries):
    """Series for psi_v, with the gcd of every explored image recorded"""

    def __init__(self, system, place, C, **kwargs):
        super().__init__(system, C, **kwargs)
        self.place = place
        self.gcds = set()

    def initial(self, x):
        return 0.0

    def entry(self, y):
        lift = y.coords[0]
        raw = []
        for i in range(self.system.k):
            try:
                raw.append(self.system.apply_lift(i, lift))
            except DynHeightError as e:
                raise OrbitEvaluationError(y, i, e) from e
        weight = self.system.weights[0]
        eps = weight * (sum(local_log_norm(r, self.place) for r in raw)
                        - self.system.degree * local_log_norm(lift, self.place))
        for r in raw:
            g = math.gcd(*r)
            if g > 1:
                self.gcds.add(g)
        return eps, [ProjPoint((normalize_factor(r),)) for r in raw]

def local_discrepancy_bound(system, place, sample_size=SAMPLE_SIZE, seed=0):
    """(C_v, certified) with |eps_v| <= C_v

    Certified from the coefficient norms and certificates: at infinity
    eps_v lies in [sum log(D_i / c_i), sum log U_i] and at a prime p in
    [-sum ord_p(D_i) log p, 0]."""
    _require_polynomial(system)
    weight = abs(system.weights[0])
    constants = [map_constants(f) if f.morphism else None for f in system.poly_maps]
    if all(c is not None for c in constants):
        if place.archimedean:
            upper = sum(math.log(c.coefficient_norm) for c in constants)
            lower = sum(math.log(c.denominator) - math.log(c.certificate_norm) for c in constants)
            return weight * max(abs(upper), abs(lower)), True
        return weight * sum(ord_p(c.denominator, place.p) for c in constants) * math.log(place.p), True
    rng = np.random.default_rng(seed)
    series = LocalOrbitSeries(system, place, 0.0)
    worst = 0.0
    for y in system.sample_points(rng, sample_size):
        try:
            worst = max(worst, abs(series.entry(y)[0]))
        except DynHeightError:
            continue
    logger.warning('uncertified local discrepancy bound at %s', place)
    return SAFETY_FACTOR * worst, False

def contributing_places(system, x=None, depth=6, node_budget=256):
    """The archimedean place and every prime where eps_v can be nonzero

    Without certificates the primes are read off the gcds of the images
    explored from x, which needs x."""
    _require_polynomial(system)
    primes = set()
    constants = [map_constants(f) if f.morphism else None for f in system.poly_maps]
    if all(c is not None for c in constants):
        for c in constants:
            primes.update(factorint(c.denominator))
    else:
        if x is None:
            raise ValueError('a point is needed to find the places of an uncertified system')
        series = LocalOrbitSeries(system, INFINITY, 0.0)
        level = [x]
        for _ in range(depth):
            level = [z for y in level for z in series.entry(y)[1]][:node_budget]
        for g in series.gcds:
            primes.update(factorint(g))
    return [INFINITY] + [Place.finite(p) for p in sorted(primes)]

@dataclass
class SOperatorSolution:
    """Solutions of gamma(x) = sum_i gamma^(f_i x) - d gamma^(x) on a finite domain"""
    exact: dict
    iterated: dict
    iterations: int
    contraction_violations: int
    sup_bound_holds: bool

def s_operator_fixed_point(domain, images, gamma, d, tolerance=1e-13, max_iterations=100000, initial=None):
    """Fixed point gamma^ of S delta = (sum_i delta o f_i - gamma) / d on a closed finite domain

    images maps every node to the list of its k images.  The solution is
    computed by an exact linear solve and by S-iteration from initial (zero
    by default); both are returned, with the observed contraction and the
    sup-norm bound (2d+1)/(d-k) ||gamma|| checked."""
    domain = list(domain)
    index = {x: j for j, x in enumerate(domain)}
    n = len(domain)
    k = len(images[domain[0]]) if n else 0
    table = np.zeros((n, k), dtype=int)
    for x in domain:
        if len(images[x]) != k:
            raise ValueError('node {} has {} images, expected {}'.format(x, len(images[x]), k))
        for i, z in enumerate(images[x]):
            if z not in index:
                raise DomainNotClosedError('{} maps {} outside the domain'.format(x, z))
            table[index[x], i] = index[z]
    if not d > k:
        raise ValueError('degree {} does not exceed {}'.format(d, k))
    g = np.array([float(gamma[x]) for x in domain])

    operator = -d * np.eye(n)
    for i in range(k):
        np.add.at(operator, (np.arange(n), table[:, i]), 1.0)
    exact = np.linalg.solve(operator, g)

    delta = np.zeros(n) if initial is None else np.array([float(initial[x]) for x in domain])
    previous_step = None
    violations = 0
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        updated = (delta[table].sum(axis=1) - g) / d
        step = np.abs(updated - delta).max(initial=0.0)
        if previous_step is not None and step > k / d * previous_step * (1 + 1e-9) + 1e-15:
            violations += 1
            logger.warning('S-iteration step %d grew from %.3g to %.3g', iterations, previous_step, step)
        delta, previous_step = updated, step
        if step <= tolerance:
            break
    else:
        logger.warning('S-iteration stopped after %d iterations at step %.3g', max_iterations, step)

    bound = (2 * d + 1) / (d - k) * np.abs(g).max(initial=0.0)
    holds = bool(np.abs(exact).max(initial=0.0) <= bound * (1 + 1e-12) + 1e-300)
    if not holds:
        logger.warning('sup-norm bound %.6g violated', bound)
    return SOperatorSolution({x: float(v) for x, v in zip(domain, exact)},
                             {x: float(v) for x, v in zip(domain, delta)},
                             iterations, violations, holds)

def local_green(system, lift, place, target_error=TARGET_ERROR, *, depth_cap=DEPTH_CAP,
                node_budget=NODE_BUDGET, digit_budget=DIGIT_BUDGET, rounds=10):
    """Local Green function g_v of a nonzero lift at a place"""
    _require_polynomial(system)
    if not target_error > 0:
        raise ValueError('target error must be positive, got {}'.format(target_error))
    lift = tuple(lift)
    x = normalize([lift])
    if x.dims != system.dims:
        raise ValueError('lift {} has the wrong length'.format(lift))
    weight = system.weights[0]
    C, certified = local_discrepancy_bound(system, place)
    start = weight * local_log_norm(lift, place)
    series = LocalOrbitSeries(system, place, C, node_budget=node_budget, digit_budget=digit_budget)

    report = forward_orbit(system, x, budget=node_budget, digit_budget=digit_budget,
                           height_cutoff=closure_cutoff(system, compute_discrepancy_bound(system)))
    if report.closed:
        images = {y: [] for y in report.nodes}
        for a, _, b in report.edges:
            images[report.nodes[a]].append(report.nodes[b])
        gamma = {y: -series.entry(y)[0] for y in report.nodes}
        solution = s_operator_fixed_point(report.nodes, images, gamma, system.degree)
        return LocalHeightEstimate(place, start + solution.exact[x], 0.0, 0, True)

    threshold = target_error / 4
    for attempt in range(rounds):
        psi, radius, depth, truncated = series.evaluate(x, threshold, depth_cap)
        if radius <= target_error or truncated:
            break
        threshold /= 4
    logger.debug('g_%s(%s) = %.12g +- %.3g after %d levels', place, lift, start + psi, radius, depth)
    return LocalHeightEstimate(place, start + psi, radius, depth,
                               certified and not truncated and radius <= target_error, truncated)

@dataclass
class HeightDecomposition:
    local: dict
    total: float
    error_radius: float

    def as_dict(self):
        return {'total': self.total, 'error_radius': self.error_radius,
                'local': [e.as_dict() for _, e in sorted(self.local.items(), key=lambda item: item[0].sort_key())]}

def decompose_height(system, x, target_error=TARGET_ERROR, threads=1, **kwargs):
    """Local Green functions of the coprime lift of x at every contributing place

    Their sum is the canonical height of x."""
    _require_polynomial(system)
    if not system.contains(x):
        raise ValueError('{} is not a point of P^{}'.format(x, system.dims[0]))
    places = contributing_places(system, x)
    lift = x.coords[0]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            estimates = list(executor.map(
                lambda v: local_green(system, lift, v, target_error, **kwargs), places))
    else:
        estimates = [local_green(system, lift, v, target_error, **kwargs) for v in places]
    local = dict(zip(places, estimates))
    return HeightDecomposition(local, sum(e.value for e in estimates),
                               sum(e.error_radius for e in estimates))
