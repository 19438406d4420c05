"""Module for forward orbits, periodicity and transition matrices

A point x is F-periodic when its forward orbit C(x) is finite and has no
proper nonempty subset closed under every map.  Closed subsets of C(x) are
unions of sets closed under reachability, so x is F-periodic exactly when
the orbit multigraph is strongly connected."""
from dynheight.arith import enumerate_bounded, normalize
from dynheight.config import DIGIT_BUDGET, NODE_BUDGET
from dynheight.errors import DynHeightError, OrbitEvaluationError

import enum
import logging
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)

CLOSED = 'closed'
BUDGET_EXCEEDED = 'budget_exceeded'

@dataclass
class OrbitReport:
    """Deduplicated forward orbit with its edges (from, map index, to)"""
    nodes: list
    edges: list
    status: str
    visit_order: list = field(default_factory=list)
    reason: str = None

    @property
    def closed(self):
        return self.status == CLOSED

    def as_dict(self):
        return {'status': self.status, 'reason': self.reason,
                'nodes': [str(x) for x in self.nodes],
                'edges': [list(e) for e in self.edges],
                'visit_order': list(self.visit_order)}

def _images(system, x):
    images = []
    for i in range(system.k):
        try:
            images.append(system.evaluate(i, x))
        except DynHeightError as e:
            raise OrbitEvaluationError(x, i, e) from e
    return images

def forward_orbit(system, x, budget=NODE_BUDGET, *, digit_budget=DIGIT_BUDGET,
                  height_cutoff=None, threads=1):
    """Breadth-first closure of x under all maps of the system

    Stops with status budget_exceeded when the orbit exceeds the node budget,
    a coordinate exceeds digit_budget bits, or |h_L| exceeds height_cutoff.
    With threads > 1 the images of a frontier are computed in parallel; nodes
    are inserted in a fixed order, so reports do not depend on threads."""
    if budget < 1:
        raise ValueError('node budget must be at least 1')
    nodes, edges = [x], []
    index = {x: 0}

    def exceeded(reason):
        logger.debug('orbit of %s stopped after %d nodes: %s', x, len(nodes), reason)
        return OrbitReport(nodes, edges, BUDGET_EXCEEDED, list(range(len(nodes))), reason)

    if height_cutoff is not None and abs(system.height(x)) > height_cutoff:
        return exceeded('height')
    frontier = [0]
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while frontier:
            points = [nodes[j] for j in frontier]
            if executor is not None:
                all_images = list(executor.map(lambda y: _images(system, y), points))
            else:
                all_images = [_images(system, y) for y in points]
            next_frontier = []
            for j, images in zip(frontier, all_images):
                for i, z in enumerate(images):
                    if z not in index:
                        if z.max_bits() > digit_budget:
                            return exceeded('digits')
                        if height_cutoff is not None and abs(system.height(z)) > height_cutoff:
                            return exceeded('height')
                        if len(nodes) >= budget:
                            return exceeded('nodes')
                        index[z] = len(nodes)
                        nodes.append(z)
                        next_frontier.append(index[z])
                    edges.append((j, i, index[z]))
            frontier = next_frontier
    finally:
        if executor is not None:
            executor.shutdown()
    return OrbitReport(nodes, edges, CLOSED, list(range(len(nodes))))

class Verdict(enum.Enum):
    PERIODIC = 'periodic'
    NOT_PERIODIC = 'not_periodic'
    BUDGET_EXCEEDED = 'budget_exceeded'

def _components(report):
    n = len(report.nodes)
    rows = [e[0] for e in report.edges]
    cols = [e[2] for e in report.edges]
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return connected_components(graph, directed=True, connection='strong')

def closed_sub_orbit(report):
    """Nodes of a proper closed subset of a closed orbit, or None if there is none

    The subset returned is a strongly connected component with no edge
    leaving it."""
    if not report.closed:
        raise ValueError('the orbit is not closed')
    count, labels = _components(report)
    if count == 1:
        return None
    leaving = {labels[a] for a, _, b in report.edges if labels[a] != labels[b]}
    sink = min(c for c in range(count) if c not in leaving)
    return [x for x, label in zip(report.nodes, labels) if label == sink]

def orbit_verdict(report):
    """A closed orbit is F-periodic exactly when its graph is strongly connected"""
    if not report.closed:
        return Verdict.BUDGET_EXCEEDED
    count, _ = _components(report)
    return Verdict.PERIODIC if count == 1 else Verdict.NOT_PERIODIC

def is_f_periodic(system, x, budget=NODE_BUDGET, **kwargs):
    return orbit_verdict(forward_orbit(system, x, budget, **kwargs))

def _periodic_height_cutoff(system):
    """Height above which no point lies on a finite orbit, or None"""
    if not system.line_bundle:
        return None
    from dynheight.canonical import closure_cutoff, compute_discrepancy_bound
    return closure_cutoff(system, compute_discrepancy_bound(system))

def find_periodic_points(system, B, budget=NODE_BUDGET, **kwargs):
    """One representative, the minimal node, of each F-periodic orbit meeting height <= B"""
    cutoff = _periodic_height_cutoff(system)
    seen = set()
    representatives = []
    for x in enumerate_bounded(system.dims, B):
        if x in seen or not system.contains(x):
            continue
        try:
            report = forward_orbit(system, x, budget, height_cutoff=cutoff, **kwargs)
        except OrbitEvaluationError as e:
            logger.debug('skipping %s: %s', x, e)
            continue
        if not report.closed:
            continue
        count, _ = _components(report)
        if count == 1:
            seen.update(report.nodes)
            representatives.append(min(report.nodes, key=lambda y: y.sort_key()))
    return sorted(representatives, key=lambda y: y.sort_key())

@dataclass(frozen=True)
class TransitionMatrix:
    """a_ij counts the maps sending node j to node i; every column sums to k"""
    entries: tuple
    k: int

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError('transition matrix is not square')
        if any(a < 0 for row in self.entries for a in row):
            raise ValueError('transition matrix has negative entries')
        for j in range(n):
            if sum(row[j] for row in self.entries) != self.k:
                raise ValueError('column {} does not sum to {}'.format(j, self.k))

    @property
    def n(self):
        return len(self.entries)

    @classmethod
    def from_orbit(cls, report, k):
        if not report.closed:
            raise ValueError('the orbit is not closed')
        n = len(report.nodes)
        entries = [[0] * n for _ in range(n)]
        for j, _, i in report.edges:
            entries[i][j] += 1
        return cls(tuple(tuple(row) for row in entries), k)

def _normalized_last_solution(entries, k):
    """Eigenvector with last entry 1 from B c' = (a_1n, ..., a_(n-1)n), or None if B is singular"""
    n = len(entries)
    if n == 1:
        return [Fraction(1)]
    B = DomainMatrix([[QQ((k if i == j else 0) - entries[i][j]) for j in range(n - 1)]
                      for i in range(n - 1)], (n - 1, n - 1), QQ)
    if B.det() == 0:
        return None
    rhs = DomainMatrix([[QQ(entries[i][n - 1])] for i in range(n - 1)], (n - 1, 1), QQ)
    solution = B.lu_solve(rhs).to_Matrix()
    return [Fraction(int(v.p), int(v.q)) for v in solution] + [Fraction(1)]

def perron_vector(A):
    """Nonnegative rational c with A c = k c and sum c_i = 1

    When the eigenspace is larger than a line, the result is the uniform
    average of the normalized eigenvectors of the closed classes."""
    entries, k, n = A.entries, A.k, A.n
    c = _normalized_last_solution(entries, k)
    if c is None:
        rows = [i for i in range(n) for j in range(n) if entries[i][j] and i != j]
        cols = [j for i in range(n) for j in range(n) if entries[i][j] and i != j]
        graph = csr_matrix((np.ones(len(rows)), (cols, rows)), shape=(n, n))
        count, labels = connected_components(graph, directed=True, connection='strong')
        leaving = {labels[j] for j, i in zip(cols, rows) if labels[j] != labels[i]}
        closed_classes = [[j for j in range(n) if labels[j] == label]
                          for label in range(count) if label not in leaving]
        c = [Fraction(0)] * n
        for members in closed_classes:
            block = [[entries[i][j] for j in members] for i in members]
            vector = _normalized_last_solution(block, k)
            total = sum(vector)
            for j, v in zip(members, vector):
                c[j] += v / total / len(closed_classes)
        logger.debug('eigenspace of dimension %d, averaging closed classes', len(closed_classes))
    total = sum(c)
    return [v / total for v in c]

def henon_sample(count, bound=100, seed=0, denominator_bound=1):
    """Affine rational points (x : y : 1) with |numerators| <= bound"""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        x, y = (Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, denominator_bound + 1)))
                for _ in range(2))
        points.append(normalize([[x, y, 1]]))
    return points

@dataclass
class MarginReport:
    """Margins sum_i h(f_i x) - d h(x) over a sample, bucketed by h(x)

    Each bucket is (low, high, count, min, mean)."""
    minimum: float
    mean: float
    buckets: list
    skipped: int
    evaluated: int
    slack: float = 1.0

    @property
    def bounded_below(self):
        """Margins of the upper half of the populated buckets stay within slack of the lower half

        Comparing the top bucket against the global minimum always holds, so
        the upper half of the populated buckets is compared against the lower
        half instead, with slack 1.0 by default."""
        populated = [b for b in self.buckets if b[2]]
        if len(populated) < 2:
            return bool(populated)
        half = len(populated) // 2
        return min(b[3] for b in populated[half:]) >= min(b[3] for b in populated[:half]) - self.slack

    def as_dict(self):
        return {'minimum': self.minimum, 'mean': self.mean, 'skipped': self.skipped,
                'evaluated': self.evaluated, 'bounded_below': self.bounded_below,
                'buckets': [list(b) for b in self.buckets]}

def henon_inequality_check(system, points, buckets=8):
    """Margins h(phi x) + h(phi^-1 x) - (5/2) h(x) of a Henon system over points

    Points where a map is undefined are skipped and counted."""
    rows, skipped = [], 0
    for x in points:
        if not system.contains(x):
            skipped += 1
            continue
        try:
            images = [system.evaluate(i, x) for i in range(system.k)]
        except DynHeightError:
            skipped += 1
            continue
        h = system.height(x)
        rows.append((h, sum(system.height(z) for z in images) - system.degree * h))
    if not rows:
        raise ValueError('no point of the sample could be evaluated')
    heights = np.array([h for h, _ in rows])
    margins = np.array([m for _, m in rows])
    edges = np.linspace(heights.min(), heights.max(), buckets + 1)
    which = np.clip(np.searchsorted(edges, heights, side='right') - 1, 0, buckets - 1)
    table = []
    for b in range(buckets):
        selected = margins[which == b]
        if len(selected):
            table.append((float(edges[b]), float(edges[b + 1]), int(len(selected)),
                          float(selected.min()), float(selected.mean())))
        else:
            table.append((float(edges[b]), float(edges[b + 1]), 0, None, None))
    return MarginReport(float(margins.min()), float(margins.mean()), table, skipped, len(rows))
