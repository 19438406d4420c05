"""Canonical heights for dynamical systems of several morphisms

A system (X; f_1, ..., f_k) carries a height functional h_L, a weighted sum
of the naive heights of the factors of X, and a real degree d > k with
f_1^*L + ... + f_k^*L = dL."""
from dynheight.arith import factor_heights

import json
import mmh3

class DynamicalSystem:
    """Dynamical system base class"""
    k = None
    degree = None
    dims = None
    weights = None
    base_points = ()

    # False for systems that only satisfy a height inequality
    line_bundle = True

    def evaluate(self, i, x):
        """Image of the point x under the i-th map"""
        raise NotImplementedError

    def contains(self, x):
        """Whether x lies on the state space"""
        return x.dims == tuple(self.dims)

    def sample_points(self, rng, count, around=()):
        """Points of the state space for empirical discrepancy estimates"""
        raise NotImplementedError

    def describe(self):
        """JSON-serializable description of the system"""
        raise NotImplementedError

    def height(self, x):
        """Height functional h_L(x) = sum_j r_j h_j(x)"""
        return sum(r * h for r, h in zip(self.weights, factor_heights(x)))

    def fingerprint(self):
        """128-bit fingerprint of the description, used as the system id"""
        description = json.dumps(self.describe(), sort_keys=True, separators=(',', ':'))
        return '{:032x}'.format(mmh3.hash128(description.encode(), signed=False))
