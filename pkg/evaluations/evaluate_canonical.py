from .config import HeightEvaluationCase, SlowEvaluationCase, load
from dynheight.arith import normalize, point_from_affine
from dynheight.canonical import (EXPECTED_RATIO, canonical_height, check_functional_equation,
        compute_discrepancy_bound, wheeler_silverman_ratio)
from dynheight.k3 import build_wheeler_through
from dynheight.orbits import forward_orbit

class K3OriginOrbitEvaluation(HeightEvaluationCase):
    system_name = 'k3_222'

    def __init__(self):
        super().__init__()
        self.scenarios = ['origin']

    def setUp(self, scenario):
        super().setUp(scenario)
        self.point = point_from_affine([0, 0, 0], (1, 1, 1))

    def evaluate_orbit(self):
        forward_orbit(self.system, self.point)

    def evaluate_height(self):
        canonical_height(self.system, self.point, bound=self.bound)

    def accuracy(self, scenario):
        report = forward_orbit(self.system, self.point)
        estimate = canonical_height(self.system, self.point, bound=self.bound)
        return {'nodes': len(report.nodes), 'status': report.status, 'height': estimate.value}

class HeightPrecisionEvaluation(HeightEvaluationCase):
    system_name = 'pair_p1'

    def __init__(self):
        super().__init__()
        self.scenarios = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]

    def setUp(self, scenario):
        super().setUp(scenario)
        self.point = normalize([[2, 3]])
        self.target_error = scenario

    def evaluate_height(self):
        canonical_height(self.system, self.point, self.target_error, bound=self.bound)

    def accuracy(self, scenario):
        estimate = canonical_height(self.system, self.point, scenario, bound=self.bound)
        return {'value': estimate.value, 'error_radius': estimate.error_radius,
                'iterations': estimate.iterations, 'nodes_visited': estimate.orbit_nodes_visited}

class FunctionalEquationEvaluation(SlowEvaluationCase):
    def __init__(self):
        super().__init__()
        self.repeat = 1
        self.scenarios = ['power2', 'pair_p1', 'k3_222']
        self.target_error = 1e-6
        self.count = 100

    def setUp(self, scenario):
        super().setUp(scenario)
        self.system = load(scenario)
        self.points = self.system.sample_points(self.rng, self.count)
        self.bound = compute_discrepancy_bound(self.system)

    def evaluate_residuals(self):
        self.residuals = [check_functional_equation(self.system, x, self.target_error, bound=self.bound)
                          for x in self.points]

    def accuracy(self, scenario):
        allowance = (self.system.k + self.system.degree) * self.target_error
        return {'max_residual': max(self.residuals), 'allowance': allowance,
                'violations': sum(r > allowance for r in self.residuals)}

class WheelerRatioEvaluation(SlowEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [1e-2, 1e-3, 1e-4]

    def setUp(self, scenario):
        super().setUp(scenario)
        self.target_error = scenario
        self.point = normalize([[1, 2, 3], [1, -1, 2]])
        self.system = build_wheeler_through(self.point, seed=7)

    def evaluate_ratio(self):
        self.result = wheeler_silverman_ratio(self.system, self.point, self.target_error)

    def accuracy(self, scenario):
        deviation = abs(self.result.ratio - float(EXPECTED_RATIO))
        return {'ratio': self.result.ratio, 'deviation': deviation, 'error_radius': self.result.error_radius,
                'within_radius': deviation <= self.result.error_radius}
