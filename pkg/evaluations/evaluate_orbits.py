from .config import BaseEvaluationCase, load
from dynheight.arith import normalize
from dynheight.local import s_operator_fixed_point
from dynheight.orbits import TransitionMatrix, find_periodic_points, henon_inequality_check, henon_sample, perron_vector
import math
import numpy as np

def random_transition_matrix(rng, n, k, positive=False):
    columns = []
    for _ in range(n):
        if positive and k >= n:
            column = 1 + rng.multinomial(k - n, [1 / n] * n)
        else:
            column = rng.multinomial(k, [1 / n] * n)
        columns.append(column)
    return TransitionMatrix(tuple(tuple(int(columns[j][i]) for j in range(n)) for i in range(n)), k)

def power_iteration(A, steps=2000):
    matrix = np.array(A.entries, dtype=float) / A.k
    c = np.full(A.n, 1 / A.n)
    for _ in range(steps):
        c = matrix @ c
    return c / c.sum()

class PerronVectorEvaluation(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [2, 4, 8]
        self.count = 1000

    def setUp(self, scenario):
        super().setUp(scenario)
        self.matrices = [random_transition_matrix(self.rng, int(self.rng.integers(1, scenario + 1)),
                                                  int(self.rng.integers(1, 6)))
                         for _ in range(self.count)]
        # strictly positive matrices need k >= n
        self.positive = [random_transition_matrix(self.rng, n, 5, positive=True)
                         for n in self.rng.integers(1, min(scenario, 5) + 1, size=100)]

    def evaluate_perron(self):
        for A in self.matrices:
            perron_vector(A)

    def accuracy(self, scenario):
        exact = 0
        for A in self.matrices:
            c = perron_vector(A)
            if sum(c) == 1 and min(c) >= 0 and \
                    [sum(A.entries[i][j] * c[j] for j in range(A.n)) for i in range(A.n)] == [A.k * v for v in c]:
                exact += 1
        deviation = max(float(np.abs(np.array([float(v) for v in perron_vector(A)]) - power_iteration(A)).max())
                        for A in self.positive)
        return {'exact': exact, 'count': self.count, 'oracle_deviation': deviation}

class SOperatorEvaluation(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [1, 2, 4]
        self.count = 500

    def setUp(self, scenario):
        super().setUp(scenario)
        self.instances = []
        for _ in range(self.count):
            n, k = int(self.rng.integers(1, 17)), int(self.rng.integers(1, 4))
            d = k + scenario
            images = {x: [int(z) for z in self.rng.integers(0, n, size=k)] for x in range(n)}
            gamma = {x: float(self.rng.uniform(-1, 1)) for x in range(n)}
            self.instances.append((list(range(n)), images, gamma, d))

    def evaluate_solve(self):
        self.solutions = [s_operator_fixed_point(*instance) for instance in self.instances]

    def accuracy(self, scenario):
        deviation = max(max(abs(s.exact[x] - s.iterated[x]) for x in s.exact) for s in self.solutions)
        return {'max_deviation': deviation,
                'bound_failures': sum(not s.sup_bound_holds for s in self.solutions),
                'contraction_violations': sum(s.contraction_violations for s in self.solutions)}

class PeriodicPointsEvaluation(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [2, 3, 5, 10]

    def setUp(self, scenario):
        super().setUp(scenario)
        self.system = load('power2')
        self.bound = math.log(scenario)

    def evaluate_search(self):
        self.points = find_periodic_points(self.system, self.bound)

    def accuracy(self, scenario):
        return {'orbits': len(self.points), 'representatives': ' '.join(str(x) for x in self.points)}

class HenonMarginEvaluation(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [1000, 10000]

    def setUp(self, scenario):
        super().setUp(scenario)
        self.system = load('henon')
        self.points = henon_sample(scenario, seed=self.seed)

    def evaluate_margins(self):
        self.report = henon_inequality_check(self.system, self.points)

    def accuracy(self, scenario):
        populated = [b for b in self.report.buckets if b[2]]
        regression = henon_inequality_check(self.system, [normalize([[1, 2, 1]])]).minimum
        return {'minimum': self.report.minimum, 'top_bucket_minimum': populated[-1][3],
                'bounded_below': self.report.bounded_below,
                'regression_error': abs(regression - (math.log(5) - 2.5 * math.log(2)))}
