from .config import BaseEvaluationCase, SlowEvaluationCase
from dynheight.export import write_gnuplot_script, write_table
from dynheight.measures import (SILVERMAN_LAMBDA, DiscreteMeasure, P1System, binomial_current_claim,
        equidistribution_table, iterate_potential, measure_from_potential, verify_binomial_identity)
from dynheight.systems import LattesSystem
import numpy as np
import os

RESULTS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'results')

class GreenPotentialEvaluation(SlowEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [128, 256, 512]
        self.iterations = 40

    def setUp(self, scenario):
        super().setUp(scenario)
        self.system = P1System.quadratic(0)
        self.resolution = scenario

    def evaluate_potential(self):
        self.potential = iterate_potential(self.system, self.iterations, resolution=self.resolution)

    def accuracy(self, scenario):
        z = self.potential.mesh()
        away = np.abs(np.abs(z) - 1) > 0.05
        error = np.abs(self.potential.values[0] - np.log(np.maximum(np.abs(z), 1)))[away].max()
        measure = measure_from_potential(self.potential)
        radius = np.abs(measure.points)
        annulus = float(measure.masses[(radius >= 0.9) & (radius <= 1.1)].sum())
        return {'sup_error': float(error), 'annulus_mass': annulus, 'raw_mass': measure.raw_mass,
                'contraction_ok': self.potential.contraction_ok}

class EquidistributionEvaluation(SlowEvaluationCase):
    def __init__(self):
        super().__init__()
        self.repeat = 1
        self.scenarios = ['z2', 'lattes']
        self.depths = {'z2': [6, 8, 10], 'lattes': [4, 6, 8]}
        self.base_points = {'z2': 1, 'lattes': 5}

    def setUp(self, scenario):
        super().setUp(scenario)
        if scenario == 'z2':
            self.system = P1System.quadratic(0)
            self.reference = DiscreteMeasure.uniform_circle(2**16)
        else:
            self.system = P1System.from_system(LattesSystem(0, 1))
            self.reference = measure_from_potential(iterate_potential(self.system, 30, resolution=512))
        self.name = scenario

    def evaluate_table(self):
        self.rows = equidistribution_table(self.system, self.base_points[self.name], self.depths[self.name],
                                           self.reference)

    def accuracy(self, scenario):
        os.makedirs(RESULTS, exist_ok=True)
        path = os.path.join(RESULTS, 'equidistribution_{}.csv'.format(scenario))
        write_table(path, ['depth', 'statistic'], self.rows)
        write_gnuplot_script(path, 'table', title=scenario)
        statistics = [s for _, s in self.rows]
        result = {'statistic_{}'.format(j): s for j, s in enumerate(statistics)}
        result['decreasing'] = all(a > b for a, b in zip(statistics, statistics[1:]))
        return result

class BinomialClaimEvaluation(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.scenarios = [10, 20, 40, 80]

    def setUp(self, scenario):
        super().setUp(scenario)
        self.n_max = scenario

    def evaluate_claim(self):
        self.rows = binomial_current_claim('one', None, self.n_max, SILVERMAN_LAMBDA)

    def evaluate_identity(self):
        self.verified = all(verify_binomial_identity(n) for n in range(min(self.n_max, 20) + 1))

    def accuracy(self, scenario):
        residuals = [r for _, _, r in self.rows]
        return {'residual': residuals[-1], 'identity_verified': self.verified,
                'decreasing_from_5': all(a >= b for a, b in zip(residuals[5:], residuals[6:]))}
