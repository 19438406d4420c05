from .__init__ import EvaluationCase
from dynheight.canonical import compute_discrepancy_bound
from dynheight.description import system_from_description
import numpy as np

SYSTEMS = {
    'power2': {'type': 'poly_pn', 'dimension': 1,
               'maps': [{'polys': [[{'c': '1', 'e': [2, 0]}], [{'c': '1', 'e': [0, 2]}]]}]},
    'pair_p1': {'type': 'poly_pn', 'dimension': 1,
                'maps': [{'polys': [[{'c': '1', 'e': [2, 0]}, {'c': '1', 'e': [0, 2]}],
                                    [{'c': '1', 'e': [0, 2]}]]},
                         {'polys': [[{'c': '1', 'e': [2, 0]}], [{'c': '1', 'e': [0, 2]}]]}]},
    'k3_222': {'type': 'k3_222', 'equation': 'x*(1-x) + y*(1-y) + z*(1-z) - x*y*z',
               'base_points': ['((0:1),(0:1),(0:1))', '((0:1),(3:5),(6:5))']},
    'lattes': {'type': 'lattes', 'a': '0', 'b': '1'},
    'henon': {'type': 'henon', 'a': '1', 'b': '0'},
}

def load(name):
    return system_from_description(SYSTEMS[name])

class BaseEvaluationCase(EvaluationCase):
    def __init__(self):
        super().__init__()
        self.repeat = 3
        self.number = 1
        self.seed = 0

    def setUp(self, scenario):
        self.rng = np.random.default_rng(self.seed)

class HeightEvaluationCase(BaseEvaluationCase):
    """Cases on one system whose discrepancy bound is computed once"""
    system_name = None

    def setUp(self, scenario):
        super().setUp(scenario)
        self.system = load(self.system_name)
        self.bound = compute_discrepancy_bound(self.system)

class SlowEvaluationCase(BaseEvaluationCase):
    def __init__(self):
        super().__init__()
        self.repeat = 2
