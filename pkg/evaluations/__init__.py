class EvaluationCase:
    def __init__(self):
        self.scenarios = []

        self.repeat = 3
        self.number = 1

    def setUp(self, scenario=None):
        raise NotImplementedError

    def accuracy(self, scenario):
        """Accuracy columns of a scenario, merged into its row of the results file"""
        return {}
