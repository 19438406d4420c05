"""Default budgets and tolerances"""

TARGET_ERROR = 1e-8

# forward orbits and canonical-height trees
NODE_BUDGET = 10**4
DEPTH_CAP = 64
DIGIT_BUDGET = 10**6  # bits per coordinate

# empirical discrepancy constants
SAMPLE_SIZE = 10**4
SAMPLE_WALK_DEPTH = 6
SAFETY_FACTOR = 2.0

# randomized surface construction
RETRY_CAP = 50

# potential theory on P^1
GRID_RESOLUTION = 256
GRID_EXTENT = 1.5
INTERPOLATION_SLACK = 0.05
