"""
Culling by weighted degree
==========================

Six components with the pairwise weighted-tau similarities below. Four
agree strongly, one is lukewarm and the last agrees with nobody. Cull
sums each row and drops the lowest-scoring fifth of the ensemble.
"""

import numpy as np

from soul import RankGraph, cull_select

names = [1, 2, 3, 4, 19, 20]
w = np.array([
    [0.00, 0.92, 0.91, 0.91, 0.55, 0.38],
    [0.92, 0.00, 0.93, 0.89, 0.52, 0.38],
    [0.91, 0.93, 0.00, 0.90, 0.53, 0.39],
    [0.91, 0.89, 0.90, 0.00, 0.55, 0.41],
    [0.55, 0.52, 0.53, 0.55, 0.00, 0.58],
    [0.38, 0.38, 0.39, 0.41, 0.58, 0.00],
])

result = cull_select(RankGraph.complete(w))
for name, degree in zip(names, result.diagnostics):
    print(f"component {name:>2}: weighted degree {degree:.2f}")

# floor(0.2 * 6) = 1 component goes
print("kept:", [names[i] for i in result.selected])
