"""
Comparing outlier rankings with a weighted Kendall tau
======================================================

Two detectors can disagree a lot about which inliers are "least normal"
and still agree on the handful of points that matter. The weighted tau
used throughout the package charges more for disagreements near the top
of a ranking.
"""

import numpy as np

from soul import weighted_kendall_tau, weighted_kendall_tau_bruteforce

rng = np.random.default_rng(0)
scores = rng.permutation(50).astype(float)
order = np.argsort(-scores)

# swap the two highest-scored points
top_swap = scores.copy()
top_swap[order[[0, 1]]] = top_swap[order[[1, 0]]]

# swap the two lowest-scored points
bottom_swap = scores.copy()
bottom_swap[order[[-1, -2]]] = bottom_swap[order[[-2, -1]]]

print("swap at the top:   ", round(weighted_kendall_tau(scores, top_swap), 4))
print("swap at the bottom:", round(weighted_kendall_tau(scores, bottom_swap), 4))

# only the ordering matters, so any increasing transform leaves tau unchanged
other = scores + rng.normal(scale=10, size=50)
print("tau(a, b)          ", round(weighted_kendall_tau(scores, other), 4))
print("tau(exp(a), b)     ", round(weighted_kendall_tau(np.exp(scores / 10), other), 4))

# the fast route and the pair-enumerating route agree
print("brute force        ", round(weighted_kendall_tau_bruteforce(scores, other), 4))
