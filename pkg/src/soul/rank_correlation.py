"""Weighted Kendall tau between outlier-score vectors.

The similarity is the additive hyperbolic weighted tau: a pair of points
(i, j) contributes ``sign(a_i - a_j) * sign(b_i - b_j) * w(i, j)`` with
``w(i, j) = 1 / (rho(i) + 1) + 1 / (rho(j) + 1)``, where ``rho`` is a
zero-based rank (0 = highest score). Disagreements near the top of the
ranking therefore cost more than disagreements near the bottom. The value
is computed once with ranks taken from each argument and the two results
are averaged, so the measure is symmetric.

Two routes are provided: :func:`weighted_kendall_tau` counts discordant
pairs with a bottom-up merge sort in O(n log n), and
:func:`weighted_kendall_tau_bruteforce` enumerates every pair in O(n^2).
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateVector, LengthMismatch

__all__ = [
    "check_scores",
    "rank_positions",
    "hyperbolic_weights",
    "weighted_kendall_tau",
    "weighted_kendall_tau_bruteforce",
    "weighted_tau_matrix",
]


def check_scores(scores, name="scores"):
    """Validate a score vector and return it as a float64 array."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {s.shape}")
    if s.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 entries, got {s.shape[0]}")
    if not np.all(np.isfinite(s)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return s


def rank_positions(scores):
    """Zero-based descending ranks; equal scores are ordered by index.

    >>> rank_positions([5.0, 1.0, 3.0]).tolist()
    [0, 2, 1]
    """
    s = check_scores(scores)
    order = np.argsort(-s, kind="stable")
    ranks = np.empty(s.shape[0], dtype=np.int64)
    ranks[order] = np.arange(s.shape[0])
    return ranks


def hyperbolic_weights(scores):
    """Per-point weight ``1 / (rank + 1)`` used by the additive weigher."""
    return 1.0 / (rank_positions(scores) + 1.0)


def _dense_ranks(s):
    return np.unique(s, return_inverse=True)[1].astype(np.int64).ravel()


def _group_sizes(dense):
    """Size of the tie group each element belongs to."""
    counts = np.bincount(dense)
    return counts[dense]


class _Prepared:
    """Per-vector quantities shared by every pair the vector takes part in."""

    __slots__ = ("dense", "weights", "ties", "has_ties", "constant")

    def __init__(self, scores):
        self.dense = _dense_ranks(scores)
        self.constant = bool(self.dense.max() == 0)
        self.weights = hyperbolic_weights(scores)
        self.ties = _group_sizes(self.dense) - 1
        self.has_ties = bool(self.ties.any())


def _discordant_counts(xr, yr):
    """Per-element discordant-pair counts for a batch of rank-vector pairs.

    ``xr`` and ``yr`` are (P, n) integer arrays of dense ranks. Entry
    ``[p, i]`` of the result is the number of ``j`` with
    ``(xr[p, i] - xr[p, j]) * (yr[p, i] - yr[p, j]) < 0``.

    Rows are sorted by (x, y); the y sequence is then merge-sorted bottom-up,
    and at every level each element counts the strict inversions it forms
    with the opposite half of its block. All P rows are processed together
    by giving every (row, block) a disjoint key range.
    """
    n_pairs, n = xr.shape
    order = np.lexsort((yr, xr), axis=-1)
    seq = np.take_along_axis(yr, order, axis=1).ravel()
    ids = (order + (np.arange(n_pairs, dtype=np.int64) * n)[:, None]).ravel()
    counts = np.zeros(n_pairs * n, dtype=np.int64)
    pos = np.tile(np.arange(n, dtype=np.int64), n_pairs)
    row = np.repeat(np.arange(n_pairs, dtype=np.int64), n)

    width = 1
    while width < n:
        span = 2 * width
        n_blocks = -(-n // span)
        block = row * n_blocks + pos // span
        keys = block * n + seq
        right = (pos % span) >= width
        left = ~right
        lkeys, rkeys = keys[left], keys[right]

        # right element: left-half members of its block with a larger value
        rblock = block[right]
        end = np.searchsorted(lkeys, (rblock + 1) * n, side="left")
        first_gt = np.searchsorted(lkeys, rkeys, side="right")
        counts[ids[right]] += end - first_gt

        # left element: right-half members of its block with a smaller value
        lblock = block[left]
        start = np.searchsorted(rkeys, lblock * n, side="left")
        first_ge = np.searchsorted(rkeys, lkeys, side="left")
        counts[ids[left]] += first_ge - start

        # both halves are sorted runs, so the stable sort is a merge
        perm = np.argsort(keys, kind="stable")
        seq = seq[perm]
        ids = ids[perm]
        width = span
    return counts.reshape(n_pairs, n)


def _joint_ties(xr, yr):
    n_pairs, n = xr.shape
    key = (np.arange(n_pairs, dtype=np.int64)[:, None] * n + xr) * n + yr
    _, inv, cnt = np.unique(key.ravel(), return_inverse=True, return_counts=True)
    return (cnt[inv.ravel()] - 1).reshape(n_pairs, n)


def _tau_from_parts(weights, disc, ties_a, ties_b, ties_ab):
    """Weighted tau for each row given the reference weights of that row."""
    n = weights.shape[-1]
    total = (n - 1) * weights.sum(axis=-1)
    tied_a = (weights * ties_a).sum(axis=-1)
    tied_b = (weights * ties_b).sum(axis=-1)
    tied_ab = (weights * ties_ab).sum(axis=-1)
    discordant = (weights * disc).sum(axis=-1)
    numerator = (total + tied_ab) - (tied_a + tied_b) - 2.0 * discordant
    denominator = np.sqrt(np.maximum(total - tied_a, 0.0) * np.maximum(total - tied_b, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0, numerator / denominator, np.nan)


def _tau_batch(left, right):
    """Symmetrized tau for aligned lists of prepared vectors (NaN if degenerate)."""
    xr = np.stack([p.dense for p in left])
    yr = np.stack([p.dense for p in right])
    disc = _discordant_counts(xr, yr)
    ta = np.stack([p.ties for p in left])
    tb = np.stack([p.ties for p in right])
    any_joint = [a.has_ties and b.has_ties for a, b in zip(left, right)]
    if any(any_joint):
        tab = _joint_ties(xr, yr)
    else:
        tab = np.zeros_like(ta)
    wa = np.stack([p.weights for p in left])
    wb = np.stack([p.weights for p in right])
    tau_a = _tau_from_parts(wa, disc, ta, tb, tab)
    tau_b = _tau_from_parts(wb, disc, ta, tb, tab)
    tau = (tau_a + tau_b) / 2.0
    constant = np.array([a.constant or b.constant for a, b in zip(left, right)])
    tau[constant] = np.nan
    return tau


def _check_pair(a, b):
    a = check_scores(a, "a")
    b = check_scores(b, "b")
    if a.shape != b.shape:
        raise LengthMismatch(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def weighted_kendall_tau(a, b):
    """Symmetrized additive-hyperbolic weighted Kendall tau in O(n log n).

    Parameters
    ----------
    a, b : array_like of shape (n,)
        Finite outlier scores over the same n points, n >= 2.

    Returns
    -------
    float
        Similarity in [-1, 1]; 1 for identical orderings, -1 for reversed.

    Raises
    ------
    DegenerateVector
        If either input is constant.
    """
    a, b = _check_pair(a, b)
    tau = _tau_batch([_Prepared(a)], [_Prepared(b)])[0]
    if np.isnan(tau):
        raise DegenerateVector("weighted tau undefined for a constant score vector")
    return float(tau)


def weighted_kendall_tau_bruteforce(a, b):
    """Same quantity as :func:`weighted_kendall_tau`, enumerating all pairs."""
    a, b = _check_pair(a, b)
    iu = np.triu_indices(a.shape[0], k=1)
    sa = np.sign(a[:, None] - a[None, :])[iu]
    sb = np.sign(b[:, None] - b[None, :])[iu]

    taus = []
    for ref in (a, b):
        f = hyperbolic_weights(ref)
        w = (f[:, None] + f[None, :])[iu]
        num = np.sum(sa * sb * w)
        den = np.sqrt(np.sum(np.abs(sa) * w) * np.sum(np.abs(sb) * w))
        if den == 0:
            raise DegenerateVector("weighted tau undefined for a constant score vector")
        taus.append(num / den)
    return float((taus[0] + taus[1]) / 2.0)


def weighted_tau_matrix(scores, chunk_elements=2_000_000):
    """Pairwise weighted tau between the rows of an (m, n) score matrix.

    Returns a symmetric (m, m) array with a zero diagonal. Pairs involving a
    constant row are NaN; callers decide how to treat them.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError(f"expected an (m, n) matrix, got shape {scores.shape}")
    m, n = scores.shape
    prepared = [_Prepared(check_scores(row, f"component {k}")) for k, row in enumerate(scores)]
    out = np.zeros((m, m), dtype=np.float64)
    iu, ju = np.triu_indices(m, k=1)
    step = max(1, chunk_elements // max(n, 1))
    for lo in range(0, iu.shape[0], step):
        ii, jj = iu[lo:lo + step], ju[lo:lo + step]
        taus = _tau_batch([prepared[i] for i in ii], [prepared[j] for j in jj])
        out[ii, jj] = taus
        out[jj, ii] = taus
    return out
