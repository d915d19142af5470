"""Graph-based ranking selection.

Components become vertices of a complete graph whose edge weights are the
pairwise weighted Kendall tau values. Two miners pick the survivors:

* ``core_select`` keeps only the m heaviest edges and returns the vertices
  of the k-core with the largest k;
* ``cull_select`` drops the 20% of vertices with the smallest weighted
  degree on the complete graph.

``all_select`` is the keep-everything baseline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .base_detector import Ensemble
from .errors import EnsembleTooSmall
from .rank_correlation import weighted_tau_matrix

logger = logging.getLogger(__name__)

CULL_FRACTION = 0.2


@dataclass
class RankGraph:
    """Symmetric weighted graph over ensemble components.

    ``mask[i, j]`` tells whether edge (i, j) is present; ``weights`` keeps
    the similarity of every pair, present or not.
    """

    weights: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        m = self.weights.shape[0]
        if self.weights.shape != (m, m) or self.mask.shape != (m, m):
            raise ValueError("weights and mask must be square and of equal shape")
        if not np.array_equal(self.weights, self.weights.T):
            raise ValueError("weights must be symmetric")
        if not np.array_equal(self.mask, self.mask.T):
            raise ValueError("mask must be symmetric")
        if np.any(np.diag(self.weights) != 0) or np.any(np.diag(self.mask)):
            raise ValueError("diagonal must be zero and unmasked")

    @property
    def n_vertices(self):
        return self.weights.shape[0]

    @property
    def n_edges(self):
        return int(np.triu(self.mask, k=1).sum())

    def edges(self):
        """Present edges as a sorted list of (i, j) with i < j."""
        i, j = np.nonzero(np.triu(self.mask, k=1))
        return list(zip(i.tolist(), j.tolist()))

    @classmethod
    def complete(cls, weights):
        w = np.array(weights, dtype=np.float64)
        np.fill_diagonal(w, 0.0)
        mask = ~np.eye(w.shape[0], dtype=bool)
        return cls(w, mask)


@dataclass
class SelectionResult:
    """Selected component indices plus the per-vertex quantity that chose them.

    ``diagnostics`` is the coreness array for Core, the weighted degree for
    Cull, and empty for All. ``edgeless`` flags a Core run whose pruned graph
    had no edges (every vertex is then returned).
    """

    selected: list
    method: str
    diagnostics: np.ndarray = field(default_factory=lambda: np.zeros(0))
    k_star: int | None = None
    edgeless: bool = False

    def __post_init__(self):
        self.selected = sorted(int(i) for i in self.selected)
        self.diagnostics = np.asarray(self.diagnostics)
        if not self.selected:
            raise ValueError("selection must be non-empty")

    def to_dict(self):
        return {
            "method": self.method,
            "selected": list(self.selected),
            "k_star": self.k_star,
            "edgeless": self.edgeless,
            "diagnostics": self.diagnostics.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            selected=d["selected"],
            method=d["method"],
            diagnostics=np.asarray(d.get("diagnostics", [])),
            k_star=d.get("k_star"),
            edgeless=bool(d.get("edgeless", False)),
        )


def _scores_of(source):
    if isinstance(source, Ensemble):
        return source.scores
    return np.asarray(source, dtype=np.float64)


def build_complete_graph(ensemble):
    """Complete graph with ``W[i, j] = weighted_kendall_tau(r_i, r_j)``.

    A pair involving a constant component gets weight 0.
    """
    scores = _scores_of(ensemble)
    if scores.ndim != 2 or scores.shape[0] < 2:
        raise EnsembleTooSmall(f"need at least 2 components, got {scores.shape[0]}")
    w = weighted_tau_matrix(scores)
    degenerate = np.isnan(w)
    if degenerate.any():
        logger.warning("%d degenerate component pairs mapped to weight 0", int(degenerate.sum()) // 2)
        w[degenerate] = 0.0
    return RankGraph.complete(w)


def prune_top_m(graph):
    """Keep the m largest-weight edges, m being the number of vertices.

    Equal weights are ordered by (i, j) lexicographically, smaller first.
    """
    m = graph.n_vertices
    iu, ju = np.triu_indices(m, k=1)
    if not graph.mask[iu, ju].all():
        raise ValueError("prune_top_m expects a complete graph")
    keep = min(m, iu.shape[0])
    order = np.lexsort((ju, iu, -graph.weights[iu, ju]))[:keep]
    mask = np.zeros((m, m), dtype=bool)
    mask[iu[order], ju[order]] = True
    mask |= mask.T
    return RankGraph(graph.weights.copy(), mask)


def coreness(graph):
    """Coreness of every vertex of the (unweighted) masked graph.

    Bucket-based peeling: repeatedly remove a vertex of minimum remaining
    degree; its coreness is the running maximum of removal degrees.
    """
    mask = graph.mask if isinstance(graph, RankGraph) else np.asarray(graph, dtype=bool)
    m = mask.shape[0]
    adj = [np.flatnonzero(mask[v]).tolist() for v in range(m)]
    degree = [len(a) for a in adj]
    max_deg = max(degree, default=0)
    buckets = [set() for _ in range(max_deg + 1)]
    for v, d in enumerate(degree):
        buckets[d].add(v)

    core = np.zeros(m, dtype=np.int64)
    removed = [False] * m
    k = 0
    d = 0
    for _ in range(m):
        d = max(0, d - 1)
        while not buckets[d]:
            d += 1
        v = min(buckets[d])
        buckets[d].discard(v)
        removed[v] = True
        k = max(k, d)
        core[v] = k
        for u in adj[v]:
            if not removed[u]:
                buckets[degree[u]].discard(u)
                degree[u] -= 1
                buckets[degree[u]].add(u)
    return core


def _as_complete_graph(source):
    if isinstance(source, RankGraph):
        if source.n_vertices < 2:
            raise EnsembleTooSmall(f"need at least 2 components, got {source.n_vertices}")
        return source
    return build_complete_graph(source)


def core_select(source):
    """Vertices of maximal coreness in the top-m pruned similarity graph.

    ``source`` is an Ensemble, an (m, n) score matrix, or a complete
    RankGraph.
    """
    pruned = prune_top_m(_as_complete_graph(source))
    core = coreness(pruned)
    k_star = int(core.max())
    edgeless = pruned.n_edges == 0
    if edgeless:
        logger.warning("pruned graph has no edges; returning every component")
    selected = np.flatnonzero(core == k_star)
    return SelectionResult(selected.tolist(), "core", core, k_star, edgeless)


def n_discarded(m, fraction=CULL_FRACTION):
    """floor(fraction * m), never reaching m."""
    k = math.floor(round(fraction * m, 9))
    return max(0, min(k, m - 1))


def cull_select(source, fraction=CULL_FRACTION):
    """Drop the ``floor(fraction * m)`` vertices of smallest weighted degree.

    ``source`` is an Ensemble, an (m, n) score matrix, or a complete
    RankGraph (e.g. built from a similarity matrix with
    :meth:`RankGraph.complete`). Degree ties are resolved by discarding the
    larger index first.
    """
    graph = _as_complete_graph(source)
    m = graph.n_vertices
    degree = graph.weights.sum(axis=1)
    k = n_discarded(m, fraction)
    order = np.lexsort((-np.arange(m), degree))
    keep = np.sort(order[k:])
    return SelectionResult(keep.tolist(), "cull", degree)


def all_select(source):
    """Select every component."""
    if isinstance(source, RankGraph):
        m = source.n_vertices
    else:
        scores = _scores_of(source)
        m = scores.shape[0] if scores.ndim == 2 else 1
    if m < 1:
        raise EnsembleTooSmall("ensemble is empty")
    return SelectionResult(list(range(m)), "all")


SELECTORS = {
    "core": core_select,
    "cull": cull_select,
    "all": all_select,
}


def register_selector(name, func):
    """Make a selector available to the pipeline and the benchmark harness.

    ``func`` takes an Ensemble and returns a SelectionResult.
    """
    SELECTORS[name.lower()] = func


def get_selector(name):
    try:
        return SELECTORS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown selector {name!r}; choose from {sorted(SELECTORS)}") from None
