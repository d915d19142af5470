"""Subsampled LOF components for homogeneous outlier ensembles.

Each component scores every point of the dataset with LOF, but neighbours,
k-distances and densities are looked up only among a random subsample.
Subsampling rate and MinPts are drawn per component, which is what makes
the components diverse.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DatasetTooSmall, LengthMismatch, NonFiniteFeature, SubsampleTooSmall

logger = logging.getLogger(__name__)

SUBSAMPLE_RATES = (0.10, 0.15, 0.20, 0.25, 0.30)
MIN_PTS_CHOICES = (3, 5, 7, 9)
DEFAULT_ENSEMBLE_SIZE = 20

# smallest n for which every (rate, min_pts) draw leaves a usable subsample
MIN_DATASET_SIZE = 34


@dataclass
class LabeledDataset:
    """Feature matrix with binary outlier labels (1 = outlier)."""

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        n, d = self.features.shape
        if n < 2 or d < 1:
            raise ValueError(f"need n >= 2 and d >= 1, got {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise NonFiniteFeature(f"dataset {self.name!r} has NaN or infinite features")
        if self.labels.shape != (n,):
            raise LengthMismatch(f"{n} rows but {self.labels.shape[0]} labels")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def fingerprint(self):
        """Content hash of features and labels."""
        return data_fingerprint(self.features, self.labels)


def data_fingerprint(features, labels=None):
    h = hashlib.sha256()
    f = np.ascontiguousarray(features, dtype="<f8")
    h.update(str(f.shape).encode())
    h.update(f.tobytes())
    if labels is not None:
        h.update(np.ascontiguousarray(labels, dtype="<i8").tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class ComponentSpec:
    subsample_rate: float
    min_pts: int
    seed: int

    def subsample_size(self, n):
        return min(n, max(int(round(self.subsample_rate * n)), self.min_pts + 1))


@dataclass
class Ensemble:
    """m score vectors over the same n points.

    ``scores`` has shape (m, n); row j is component j.
    """

    scores: np.ndarray
    specs: list = field(default_factory=list)
    fingerprint: str | None = None

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.ndim != 2:
            raise ValueError(f"scores must be (m, n), got shape {self.scores.shape}")
        if self.specs and len(self.specs) != self.scores.shape[0]:
            raise LengthMismatch(
                f"{self.scores.shape[0]} components but {len(self.specs)} specs"
            )

    @property
    def m(self):
        return self.scores.shape[0]

    @property
    def n(self):
        return self.scores.shape[1]

    @property
    def components(self):
        return list(self.scores)

    def subset(self, indices):
        """New ensemble holding only the listed components, in that order."""
        idx = np.asarray(indices, dtype=np.int64)
        specs = [self.specs[i] for i in idx] if self.specs else []
        return Ensemble(self.scores[idx], specs, self.fingerprint)

    @classmethod
    def concatenate(cls, ensembles):
        ensembles = list(ensembles)
        scores = np.vstack([e.scores for e in ensembles])
        specs = [] if any(not e.specs for e in ensembles) else [s for e in ensembles for s in e.specs]
        fps = {e.fingerprint for e in ensembles}
        return cls(scores, specs, fps.pop() if len(fps) == 1 else None)

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (
            self.scores.shape == other.scores.shape
            and np.array_equal(self.scores, other.scores)
            and list(self.specs) == list(other.specs)
            and self.fingerprint == other.fingerprint
        )


def min_max_normalize(features):
    """Scale each column to [0, 1]; constant columns map to 0."""
    x = np.asarray(features, dtype=np.float64)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    span[span == 0] = 1.0
    return (x - lo) / span


def lof_scores(data, subsample, min_pts):
    """LOF of every point, with neighbours restricted to a subsample.

    Parameters
    ----------
    data : ndarray of shape (n, d)
    subsample : array_like of int
        Indices of the points allowed to act as neighbours.
    min_pts : int
        Neighbourhood size. A point is never its own neighbour.

    Returns
    -------
    ndarray of shape (n,)
        Finite, non-negative LOF scores for all n points.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteFeature("data contains NaN or infinite values")
    n = x.shape[0]
    sub = np.unique(np.asarray(subsample, dtype=np.int64))
    if sub.size and (sub[0] < 0 or sub[-1] >= n):
        raise IndexError("subsample index out of range")
    min_pts = int(min_pts)
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    if sub.size - 1 < min_pts:
        # a subsample member sees only the other members
        raise SubsampleTooSmall(
            f"subsample of {sub.size} points cannot supply {min_pts} neighbours"
        )

    dist = cdist(x, x[sub])
    member = np.full(n, -1, dtype=np.int64)
    member[sub] = np.arange(sub.size)
    in_sub = member >= 0
    dist[np.flatnonzero(in_sub), member[in_sub]] = np.inf

    nbrs = np.argsort(dist, axis=1, kind="stable")[:, :min_pts]
    nbr_dist = np.take_along_axis(dist, nbrs, axis=1)
    kdist_sub = nbr_dist[sub, -1]

    reach = np.maximum(nbr_dist, kdist_sub[nbrs])
    mean_reach = reach.mean(axis=1)
    with np.errstate(divide="ignore"):
        lrd = 1.0 / mean_reach

    lrd_sub = lrd[sub]
    finite = np.isfinite(lrd_sub)
    if finite.any():
        lrd_sub = np.where(finite, lrd_sub, lrd_sub[finite].max())
        lof = lrd_sub[nbrs].mean(axis=1) / lrd
    else:
        lof = np.ones(n)
    # duplicate points: zero reachability, infinite density
    lof[~np.isfinite(lrd)] = 1.0
    return lof


def component_seed(master_seed, index):
    """Deterministic 64-bit seed for component ``index``."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def draw_component(n, seed, rates=SUBSAMPLE_RATES, min_pts_choices=MIN_PTS_CHOICES):
    """Draw the (spec, subsample) pair of one component from its seed."""
    rng = np.random.default_rng(seed)
    rate = float(rates[rng.integers(len(rates))])
    min_pts = int(min_pts_choices[rng.integers(len(min_pts_choices))])
    spec = ComponentSpec(rate, min_pts, int(seed))
    subsample = np.sort(rng.choice(n, size=spec.subsample_size(n), replace=False))
    return spec, subsample


def generate_ensemble(
    data,
    m=DEFAULT_ENSEMBLE_SIZE,
    master_seed=0,
    *,
    rates=None,
    min_pts_choices=MIN_PTS_CHOICES,
    normalize=False,
    n_jobs=1,
):
    """Build an ensemble of ``m`` subsampled-LOF components.

    Component j is fully determined by ``(master_seed, j)``, so the result
    does not depend on ``n_jobs`` or on execution order.

    Parameters
    ----------
    data : ndarray of shape (n, d) or LabeledDataset
    m : int
        Ensemble size.
    master_seed : int
    rates : sequence of float, optional
        Override of the subsampling-rate set. Needed when n < 34.
    min_pts_choices : sequence of int
    normalize : bool
        Min-max scale features before scoring.
    n_jobs : int
        Number of worker threads.
    """
    fingerprint = None
    if isinstance(data, LabeledDataset):
        fingerprint = data.fingerprint()
        data = data.features
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteFeature("data contains NaN or infinite values")
    if fingerprint is None:
        fingerprint = data_fingerprint(x)
    m = int(m)
    if m < 1:
        raise ValueError(f"ensemble size must be >= 1, got {m}")
    n = x.shape[0]
    if rates is None:
        if n < MIN_DATASET_SIZE:
            raise DatasetTooSmall(
                f"n={n} < {MIN_DATASET_SIZE}; pass explicit rates for small datasets"
            )
        rates = SUBSAMPLE_RATES
    if normalize:
        x = min_max_normalize(x)

    def build(j):
        spec, subsample = draw_component(n, component_seed(master_seed, j), rates, min_pts_choices)
        return spec, lof_scores(x, subsample, spec.min_pts)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(build, range(m)))
    else:
        results = [build(j) for j in range(m)]
    logger.debug("generated %d components over n=%d", m, n)
    return Ensemble(np.vstack([r[1] for r in results]), [r[0] for r in results], fingerprint)
