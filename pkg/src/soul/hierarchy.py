"""Selection-then-aggregation pipelines: flat, two-level, and pooled.

* flat: select on one ensemble, aggregate the survivors;
* hierarchical (``h2``): select on each ensemble of a batch, pool all
  survivors into one ensemble, select again, aggregate;
* union: select on each ensemble of a batch, pool, aggregate directly.

Pooling keeps duplicates and follows (ensemble index, component index)
order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

from .base_detector import DEFAULT_ENSEMBLE_SIZE, Ensemble, component_seed, generate_ensemble
from .consensus import ConsensusMethod, aggregate
from .errors import EmptySelection, LengthMismatch, PoolTooSmall
from .graph_select import get_selector


class Mode(str, Enum):
    FLAT = "flat"
    HIERARCHICAL2 = "h2"
    UNION = "union"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"hierarchical2": "h2", "hierarchical": "h2", "u": "union"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown mode {value!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    selector: str = "core"
    mode: Mode = Mode.FLAT
    consensus: ConsensusMethod = ConsensusMethod.AVERAGE
    ensemble_size: int = DEFAULT_ENSEMBLE_SIZE
    batch_size: int = 20
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "selector", self.selector.lower())
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        object.__setattr__(self, "consensus", ConsensusMethod.parse(self.consensus))
        get_selector(self.selector)
        if self.ensemble_size < 1 or self.batch_size < 1:
            raise ValueError("ensemble_size and batch_size must be >= 1")

    @property
    def label(self):
        """Short method name, e.g. ``core``, ``core.h2``, ``cull.union``."""
        if self.mode is Mode.FLAT:
            return self.selector
        return f"{self.selector}.{self.mode.value}"

    def to_dict(self):
        d = asdict(self)
        d["mode"] = self.mode.value
        d["consensus"] = self.consensus.value
        return d


def select(ensemble, selector):
    """Apply a named selector and return the selected sub-ensemble."""
    result = get_selector(selector)(ensemble)
    return ensemble.subset(result.selected), result


def run_flat(ensemble, cfg):
    """Consensus over the components chosen by ``cfg.selector``."""
    chosen, _ = select(ensemble, cfg.selector)
    return aggregate(chosen.scores, cfg.consensus)


def _check_batch(batch):
    batch = list(batch)
    if not batch:
        raise EmptySelection("batch contains no ensembles")
    if len({e.n for e in batch}) != 1:
        raise LengthMismatch("ensembles in a batch must score the same points")
    return batch


def pool_selections(batch, selector):
    """Survivors of each ensemble, concatenated in batch order."""
    batch = _check_batch(batch)
    return Ensemble.concatenate(select(e, selector)[0] for e in batch)


def run_hierarchical2(batch, cfg):
    """Select per ensemble, pool the survivors, select again, aggregate."""
    pool = pool_selections(batch, cfg.selector)
    if cfg.selector != "all" and pool.m < 2:
        raise PoolTooSmall(f"pooled ensemble has {pool.m} component(s); need 2")
    chosen, _ = select(pool, cfg.selector)
    return aggregate(chosen.scores, cfg.consensus)


def run_union(batch, cfg):
    """Select per ensemble, pool the survivors, aggregate without reselecting."""
    pool = pool_selections(batch, cfg.selector)
    return aggregate(pool.scores, cfg.consensus)


def run(batch_or_ensemble, cfg):
    """Dispatch on ``cfg.mode``; flat mode uses the first ensemble of a batch."""
    if isinstance(batch_or_ensemble, Ensemble):
        batch = [batch_or_ensemble]
    else:
        batch = list(batch_or_ensemble)
    if cfg.mode is Mode.FLAT:
        return run_flat(batch[0], cfg)
    if cfg.mode is Mode.HIERARCHICAL2:
        return run_hierarchical2(batch, cfg)
    return run_union(batch, cfg)


def generate_batch(data, cfg, *, normalize=False, rates=None):
    """``cfg.batch_size`` ensembles, each seeded from (master_seed, index)."""
    size = 1 if cfg.mode is Mode.FLAT else cfg.batch_size
    return [
        generate_ensemble(
            data,
            cfg.ensemble_size,
            component_seed(cfg.master_seed, b),
            rates=rates,
            normalize=normalize,
        )
        for b in range(size)
    ]


def run_pipeline(data, cfg, *, normalize=False, rates=None):
    """Generate the ensemble(s) for ``cfg`` from raw data and run the pipeline."""
    return run(generate_batch(data, cfg, normalize=normalize, rates=rates), cfg)
