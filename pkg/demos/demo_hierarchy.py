"""
Two-level selection over batches of ensembles
=============================================

Instead of trusting one ensemble of 20 components, draw a batch of them,
select within each, pool the survivors and either aggregate the pool
directly (union) or select once more (h2).
"""

from soul import Ensemble, PipelineConfig, average_precision, generate_ensemble
from soul.datasets import make_planted_dataset
from soul.hierarchy import pool_selections, run

data = make_planted_dataset(n_inliers=300, n_outliers=15, d=3, separation=4.0, seed=1)
batch = [generate_ensemble(data, 20, master_seed=s) for s in range(5)]

pool = pool_selections(batch, "cull")
print("Cull keeps 16 per ensemble, pool size:", pool.m)

for selector in ("core", "cull", "all"):
    for mode in ("flat", "union", "h2"):
        cfg = PipelineConfig(selector=selector, mode=mode, consensus="avg")
        ap = average_precision(run(batch, cfg), data.labels)
        print(f"{cfg.label:>10}: AP = {ap:.3f}")

# union over All is just the average of every component in the batch
everything = Ensemble.concatenate(batch)
print("components behind all.union:", everything.m)
