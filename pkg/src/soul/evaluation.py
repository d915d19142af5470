"""Average precision and the reproducible benchmark harness."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .base_detector import (
    MIN_PTS_CHOICES,
    component_seed,
    generate_ensemble,
    lof_scores,
    min_max_normalize,
)
from .consensus import ConsensusMethod, aggregate
from .errors import LengthMismatch, NoPositives, PoolTooSmall
from .graph_select import get_selector
from .hierarchy import Mode

logger = logging.getLogger(__name__)

LOF_BASELINE = "lof"
NO_CONSENSUS = "none"
REPORT_VERSION = 1


@dataclass(frozen=True)
class PRPoint:
    precision: float
    recall: float
    threshold_rank: int


def _ranked_hits(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.ndim != 1 or s.shape != y.shape:
        raise LengthMismatch(f"scores {s.shape} and labels {y.shape} differ")
    y = (y == 1).astype(np.int64)
    if y.sum() == 0:
        raise NoPositives("labels contain no positive (outlier) entries")
    order = np.argsort(-s, kind="stable")
    return y[order]


def pr_curve(scores, labels):
    """Precision and recall after each rank, scanning by descending score."""
    hits = _ranked_hits(scores, labels)
    tp = np.cumsum(hits)
    k = np.arange(1, hits.shape[0] + 1)
    precision = tp / k
    recall = tp / tp[-1]
    return [PRPoint(float(p), float(r), int(t)) for p, r, t in zip(precision, recall, k)]


def average_precision(scores, labels):
    """Non-interpolated average precision (area under the PR curve).

    Points are ranked by descending score with ties kept in index order;
    the precision at every positive's rank is averaged over all positives.

    >>> average_precision([0.1, 0.2, 0.3, 0.0], [0, 0, 0, 1])
    0.25
    """
    hits = _ranked_hits(scores, labels)
    tp = np.cumsum(hits)
    k = np.arange(1, hits.shape[0] + 1)
    return float(np.sum((tp / k)[hits == 1]) / tp[-1])


# --------------------------------------------------------------------------
# benchmark harness
# --------------------------------------------------------------------------


@dataclass
class RunRecord:
    dataset: str
    method: str
    consensus: str
    run: int
    ap: float | None = None
    error: str | None = None


@dataclass
class BenchmarkReport:
    """Per-run APs plus the configuration that produced them.

    ``timings`` maps ``"dataset/method"`` to per-run wall-clock seconds. It is
    kept out of :meth:`to_dict` by default so saved reports stay
    byte-identical between reruns.
    """

    config: dict
    master_seed: int
    records: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def cells(self):
        """(dataset, method, consensus) keys in first-seen order."""
        seen = {}
        for r in self.records:
            seen.setdefault((r.dataset, r.method, r.consensus), None)
        return list(seen)

    def summary(self):
        rows = []
        for dataset, method, consensus in self.cells():
            recs = [
                r for r in self.records
                if (r.dataset, r.method, r.consensus) == (dataset, method, consensus)
            ]
            aps = [r.ap for r in recs if r.error is None]
            times = self.timings.get(f"{dataset}/{method}", [])
            rows.append({
                "dataset": dataset,
                "method": method,
                "consensus": consensus,
                "mean_ap": float(np.mean(aps)) if aps else None,
                "std_ap": float(np.std(aps, ddof=1)) if len(aps) > 1 else None,
                "runs": len(aps),
                "errors": len(recs) - len(aps),
                "time_mean": float(np.mean(times)) if times else None,
            })
        return rows

    def to_dict(self, timing=False):
        d = {
            "version": REPORT_VERSION,
            "master_seed": self.master_seed,
            "config": self.config,
            "records": [vars(r).copy() for r in self.records],
        }
        if timing:
            d["timings"] = self.timings
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=d["config"],
            master_seed=d["master_seed"],
            records=[RunRecord(**r) for r in d["records"]],
            timings=d.get("timings", {}),
        )

    def to_json(self, timing=False):
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def runs_csv(self):
        """One row per dataset/method/consensus/run."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "method", "consensus", "run", "ap", "error"])
        for r in self.records:
            w.writerow([
                r.dataset, r.method, r.consensus, r.run,
                "" if r.ap is None else repr(r.ap),
                r.error or "",
            ])
        return buf.getvalue()

    def summary_csv(self, timing=False):
        buf = io.StringIO()
        cols = ["dataset", "method", "consensus", "mean_ap", "std_ap", "runs", "errors"]
        if timing:
            cols.append("time_mean")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.summary():
            w.writerow(["" if row[c] is None else row[c] for c in cols])
        return buf.getvalue()

    def format_table(self):
        """Mean AP per dataset (rows) and method/consensus (columns)."""
        summary = self.summary()
        datasets = list(dict.fromkeys(r["dataset"] for r in summary))
        columns = list(dict.fromkeys((r["method"], r["consensus"]) for r in summary))
        lookup = {(r["dataset"], r["method"], r["consensus"]): r["mean_ap"] for r in summary}
        heads = [m if c == NO_CONSENSUS else f"{m}:{c}" for m, c in columns]
        width = max([len(d) for d in datasets] + [7])
        lines = [" ".join([" " * width] + [f"{h:>12}" for h in heads])]
        for d in datasets:
            cells = []
            for m, c in columns:
                v = lookup.get((d, m, c))
                cells.append(f"{'err' if v is None else format(v, '.3f'):>12}")
            lines.append(" ".join([f"{d:<{width}}"] + cells))
        return "\n".join(lines)


def run_seed(master_seed, dataset_name, run):
    """Seed of one (dataset, run) cell; independent of dataset order."""
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(dataset_name.encode()), int(run)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def method_label(selector, mode):
    mode = Mode.parse(mode)
    return selector if mode is Mode.FLAT else f"{selector}.{mode.value}"


def _one_run(dataset, run, opts):
    """All methods of one (dataset, run) cell. Returns (records, timings)."""
    seed = run_seed(opts["master_seed"], dataset.name, run)
    consensus = [ConsensusMethod.parse(c) for c in opts["consensus"]]
    modes = [Mode.parse(m) for m in opts["modes"]]
    n_ensembles = opts["batch_size"] if any(m is not Mode.FLAT for m in modes) else 1

    batch = [
        generate_ensemble(
            dataset.features,
            opts["ensemble_size"],
            component_seed(seed, b),
            normalize=opts["normalize"],
        )
        for b in range(n_ensembles)
    ]
    first_level = {}

    def survivors(selector, b):
        key = (selector, b)
        if key not in first_level:
            t0 = time.perf_counter()
            result = get_selector(selector)(batch[b])
            first_level[key] = (batch[b].scores[result.selected], time.perf_counter() - t0)
        return first_level[key]

    records, timings = [], {}
    for selector in opts["selectors"]:
        for mode in modes:
            label = method_label(selector, mode)
            t0 = time.perf_counter()
            try:
                if mode is Mode.FLAT:
                    pooled, spent = survivors(selector, 0)
                    final = pooled
                else:
                    parts = [survivors(selector, b) for b in range(n_ensembles)]
                    spent = sum(p[1] for p in parts)
                    pooled = np.vstack([p[0] for p in parts])
                    final = pooled
                    if mode is Mode.HIERARCHICAL2:
                        if selector != "all" and pooled.shape[0] < 2:
                            raise PoolTooSmall(f"pooled ensemble has {pooled.shape[0]} component(s)")
                        final = pooled[get_selector(selector)(pooled).selected]
                aps = [average_precision(aggregate(final, c), dataset.labels) for c in consensus]
                errors = [None] * len(consensus)
            except Exception as exc:  # reported per cell, never fatal
                logger.warning("%s/%s run %d failed: %s", dataset.name, label, run, exc)
                spent = 0.0
                aps = [None] * len(consensus)
                errors = [f"{type(exc).__name__}: {exc}"] * len(consensus)
            timings[f"{dataset.name}/{label}"] = time.perf_counter() - t0 + spent
            for c, ap, err in zip(consensus, aps, errors):
                records.append(RunRecord(dataset.name, label, c.value, run, ap, err))

    if opts["lof_baseline"]:
        t0 = time.perf_counter()
        rng = np.random.default_rng(seed)
        min_pts = int(MIN_PTS_CHOICES[rng.integers(len(MIN_PTS_CHOICES))])
        try:
            x = dataset.features
            if opts["normalize"]:
                x = min_max_normalize(x)
            ap = average_precision(lof_scores(x, np.arange(dataset.n), min_pts), dataset.labels)
            records.append(RunRecord(dataset.name, LOF_BASELINE, NO_CONSENSUS, run, ap))
        except Exception as exc:
            records.append(RunRecord(dataset.name, LOF_BASELINE, NO_CONSENSUS, run, None,
                                     f"{type(exc).__name__}: {exc}"))
        timings[f"{dataset.name}/{LOF_BASELINE}"] = time.perf_counter() - t0
    return records, timings


def _run_task(args):
    return _one_run(*args)


def run_benchmark(
    datasets,
    selectors=("core", "cull", "all"),
    modes=("flat",),
    consensus=("avg", "max", "min"),
    runs=10,
    master_seed=0,
    *,
    ensemble_size=20,
    batch_size=20,
    normalize=False,
    lof_baseline=True,
    jobs=1,
):
    """Evaluate every (selector, mode, consensus) on every dataset.

    Each run of each dataset draws fresh ensembles from a seed derived from
    ``(master_seed, dataset name, run)``; all methods of that run share them.
    Failures are recorded per cell instead of aborting the benchmark.

    Parameters
    ----------
    datasets : sequence of LabeledDataset
    selectors : sequence of str
        Registered selector names.
    modes : sequence of str
        ``flat``, ``h2`` or ``union``.
    consensus : sequence of str
        ``avg``, ``max``, ``min``.
    runs : int
    master_seed : int
    jobs : int
        Worker processes; results do not depend on it.

    Returns
    -------
    BenchmarkReport
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    for s in selectors:
        get_selector(s)
    opts = {
        "selectors": [s.lower() for s in selectors],
        "modes": [Mode.parse(m).value for m in modes],
        "consensus": [ConsensusMethod.parse(c).value for c in consensus],
        "runs": int(runs),
        "master_seed": int(master_seed),
        "ensemble_size": int(ensemble_size),
        "batch_size": int(batch_size),
        "normalize": bool(normalize),
        "lof_baseline": bool(lof_baseline),
    }
    names = [d.name for d in datasets]
    if len(set(names)) != len(names):
        raise ValueError(f"dataset names must be unique: {names}")

    tasks = [(d, r, opts) for d in datasets for r in range(runs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]

    config = dict(opts, datasets=names)
    report = BenchmarkReport(config=config, master_seed=int(master_seed))
    by_cell = {}
    for (dataset, run, _), (records, timings) in zip(tasks, results):
        by_cell[(dataset.name, run)] = records
        for key, t in timings.items():
            report.timings.setdefault(key, []).append(t)
    # rows grouped by dataset, method, consensus, then run
    for dataset in datasets:
        per_run = [by_cell[(dataset.name, r)] for r in range(runs)]
        for i in range(len(per_run[0])):
            for r in range(runs):
                report.records.append(per_run[r][i])
    return report

