"""Command-line front end.

Exit codes: 0 success, 2 bad input (usage, unreadable or invalid files),
1 internal error. Diagnostics go to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .base_detector import generate_ensemble
from .consensus import aggregate
from .datasets import (
    DatasetManifest,
    load_dataset,
    load_ensemble,
    load_manifest,
    make_planted_dataset,
    save_dataset,
    save_ensemble,
)
from .errors import SoulError
from .evaluation import average_precision, run_benchmark
from .graph_select import SELECTORS, SelectionResult, get_selector


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _emit(kind, **payload):
    print(json.dumps({kind: payload}, sort_keys=True, default=str), file=sys.stderr)


def _dataset_from_args(args):
    if args.manifest:
        manifest = load_manifest(args.manifest, data_path=args.data)
    else:
        manifest = DatasetManifest(path=args.data)
    if args.label_column is not None:
        manifest.label_column = _column(args.label_column)
    if args.positive_label is not None:
        manifest.positive_label = args.positive_label
    if not Path(manifest.path).is_file():
        raise InputError(f"dataset file not found: {manifest.path}")
    return load_dataset(manifest)


def _column(value):
    try:
        return int(value)
    except ValueError:
        return value


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_selection(path):
    return SelectionResult.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def cmd_generate(args):
    if args.size < 1:
        raise InputError(f"--size must be >= 1, got {args.size}")
    dataset = _dataset_from_args(args)
    _emit("effective_config", command="generate", data=args.data, manifest=args.manifest,
          size=args.size, seed=args.seed, normalize=args.normalize, out=args.out)
    ensemble = generate_ensemble(dataset, args.size, args.seed, normalize=args.normalize,
                                 n_jobs=args.jobs)
    save_ensemble(ensemble, args.out)
    hist = Counter((s.subsample_rate, s.min_pts) for s in ensemble.specs)
    print(f"wrote {args.out}: m={ensemble.m} n={ensemble.n}")
    for (rate, min_pts), count in sorted(hist.items()):
        print(f"  rate={rate:.2f} min_pts={min_pts}: {count}")
    return 0


def cmd_select(args):
    ensemble = load_ensemble(args.ensemble)
    _emit("effective_config", command="select", ensemble=args.ensemble,
          selector=args.selector, out=args.out)
    result = get_selector(args.selector)(ensemble)
    _write_text(args.out, json.dumps(result.to_dict(), indent=2) + "\n")
    if args.out not in (None, "-"):
        print(f"{args.selector}: selected {len(result.selected)} of {ensemble.m}: {result.selected}")
        if result.k_star is not None:
            print(f"  k*={result.k_star} coreness={result.diagnostics.tolist()}")
    return 0


def cmd_aggregate(args):
    ensemble = load_ensemble(args.ensemble)
    _emit("effective_config", command="aggregate", ensemble=args.ensemble,
          selection=args.selection, method=args.method, out=args.out)
    indices = list(range(ensemble.m))
    if args.selection:
        indices = _read_selection(args.selection).selected
        if max(indices) >= ensemble.m:
            raise InputError("selection refers to components outside the ensemble")
    scores = aggregate(ensemble.scores[indices], args.method)
    _write_text(args.out, "score\n" + "".join(f"{v!r}\n" for v in scores.tolist()))
    return 0


def _read_scores(path):
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if lines and lines[0] == "score":
        lines = lines[1:]
    try:
        return np.array([float(v) for v in lines])
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_evaluate(args):
    dataset = _dataset_from_args(args)
    scores = _read_scores(args.scores)
    _emit("effective_config", command="evaluate", scores=args.scores, data=args.data,
          manifest=args.manifest)
    ap = average_precision(scores, dataset.labels)
    print(json.dumps({"dataset": dataset.name, "average_precision": ap}))
    return 0


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def read_bench_config(path):
    """Parse the ``[bench]`` section of an INI config file."""
    path = Path(path)
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise InputError(f"config file not found: {path}")
    if "bench" not in parser:
        raise InputError(f"{path}: missing [bench] section")
    sec = parser["bench"]
    datasets = []
    for ref in _split(sec.get("datasets", "")):
        p = Path(ref)
        if not p.is_absolute():
            p = path.parent / p
        datasets.append(p)
    if not datasets:
        raise InputError(f"{path}: no datasets listed")
    try:
        return {
            "datasets": datasets,
            "selectors": _split(sec.get("selectors", "core,cull,all")),
            "modes": _split(sec.get("modes", "flat")),
            "consensus": _split(sec.get("consensus", "avg,max,min")),
            "runs": sec.getint("runs", 10),
            "ensemble_size": sec.getint("ensemble_size", 20),
            "batch_size": sec.getint("batch_size", 20),
            "seed": sec.getint("seed", 0),
            "jobs": sec.getint("jobs", 1),
            "normalize": sec.getboolean("normalize", False),
            "lof_baseline": sec.getboolean("lof_baseline", True),
        }
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_bench_dataset(path):
    if not path.is_file():
        raise InputError(f"dataset file not found: {path}")
    if path.suffix.lower() in (".ini", ".cfg", ".manifest"):
        manifest = load_manifest(path)
        if not Path(manifest.path).is_file():
            raise InputError(f"dataset file not found: {manifest.path}")
        return load_dataset(manifest)
    return load_dataset(DatasetManifest(path=str(path)))


def cmd_bench(args):
    cfg = read_bench_config(args.config)
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    datasets = [_load_bench_dataset(p) for p in cfg["datasets"]]
    echo = dict(cfg, datasets=[str(p) for p in cfg["datasets"]], command="bench",
                out_dir=args.out_dir)
    _emit("effective_config", **echo)
    for s in cfg["selectors"]:
        get_selector(s)
    report = run_benchmark(
        datasets,
        selectors=cfg["selectors"],
        modes=cfg["modes"],
        consensus=cfg["consensus"],
        runs=cfg["runs"],
        master_seed=cfg["seed"],
        ensemble_size=cfg["ensemble_size"],
        batch_size=cfg["batch_size"],
        normalize=cfg["normalize"],
        lof_baseline=cfg["lof_baseline"],
        jobs=cfg["jobs"],
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "runs.csv").write_text(report.runs_csv(), encoding="utf-8")
    (out / "summary.csv").write_text(report.summary_csv(), encoding="utf-8")
    (out / "timing.json").write_text(json.dumps(report.timings, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    print(report.format_table())
    return 0


def cmd_synth(args):
    dataset = make_planted_dataset(args.n_inliers, args.n_outliers, args.dim,
                                   args.separation, args.seed)
    _emit("effective_config", command="synth", n_inliers=args.n_inliers,
          n_outliers=args.n_outliers, dim=args.dim, separation=args.separation,
          seed=args.seed, out=args.out)
    save_dataset(dataset, args.out)
    print(f"wrote {args.out}: n={dataset.n} d={dataset.d} outliers={int(dataset.labels.sum())}")
    return 0


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="labeled CSV file")
    p.add_argument("--manifest", help="INI file with a [dataset] section describing columns")
    p.add_argument("--label-column", help="label column name or index (default: outlier)")
    p.add_argument("--positive-label", help="token marking outliers in the label column")


def build_parser():
    parser = argparse.ArgumentParser(prog="soul", description="Graph-based selective outlier ensembles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build a subsampled-LOF ensemble")
    _add_data_args(p)
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true", help="min-max scale features first")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("select", help="run a ranking selector on an ensemble file")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--selector", choices=sorted(SELECTORS), default="core")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("aggregate", help="combine (selected) components into one score vector")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--selection", help="JSON written by `select`; default: all components")
    p.add_argument("--method", choices=["avg", "max", "min"], default="avg")
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("evaluate", help="average precision of a score file")
    p.add_argument("--scores", required=True)
    _add_data_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="run the benchmark described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, help="override the config's jobs setting")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a planted-outlier dataset")
    p.add_argument("--n-inliers", type=int, default=200)
    p.add_argument("--n-outliers", type=int, default=10)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--separation", type=float, default=3.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, SoulError, ValueError, OSError, KeyError) as exc:
        _emit("error", type=type(exc).__name__, message=str(exc), exit_code=2)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        _emit("error", type=type(exc).__name__, message=str(exc), exit_code=1)
        return 1


if __name__ == "__main__":
    sys.exit(main())
