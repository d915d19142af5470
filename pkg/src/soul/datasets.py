"""Dataset loading, ensemble persistence, and synthetic test data.

Ensemble file layout (UTF-8 text)::

    {"format": "soul-ensemble", "version": 1, "m": ..., "n": ..., ...}
    c0,c1,...,c{m-1}
    <n rows of m scores, shortest round-trip float repr>

The first line is a JSON header carrying the specs, the dataset
fingerprint and a SHA-256 checksum of everything after the first line.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .base_detector import (
    MIN_PTS_CHOICES,
    SUBSAMPLE_RATES,
    ComponentSpec,
    Ensemble,
    LabeledDataset,
    lof_scores,
)
from .errors import (
    ChecksumMismatch,
    MissingLabelColumn,
    NonBinaryLabel,
    ParseError,
    VersionMismatch,
)

ENSEMBLE_FORMAT = "soul-ensemble"
ENSEMBLE_VERSION = 1


@dataclass
class DatasetManifest:
    """How to read a labeled CSV file.

    ``label_column`` is a header name or a (possibly negative) column index.
    Without ``positive_label`` the label cells must read 0 or 1; with it,
    that token marks outliers and every other token is an inlier.
    """

    path: str
    label_column: str | int = "outlier"
    positive_label: str | None = None
    delimiter: str = ","
    has_header: bool = True
    ignore_columns: list = field(default_factory=list)
    name: str | None = None

    @property
    def dataset_name(self):
        return self.name or Path(self.path).stem


def _parse_column_ref(value):
    value = str(value).strip()
    try:
        return int(value)
    except ValueError:
        return value


def load_manifest(path, data_path=None):
    """Read a manifest from an INI-style file with a ``[dataset]`` section.

    Relative data paths resolve against the manifest's directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(f"manifest not found: {path}")
    if "dataset" not in parser:
        raise ValueError(f"{path}: missing [dataset] section")
    sec = parser["dataset"]
    target = data_path or sec.get("path")
    if target is None:
        raise ValueError(f"{path}: no data path given")
    target = Path(target)
    if data_path is None and not target.is_absolute():
        target = path.parent / target
    delimiter = sec.get("delimiter", ",")
    if delimiter in ("\\t", "tab"):
        delimiter = "\t"
    ignore = [_parse_column_ref(c) for c in sec.get("ignore_columns", "").split(",") if c.strip()]
    return DatasetManifest(
        path=str(target),
        label_column=_parse_column_ref(sec.get("label_column", "outlier")),
        positive_label=sec.get("positive_label"),
        delimiter=delimiter,
        has_header=sec.getboolean("has_header", True),
        ignore_columns=ignore,
        name=sec.get("name"),
    )


def _resolve(ref, header, width, what):
    if isinstance(ref, int):
        idx = ref + width if ref < 0 else ref
        if not 0 <= idx < width:
            raise MissingLabelColumn(f"{what} index {ref} out of range for {width} columns")
        return idx
    if header is None:
        raise MissingLabelColumn(f"{what} {ref!r} given by name but the file has no header")
    try:
        return header.index(ref)
    except ValueError:
        raise MissingLabelColumn(f"{what} {ref!r} not in header {header}") from None


def _parse_label(token, positive, line, column):
    tok = token.strip()
    if positive is not None:
        return 1 if tok == str(positive).strip() else 0
    try:
        value = float(tok)
    except ValueError:
        value = None
    if value not in (0.0, 1.0):
        raise NonBinaryLabel(f"line {line}, column {column!r}: label {token!r} is not 0 or 1")
    return int(value)


def load_dataset(manifest):
    """Read features and labels; row order is preserved.

    Parameters
    ----------
    manifest : DatasetManifest or str or Path
        A bare path means a headed CSV with an ``outlier`` column.

    Returns
    -------
    LabeledDataset
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest(path=str(manifest))
    with open(manifest.path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh, delimiter=manifest.delimiter))]
    rows = [(line, r) for line, r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{manifest.path}: file is empty", row=1)
    header = None
    if manifest.has_header:
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    width = len(header) if header is not None else len(rows[0][1])
    label_idx = _resolve(manifest.label_column, header, width, "label column")
    skip = {_resolve(c, header, width, "ignored column") for c in manifest.ignore_columns}
    feature_idx = [j for j in range(width) if j != label_idx and j not in skip]

    features, labels = [], []
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"line {line}: expected {width} fields, got {len(row)}", row=line)
        vals = []
        for j in feature_idx:
            col = header[j] if header is not None else j
            try:
                v = float(row[j])
            except ValueError:
                raise ParseError(
                    f"line {line}, column {col!r}: cannot parse {row[j]!r} as a number",
                    row=line, column=col,
                ) from None
            if not np.isfinite(v):
                raise ParseError(f"line {line}, column {col!r}: non-finite value", row=line, column=col)
            vals.append(v)
        features.append(vals)
        lcol = header[label_idx] if header is not None else label_idx
        labels.append(_parse_label(row[label_idx], manifest.positive_label, line, lcol))
    return LabeledDataset(np.array(features, dtype=np.float64), np.array(labels), manifest.dataset_name)


def save_dataset(dataset, path, label_column="outlier"):
    """Write a dataset as a headed CSV readable by :func:`load_dataset`."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(dataset.d)] + [label_column])
        for row, y in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [int(y)])


# --------------------------------------------------------------------------
# ensemble files
# --------------------------------------------------------------------------


def _ensemble_body(scores):
    m, n = scores.shape
    lines = [",".join(f"c{j}" for j in range(m))]
    for i in range(n):
        lines.append(",".join(repr(float(v)) for v in scores[:, i]))
    return "\n".join(lines) + "\n"


def dumps_ensemble(ensemble):
    body = _ensemble_body(ensemble.scores)
    header = {
        "format": ENSEMBLE_FORMAT,
        "version": ENSEMBLE_VERSION,
        "m": ensemble.m,
        "n": ensemble.n,
        "fingerprint": ensemble.fingerprint,
        "specs": [
            {"subsample_rate": s.subsample_rate, "min_pts": s.min_pts, "seed": s.seed}
            for s in ensemble.specs
        ],
        "checksum": hashlib.sha256(body.encode()).hexdigest(),
    }
    return json.dumps(header, sort_keys=True) + "\n" + body


def loads_ensemble(text):
    first, sep, body = text.partition("\n")
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not an ensemble file: bad header ({exc})") from None
    if not isinstance(header, dict) or header.get("format") != ENSEMBLE_FORMAT:
        raise ValueError("not an ensemble file")
    version = header.get("version")
    if not isinstance(version, int) or version > ENSEMBLE_VERSION:
        raise VersionMismatch(
            f"ensemble file version {version!r}; this reader supports <= {ENSEMBLE_VERSION}"
        )
    if hashlib.sha256(body.encode()).hexdigest() != header.get("checksum"):
        raise ChecksumMismatch("ensemble file checksum does not match its contents")
    rows = list(csv.reader(io.StringIO(body)))
    scores = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64).T
    m, n = header["m"], header["n"]
    if scores.shape != (m, n):
        raise ValueError(f"header says {m}x{n} but body holds {scores.shape}")
    specs = [ComponentSpec(float(s["subsample_rate"]), int(s["min_pts"]), int(s["seed"]))
             for s in header.get("specs", [])]
    return Ensemble(scores, specs, header.get("fingerprint"))


def save_ensemble(ensemble, path):
    Path(path).write_text(dumps_ensemble(ensemble), encoding="utf-8")


def load_ensemble(path):
    return loads_ensemble(Path(path).read_text(encoding="utf-8"))


def save_report(report, path):
    Path(path).write_text(report.to_json(), encoding="utf-8")


def load_report(path):
    from .evaluation import BenchmarkReport

    return BenchmarkReport.from_json(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# synthetic data
# --------------------------------------------------------------------------


def make_planted_dataset(n_inliers=100, n_outliers=10, d=2, separation=8.0, seed=0):
    """Unit Gaussian blob plus outliers in a thin shell around it.

    Outliers get a uniformly random direction and a radius uniform in
    ``[separation, separation + 1]``. They are appended after the inliers.
    """
    if min(n_inliers, n_outliers, d) < 1:
        raise ValueError("n_inliers, n_outliers and d must all be >= 1")
    rng = np.random.default_rng(seed)
    inliers = rng.standard_normal((n_inliers, d))
    direction = rng.standard_normal((n_outliers, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radius = separation + rng.random((n_outliers, 1))
    outliers = direction / norms * radius
    features = np.vstack([inliers, outliers])
    labels = np.r_[np.zeros(n_inliers, dtype=np.int64), np.ones(n_outliers, dtype=np.int64)]
    return LabeledDataset(features, labels, f"planted-{seed}")


def make_planted_ensemble(dataset, n_good=5, n_bad=15, seed=0):
    """Ensemble mixing accurate components with scrambled ones.

    Accurate components are LOF scores whose neighbour candidates come from
    a subsample of inliers only. Scrambled components take such a score
    vector and shuffle it over the points, so their ranking is noise. The
    component order is shuffled as well.

    Returns
    -------
    ensemble : Ensemble
    good : ndarray of int
        Positions of the accurate components.
    """
    rng = np.random.default_rng(seed)
    inliers = np.flatnonzero(dataset.labels == 0)
    rows, specs = [], []
    for j in range(n_good + n_bad):
        rate = float(SUBSAMPLE_RATES[rng.integers(len(SUBSAMPLE_RATES))])
        min_pts = int(MIN_PTS_CHOICES[rng.integers(len(MIN_PTS_CHOICES))])
        size = min(inliers.size, max(int(round(rate * dataset.n)), min_pts + 1))
        subsample = rng.choice(inliers, size=size, replace=False)
        scores = lof_scores(dataset.features, subsample, min_pts)
        if j >= n_good:
            scores = scores[rng.permutation(dataset.n)]
        rows.append(scores)
        specs.append(ComponentSpec(rate, min_pts, int(seed)))
    order = rng.permutation(n_good + n_bad)
    scores = np.vstack(rows)[order]
    good = np.sort(np.flatnonzero(order < n_good))
    return Ensemble(scores, [specs[k] for k in order], dataset.fingerprint()), good
