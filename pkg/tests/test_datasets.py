import json

import numpy as np
import pytest

from soul.base_detector import Ensemble, generate_ensemble, lof_scores
from soul.datasets import (
    DatasetManifest,
    dumps_ensemble,
    load_dataset,
    load_ensemble,
    load_manifest,
    load_report,
    loads_ensemble,
    make_planted_dataset,
    make_planted_ensemble,
    save_dataset,
    save_ensemble,
    save_report,
)
from soul.errors import ChecksumMismatch, MissingLabelColumn, NonBinaryLabel, ParseError, VersionMismatch
from soul.evaluation import average_precision, run_benchmark


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_three_row_csv(tmp_path):
    ds = load_dataset(write(tmp_path, "t.csv", "a,b,outlier\n1,2,0\n3,4,1\n5,6,0"))
    assert (ds.n, ds.d) == (3, 2)
    assert ds.labels.tolist() == [0, 1, 0]
    np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4], [5, 6]])
    assert ds.name == "t"


def test_headerless_positional(tmp_path):
    p = write(tmp_path, "h.csv", "1,2,0\n3,4,1\n5,6,0\n")
    ds = load_dataset(DatasetManifest(str(p), label_column=-1, has_header=False))
    assert ds.labels.tolist() == [0, 1, 0]
    np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4], [5, 6]])


def test_manifest_file(tmp_path):
    write(tmp_path, "d.tsv", "id\tx\ty\tclass\n1\t0.5\t1\tyes\n2\t0.1\t2\tno\n")
    m = write(tmp_path, "d.ini", "[dataset]\npath = d.tsv\ndelimiter = tab\nlabel_column = class\n"
                                 "positive_label = yes\nignore_columns = id\nname = demo\n")
    ds = load_dataset(load_manifest(m))
    assert ds.name == "demo" and ds.labels.tolist() == [1, 0]
    np.testing.assert_array_equal(ds.features, [[0.5, 1.0], [0.1, 2.0]])


def test_parse_error_names_cell(tmp_path):
    p = write(tmp_path, "bad.csv", "a,b,outlier\n1,2,0\n3,oops,1\n")
    with pytest.raises(ParseError) as info:
        load_dataset(p)
    assert info.value.row == 3 and info.value.column == "b"
    assert "oops" in str(info.value)


def test_label_errors(tmp_path):
    with pytest.raises(NonBinaryLabel):
        load_dataset(write(tmp_path, "nb.csv", "a,outlier\n1,0\n2,2\n"))
    with pytest.raises(NonBinaryLabel):
        load_dataset(write(tmp_path, "nb2.csv", "a,outlier\n1,no\n2,yes\n"))
    with pytest.raises(MissingLabelColumn):
        load_dataset(write(tmp_path, "ml.csv", "a,b\n1,0\n"))
    with pytest.raises(ParseError):
        load_dataset(write(tmp_path, "ragged.csv", "a,outlier\n1,0\n2\n"))


def test_dataset_roundtrip(tmp_path):
    ds = make_planted_dataset(20, 3, 3, seed=5)
    save_dataset(ds, tmp_path / "p.csv")
    back = load_dataset(tmp_path / "p.csv")
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)


# ensemble files ---------------------------------------------------------------

@pytest.fixture(scope="module")
def ensemble():
    ds = make_planted_dataset(40, 4, 2, seed=0)
    return generate_ensemble(ds.features, 6, master_seed=3)


def test_ensemble_roundtrip(tmp_path, ensemble):
    save_ensemble(ensemble, tmp_path / "e.soul")
    back = load_ensemble(tmp_path / "e.soul")
    assert back == ensemble
    assert np.array_equal(back.scores, ensemble.scores)
    assert back.specs == ensemble.specs and back.fingerprint == ensemble.fingerprint


def test_ensemble_checksum(ensemble):
    text = dumps_ensemble(ensemble)
    head, body = text.split("\n", 1)
    tampered = head + "\n" + body.replace("\n", "\n9", 1)
    with pytest.raises(ChecksumMismatch):
        loads_ensemble(tampered)
    header = json.loads(head)
    header["checksum"] = "0" * 64
    with pytest.raises(ChecksumMismatch):
        loads_ensemble(json.dumps(header) + "\n" + body)


def test_ensemble_version(ensemble):
    head, body = dumps_ensemble(ensemble).split("\n", 1)
    header = json.loads(head)
    header["version"] = 99
    with pytest.raises(VersionMismatch):
        loads_ensemble(json.dumps(header) + "\n" + body)
    with pytest.raises(ValueError):
        loads_ensemble("not json\n1,2\n")


def test_plain_matrix_roundtrip():
    e = Ensemble(np.array([[0.1, 1 / 3, 2e-300], [np.pi, -0.0, 1e300]]))
    assert np.array_equal(loads_ensemble(dumps_ensemble(e)).scores, e.scores)


def test_report_roundtrip(tmp_path):
    rep = run_benchmark([make_planted_dataset(40, 4, 2, seed=1)], ["all"], runs=2, ensemble_size=3)
    save_report(rep, tmp_path / "r.json")
    assert load_report(tmp_path / "r.json").to_json() == rep.to_json()


# synthetic data ---------------------------------------------------------------

def test_planted_is_deterministic():
    a = make_planted_dataset(100, 10, 2, 8.0, seed=3)
    b = make_planted_dataset(100, 10, 2, 8.0, seed=3)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.labels.mean() == pytest.approx(10 / 110)
    assert not np.array_equal(a.features, make_planted_dataset(100, 10, 2, 8.0, seed=4).features)


def test_planted_shell():
    ds = make_planted_dataset(50, 30, 3, 5.0, seed=0)
    r = np.linalg.norm(ds.features[ds.labels == 1], axis=1)
    assert np.all((r >= 5.0) & (r <= 6.0))
    with pytest.raises(ValueError):
        make_planted_dataset(0, 1)


def test_planted_outliers_have_high_lof():
    hits = 0
    for seed in range(100):
        ds = make_planted_dataset(100, 10, 2, 8.0, seed=seed)
        lof = lof_scores(ds.features, np.arange(ds.n), 5)
        hits += lof[ds.labels == 1].mean() > lof[ds.labels == 0].mean()
    assert hits >= 95


def test_planted_ensemble_good_components():
    ds = make_planted_dataset(200, 10, 4, 3.5, seed=2)
    e, good = make_planted_ensemble(ds, seed=2)
    assert e.m == 20 and len(good) == 5

    aps = np.array([average_precision(r, ds.labels) for r in e.scores])
    bad = np.setdiff1d(np.arange(20), good)
    assert aps[good].min() > aps[bad].max()
