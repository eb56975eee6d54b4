import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from structeval.harness import BackendKind, RunConfig, run_pipeline
from structeval.report import (ALL, METRICS, SUMMARY_COLUMNS, aggregate, emit, heatmap, population_variance,
                               read_summary_csv, to_csv, to_json, variance_across_models)

MANIFEST = [
    {"id": "a", "format": "CSV", "complexity": "SIMPLE"},
    {"id": "b", "format": "CSV", "complexity": "SIMPLE"},
    {"id": "c", "format": "JSON_TREE", "complexity": "NESTED"},
]


def rec(sid, model, value, status="OK"):
    r = {"sample_id": sid, "status": status, "backend": {"model": model}}
    r.update({m: value for m in METRICS})
    return r


def test_grouped_means():
    records = [rec("a", "m", 0.1), rec("b", "m", 0.4, "BOTTOM"), rec("c", "m", 1.0)]
    s = aggregate(records, MANIFEST)
    assert [r.key for r in s.rows] == [("m", "CSV", "SIMPLE"), ("m", "JSON_TREE", "NESTED")]
    first = s.rows[0]
    assert first.count == 2 and first.bottom_rate == 0.5
    assert first.means["csa"] == 0.25  # exact: (1/10 + 4/10) / 2 in binary fractions
    coarse = aggregate(records, MANIFEST, by=("model",))
    assert coarse.rows[0].key == ("m", ALL, ALL)
    assert math.isclose(coarse.rows[0].means["bleu"], 0.5, abs_tol=1e-12)


def test_means_are_order_independent():
    rng = random.Random(1)
    records = [rec(rng.choice("abc"), "m", rng.random()) for _ in range(500)]
    a = aggregate(records, MANIFEST)
    rng.shuffle(records)
    b = aggregate(records, MANIFEST)
    assert [r.means for r in a.rows] == [r.means for r in b.rows]


def test_reference_variance_fixture():
    records = [rec("a", "m1", 0.2), rec("a", "m2", 0.8)]
    v = variance_across_models([aggregate(records, MANIFEST)], "csa")
    assert v.variance["csa"]["TABLE"] == 0.09
    assert population_variance([0.2, 0.8]) == 0.09


def test_three_model_variance_by_hand():
    records = [
        rec("a", "x", 0.5), rec("b", "x", 1.0),   # x: table mean 0.75
        rec("a", "y", 0.25), rec("b", "y", 0.25),  # y: 0.25
        rec("a", "z", 0.0), rec("b", "z", 0.5),   # z: 0.25
        rec("c", "x", 1.0), rec("c", "y", 0.0),
    ]
    v = variance_across_models([aggregate(records, MANIFEST)])
    mean = (0.75 + 0.25 + 0.25) / 3
    expected = ((0.75 - mean) ** 2 + 2 * (0.25 - mean) ** 2) / 3
    assert abs(v.variance["csa"]["TABLE"] - expected) < 1e-12
    assert v.variance["csa"]["STRUCTURE"] == 0.25  # x=1, y=0
    assert v.models == ("x", "y", "z")
    assert set(v.track_means["csa"]["STRUCTURE"]) == {"x", "y"}


def test_variance_is_independent_of_grouping():
    records = [rec("a", "x", 0.3), rec("b", "x", 0.9), rec("a", "y", 0.6), rec("b", "y", 0.1)]
    fine = variance_across_models([aggregate(records, MANIFEST)])
    coarse = variance_across_models([aggregate(records, MANIFEST, by=("model",))])
    assert fine.variance == coarse.variance


def test_variance_needs_two_models():
    with pytest.raises(ValueError, match="at least 2 models"):
        variance_across_models([aggregate([rec("a", "m", 1.0)], MANIFEST)])


def test_unknown_sample_id():
    with pytest.raises(KeyError, match="zzz"):
        aggregate([rec("zzz", "m", 1.0)], MANIFEST)


def test_empty_summary_csv():
    assert to_csv(aggregate([], MANIFEST)) == ",".join(SUMMARY_COLUMNS) + "\n"


def test_csv_and_json_export(tmp_path):
    records = [rec("a", "m", 1 / 3), rec("c", "n", 2 / 3)]
    s = aggregate(records, MANIFEST)
    text = to_csv(s)
    assert text.splitlines()[1] == "m,CSV,SIMPLE,1,0.3333,0.3333,0.3333,0.3333,0.3333,0.0000"
    emit(s, tmp_path / "s.csv")
    emit(s, tmp_path / "s2.csv")
    assert (tmp_path / "s.csv").read_bytes() == (tmp_path / "s2.csv").read_bytes()
    back = read_summary_csv(tmp_path / "s.csv")
    assert [r.key for r in back.rows] == [r.key for r in s.rows]
    assert all(abs(back.rows[i].means[m] - s.rows[i].means[m]) < 5e-5 for i in range(2) for m in METRICS)
    emit(s, tmp_path / "s.json", "json")
    rows = json.loads((tmp_path / "s.json").read_text())
    assert rows[0]["count"] == 1 and rows[0]["csa"] == 0.3333
    with pytest.raises(ValueError):
        emit(s, tmp_path / "s.xml", "xml")


def test_heatmap_over_corpus(corpus):
    a = run_pipeline(corpus, RunConfig(backend=BackendKind.ORACLE))
    b = run_pipeline(corpus, RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=0.3))
    s = aggregate(a + b, corpus)
    assert len(s.rows) == 2 * 48 and all(r.count == 2 for r in s.rows)
    h = heatmap(s, "csa", "format")
    assert h.shape == (2, 8)
    assert h.row_labels == ("corruptor-0.3", "oracle")
    assert np.all(h.values[1] == 1.0) and np.all(h.values[0] < 1.0)
    hc = heatmap(s, "nted", "complexity")
    assert hc.shape == (2, 6)
    csv_text = to_csv(h)
    assert csv_text.splitlines()[0].startswith("model,JSON_TREE")
    payload = json.loads(to_json(h))
    assert payload["values"][1] == [1.0] * 8


def test_heatmap_needs_model_grouping():
    s = aggregate([rec("a", "m", 1.0)], MANIFEST, by=("format",))
    with pytest.raises(ValueError):
        heatmap(s)


def test_exact_sums_match_fraction_reference():
    rng = random.Random(4)
    values = [rng.random() for _ in range(1000)]
    records = [rec("a", "m", v) for v in values]
    s = aggregate(records, MANIFEST)
    assert s.rows[0].means["csa"] == float(sum(map(Fraction, values)) / len(values))
