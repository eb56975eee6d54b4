"""Turn eval records into grouped score tables, plus the cross-model views
built on top of them."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .datagen import Sample, atomic_write
from .parsers import Format, Track

METRICS = ("csa", "nted", "rouge1", "rouge2", "bleu")
GROUP_KEYS = ("model", "format", "complexity")
ALL = "*"  # placeholder for a grouping key that was collapsed
SUMMARY_COLUMNS = GROUP_KEYS + ("count",) + METRICS + ("bottom_rate",)


@dataclass(frozen=True)
class GroupRow:
    model: str
    format: str
    complexity: str
    count: int
    means: dict  # metric -> float
    bottom_rate: float
    # exact per-metric sums, kept so coarser views can be rebuilt without drift
    sums: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.model, self.format, self.complexity)


@dataclass(frozen=True)
class Summary:
    rows: tuple[GroupRow, ...]
    by: tuple[str, ...] = GROUP_KEYS
    # (model, track) -> (count, {metric: Fraction sum}); independent of ``by``
    track_totals: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def models(self) -> list[str]:
        return sorted({m for m, _ in self.track_totals} or {r.model for r in self.rows})


@dataclass(frozen=True)
class VarianceReport:
    models: tuple[str, ...]
    # metric -> track name -> population variance of the model-level means
    variance: dict
    track_means: dict = field(default_factory=dict, repr=False)  # metric -> track -> model -> mean


@dataclass(frozen=True)
class Heatmap:
    metric: str
    axis: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray  # NaN where a model has no records for a column

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _record_field(rec, name):
    return rec[name] if isinstance(rec, Mapping) else getattr(rec, name)


def _manifest_index(manifest) -> dict[str, tuple[str, str]]:
    index = {}
    for item in manifest:
        if isinstance(item, Sample):
            index[item.id] = (item.format.value, item.complexity.value)
        else:
            index[item["id"]] = (item["format"], item["complexity"])
    return index


def _model_of(rec) -> str:
    meta = _record_field(rec, "backend") or {}
    return str(meta.get("model") or meta.get("kind") or "model")


def aggregate(records: Iterable, manifest: Union[Sequence[Sample], Sequence[dict]],
              by: Sequence[str] = GROUP_KEYS, model: Optional[str] = None) -> Summary:
    """Group records and average every metric exactly.

    ``by`` picks any subset of (model, format, complexity); collapsed keys
    show as ``*``. ``model`` overrides the label stored in the records.
    Raises KeyError naming the first record whose sample id is unknown.
    """
    unknown = [k for k in by if k not in GROUP_KEYS]
    if unknown:
        raise ValueError(f"cannot group by {unknown}")
    index = _manifest_index(manifest)
    groups: dict[tuple, list] = defaultdict(lambda: [0, 0, defaultdict(Fraction)])
    totals: dict[tuple, list] = defaultdict(lambda: [0, defaultdict(Fraction)])
    for rec in records:
        sid = _record_field(rec, "sample_id")
        if sid not in index:
            raise KeyError(f"sample id {sid!r} is not in the manifest")
        fmt, cx = index[sid]
        label = model if model is not None else _model_of(rec)
        full = {"model": label, "format": fmt, "complexity": cx}
        key = tuple(full[k] if k in by else ALL for k in GROUP_KEYS)
        g = groups[key]
        g[0] += 1
        g[1] += _record_field(rec, "status") != "OK"
        t = totals[(label, Format(fmt).track.value)]
        t[0] += 1
        for m in METRICS:
            value = Fraction(_record_field(rec, m))
            g[2][m] += value
            t[1][m] += value
    rows = []
    for key in sorted(groups):
        n, bottoms, sums = groups[key]
        rows.append(GroupRow(*key, count=n,
                             means={m: float(sums[m] / n) for m in METRICS},
                             bottom_rate=float(Fraction(bottoms, n)),
                             sums={m: sums[m] for m in METRICS}))
    track_totals = {k: (v[0], {m: v[1][m] for m in METRICS}) for k, v in totals.items()}
    return Summary(tuple(rows), tuple(k for k in GROUP_KEYS if k in by), track_totals)


def population_variance(values: Sequence[float]) -> float:
    """Population variance computed on the decimal spelling of each value,
    so 0.2 and 0.8 give exactly 0.09 rather than 0.09000000000000001."""
    return float(statistics.pvariance([Decimal(repr(float(v))) for v in values]))


def variance_across_models(summaries: Sequence[Summary], metric: Optional[str] = None) -> VarianceReport:
    """Population variance, per track, of each model's mean score.

    A model's track mean averages every one of its records in that track.
    ``metric`` restricts the report to one metric; by default all five.
    """
    metrics = METRICS if metric is None else (metric,)
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}")
    pooled: dict[tuple, list] = defaultdict(lambda: [0, defaultdict(Fraction)])
    for s in summaries:
        for key, (n, sums) in s.track_totals.items():
            acc = pooled[key]
            acc[0] += n
            for m in METRICS:
                acc[1][m] += sums[m]
    models = sorted({model for model, _ in pooled})
    if len(models) < 2:
        raise ValueError(f"need at least 2 models, got {len(models)}")
    variance: dict = {}
    track_means: dict = {}
    for m in metrics:
        variance[m], track_means[m] = {}, {}
        for track in (t.value for t in Track):
            means = {model: float(pooled[(model, track)][1][m] / pooled[(model, track)][0])
                     for model in models if (model, track) in pooled}
            if len(means) < 2:
                continue
            track_means[m][track] = means
            variance[m][track] = population_variance(list(means.values()))
    return VarianceReport(tuple(models), variance, track_means)


def heatmap(summary: Summary, metric: str = "csa", axis: str = "format") -> Heatmap:
    """Models by formats (or complexities) matrix of a metric's mean."""
    if axis not in ("format", "complexity"):
        raise ValueError("axis must be 'format' or 'complexity'")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if "model" not in summary.by or axis not in summary.by:
        raise ValueError(f"summary must be grouped by model and {axis}")
    cells: dict[tuple, list] = defaultdict(lambda: [0, Fraction(0)])
    for row in summary.rows:
        col = getattr(row, axis)
        acc = cells[(row.model, col)]
        acc[0] += row.count
        acc[1] += row.sums.get(metric, Fraction(row.means[metric]) * row.count)
    models = sorted({r.model for r in summary.rows})
    if axis == "format":
        present = {getattr(r, axis) for r in summary.rows}
        cols = [f.value for f in Format if f.value in present]
    else:
        cols = sorted({r.complexity for r in summary.rows})
    values = np.full((len(models), len(cols)), np.nan)
    for i, model in enumerate(models):
        for j, col in enumerate(cols):
            if (model, col) in cells:
                n, total = cells[(model, col)]
                values[i, j] = float(total / n)
    return Heatmap(metric, axis, tuple(models), tuple(cols), values)


# -- export -----------------------------------------------------------------

def _fixed(x: float) -> str:
    return "" if x is None or math.isnan(x) else f"{x:.4f}"


def _table_of(obj) -> tuple[list[str], list[list[str]]]:
    if isinstance(obj, Summary):
        body = [[r.model, r.format, r.complexity, str(r.count), *(_fixed(r.means[m]) for m in METRICS),
                 _fixed(r.bottom_rate)] for r in obj.rows]
        return list(SUMMARY_COLUMNS), body
    if isinstance(obj, VarianceReport):
        body = [[m, track, _fixed(v), str(len(obj.track_means[m][track]))]
                for m in obj.variance for track, v in obj.variance[m].items()]
        return ["metric", "track", "variance", "models"], body
    if isinstance(obj, Heatmap):
        body = [[label, *(_fixed(v) for v in obj.values[i])] for i, label in enumerate(obj.row_labels)]
        return ["model", *obj.col_labels], body
    raise TypeError(f"cannot emit {type(obj).__name__}")


def to_csv(obj) -> str:
    header, body = _table_of(obj)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(body)
    return buf.getvalue()


def to_json(obj) -> str:
    """JSON mirror of the CSV: the same columns, numbers as 4-decimal strings
    turned back into numbers."""
    header, body = _table_of(obj)
    numeric = set(METRICS) | {"bottom_rate", "variance"}
    if isinstance(obj, Heatmap):
        payload = {
            "metric": obj.metric,
            "axis": obj.axis,
            "rows": list(obj.row_labels),
            "columns": list(obj.col_labels),
            "values": [[float(c) if c else None for c in row[1:]] for row in body],
        }
    else:
        payload = [
            {h: (float(c) if h in numeric else int(c) if h in ("count", "models") else c)
             for h, c in zip(header, row)}
            for row in body
        ]
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def emit(obj, path: os.PathLike, fmt: str = "csv") -> None:
    """Write any report object atomically, as CSV or JSON."""
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ValueError("fmt must be 'csv' or 'json'")
    atomic_write(path, to_csv(obj) if fmt == "csv" else to_json(obj))


def read_summary_csv(path: os.PathLike) -> Summary:
    """Load a summary CSV written by :func:`emit` (exact sums are lost)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows_in = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if header != list(SUMMARY_COLUMNS):
        raise ValueError(f"{path}: not a summary CSV (header {header})")
    rows = []
    for cells in rows_in:
        rec = dict(zip(header, cells))
        n = int(rec["count"])
        means = {m: float(rec[m]) for m in METRICS}
        rows.append(GroupRow(rec["model"], rec["format"], rec["complexity"], n, means,
                             float(rec["bottom_rate"]),
                             {m: Fraction(means[m]) * n for m in METRICS}))
    by = tuple(k for k in GROUP_KEYS if not rows or getattr(rows[0], k) != ALL)
    return Summary(tuple(rows), by)
