# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:light
#     text_representation:
#       extension: .py
#       format_name: light
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# # Comparing several "models"
#
# With a real endpoint you would record once and replay afterwards:
#
#     structeval gen --per-category 2 --out manifest.jsonl
#     structeval record --manifest manifest.jsonl --endpoint https://host/v1 --model my-model --out cassette.jsonl
#     structeval run --manifest manifest.jsonl --backend replay --cassette cassette.jsonl --out my-model.jsonl
#
# Here three corruptors of increasing severity play the models, and a
# perfect oracle sets the ceiling.

import os
import tempfile

import numpy as np

from structeval.datagen import CorpusConfig, gen_corpus
from structeval.harness import BackendKind, RunConfig, run_pipeline
from structeval.report import aggregate, emit, heatmap, variance_across_models

corpus = gen_corpus(CorpusConfig(per_category=2, master_seed=0))

runs = [RunConfig(backend=BackendKind.ORACLE)]
runs += [RunConfig(backend=BackendKind.CORRUPTOR, corruption_rate=r, corruption_seed=1) for r in (0.05, 0.2, 0.4)]
records = [rec for cfg in runs for rec in run_pipeline(corpus, cfg)]
len(records)

# `aggregate` groups on every key by default and keeps exact sums, so
# coarser views never drift from finer ones.

summary = aggregate(records, corpus)
summary.models

# One number per model:

overall = aggregate(records, corpus, by=("model",))
for row in overall.rows:
    print(f"{row.model:16s} csa={row.means['csa']:.3f} nted={row.means['nted']:.3f} "
          f"rouge2={row.means['rouge2']:.3f} bottom={row.bottom_rate:.2f}")

# How far apart are the models? Population variance of their per-track
# means, metric by metric. A metric that separates models well has a large
# variance here.

report = variance_across_models([summary])
for metric in ("csa", "nted", "rouge2", "bleu"):
    print(metric, {track: round(v, 4) for track, v in report.variance[metric].items()})

# A models by formats matrix of mean CSA:

h = heatmap(summary, "csa", "format")
print("".ljust(16) + " ".join(c[:9].rjust(9) for c in h.col_labels))
for label, row in zip(h.row_labels, h.values):
    print(label.ljust(16) + " ".join(f"{v:9.3f}" for v in row))

# The hardest format for the mildest corruptor:

mild = h.row_labels.index("corruptor-0.05")
h.col_labels[int(np.argmin(h.values[mild]))]

# Everything can be written out as CSV or JSON; `structeval report` does
# exactly this from result files.

out = tempfile.mkdtemp()
emit(summary, os.path.join(out, "summary.csv"))
emit(report, os.path.join(out, "variance.json"), "json")
emit(h, os.path.join(out, "heatmap_format.csv"))
sorted(os.listdir(out))
