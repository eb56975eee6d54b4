"""The closed evaluation loop over a corpus: prompt, generate, extract,
parse and score each sample."""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from ..datagen import Sample, atomic_write
from ..ir import Bottom
from ..metrics import csa, nted
from ..parsers import extract_candidate, parse
from ..textmetrics import bleu, rouge_n
from .backends import (BackendError, CassetteWriter, HttpChatBackend, RunConfig, make_backend,
                       prompt_hash)

log = logging.getLogger(__name__)

OK = "OK"
BOTTOM = "BOTTOM"


@dataclass(frozen=True)
class EvalRecord:
    sample_id: str
    raw_output: str
    extracted: str
    status: str
    csa: float
    nted: float
    rouge1: float
    rouge2: float
    bleu: float
    latency_ms: float
    backend: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=False)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalRecord":
        return cls(**d)


def score_sample(sample: Sample, output: str, latency_ms: float = 0.0, meta: Optional[dict] = None) -> EvalRecord:
    """Score one model output against its sample."""
    meta = dict(meta or {})
    extracted = extract_candidate(output, sample.format)
    outcome = parse(sample.format, extracted)
    gen = outcome.result
    if outcome.diagnostics:
        meta["diagnostics"] = [d.message for d in outcome.diagnostics]
    failed = isinstance(gen, Bottom)
    return EvalRecord(
        sample_id=sample.id,
        raw_output=output,
        extracted=extracted,
        status=BOTTOM if failed else OK,
        csa=0.0 if failed else csa(sample.ir, gen),
        nted=0.0 if failed else nted(sample.ir, gen),
        rouge1=rouge_n(sample.raw, output, 1),
        rouge2=rouge_n(sample.raw, output, 2),
        bleu=bleu(sample.raw, output),
        latency_ms=latency_ms,
        backend=meta,
    )


def _evaluate(backend, sample: Sample, base_meta: dict) -> EvalRecord:
    try:
        reply = backend.generate(sample)
    except BackendError as exc:
        # no output at all: Bottom, and the text metrics of an empty string
        return EvalRecord(
            sample_id=sample.id, raw_output="", extracted="", status=BOTTOM,
            csa=0.0, nted=0.0,
            rouge1=rouge_n(sample.raw, "", 1), rouge2=rouge_n(sample.raw, "", 2),
            bleu=bleu(sample.raw, ""), latency_ms=0.0,
            backend=dict(base_meta, error=str(exc)),
        )
    return score_sample(sample, reply.text, reply.latency_ms, dict(base_meta, **reply.meta))


def run_pipeline(corpus: Sequence[Sample], config: RunConfig, backend=None) -> list[EvalRecord]:
    """Evaluate every sample once; records come back sorted by sample id.

    ``backend`` overrides the one built from ``config`` (used by tests).
    Configuration problems raise :class:`ConfigError` before any request.
    """
    ids = [s.id for s in corpus]
    if len(set(ids)) != len(ids):
        raise ValueError("sample ids must be unique")
    owned = backend is None
    backend = backend or make_backend(config)
    base_meta = {"kind": config.backend.value, "model": config.model_label}
    try:
        if config.concurrency == 1 or len(corpus) < 2:
            records = [_evaluate(backend, s, base_meta) for s in corpus]
        else:
            with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
                records = list(pool.map(lambda s: _evaluate(backend, s, base_meta), corpus))
    finally:
        if owned and isinstance(backend, HttpChatBackend):
            backend.close()
    return sorted(records, key=lambda r: r.sample_id)


def record_cassette(corpus: Sequence[Sample], config: RunConfig, path, backend=None) -> dict[str, str]:
    """Query the HTTP backend for each prompt and store the responses.

    Failures are logged and returned as ``{sample_id: error}``; whatever
    succeeded is still written, and a partial cassette replays fine.
    """
    owned = backend is None
    backend = backend or HttpChatBackend(config)
    writer = CassetteWriter()
    failures: dict[str, str] = {}

    def fetch(sample: Sample):
        prompt = sample.prompt
        try:
            writer.add(prompt_hash(prompt), backend.complete(prompt).text)
        except BackendError as exc:
            log.error("%s: %s", sample.id, exc)
            failures[sample.id] = str(exc)

    try:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            list(pool.map(fetch, corpus))
    finally:
        if owned:
            backend.close()
    atomic_write(path, writer.text())
    return dict(sorted(failures.items()))


def write_results(records: Iterable[EvalRecord], path: os.PathLike) -> None:
    atomic_write(path, "".join(r.to_json() + "\n" for r in records))


def read_results(path: os.PathLike) -> list[EvalRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [EvalRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise OSError(f"cannot read results {path}: {exc.strerror or exc}") from exc
