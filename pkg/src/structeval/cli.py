"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 backend or network error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import datagen
from .datagen import Complexity, CorpusConfig, gen_corpus, load_manifest
from .harness import (BackendKind, ConfigError, RunConfig, read_results, record_cassette, run_pipeline,
                      write_results)
from .harness.backends import BackendError
from .ir import Bottom
from .metrics import csa, nted
from .parsers import Format, parse
from .report import aggregate, emit, heatmap, variance_across_models
from .textmetrics import bleu, rouge_n

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("structeval")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- configuration ------------------------------------------------------------

def load_config(path: Optional[str]) -> tuple[dict, dict]:
    """Read the ``[corpus]`` and ``[run]`` tables of a TOML file."""
    if not path:
        return {}, {}
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    extra = set(doc) - {"corpus", "run"}
    if extra:
        raise UsageError(f"{path}: unknown section(s) {sorted(extra)}")
    return dict(doc.get("corpus", {})), dict(doc.get("run", {}))


def _check_keys(section: str, given: dict, cls) -> None:
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(given) - known
    if unknown:
        raise UsageError(f"[{section}] unknown key(s) {sorted(unknown)}")


def corpus_config(table: dict, seed: Optional[int] = None) -> CorpusConfig:
    table = dict(table)
    _check_keys("corpus", table, CorpusConfig)
    try:
        for name in ("nesting_depth", "list_length", "text_length", "wide_columns"):
            if name in table:
                table[name] = tuple(table[name])
        if "formats" in table:
            table["formats"] = tuple(Format.parse_name(f) for f in table["formats"])
        if "complexities" in table:
            table["complexities"] = tuple(Complexity(c.upper()) for c in table["complexities"])
        if seed is not None:
            table["master_seed"] = seed
        return CorpusConfig(**table)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad [corpus] settings: {exc}") from exc


def run_config(table: dict, overrides: dict) -> RunConfig:
    table = dict(table)
    table.update({k: v for k, v in overrides.items() if v is not None})
    _check_keys("run", table, RunConfig)
    try:
        if "backend" in table:
            table["backend"] = BackendKind(str(table["backend"]).upper())
        return RunConfig(**table)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad [run] settings: {exc}") from exc


def _manifest(path) -> list:
    if not path:
        raise UsageError("--manifest is required")
    try:
        return load_manifest(path)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _write_or_print(text: str, out: Optional[str]) -> None:
    if out:
        datagen.atomic_write(out, text)
    else:
        sys.stdout.write(text)


# -- verbs ---------------------------------------------------------------------

def cmd_gen(args, corpus_tbl, run_tbl) -> int:
    if args.per_category is not None:
        corpus_tbl = dict(corpus_tbl, per_category=args.per_category)
    cfg = corpus_config(corpus_tbl, args.seed)
    out = args.out or "manifest.jsonl"
    samples = gen_corpus(cfg, out)
    log.info("wrote %d samples to %s", len(samples), out)
    return EXIT_OK


def cmd_describe(args, corpus_tbl, run_tbl) -> int:
    samples = _manifest(args.manifest)
    if args.id:
        samples = [s for s in samples if s.id in set(args.id)]
    text = "".join(json.dumps({"id": s.id, "prompt": s.prompt}, ensure_ascii=False) + "\n" for s in samples)
    _write_or_print(text, args.out)
    return EXIT_OK


def _run_overrides(args) -> dict:
    return {
        "backend": args.backend, "endpoint": args.endpoint, "model": args.model,
        "cassette": args.cassette, "corruption_rate": args.rate,
        "corruption_seed": args.seed, "concurrency": args.jobs, "label": args.label,
    }


def cmd_run(args, corpus_tbl, run_tbl) -> int:
    config = run_config(run_tbl, _run_overrides(args))
    samples = _manifest(args.manifest)
    records = run_pipeline(samples, config)
    out = args.out or "results.jsonl"
    write_results(records, out)
    bottoms = sum(r.status != "OK" for r in records)
    log.info("wrote %d records to %s (%d Bottom)", len(records), out, bottoms)
    failed = [r for r in records if "error" in r.backend]
    if records and len(failed) == len(records):
        print(f"structeval: every request failed, e.g. {failed[0].backend['error']}", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def cmd_record(args, corpus_tbl, run_tbl) -> int:
    overrides = _run_overrides(args)
    overrides["backend"] = BackendKind.HTTP_CHAT.value
    config = run_config(run_tbl, overrides)
    samples = _manifest(args.manifest)
    failures = record_cassette(samples, config, args.out or config.cassette or "cassette.jsonl")
    for sid, err in failures.items():
        log.error("%s: %s", sid, err)
    return EXIT_BACKEND if failures and len(failures) == len(samples) else EXIT_OK


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 ({exc.reason})") from exc


def cmd_score(args, corpus_tbl, run_tbl) -> int:
    try:
        fmt = Format.parse_name(args.format)
    except KeyError as exc:
        raise UsageError(f"unknown format {args.format!r}") from exc
    ref_text, gen_text = _read_text(args.reference), _read_text(args.generated)
    ref = parse(fmt, ref_text).result
    if isinstance(ref, Bottom):
        raise DataError(f"{args.reference}: reference does not parse ({ref.message})")
    gen = parse(fmt, gen_text).result
    scores = {
        "status": "BOTTOM" if isinstance(gen, Bottom) else "OK",
        "csa": csa(ref, gen),
        "nted": nted(ref, gen),
        "rouge1": rouge_n(ref_text, gen_text, 1),
        "rouge2": rouge_n(ref_text, gen_text, 2),
        "bleu": bleu(ref_text, gen_text),
    }
    _write_or_print(json.dumps(scores, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_report(args, corpus_tbl, run_tbl) -> int:
    samples = _manifest(args.manifest)
    records = []
    for path in args.results:
        try:
            records.extend(read_results(path))
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        except (ValueError, TypeError) as exc:
            raise DataError(f"{path}: {exc}") from exc
    try:
        summary = aggregate(records, samples, by=args.by.split(","))
    except KeyError as exc:
        raise DataError(exc.args[0]) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out or "report")
    ext = args.format
    emit(summary, out / f"summary.{ext}", ext)
    if len(summary.models) >= 2:
        emit(variance_across_models([summary]), out / f"variance.{ext}", ext)
    if "model" in summary.by:
        for axis in ("format", "complexity"):
            if axis in summary.by:
                emit(heatmap(summary, args.metric, axis), out / f"heatmap_{axis}.{ext}", ext)
    log.info("report written to %s", out)
    return EXIT_OK


# -- wiring ----------------------------------------------------------------------

def _common(defaults: bool) -> argparse.ArgumentParser:
    # Global flags are accepted before or after the verb; SUPPRESS keeps a
    # sub-parser from clobbering a value given at the top level.
    p = argparse.ArgumentParser(add_help=False)
    d = None if defaults else argparse.SUPPRESS
    p.add_argument("--config", default=d, help="TOML file with [corpus] and [run] tables")
    p.add_argument("--seed", type=int, default=d, help="master seed (gen) or corruption seed (run)")
    p.add_argument("--out", default=d, help="output file or directory")
    p.add_argument("--jobs", type=int, default=d, help="concurrent backend requests")
    p.add_argument("-v", "--verbose", action="store_true", default=False if defaults else argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="structeval", description="Closed-loop evaluation of structured output.",
                     parents=[_common(True)])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    common = _common(False)

    p = sub.add_parser("gen", parents=[common], help="generate a seeded corpus manifest")
    p.add_argument("--per-category", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("describe", parents=[common], help="render the prompts of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--id", action="append", help="restrict to these sample ids")
    p.set_defaults(func=cmd_describe)

    for verb, func, text in (("run", cmd_run, "evaluate a manifest against a backend"),
                             ("record", cmd_record, "capture HTTP responses into a cassette")):
        p = sub.add_parser(verb, parents=[common], help=text)
        p.add_argument("--manifest", required=True)
        p.add_argument("--backend", choices=[k.value.lower() for k in BackendKind] + [k.value for k in BackendKind])
        p.add_argument("--endpoint")
        p.add_argument("--model")
        p.add_argument("--label", help="model label used in reports")
        p.add_argument("--cassette")
        p.add_argument("--rate", type=float, help="corruption rate for the corruptor backend")
        p.set_defaults(func=func)

    p = sub.add_parser("score", parents=[common], help="score a generated file against a reference")
    p.add_argument("reference")
    p.add_argument("generated")
    p.add_argument("--format", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", parents=[common], help="aggregate results into summary tables")
    p.add_argument("results", nargs="+")
    p.add_argument("--manifest", required=True)
    p.add_argument("--by", default="model,format,complexity")
    p.add_argument("--metric", default="csa", help="metric shown in heatmaps")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        corpus_tbl, run_tbl = load_config(args.config)
        return args.func(args, corpus_tbl, run_tbl)
    except (UsageError, ConfigError) as exc:
        print(f"structeval: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"structeval: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BackendError as exc:
        print(f"structeval: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"structeval: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
