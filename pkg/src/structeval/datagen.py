"""Seeded synthetic corpus: every format crossed with six data characteristics.

Each sample gets its own 64-bit seed derived from the master seed and its
(format, complexity, index) coordinates through :class:`numpy.random.SeedSequence`,
so any single sample can be regenerated in isolation.
"""
from __future__ import annotations

import enum
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .describe import Description, describe, render_prompt
from .ir import IRDoc, TableIR, ir_equal, tree_from_python
from .parsers import Format, Track, parse, serialize


class Complexity(enum.Enum):
    SIMPLE = "SIMPLE"
    NESTED = "NESTED"
    LONG_LIST = "LONG_LIST"
    SPARSE = "SPARSE"
    TEXT_HEAVY = "TEXT_HEAVY"
    SYMBOLIC = "SYMBOLIC"


@dataclass(frozen=True)
class CorpusConfig:
    per_category: int = 2
    counts: dict = field(default_factory=dict)  # "FORMAT/COMPLEXITY" -> count override
    formats: tuple[Format, ...] = tuple(Format)
    complexities: tuple[Complexity, ...] = tuple(Complexity)
    nesting_depth: tuple[int, int] = (3, 6)
    list_length: tuple[int, int] = (50, 200)
    sparsity: float = 0.5
    text_length: tuple[int, int] = (200, 800)
    wide_columns: tuple[int, int] = (12, 24)
    symbol_density: float = 0.5
    master_seed: int = 0

    def __post_init__(self):
        for name in ("nesting_depth", "list_length", "text_length", "wide_columns"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 1:
                raise ValueError(f"{name} must be a non-empty positive range, got {(lo, hi)}")
        if not 0.0 <= self.sparsity <= 1.0 or not 0.0 <= self.symbol_density <= 1.0:
            raise ValueError("sparsity and symbol_density must lie in [0, 1]")
        if self.per_category < 0 or any(v < 0 for v in self.counts.values()):
            raise ValueError("sample counts must be >= 0")

    def count(self, fmt: Format, cx: Complexity) -> int:
        return int(self.counts.get(f"{fmt.value}/{cx.value}", self.per_category))


@dataclass(frozen=True)
class Sample:
    id: str
    format: Format
    complexity: Complexity
    seed: int
    raw: str
    ir: IRDoc
    description: Description

    @property
    def prompt(self) -> str:
        return render_prompt(self.description)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "format": self.format.value,
            "complexity": self.complexity.value,
            "seed": self.seed,
            "raw": self.raw,
            "description": self.prompt,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Sample":
        fmt = Format(rec["format"])
        outcome = parse(fmt, rec["raw"])
        if not outcome.ok:
            raise ValueError(f"sample {rec['id']}: raw payload does not parse ({outcome.result.message})")
        return cls(
            id=rec["id"],
            format=fmt,
            complexity=Complexity(rec["complexity"]),
            seed=int(rec["seed"]),
            raw=rec["raw"],
            ir=outcome.result,
            description=describe(outcome.result, fmt),
        )


# -- vocabulary -------------------------------------------------------------

KEYS = (
    "name city score status owner title region count label price code level "
    "note tag kind unit source target rank stage color weight height width "
    "email phone country author year genre mode flag rating amount"
).split()

WORDS = (
    "alpha bravo cedar delta ember falcon garnet harbor island jasper kettle "
    "lumen meadow nectar orchid pepper quartz raven sierra tundra umber velvet "
    "willow yarrow zephyr amber basalt cobalt dune fjord glacier heron indigo "
    "juniper krill lotus maple nimbus opal prairie quill river saffron thistle"
).split()

# Each fragment holds characters that need escaping in every output format:
# a double quote (JSON, CSV), an ampersand (XML, HTML, LaTeX) and a pipe
# (Markdown).
SYMBOL_CORES = (
    '"quoted" & piped|text',
    '<b>bold</b> & "q" | x',
    'C:\\path\\to "file" & | more',
    '{"k": "v"} & a|b',
    '50% off & "deal" | #1',
    'a_b ~c^d $e & "f" | g',
    "it's <tag attr='v'/> & \"x\" | y",
)
SYMBOL_EXTRAS = ("\\n", "\\t", "->", "<=", ">=", "&&", "||", "%s", "#!", "$$", "{}", "[]", "~/", "^_^")


class _Gen:
    def __init__(self, seed: int, config: CorpusConfig, xml_safe: bool):
        self.rng = np.random.default_rng(seed)
        self.cfg = config
        self.xml_safe = xml_safe

    def randint(self, lo: int, hi: int) -> int:
        return int(self.rng.integers(lo, hi + 1))

    def choice(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    def keys(self, k: int) -> list[str]:
        picks = self.rng.permutation(len(KEYS))[: min(k, len(KEYS))]
        names = [KEYS[i] for i in picks]
        while len(names) < k:
            names.append(f"field_{len(names)}")
        return names

    def words(self, k: int) -> str:
        return " ".join(self.choice(WORDS) for _ in range(k))

    def text(self, lo: int, hi: int) -> str:
        target = self.randint(lo, hi)
        sentences = []
        length = 0
        while length < target:
            s = self.words(self.randint(5, 12)).capitalize() + "."
            sentences.append(s)
            length += len(s) + 1
        return " ".join(sentences)[:target].rstrip(" .") + "."

    def symbolic(self) -> str:
        parts = [self.choice(SYMBOL_CORES)]
        for _ in range(self.randint(0, 2)):
            parts.append(self.choice(SYMBOL_EXTRAS))
        self.rng.shuffle(parts)
        return " ".join(parts)

    def scalar(self, kind: Optional[str] = None):
        kind = kind or self.choice(("text", "text", "int", "float", "bool"))
        if kind == "int":
            return self.randint(0, 9999)
        if kind == "float":
            return round(float(self.rng.uniform(0, 1000)), 2)
        if kind == "bool":
            return bool(self.rng.integers(2))
        return self.words(self.randint(1, 3)).title()

    def maybe_null(self, value, rate: float):
        return None if self.rng.random() < rate else value

    # structure track ----------------------------------------------------

    def flat_object(self, k: int, kind: Optional[str] = None) -> dict:
        return {key: self.scalar(kind) for key in self.keys(k)}

    def nested(self, depth: int, as_list: bool):
        if depth <= 1:
            if as_list:
                return [self.scalar() for _ in range(self.randint(2, 3))]
            return self.flat_object(self.randint(2, 3))
        if as_list:
            # deep branch first, a shallow sibling keeps lists >= 2 items
            return [self.nested(depth - 1, False), self.flat_object(2)]
        obj = self.flat_object(self.randint(1, 2))
        obj[self.choice([k for k in KEYS if k not in obj])] = self.nested(depth - 1, True)
        return obj

    def structure(self, cx: Complexity):
        cfg = self.cfg
        if cx is Complexity.SIMPLE:
            return self.flat_object(self.randint(3, 6))
        if cx is Complexity.NESTED:
            return self.nested(self.randint(*cfg.nesting_depth), as_list=False)
        if cx is Complexity.LONG_LIST:
            n = self.randint(*cfg.list_length)
            schema = [(k, self.choice(("text", "int", "float", "bool"))) for k in self.keys(self.randint(2, 4))]
            items = [{k: self.scalar(kind) for k, kind in schema} for _ in range(n)]
            return {"items": items, "total": n}
        if cx is Complexity.SPARSE:
            obj = {k: self.maybe_null(self.scalar(), cfg.sparsity) for k in self.keys(self.randint(8, 14))}
            obj["details"] = {k: self.maybe_null(self.scalar(), cfg.sparsity) for k in self.keys(4)}
            if not self.xml_safe:
                obj["tags"] = []
                obj["extra"] = {}
            return obj
        if cx is Complexity.TEXT_HEAVY:
            lo, hi = cfg.text_length
            obj = {k: self.text(lo, hi) for k in self.keys(self.randint(2, 3))}
            obj["paragraphs"] = [self.text(lo, hi) for _ in range(2)]
            return obj
        if cx is Complexity.SYMBOLIC:
            keys = self.keys(self.randint(3, 5))
            obj = {k: self.symbolic() if self.rng.random() < max(cfg.symbol_density, 0.01) else self.scalar() for k in keys}
            obj[keys[0]] = self.symbolic()
            obj["snippets"] = [self.symbolic() for _ in range(2)]
            if not self.xml_safe:
                obj['key "with" <symbols> & \\ | %'] = self.symbolic()
            return obj
        raise ValueError(cx)

    # table track ------------------------------------------------------------

    def table(self, cx: Complexity) -> tuple[list[str], list[list]]:
        cfg = self.cfg
        null_rate = 0.0
        text_cols = symbol_cols = 0
        if cx is Complexity.SIMPLE:
            ncols, nrows = self.randint(2, 5), self.randint(2, 5)
        elif cx is Complexity.NESTED:  # grids cannot nest: stress width instead
            ncols, nrows = self.randint(*cfg.wide_columns), self.randint(3, 6)
        elif cx is Complexity.LONG_LIST:
            ncols, nrows = self.randint(3, 5), self.randint(*cfg.list_length)
        elif cx is Complexity.SPARSE:
            ncols, nrows = self.randint(4, 6), self.randint(5, 10)
            null_rate = cfg.sparsity
        elif cx is Complexity.TEXT_HEAVY:
            ncols, nrows = self.randint(2, 3), self.randint(3, 5)
            text_cols = self.randint(1, ncols)
        elif cx is Complexity.SYMBOLIC:
            ncols, nrows = self.randint(3, 4), self.randint(3, 5)
            symbol_cols = max(1, round(ncols * cfg.symbol_density))
        else:
            raise ValueError(cx)
        headers = self.keys(ncols)
        kinds = [self.choice(("text", "int", "float", "bool")) for _ in headers]
        rows = []
        lo, hi = cfg.text_length
        for _ in range(nrows):
            row = []
            for j, kind in enumerate(kinds):
                if j < text_cols:
                    value = self.text(lo, hi)
                elif j < symbol_cols:
                    value = self.symbolic()
                else:
                    value = self.scalar(kind)
                row.append(self.maybe_null(value, null_rate))
            rows.append(row)
        return headers, rows


def build_ir(fmt: Format, complexity: Complexity, seed: int, config: CorpusConfig) -> IRDoc:
    gen = _Gen(seed, config, xml_safe=fmt is Format.XML_TREE)
    if fmt.track is Track.STRUCTURE:
        return tree_from_python(gen.structure(complexity))
    headers, rows = gen.table(complexity)
    return TableIR.build(headers, rows)


def gen_sample(fmt: Format, complexity: Complexity, seed: int, config: CorpusConfig = CorpusConfig(),
               sample_id: Optional[str] = None) -> Sample:
    ir = build_ir(fmt, complexity, seed, config)
    return Sample(
        id=sample_id or f"{fmt.value.lower()}-{complexity.value.lower()}-s{seed}",
        format=fmt,
        complexity=complexity,
        seed=seed,
        raw=serialize(fmt, ir),
        ir=ir,
        description=describe(ir, fmt),
    )


def sample_seed(master: int, fmt_index: int, cx_index: int, k: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=(fmt_index, cx_index, k))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_corpus(config: CorpusConfig, manifest_path: Optional[os.PathLike] = None) -> list[Sample]:
    """Generate every configured category in (format, complexity, index) order.

    When ``manifest_path`` is given the manifest is written atomically there.
    """
    samples = []
    for fi, fmt in enumerate(Format):
        if fmt not in config.formats:
            continue
        for ci, cx in enumerate(Complexity):
            if cx not in config.complexities:
                continue
            for k in range(config.count(fmt, cx)):
                seed = sample_seed(config.master_seed, fi, ci, k)
                sid = f"{fmt.value.lower()}-{cx.value.lower()}-{k:04d}"
                samples.append(gen_sample(fmt, cx, seed, config, sample_id=sid))
    if manifest_path is not None:
        write_manifest(samples, manifest_path)
    return samples


def check_sample(sample: Sample) -> None:
    """Raise AssertionError unless the sample's raw text parses back to its IR."""
    outcome = parse(sample.format, sample.raw)
    if not ir_equal(outcome.result, sample.ir):
        raise AssertionError(f"{sample.id}: raw text does not round-trip")


def manifest_text(samples: Iterable[Sample]) -> str:
    return "".join(json.dumps(s.to_record(), ensure_ascii=False) + "\n" for s in samples)


def atomic_write(path: os.PathLike, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_manifest(samples: Sequence[Sample], path: os.PathLike) -> None:
    atomic_write(path, manifest_text(samples))


def load_manifest(path: os.PathLike) -> list[Sample]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise OSError(f"cannot read manifest {path}: {exc.strerror or exc}") from exc
    return [Sample.from_record(json.loads(line)) for line in lines if line.strip()]
