"""Delimited grid formats: CSV, Markdown pipe tables, HTML tables, LaTeX tabular.

Every grid takes its first row as the header. Ragged rows, merged cells and
anything the small grammars below do not cover raise :class:`FormatError`.
"""
from __future__ import annotations

import csv
import html
import io
import re
from html.parser import HTMLParser
from typing import Optional

from ..ir import InvalidIR, TableIR
from ..values import scalar_to_text
from ._base import FormatError, NotRepresentable


def table_from_grid(grid: list[list[str]]) -> TableIR:
    if not grid:
        return TableIR((), ())
    header, body = grid[0], grid[1:]
    for i, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise FormatError(f"row {i} has {len(row)} cells, header has {len(header)}")
    try:
        return TableIR.build(header, body)
    except InvalidIR as exc:
        raise FormatError(str(exc)) from None


def _cells(table: TableIR) -> list[list[str]]:
    return [list(table.headers)] + [[scalar_to_text(c) for c in row] for row in table.rows]


# -- CSV --------------------------------------------------------------------

def parse_csv(text: str) -> TableIR:
    if not text.strip():
        raise FormatError("empty CSV input")
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        grid = [row for row in reader if row]
    except csv.Error as exc:
        raise FormatError(f"line {reader.line_num}: {exc}") from None
    return table_from_grid(grid)


def serialize_csv(table: TableIR) -> str:
    if not table.headers:
        raise NotRepresentable("CSV needs at least one column")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(_cells(table))
    return buf.getvalue()


# -- Markdown ---------------------------------------------------------------

_SEP_CELL = re.compile(r":?-{1,}:?\Z")


def _split_pipe_row(line: str) -> list[str]:
    line = line.strip()
    start = 1 if line.startswith("|") else 0
    cells, buf = [], []
    closed = False
    pipes = start
    i = start
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line) and line[i + 1] in "\\|":
            buf.append(line[i + 1])
            i += 2
            continue
        if ch == "|":
            pipes += 1
            cells.append("".join(buf))
            buf = []
            closed = i == len(line) - 1
        else:
            buf.append(ch)
        i += 1
    if not pipes:
        raise FormatError(f"not a table row: {line[:40]!r}")
    if not closed:
        cells.append("".join(buf))
    return cells


def parse_markdown(text: str) -> TableIR:
    lines = [ln for ln in text.strip().splitlines()]
    if len(lines) < 2:
        raise FormatError("a Markdown table needs a header and a separator row")
    if any(not ln.strip() for ln in lines):
        raise FormatError("blank line inside the table")
    header = _split_pipe_row(lines[0])
    sep = _split_pipe_row(lines[1])
    if len(sep) != len(header) or not all(_SEP_CELL.match(c.strip()) for c in sep):
        raise FormatError("second line is not a separator row")
    body = [_split_pipe_row(ln) for ln in lines[2:]]
    return table_from_grid([header] + body)


def _md_escape(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise NotRepresentable("line breaks inside Markdown cells")
    return text.replace("\\", "\\\\").replace("|", "\\|")


def serialize_markdown(table: TableIR) -> str:
    if not table.headers:
        raise NotRepresentable("Markdown tables need at least one column")
    grid = _cells(table)
    lines = ["| " + " | ".join(_md_escape(c) for c in grid[0]) + " |"]
    lines.append("|" + "|".join(" --- " for _ in grid[0]) + "|")
    lines.extend("| " + " | ".join(_md_escape(c) for c in row) + " |" for row in grid[1:])
    return "\n".join(lines) + "\n"


# -- HTML -------------------------------------------------------------------

class _TableCollector(HTMLParser):
    """Collects the rows of the first top-level <table>."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.rows: list[list[str]] = []
        self.depth = 0  # nesting depth of <table>
        self.done = False
        self.row: Optional[list[str]] = None
        self.cell: Optional[list[str]] = None
        self.error: Optional[str] = None

    def _close_cell(self):
        if self.cell is not None:
            self.row.append("".join(self.cell))
            self.cell = None

    def _close_row(self):
        self._close_cell()
        if self.row is not None:
            self.rows.append(self.row)
            self.row = None

    def handle_starttag(self, tag, attrs):
        if self.done or self.error:
            return
        if tag == "table":
            if self.depth:
                self.error = "nested table"
            self.depth += 1
            return
        if not self.depth:
            return
        if tag == "tr":
            self._close_row()
            self.row = []
        elif tag in ("td", "th"):
            for name, value in attrs:
                if name in ("colspan", "rowspan") and (value or "").strip() != "1":
                    self.error = f"merged cell ({name}={value})"
                    return
            if self.row is None:
                self.row = []
            self._close_cell()
            self.cell = []

    def handle_endtag(self, tag):
        if self.done or self.error or not self.depth:
            return
        if tag in ("td", "th"):
            self._close_cell()
        elif tag == "tr":
            self._close_row()
        elif tag in ("thead", "tbody", "tfoot"):
            self._close_row()
        elif tag == "table":
            self._close_row()
            self.depth -= 1
            self.done = True

    def handle_data(self, data):
        if self.cell is not None and not self.done:
            self.cell.append(data)


def parse_html(text: str) -> TableIR:
    collector = _TableCollector()
    collector.feed(text)
    collector.close()
    if collector.error:
        raise FormatError(collector.error)
    if not collector.done:
        raise FormatError("no complete <table> element")
    return table_from_grid(collector.rows)


def serialize_html(table: TableIR) -> str:
    grid = _cells(table)
    esc = lambda s: html.escape(s, quote=False)  # noqa: E731
    lines = ["<table>", "  <thead>"]
    lines.append("    <tr>" + "".join(f"<th>{esc(h)}</th>" for h in grid[0]) + "</tr>")
    lines += ["  </thead>", "  <tbody>"]
    for row in grid[1:]:
        lines.append("    <tr>" + "".join(f"<td>{esc(c)}</td>" for c in row) + "</tr>")
    lines += ["  </tbody>", "</table>"]
    return "\n".join(lines) + "\n"


# -- LaTeX ------------------------------------------------------------------

_BEGIN_RE = re.compile(r"\\begin\s*\{tabular\*?\}")
_END_RE = re.compile(r"\\end\s*\{tabular\*?\}")
_RULES = frozenset({"hline", "toprule", "midrule", "bottomrule", "cline"})
_CHAR_ESCAPES = {"&": "&", "%": "%", "_": "_", "#": "#", "$": "$", "{": "{", "}": "}", " ": " "}
_WORD_ESCAPES = {"textbackslash": "\\", "textasciitilde": "~", "textasciicircum": "^"}


def _skip_group(text: str, pos: int) -> int:
    """Skip whitespace then one balanced {...} group; return index after it."""
    while pos < len(text) and text[pos].isspace():
        pos += 1
    if pos >= len(text) or text[pos] != "{":
        raise FormatError("expected '{'", pos)
    depth, i = 0, pos
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    raise FormatError("unbalanced braces", pos)


def _latex_rows(body: str, offset: int) -> list[list[str]]:
    rows: list[list[str]] = []
    cells: list[str] = []
    buf: list[str] = []
    raw_content = False  # anything besides whitespace and rules in this row
    i, n = 0, len(body)
    while i < n:
        ch = body[i]
        if ch == "\\":
            m = re.match(r"\\([A-Za-z]+)|\\(.)", body[i:], re.S)
            if m is None:
                raise FormatError("dangling backslash", offset + i)
            word, sym = m.group(1), m.group(2)
            i += m.end()
            if sym == "\\":
                cells.append("".join(buf))
                buf = []
                if raw_content:
                    rows.append(cells)
                cells, raw_content = [], False
                # optional spacing argument such as \\[2pt]
                sp = re.match(r"\s*\[[^\]]*\]", body[i:])
                if sp:
                    i += sp.end()
            elif sym is not None:
                if sym not in _CHAR_ESCAPES:
                    raise FormatError(f"unsupported escape \\{sym}", offset + i)
                buf.append(_CHAR_ESCAPES[sym])
                raw_content = True
            elif word in _RULES:
                if word == "cline":
                    i = _skip_group(body, i)
            elif word in _WORD_ESCAPES:
                buf.append(_WORD_ESCAPES[word])
                raw_content = True
                if body.startswith("{}", i):
                    i += 2
            else:
                raise FormatError(f"unsupported macro \\{word}", offset + i)
        elif ch == "&":
            cells.append("".join(buf))
            buf = []
            raw_content = True
            i += 1
        elif ch == "%":
            nl = body.find("\n", i)
            i = n if nl < 0 else nl + 1
        elif ch in "{}":
            raw_content = True  # grouping braces carry no text
            i += 1
        elif ch in "$^":
            raise FormatError(f"unsupported character {ch!r}", offset + i)
        elif ch == "~":
            buf.append(" ")
            raw_content = True
            i += 1
        else:
            if not ch.isspace():
                raw_content = True
            buf.append(ch)
            i += 1
    if raw_content:
        cells.append("".join(buf))
        rows.append(cells)
    return rows


def parse_latex(text: str) -> TableIR:
    begin = _BEGIN_RE.search(text)
    if begin is None:
        raise FormatError("no tabular environment")
    pos = begin.end()
    if text.startswith("*", begin.end() - 2):
        pos = _skip_group(text, pos)  # tabular* width argument
    opt = re.match(r"\s*\[[^\]]*\]", text[pos:])
    if opt:
        pos += opt.end()
    pos = _skip_group(text, pos)
    end = _END_RE.search(text, pos)
    if end is None:
        raise FormatError("missing \\end{tabular}", len(text))
    rows = _latex_rows(text[pos:end.start()], pos)
    return table_from_grid([[cell.strip() for cell in row] for row in rows])


_LATEX_OUT = {
    "\\": r"\textbackslash{}",
    "&": r"\&",
    "%": r"\%",
    "_": r"\_",
    "#": r"\#",
    "$": r"\$",
    "{": r"\{",
    "}": r"\}",
    "~": r"\textasciitilde{}",
    "^": r"\textasciicircum{}",
    # a bracket right after a row break would read as its spacing argument
    "[": "{[}",
}


def _latex_escape(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise NotRepresentable("line breaks inside LaTeX cells")
    return "".join(_LATEX_OUT.get(ch, ch) for ch in text)


def serialize_latex(table: TableIR) -> str:
    lines = ["\\begin{tabular}{" + "l" * len(table.headers) + "}"]
    if table.headers:
        grid = _cells(table)
        rows = []
        for row in grid:
            line = " & ".join(_latex_escape(c) for c in row)
            if len(row) == 1 and not line:
                line = "{}"  # keeps a single null cell from reading as no row
            rows.append(line + " \\\\")
        lines += ["\\hline", rows[0], "\\hline", *rows[1:], "\\hline"]
    lines.append("\\end{tabular}")
    return "\n".join(lines) + "\n"
