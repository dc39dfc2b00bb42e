"""Structured key-value reports and DOT export.

Reports are plain text, one `key = value` line per entry, with a fixed
insertion order so byte-identical reruns produce byte-identical files.
All metric data is written as exact rationals.
"""

from __future__ import annotations

from fractions import Fraction


def fmt_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        if len(v) == 2 and isinstance(v[0], str) and isinstance(v[1], tuple):
            return f"{v[0]}:{fmt_value(v[1])}"
        return "(" + ",".join(fmt_value(x) for x in v) + ")"
    if isinstance(v, (list, set, frozenset)):
        items = list(v) if isinstance(v, list) else sorted(v)
        return "[" + "; ".join(fmt_value(x) for x in items) + "]"
    if isinstance(v, dict):
        return "{" + "; ".join(f"{k}: {fmt_value(x)}" for k, x in sorted(v.items(), key=lambda kv: str(kv[0]))) + "}"
    return str(v)


class Report:
    """Ordered key-value report with deterministic serialization."""

    def __init__(self, kind):
        self.kind = kind
        self.entries = []

    def add(self, key, value):
        self.entries.append((key, value))
        return self

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def lines(self):
        out = [f"covercraft-report {self.kind}"]
        for k, v in self.entries:
            out.append(f"{k} = {fmt_value(v)}")
        return out

    def text(self):
        return "\n".join(self.lines()) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.text())


def parse_report(path):
    """Parse a report file back into (kind, [(key, raw value string)])."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("covercraft-report "):
        raise ValueError("not a covercraft report")
    kind = lines[0].split(" ", 1)[1]
    entries = []
    for ln in lines[1:]:
        if not ln.strip():
            continue
        key, _, raw = ln.partition(" = ")
        entries.append((key, raw))
    return kind, entries


def parse_fraction(raw):
    return Fraction(raw)


def parse_vector(raw):
    raw = raw.strip()
    if not (raw.startswith("(") and raw.endswith(")")):
        raise ValueError(f"not a vector: {raw!r}")
    inner = raw[1:-1].strip()
    parts = [p.strip() for p in inner.split(",")]
    return tuple(int(p) for p in parts if p)


def parse_derived_vertex(raw):
    name, _, off = raw.partition(":")
    return (name, parse_vector(off))


def dot_window(window, name="cover_window"):
    """DOT text for a cover window: nodes carry the projection label and
    an interior flag; edges are the induced graph."""
    idx = {c: i for i, c in enumerate(window.classes)}
    lines = [f"graph {name} {{"]
    for c in window.classes:
        lab = fmt_value(window.labels[c])
        interior = "true" if c in window.interior else "false"
        lines.append(f'  n{idx[c]} [label="{lab}" interior={interior}];')
    for e in sorted(tuple(sorted(idx[c] for c in pair)) for pair in window.edges):
        lines.append(f"  n{e[0]} -- n{e[1]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dot_metric_space(space, name="metric_space"):
    lines = [f"graph {name} {{"]
    k = len(space)
    for i in range(k):
        mark = " shape=doublecircle" if space.basepoint == i else ""
        lines.append(f'  n{i} [label="{i}"{mark}];')
    for i in range(k):
        for j in range(i + 1, k):
            lines.append(f'  n{i} -- n{j} [label="{fmt_value(space.d(i, j))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
