"""Point files and JSON reports.

A point file is plain text: a ``# dim=<d>`` header, then one point per line
as ``d`` space-separated numbers (``x_1 ... x_{d-1} z``).  Other lines
starting with ``#`` are comments.  Values are written with 17 significant
digits, which round-trips every double.
"""

from __future__ import annotations

import json
import re
from typing import IO, Iterable

from .geometry import Point

__all__ = ["PointFileError", "format_points", "write_points", "parse_points", "read_points", "write_report"]

_HEADER = re.compile(r"#\s*dim\s*=\s*(\d+)\s*$")


class PointFileError(ValueError):
    pass


def format_points(points: Iterable[Point], d: int) -> str:
    lines = [f"# dim={d}"]
    for p in points:
        if p.dim != d:
            raise ValueError(f"point of dimension {p.dim} in a dim={d} file")
        lines.append(" ".join("%.17g" % v for v in p.coords))
    return "\n".join(lines) + "\n"


def write_points(stream: IO[str], points: Iterable[Point], d: int) -> None:
    stream.write(format_points(points, d))


def parse_points(text: str) -> tuple[int, list[Point]]:
    d = None
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m and d is None:
                d = int(m.group(1))
                if d < 2:
                    raise PointFileError(f"line {lineno}: dim must be at least 2")
            continue
        if d is None:
            raise PointFileError(f"line {lineno}: data before the '# dim=<d>' header")
        fields = line.split()
        if len(fields) != d:
            raise PointFileError(f"line {lineno}: expected {d} numbers, got {len(fields)}")
        try:
            values = [float(v) for v in fields]
        except ValueError:
            raise PointFileError(f"line {lineno}: not a number") from None
        try:
            points.append(Point.of(*values))
        except ValueError as exc:
            raise PointFileError(f"line {lineno}: {exc}") from None
    if d is None:
        raise PointFileError("missing '# dim=<d>' header")
    return d, points


def read_points(path: str) -> tuple[int, list[Point]]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise PointFileError(str(exc)) from None
    return parse_points(text)


def write_report(stream: IO[str], report: dict) -> None:
    json.dump(report, stream, indent=2, sort_keys=False, allow_nan=True)
    stream.write("\n")
