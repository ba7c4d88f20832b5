"""Structured run reports with stable JSON serialization.

Reports separate numeric results from wall-clock timings so that two runs
with identical inputs serialize to byte-identical result sections.
"""

import csv
import io
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"
TOOL_VERSION = "0.1.0"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)


@dataclass
class Report:
    """One command run: resolved inputs, results, and timings."""

    command: str
    inputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION
    tool_version: str = TOOL_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "command": self.command,
            "inputs": _jsonable(self.inputs),
            "results": _jsonable(self.results),
            "timings": _jsonable(self.timings),
        }

    def to_json(self, include_timings=True):
        d = self.to_dict()
        if not include_timings:
            d.pop("timings")
        return json.dumps(d, sort_keys=True, indent=2) + "\n"

    def write(self, path=None, stream=None):
        text = self.to_json()
        if path:
            with open(path, "w") as f:
                f.write(text)
        elif stream is not None:
            stream.write(text)
        return text


def rows_to_csv(rows, fieldnames=None, path=None):
    """Serialize a list of dicts as CSV; returns the text."""
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fieldnames})
    text = buf.getvalue()
    if path:
        with open(path, "w") as f:
            f.write(text)
    return text


def polyline_svg(values, path=None, width=640, height=360, title=""):
    """Minimal SVG line plot of a 1-d series (log10 applied upstream if
    desired); hand-emitted so reports stay dependency-free."""
    n = len(values)
    if n == 0:
        values, n = [0.0], 1
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    pad = 30
    pts = []
    for i, v in enumerate(values):
        x = pad + (width - 2 * pad) * (i / max(n - 1, 1))
        y = height - pad - (height - 2 * pad) * ((v - lo) / span)
        pts.append(f"{x:.2f},{y:.2f}")
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{pad}" y="20" font-size="14">{title}</text>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1.5" '
        f'points="{" ".join(pts)}"/>\n'
        f"</svg>\n"
    )
    if path:
        with open(path, "w") as f:
            f.write(svg)
    return svg
