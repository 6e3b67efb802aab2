"""Dependency-free SVG line plots of the CSV outputs.

The SVG text is a pure function of the CSV text, so plots are as
reproducible as the data they show.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=20, bottom=55)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class PlotError(ValueError):
    pass


def read_series(text: str) -> tuple[list[str], dict[str, list[tuple[float, float]]]]:
    """Parse ``x,y`` or ``x,group,y`` CSV text into named series (``#`` lines skipped)."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise PlotError("CSV has no header")
    header, body = [h.strip() for h in rows[0]], rows[1:]
    if len(header) not in (2, 3):
        raise PlotError(f"expected 2 or 3 columns, got {len(header)}")
    series: dict[str, list[tuple[float, float]]] = {}
    for k, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise PlotError(f"row {k}: expected {len(header)} fields, got {len(row)}")
        try:
            nums = [float(v) for v in row]
        except ValueError as exc:
            raise PlotError(f"row {k}: {exc}") from None
        name = "" if len(nums) == 2 else f"{header[1]}={row[1].strip()}"
        series.setdefault(name, []).append((nums[0], nums[-1]))
    if not series:
        raise PlotError("CSV has no data rows")
    return header, series


def _label(name: str) -> str:
    return {"detuning": "detuning (units of chi)", "value": "spectrum"}.get(name, name)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_plot(csv_text: str, marker: str | None = "auto") -> str:
    """Render CSV text as SVG.

    ``marker`` is ``"min"``, ``"max"``, ``None`` or ``"auto"`` (minimum for a
    homodyne header, maximum otherwise).  The marker is a ``<circle
    class="marker">`` carrying ``data-x``/``data-y`` with the exact CSV
    coordinates of the extremum of the first series.
    """
    header, series = read_series(csv_text)
    if marker == "auto":
        marker = "min" if "kind=homodyne" in csv_text.split("\n", 1)[0] else "max"
    pts = [p for s in series.values() for p in s]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN["bottom"] + 18}" font-size="11" '
                   f'text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{sy(t) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{t:.4g}</text>')
    out.append(f'<text class="xlabel" x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 12}" font-size="13" '
               f'text-anchor="middle">{_label(header[0])}</text>')
    out.append(f'<text class="ylabel" x="16" y="{MARGIN["top"] + ph / 2:.2f}" font-size="13" '
               f'text-anchor="middle" transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.2f})">'
               f'{_label(header[-1])}</text>')
    for k, (name, s) in enumerate(series.items()):
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s)
        label = f' data-series="{name}"' if name else ""
        out.append(f'<polyline{label} fill="none" stroke="{COLORS[k % len(COLORS)]}" '
                   f'stroke-width="1.5" points="{coords}"/>')
    if marker in ("min", "max"):
        first = next(iter(series.values()))
        mx, my = (min if marker == "min" else max)(first, key=lambda p: p[1])
        out.append(f'<circle class="marker" cx="{sx(mx):.2f}" cy="{sy(my):.2f}" r="4" fill="none" '
                   f'stroke="black" data-x="{mx!r}" data-y="{my!r}"/>')
    elif marker is not None:
        raise ValueError("marker must be 'min', 'max', 'auto' or None")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_file(csv_path: str | Path, svg_path: str | Path | None = None, marker: str | None = "auto") -> Path:
    csv_path = Path(csv_path)
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    svg_path.write_text(emit_plot(csv_path.read_text(), marker))
    return svg_path
