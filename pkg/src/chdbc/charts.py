"""Minimal self-contained SVG line charts for diagnostics time series."""

from __future__ import annotations

WIDTH, HEIGHT, MARGIN = 640, 400, 50

_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def _polyline(xs, ys, x0, x1, y0, y1) -> str:
    span_x = (x1 - x0) or 1.0
    span_y = (y1 - y0) or 1.0
    pts = []
    for x, y in zip(xs, ys):
        px = MARGIN + (x - x0) / span_x * (WIDTH - 2 * MARGIN)
        py = HEIGHT - MARGIN - (y - y0) / span_y * (HEIGHT - 2 * MARGIN)
        pts.append(f"{px:.2f},{py:.2f}")
    return " ".join(pts)


def write_line_chart(path, xs, series, title="", xlabel="t") -> None:
    """series: list of (label, values); all plotted against xs."""
    xs = list(xs)
    x0, x1 = min(xs), max(xs)
    all_y = [v for _, values in series for v in values]
    y0, y1 = min(all_y), max(all_y)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="{MARGIN}" y="{MARGIN - 8}" font-size="11">[{y0:.6g}, {y1:.6g}]</text>',
    ]
    for k, (label, values) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{_polyline(xs, values, x0, x1, y0, y1)}"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN - 100}" y="{MARGIN + 16 * k}" '
            f'font-size="12" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def write_energy_chart(rows, path) -> None:
    """Modified and original energy versus time from diagnostics rows."""
    write_line_chart(
        path,
        [row.t for row in rows],
        [("E_mod", [row.E_mod for row in rows]),
         ("E_orig", [row.E_orig for row in rows])],
        title="energy decay",
    )
