"""Log-scale convergence curve as a self-contained SVG document."""

import math
from html import escape

from src.models.diagnostics import LOG_FLOOR

WIDTH = 640
HEIGHT = 400
MARGIN = 60


def _fmt(value):
    return f"{value:.2f}"


def convergence_svg(records, title="", metric="exploitability"):
    """Line chart of log10(metric) against total iteration; coordinates use two decimals."""
    points = [(r.total_iteration, getattr(r, metric)) for r in records if getattr(r, metric) is not None]
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{MARGIN // 2}" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 15}" text-anchor="middle" font-family="monospace" font-size="12">iteration</text>',
    ]
    if points:
        xs = [p[0] for p in points]
        ys = [math.log10(max(p[1], LOG_FLOOR)) for p in points]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = math.floor(min(ys)), math.ceil(max(ys))
        if y_hi == y_lo:
            y_hi += 1
        x_span = (x_hi - x_lo) or 1

        def sx(x):
            return MARGIN + plot_w * (x - x_lo) / x_span

        def sy(y):
            return HEIGHT - MARGIN - plot_h * (y - y_lo) / (y_hi - y_lo)

        step = max(1, (y_hi - y_lo) // 8)
        for decade in range(y_lo, y_hi + 1, step):
            lines.append(
                f'<text x="{MARGIN - 8}" y="{_fmt(sy(decade) + 4)}" text-anchor="end" '
                f'font-family="monospace" font-size="11">1e{decade}</text>'
            )
        lines.append(f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-family="monospace" font-size="11">{x_lo}</text>')
        lines.append(
            f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="end" '
            f'font-family="monospace" font-size="11">{x_hi}</text>'
        )
        path = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        lines.append(f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{path}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_curve_svg(records, path, title=""):
    with open(path, "w") as f:
        f.write(convergence_svg(records, title))
