"""Minimal deterministic SVG bar and line charts (no plotting dependency).

Output is plain text with fixed decimal formatting, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

_PALETTE = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377")


def _header(width, height, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]


def bar_chart(labels: list[str], values: list[float], title: str, width=480, height=300) -> str:
    """One bar per label, left to right, scaled to the max value."""
    n = max(len(values), 1)
    top, bottom, left = 30.0, 40.0, 40.0
    plot_h = height - top - bottom
    plot_w = width - left - 20.0
    vmax = max([abs(v) for v in values] + [1e-9])
    bw = plot_w / n
    parts = _header(width, height, title)
    for i, (label, value) in enumerate(zip(labels, values)):
        h = plot_h * abs(value) / vmax
        x = left + i * bw + 0.1 * bw
        y = top + plot_h - h
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{0.8 * bw:.2f}" height="{h:.2f}" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{x + 0.4 * bw:.2f}" y="{top + plot_h + 14:.2f}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{label}</text>'
        )
        parts.append(
            f'<text x="{x + 0.4 * bw:.2f}" y="{y - 4:.2f}" text-anchor="middle" '
            f'font-size="9" font-family="sans-serif">{value:.3f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_chart(series: dict[str, list[float]], title: str, width=520, height=300) -> str:
    """One polyline per named series over its sample index."""
    top, bottom, left = 30.0, 30.0, 45.0
    plot_h = height - top - bottom
    plot_w = width - left - 20.0
    all_vals = [v for vs in series.values() for v in vs] or [0.0]
    vmin, vmax = min(all_vals), max(all_vals)
    if vmax <= vmin:
        vmax = vmin + 1.0
    nmax = max(max((len(v) for v in series.values()), default=1), 2)
    parts = _header(width, height, title)
    parts.append(
        f'<text x="12" y="{top + 4:.1f}" font-size="9" font-family="sans-serif">{vmax:.3f}</text>'
    )
    parts.append(
        f'<text x="12" y="{top + plot_h:.1f}" font-size="9" font-family="sans-serif">{vmin:.3f}</text>'
    )
    for si, (name, values) in enumerate(sorted(series.items())):
        if not values:
            continue
        pts = []
        for i, v in enumerate(values):
            x = left + plot_w * i / (nmax - 1)
            y = top + plot_h * (1.0 - (v - vmin) / (vmax - vmin))
            pts.append(f"{x:.2f},{y:.2f}")
        color = _PALETTE[si % len(_PALETTE)]
        parts.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{left + 4:.1f}" y="{top + 14 + 12 * si:.1f}" font-size="10" '
            f'font-family="sans-serif" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
