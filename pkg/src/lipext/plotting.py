"""Plain-text series and a standalone SVG scatter from result rows."""

from __future__ import annotations

from pathlib import Path

from .lab import ResultRow

SERIES_FILES = ("achieved_vs_certified.dat", "modulus_vs_m.dat")


def glue_series(rows: list[ResultRow]) -> list[tuple[float, float]]:
    """(certified_bound, achieved) per gluing row."""
    return [(r.values["certified_bound"], r.values["achieved"]) for r in rows
            if r.quantity == "glue_trace" and "achieved" in r.values]


def path_modulus_series(rows: list[ResultRow]) -> list[tuple[float, float]]:
    """(m, modulus) for path-family modulus rows, sorted by m."""
    pts = [(r.values["gen_m"], r.values["value"]) for r in rows
           if r.quantity == "modulus" and "gen_m" in r.values and "/path_" in r.instance_id]
    return sorted(pts)


def _fmt(series) -> str:
    return "".join(f"{x!r} {y!r}\n" for x, y in series)


def scatter_svg(series, width: int = 400, height: int = 400, pad: int = 40) -> str:
    """Achieved (y) against certified (x), with the diagonal y = x."""
    hi = max([1.0] + [max(x, y) for x, y in series])
    sx = (width - 2 * pad) / hi
    sy = (height - 2 * pad) / hi

    def px(x, y):
        return pad + x * sx, height - pad - y * sy

    x0, y0 = px(0, 0)
    x1, y1 = px(hi, hi)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y0:.2f}" stroke="black"/>',
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x0:.2f}" y2="{y1:.2f}" stroke="black"/>',
        f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="gray" stroke-dasharray="4 3"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" font-size="12">certified bound</text>',
        f'<text x="12" y="{height / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {height / 2:.0f})">achieved</text>',
    ]
    for x, y in series:
        cx, cy = px(x, y)
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2.5" fill="steelblue" fill-opacity="0.6"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_data(rows: list[ResultRow], out_dir: str | Path) -> list[Path]:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    glue = glue_series(rows)
    files = {
        "achieved_vs_certified.dat": _fmt(glue),
        "modulus_vs_m.dat": _fmt(path_modulus_series(rows)),
        "achieved_vs_certified.svg": scatter_svg(glue),
    }
    written = []
    for name, text in files.items():
        (d / name).write_text(text)
        written.append(d / name)
    return written
