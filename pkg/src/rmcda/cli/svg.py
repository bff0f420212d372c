"""Minimal dependency-free SVG renderings of stability curves and the dendrogram."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from ..robustness import ClusterResult, StabilityReport

_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
W, H, PAD = 640, 400, 50


def _doc(body: list[str]) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">\n'
        + "\n".join(body)
        + "\n</svg>\n"
    )


def _axes(x_label: str, y_label: str) -> list[str]:
    return [
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="14" y="{H / 2}" transform="rotate(-90 14 {H / 2})" '
        f'text-anchor="middle">{escape(y_label)}</text>',
    ]


def stability_svg(report: StabilityReport) -> str:
    eps = [r.epsilon for r in report.records]
    lows = [r.lower for r in report.records]
    x0, x1 = min(eps), max(eps)
    y0, y1 = min(lows), 1.0
    if x1 == x0:
        x1 = x0 + 1e-9
    if y1 == y0:
        y0 = y1 - 1e-3

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def sy(y):
        return H - PAD - (y - y0) / (y1 - y0) * (H - 2 * PAD)

    body = _axes("perturbation level", "stability score")
    for k, method in enumerate(report.methods):
        color = _COLORS[k % len(_COLORS)]
        recs = report.records_for(method)
        band = [f"{sx(r.epsilon):.2f},{sy(r.upper):.2f}" for r in recs]
        band += [f"{sx(r.epsilon):.2f},{sy(r.lower):.2f}" for r in reversed(recs)]
        body.append(f'<polygon points="{" ".join(band)}" fill="{color}" fill-opacity="0.15"/>')
        line = " ".join(f"{sx(r.epsilon):.2f},{sy(r.score):.2f}" for r in recs)
        body.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.append(
            f'<text x="{W - PAD + 4}" y="{PAD + 14 * k}" fill="{color}">{escape(method.value)}</text>'
        )
    body.append(f'<text x="{PAD}" y="{PAD - 8}">{y1:.3f}</text>')
    body.append(f'<text x="{PAD}" y="{H - PAD + 14}">{y0:.3f}</text>')
    return _doc(body)


def dendrogram_svg(result: ClusterResult) -> str:
    n = len(result.methods)
    top = max(m.height for m in result.merges) or 1.0
    # leaf order: walk the tree so branches do not cross
    order: list[int] = []

    def walk(node):
        if node < n:
            order.append(node)
        else:
            mg = result.merges[node - n]
            walk(mg.left)
            walk(mg.right)

    walk(2 * n - 2)
    xs = {leaf: PAD + (pos + 0.5) * (W - 2 * PAD) / n for pos, leaf in enumerate(order)}
    ys = {i: float(H - PAD) for i in range(n)}

    def sy(h):
        return H - PAD - h / top * (H - 2 * PAD)

    body = _axes("weighting method", "Ward distance")
    for t, mg in enumerate(result.merges):
        node = n + t
        y = sy(mg.height)
        xl, xr = xs[mg.left], xs[mg.right]
        body.append(
            f'<polyline points="{xl:.2f},{ys[mg.left]:.2f} {xl:.2f},{y:.2f} '
            f'{xr:.2f},{y:.2f} {xr:.2f},{ys[mg.right]:.2f}" fill="none" stroke="black"/>'
        )
        xs[node], ys[node] = (xl + xr) / 2, y
    for leaf in range(n):
        body.append(
            f'<text x="{xs[leaf]:.2f}" y="{H - PAD + 14}" text-anchor="middle">'
            f"{escape(result.methods[leaf].value)}</text>"
        )
    body.append(f'<text x="{PAD + 4}" y="{PAD - 8}">{top:.3f}</text>')
    return _doc(body)


def write_stability_svg(path, report: StabilityReport) -> Path:
    path = Path(path)
    path.write_text(stability_svg(report), encoding="utf-8")
    return path


def write_dendrogram_svg(path, result: ClusterResult) -> Path:
    path = Path(path)
    path.write_text(dendrogram_svg(result), encoding="utf-8")
    return path
