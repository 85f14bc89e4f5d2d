"""Report figures rendered directly to SVG.

The outputs are simple enough — bar charts, heatmaps — that hand-assembled
SVG beats pulling in a plotting stack. Every function here is a pure
function of already-exported report data, so a figure can always be
reproduced exactly from the data files shipped next to it.
"""

from __future__ import annotations

from .errors import UsageError

_POS_COLOR = (203, 24, 29)  # warm red toward +1 (maximal heat)
_NEG_COLOR = (33, 102, 172)  # cool blue toward -1
_FONT = "font-family=\"Helvetica, Arial, sans-serif\""


def _diverging_color(value: float) -> str:
    """White at 0, saturating toward red (+1) / blue (-1)."""
    v = min(1.0, max(-1.0, value))
    target = _POS_COLOR if v >= 0 else _NEG_COLOR
    a = abs(v)
    rgb = tuple(round(255 + (c - 255) * a) for c in target)
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def _svg_header(width: float, height: float) -> str:
    return (
        f"<svg xmlns=\"http://www.w3.org/2000/svg\" "
        f"width=\"{width:g}\" height=\"{height:g}\" "
        f"viewBox=\"0 0 {width:g} {height:g}\">\n"
        f"<rect width=\"{width:g}\" height=\"{height:g}\" fill=\"white\"/>\n"
    )


def _esc(text: str) -> str:
    return (
        str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def bar_chart_svg(labels, values, title: str = "") -> str:
    """Horizontal bar chart of values in [-1, 1], one row per label."""
    labels = [str(x) for x in labels]
    values = [float(v) for v in values]
    if len(labels) != len(values) or not labels:
        raise UsageError("need one label per value, at least one bar")

    row_h = 18
    label_w = 150
    plot_w = 400
    value_w = 70
    top = 34 if title else 12
    width = label_w + plot_w + value_w + 20
    height = top + row_h * len(labels) + 16
    zero_x = label_w + plot_w / 2.0
    scale = plot_w / 2.0  # values are clamped cosines, so the span is [-1, 1]

    parts = [_svg_header(width, height)]
    if title:
        parts.append(
            f"<text x=\"{width / 2:g}\" y=\"20\" text-anchor=\"middle\" "
            f"{_FONT} font-size=\"14\">{_esc(title)}</text>\n"
        )
    bottom = top + row_h * len(labels)
    parts.append(
        f"<line x1=\"{zero_x:g}\" y1=\"{top}\" x2=\"{zero_x:g}\" "
        f"y2=\"{bottom}\" stroke=\"#888\" stroke-width=\"1\"/>\n"
    )
    for i, (label, value) in enumerate(zip(labels, values)):
        y = top + i * row_h
        v = min(1.0, max(-1.0, value))
        bar_w = abs(v) * scale
        x = zero_x if v >= 0 else zero_x - bar_w
        color = _diverging_color(1.0 if v >= 0 else -1.0)
        parts.append(
            f"<rect x=\"{x:.2f}\" y=\"{y + 3}\" width=\"{bar_w:.2f}\" "
            f"height=\"{row_h - 6}\" fill=\"{color}\" fill-opacity=\"0.85\"/>\n"
        )
        parts.append(
            f"<text x=\"{label_w - 6}\" y=\"{y + row_h - 5}\" text-anchor=\"end\" "
            f"{_FONT} font-size=\"11\">{_esc(label)}</text>\n"
        )
        tx = zero_x + bar_w + 4 if v >= 0 else zero_x - bar_w - 4
        anchor = "start" if v >= 0 else "end"
        parts.append(
            f"<text x=\"{tx:.2f}\" y=\"{y + row_h - 5}\" text-anchor=\"{anchor}\" "
            f"{_FONT} font-size=\"10\">{value:.4f}</text>\n"
        )
    parts.append("</svg>\n")
    return "".join(parts)


def heatmap_svg(ids, matrix, title: str = "") -> str:
    """Square heatmap of values in [-1, 1] with id labels on both axes."""
    ids = [str(x) for x in ids]
    n = len(ids)
    rows = [[float(v) for v in row] for row in matrix]
    if n == 0 or len(rows) != n or any(len(r) != n for r in rows):
        raise UsageError(f"matrix must be square and match the {n} ids")

    cell = 26
    label_w = max(60, 8 * max(len(i) for i in ids))
    top = (40 if title else 16) + label_w // 2
    width = label_w + n * cell + 20
    height = top + n * cell + 16

    parts = [_svg_header(width, height)]
    if title:
        parts.append(
            f"<text x=\"{width / 2:g}\" y=\"20\" text-anchor=\"middle\" "
            f"{_FONT} font-size=\"14\">{_esc(title)}</text>\n"
        )
    for j, cid in enumerate(ids):
        x = label_w + j * cell + cell / 2.0
        parts.append(
            f"<text x=\"{x:g}\" y=\"{top - 6}\" text-anchor=\"start\" {_FONT} "
            f"font-size=\"10\" transform=\"rotate(-60 {x:g} {top - 6})\">"
            f"{_esc(cid)}</text>\n"
        )
    for i, cid in enumerate(ids):
        y = top + i * cell
        parts.append(
            f"<text x=\"{label_w - 6}\" y=\"{y + cell / 2 + 4:g}\" "
            f"text-anchor=\"end\" {_FONT} font-size=\"10\">{_esc(cid)}</text>\n"
        )
        for j, value in enumerate(rows[i]):
            x = label_w + j * cell
            parts.append(
                f"<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" "
                f"fill=\"{_diverging_color(value)}\" stroke=\"#ddd\" "
                f"stroke-width=\"0.5\"><title>{_esc(ids[i])} x {_esc(ids[j])}: "
                f"{value:.4f}</title></rect>\n"
            )
    parts.append("</svg>\n")
    return "".join(parts)
