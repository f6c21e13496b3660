"""Minimal SVG writer for scatter plots, lines, shaded bands and a legend.

Output is deterministic except for the first comment line, which carries the
package version.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = (70, 30, 30, 60)  # left, right, top, bottom (px)


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


@dataclass
class Plot:
    """Axis-aligned 2-D plot in data coordinates.

    Args:
        xlim: (min, max) of the x axis.
        ylim: (min, max) of the y axis.
        xlabel: Axis caption.
        ylabel: Axis caption.
        title: Optional heading.
    """

    xlim: tuple
    ylim: tuple
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""
    _body: list = field(default_factory=list)
    _legend: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.xlim[1] > self.xlim[0] and self.ylim[1] > self.ylim[0]):
            raise ValueError("axis limits must be increasing")

    def _px(self, x: float, y: float) -> tuple:
        left, right, top, bottom = MARGIN
        w = WIDTH - left - right
        h = HEIGHT - top - bottom
        px = left + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * w
        py = top + (self.ylim[1] - y) / (self.ylim[1] - self.ylim[0]) * h
        return px, py

    def scatter(self, xs, ys, color: str = "black", radius: float = 3.0,
                marker: str = "circle", label: str | None = None) -> None:
        """Add markers; ``marker`` is "circle" or "cross"."""
        for x, y in zip(xs, ys):
            px, py = self._px(float(x), float(y))
            if marker == "cross":
                r = radius
                self._body.append(
                    f'<path d="M{_fmt(px - r)},{_fmt(py - r)}L{_fmt(px + r)},{_fmt(py + r)}'
                    f'M{_fmt(px - r)},{_fmt(py + r)}L{_fmt(px + r)},{_fmt(py - r)}" '
                    f'stroke="{color}" stroke-width="2"/>')
            else:
                self._body.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_fmt(radius)}" '
                                  f'fill="{color}"/>')
        if label:
            self._legend.append((label, color, marker))

    def line(self, xs, ys, color: str = "black", width: float = 1.5, dash: str | None = None,
             label: str | None = None) -> None:
        pts = " ".join(f"{_fmt(px)},{_fmt(py)}"
                       for px, py in (self._px(float(x), float(y)) for x, y in zip(xs, ys)))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self._body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                          f'stroke-width="{_fmt(width)}"{extra}/>')
        if label:
            self._legend.append((label, color, "line"))

    def rect(self, x0: float, y0: float, x1: float, y1: float, color: str = "gray",
             opacity: float = 0.2, label: str | None = None) -> None:
        """Shaded rectangle between two data-space corners."""
        ax, ay = self._px(x0, y1)
        bx, by = self._px(x1, y0)
        self._body.append(f'<rect x="{_fmt(min(ax, bx))}" y="{_fmt(min(ay, by))}" '
                          f'width="{_fmt(abs(bx - ax))}" height="{_fmt(abs(by - ay))}" '
                          f'fill="{color}" fill-opacity="{_fmt(opacity)}"/>')
        if label:
            self._legend.append((label, color, "rect"))

    def _axes(self) -> list:
        left, right, top, bottom = MARGIN
        x0, y0 = left, HEIGHT - bottom
        out = [f'<rect x="{left}" y="{top}" width="{WIDTH - left - right}" '
               f'height="{HEIGHT - top - bottom}" fill="none" stroke="black"/>']
        for i in range(6):
            xv = self.xlim[0] + i * (self.xlim[1] - self.xlim[0]) / 5
            yv = self.ylim[0] + i * (self.ylim[1] - self.ylim[0]) / 5
            px, _ = self._px(xv, self.ylim[0])
            _, py = self._px(self.xlim[0], yv)
            out.append(f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle" '
                       f'font-size="11">{_fmt(xv)}</text>')
            out.append(f'<text x="{x0 - 6}" y="{_fmt(py + 4)}" text-anchor="end" '
                       f'font-size="11">{_fmt(yv)}</text>')
        out.append(f'<text x="{(left + WIDTH - right) / 2:.0f}" y="{HEIGHT - 15}" '
                   f'text-anchor="middle" font-size="13">{escape(self.xlabel)}</text>')
        out.append(f'<text x="18" y="{(top + HEIGHT - bottom) / 2:.0f}" text-anchor="middle" '
                   f'font-size="13" transform="rotate(-90 18 {(top + HEIGHT - bottom) / 2:.0f})">'
                   f'{escape(self.ylabel)}</text>')
        if self.title:
            out.append(f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" '
                       f'font-size="14">{escape(self.title)}</text>')
        return out

    def _legend_items(self) -> list:
        out = []
        x = WIDTH - MARGIN[1] - 150
        for i, (label, color, kind) in enumerate(self._legend):
            y = MARGIN[2] + 16 + 16 * i
            if kind == "line":
                out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 14}" y2="{y - 4}" '
                           f'stroke="{color}" stroke-width="2"/>')
            elif kind == "rect":
                out.append(f'<rect x="{x}" y="{y - 10}" width="14" height="10" fill="{color}" '
                           f'fill-opacity="0.3"/>')
            elif kind == "cross":
                out.append(f'<path d="M{x + 3},{y - 10}L{x + 11},{y - 2}M{x + 3},{y - 2}'
                           f'L{x + 11},{y - 10}" stroke="{color}" stroke-width="2"/>')
            else:
                out.append(f'<circle cx="{x + 7}" cy="{y - 5}" r="4" fill="{color}"/>')
            out.append(f'<text x="{x + 20}" y="{y}" font-size="11">{escape(label)}</text>')
        return out

    def render(self) -> str:
        from . import __version__
        lines = [f"<!-- sandroll {__version__} -->",
                 f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                 f'viewBox="0 0 {WIDTH} {HEIGHT}">',
                 f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
        lines += self._body + self._axes() + self._legend_items()
        lines.append("</svg>")
        return "\n".join(lines) + "\n"
