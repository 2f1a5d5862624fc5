"""SVG rendering on an adaptive square canvas.

Coordinates are shifted so that nothing is negative, and the canvas grows in
steps of 50 units until every coordinate fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

DEFAULT_SIZE = 100
STEP = 50
PADDING = 0.05


class EmptyDiagram(ValueError):
    pass


@dataclass(frozen=True)
class CircleShape:
    center: str
    radius: float


@dataclass(frozen=True)
class ArcShape:
    center: str
    radius: float
    start: str
    end: str


@dataclass
class Diagram:
    points: dict[str, tuple[float, float]]
    segments: list[tuple[str, str]] = field(default_factory=list)
    circles: list[CircleShape] = field(default_factory=list)
    arcs: list[ArcShape] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        for a, b in self.segments:
            self._check(a, b)
        for c in self.circles:
            self._check(c.center)
        for arc in self.arcs:
            self._check(arc.center, arc.start, arc.end)

    def _check(self, *names: str) -> None:
        for n in names:
            if n not in self.points:
                raise ValueError(f"diagram references unknown point {n}")

    def extent_points(self) -> list[tuple[float, float]]:
        """Points plus circle bounding-box corners, so circles never overflow."""
        pts = list(self.points.values())
        for c in list(self.circles) + list(self.arcs):
            x, y = self.points[c.center]
            pts += [(x - c.radius, y - c.radius), (x + c.radius, y + c.radius)]
        return pts

    def to_dict(self) -> dict:
        return {
            "points": {k: [v[0], v[1]] for k, v in self.points.items()},
            "segments": [list(s) for s in self.segments],
            "circles": [{"center": c.center, "radius": c.radius} for c in self.circles],
            "arcs": [{"center": a.center, "radius": a.radius, "start": a.start, "end": a.end}
                     for a in self.arcs],
            "labels": list(self.labels),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagram":
        return cls(
            points={k: (float(v[0]), float(v[1])) for k, v in data["points"].items()},
            segments=[(a, b) for a, b in data.get("segments", [])],
            circles=[CircleShape(c["center"], float(c["radius"])) for c in data.get("circles", [])],
            arcs=[ArcShape(a["center"], float(a["radius"]), a["start"], a["end"]) for a in data.get("arcs", [])],
            labels=list(data.get("labels", [])),
        )


@dataclass(frozen=True)
class CanvasSpec:
    x_offset: float
    y_offset: float
    size: int

    def apply(self, p: tuple[float, float]) -> tuple[float, float]:
        return p[0] + self.x_offset, p[1] + self.y_offset


def adaptive_canvas(points, default_size: int = DEFAULT_SIZE) -> CanvasSpec:
    pts = list(points)
    if not pts:
        raise EmptyDiagram("no points to place on a canvas")
    min_x = min(p[0] for p in pts)
    min_y = min(p[1] for p in pts)
    x_f = -min_x if min_x < 0 else 0.0
    y_f = -min_y if min_y < 0 else 0.0
    m = max(max(p[0] + x_f, p[1] + y_f) for p in pts)
    size = default_size
    if m > size:
        size = (math.floor(m / STEP) + 1) * STEP
    return CanvasSpec(x_f, y_f, size)


@dataclass(frozen=True)
class RenderOptions:
    stroke_width: float = 0.6
    font_size: float = 4.0
    label_offset: tuple[float, float] = (2.0, 2.0)


def _f(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def render_svg(diagram: Diagram, spec: CanvasSpec | None = None,
               options: RenderOptions | None = None) -> bytes:
    """SVG document for ``diagram``; identical inputs give identical bytes."""
    if not diagram.points:
        raise EmptyDiagram("diagram has no points")
    spec = spec or adaptive_canvas(diagram.extent_points())
    options = options or RenderOptions()
    size = spec.size
    pad = PADDING * size
    inner = size - 2 * pad

    def place(name: str) -> tuple[float, float]:
        x, y = spec.apply(diagram.points[name])
        return pad + x * inner / size, size - pad - y * inner / size

    k = inner / size
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {size} {size}" '
        f'width="{size * 4}" height="{size * 4}">',
        f'<g fill="none" stroke="black" stroke-width="{_f(options.stroke_width)}" stroke-linecap="round">',
    ]
    for a, b in diagram.segments:
        (x1, y1), (x2, y2) = place(a), place(b)
        out.append(f'<path class="segment" d="M {_f(x1)} {_f(y1)} L {_f(x2)} {_f(y2)}"/>')
    for c in diagram.circles:
        cx, cy = place(c.center)
        out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(c.radius * k)}"/>')
    for arc in diagram.arcs:
        (cx, cy), (x1, y1), (x2, y2) = place(arc.center), place(arc.start), place(arc.end)
        r = arc.radius * k
        a1 = math.atan2(-(y1 - cy), x1 - cx)
        a2 = math.atan2(-(y2 - cy), x2 - cx)
        sweep_ccw = (a2 - a1) % (2 * math.pi)
        large = 1 if sweep_ccw > math.pi else 0
        # a counter-clockwise sweep in math axes stays counter-clockwise on screen (sweep flag 0)
        out.append(f'<path class="arc" d="M {_f(x1)} {_f(y1)} A {_f(r)} {_f(r)} 0 {large} 0 '
                   f'{_f(x2)} {_f(y2)}"/>')
    out.append("</g>")
    out.append(f'<g font-family="sans-serif" font-size="{_f(options.font_size)}" fill="black">')
    dx, dy = options.label_offset
    for name in diagram.labels:
        x, y = place(name)
        out.append(f'<text x="{_f(x + dx * k)}" y="{_f(y - dy * k)}">{escape(name)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
