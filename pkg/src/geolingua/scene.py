"""Lowering of GeoLingua programs into solvable scenes.

A :class:`Scene` separates what the solver may move (free points and bounded
scalars) from what is constructed (dependent points, resolved in topological
order) and what is scored (constraints).  Regular shapes are parameterised
minimally: a square is two free points plus two derived corners, so its
metric identities hold exactly for every candidate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import geometry as geo
from .ast import Expression, FormalProgram, Name, Number, Origin, Ratio, Statement, Word
from .parser import format_statement


class CompileError(ValueError):
    def __init__(self, message: str, origin: Origin | None = None):
        super().__init__(f"{origin}: {message}" if origin else message)
        self.origin = origin


class UnsupportedConstruction(CompileError):
    pass


class DuplicateDefinition(CompileError):
    pass


class UndeclaredPoint(CompileError):
    pass


class CyclicDependency(CompileError):
    def __init__(self, cycle: list[str]):
        super().__init__("cyclic dependence among points " + " -> ".join(cycle))
        self.cycle = cycle


# -- free parameters ----------------------------------------------------------

CANVAS_SPAN = 100.0


@dataclass(frozen=True)
class FreeParam:
    """A directly perturbed quantity.

    Points have ``kind == "point"``; scalars carry a closed range and either
    wrap (angles in degrees) or clamp.  ``init`` is a placement hint used by
    the solver's initialisation: ``("uniform",)``, ``("center",)`` or
    ``("ring", group, k, n)``.
    """

    id: str
    kind: str
    role: str
    lo: float = 0.0
    hi: float = 0.0
    wrap: bool = False
    init: tuple = ("uniform",)

    @property
    def width(self) -> float:
        return self.hi - self.lo


# -- radius sources -----------------------------------------------------------

@dataclass(frozen=True)
class FixedRadius:
    value: float
    inputs: tuple[str, ...] = ()

    def evaluate(self, frame: "Frame"):
        return self.value


@dataclass(frozen=True)
class ParamRadius:
    param: str
    inputs: tuple[str, ...] = ()

    def evaluate(self, frame: "Frame"):
        return frame.scalars[self.param]


@dataclass(frozen=True)
class InRadius:
    triangle: tuple[str, str, str]

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.triangle

    def evaluate(self, frame: "Frame"):
        a, b, c = (frame.xy(p) for p in self.triangle)
        return geo.inradius(*a, *b, *c)


# -- resolvers ------------------------------------------------------------------

@dataclass(frozen=True)
class PointOnLine:
    a: str
    b: str
    ratio: float | None = None
    param: str | None = None

    @property
    def inputs(self):
        return (self.a, self.b)

    def compute(self, f: "Frame"):
        t = f.scalars[self.param] if self.param else self.ratio
        return geo.point_on_line(*f.xy(self.a), *f.xy(self.b), t)


@dataclass(frozen=True)
class Intersection:
    a: str
    b: str
    c: str
    d: str

    @property
    def inputs(self):
        return (self.a, self.b, self.c, self.d)

    def compute(self, f: "Frame"):
        return geo.line_intersection(*f.xy(self.a), *f.xy(self.b), *f.xy(self.c), *f.xy(self.d))


@dataclass(frozen=True)
class PerpendicularFoot:
    point: str
    a: str
    b: str

    @property
    def inputs(self):
        return (self.point, self.a, self.b)

    def compute(self, f: "Frame"):
        return geo.perpendicular_foot(*f.xy(self.point), *f.xy(self.a), *f.xy(self.b))


@dataclass(frozen=True)
class PointOnCircle:
    center: str
    radius: FixedRadius | ParamRadius | InRadius
    param: str | None = None
    offset: float = 0.0

    @property
    def inputs(self):
        return (self.center,) + tuple(self.radius.inputs)

    def compute(self, f: "Frame"):
        ox, oy = f.xy(self.center)
        angle = (f.scalars[self.param] if self.param else 0.0) + self.offset
        x, y = geo.point_on_circle(ox, oy, self.radius.evaluate(f), angle)
        return x, y, np.zeros(f.size, dtype=bool)


@dataclass(frozen=True)
class ArcPoint:
    """Point at fraction ``param`` of the minor (or major) arc from a to b."""

    center: str
    radius: FixedRadius | ParamRadius | InRadius
    a: str
    b: str
    param: str
    major: bool = False

    @property
    def inputs(self):
        return (self.center, self.a, self.b) + tuple(self.radius.inputs)

    def compute(self, f: "Frame"):
        ox, oy = f.xy(self.center)
        ax, ay = f.xy(self.a)
        bx, by = f.xy(self.b)
        start = geo.polar_angle(ox, oy, ax, ay)
        sweep = np.mod(geo.polar_angle(ox, oy, bx, by) - start, 360.0)
        minor = np.where(sweep <= 180.0, sweep, sweep - 360.0)
        if self.major:
            minor = np.where(minor >= 0, minor - 360.0, minor + 360.0)
        angle = start + f.scalars[self.param] * minor
        x, y = geo.point_on_circle(ox, oy, self.radius.evaluate(f), angle)
        bad = (geo.norm(ax - ox, ay - oy) < geo.EPS_LENGTH) | (geo.norm(bx - ox, by - oy) < geo.EPS_LENGTH)
        return x, y, bad


@dataclass(frozen=True)
class PointOnExtension:
    """Point beyond b on ray a->b at ``param`` times |ab| past b."""

    a: str
    b: str
    param: str

    @property
    def inputs(self):
        return (self.a, self.b)

    def compute(self, f: "Frame"):
        ax, ay = f.xy(self.a)
        bx, by = f.xy(self.b)
        t = f.scalars[self.param]
        return geo.point_on_line(ax, ay, bx, by, 1.0 + t)


@dataclass(frozen=True)
class TangentEnd:
    """End of a tangent segment: from touch, perpendicular to the radius."""

    center: str
    touch: str
    param: str  # length as a multiple of |center touch|

    @property
    def inputs(self):
        return (self.center, self.touch)

    def compute(self, f: "Frame"):
        ox, oy = f.xy(self.center)
        tx, ty = f.xy(self.touch)
        rx, ry = tx - ox, ty - oy
        bad = geo.norm(rx, ry) < geo.EPS_LENGTH
        s = f.scalars[self.param]
        return tx - s * ry, ty + s * rx, bad


@dataclass(frozen=True)
class TangentPoint:
    center: str
    radius: FixedRadius | ParamRadius | InRadius
    external: str
    branch: int = 1

    @property
    def inputs(self):
        return (self.center, self.external) + tuple(self.radius.inputs)

    def compute(self, f: "Frame"):
        ox, oy = f.xy(self.center)
        px, py = f.xy(self.external)
        return geo.tangent_point(ox, oy, self.radius.evaluate(f), px, py, self.branch)


@dataclass(frozen=True)
class DerivedCorner:
    """Corner of a regular shape template.

    ``anchors`` are the free corners; ``index`` selects the derived corner in
    the shape's ABCD order.  Square/rectangle/rhombus build on side AB,
    parallelogram completes ABC.
    """

    template: str
    anchors: tuple[str, ...]
    index: int
    param: str | None = None

    @property
    def inputs(self):
        return self.anchors

    def compute(self, f: "Frame"):
        if self.template == "Parallelogram":
            (ax, ay), (bx, by), (cx, cy) = (f.xy(p) for p in self.anchors)
            bad = geo.norm(bx - ax, by - ay) < geo.EPS_LENGTH
            return ax + cx - bx, ay + cy - by, bad
        (ax, ay), (bx, by) = (f.xy(p) for p in self.anchors)
        vx, vy = bx - ax, by - ay
        if self.template == "Rhombus":
            nx, ny = geo.rotate(vx, vy, f.scalars[self.param])
        else:
            nx, ny = -vy, vx
            if self.template == "Rectangle":
                h = f.scalars[self.param]
                nx, ny = h * nx, h * ny
        bad = geo.norm(vx, vy) < geo.EPS_LENGTH
        if self.index == 2:
            return bx + nx, by + ny, bad
        return ax + nx, ay + ny, bad


@dataclass(frozen=True)
class Incenter:
    triangle: tuple[str, str, str]

    @property
    def inputs(self):
        return self.triangle

    def compute(self, f: "Frame"):
        a, b, c = (f.xy(p) for p in self.triangle)
        return geo.incenter(*a, *b, *c)


@dataclass(frozen=True)
class DependentPoint:
    id: str
    resolver: object
    origin: Origin
    order: tuple[int, int] = (0, 0)

    @property
    def inputs(self) -> tuple[str, ...]:
        return tuple(self.resolver.inputs)


# -- measures and constraints -------------------------------------------------

@dataclass(frozen=True)
class SegLen:
    a: str
    b: str


@dataclass(frozen=True)
class Perimeter:
    points: tuple[str, ...]


@dataclass(frozen=True)
class AngleAt:
    a: str
    vertex: str
    c: str


@dataclass(frozen=True)
class LineAngle:
    """Angle between two lines, folded into [0, 90]."""

    first: tuple[str, str]
    second: tuple[str, str]


@dataclass(frozen=True)
class PointLineDist:
    point: str
    a: str
    b: str


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Inside:
    point: str
    polygon: tuple[str, ...] = ()
    circle: str | None = None


@dataclass(frozen=True)
class SignedSum:
    terms: tuple[tuple[float, object], ...]


def measure_points(m) -> set[str]:
    if isinstance(m, SegLen):
        return {m.a, m.b}
    if isinstance(m, Perimeter):
        return set(m.points)
    if isinstance(m, AngleAt):
        return {m.a, m.vertex, m.c}
    if isinstance(m, LineAngle):
        return set(m.first) | set(m.second)
    if isinstance(m, PointLineDist):
        return {m.point, m.a, m.b}
    if isinstance(m, Inside):
        return {m.point, *m.polygon} | ({m.circle} if m.circle else set())
    if isinstance(m, SignedSum):
        out: set[str] = set()
        for _, sub in m.terms:
            out |= measure_points(sub)
        return out
    return set()


LINE = "line"
ANGLE = "angle"


@dataclass(frozen=True)
class Constraint:
    """One scored relation.

    ``kind`` selects the scorer, ``family`` the metric it feeds ("line",
    "angle" or None), ``operands`` holds the measured quantities and
    ``target`` a ratio pair, a number or a relation symbol.
    """

    kind: str
    family: str | None
    operands: tuple
    target: object
    origin: Origin
    text: str = ""
    mode: str = ""

    @property
    def points(self) -> frozenset[str]:
        out: set[str] = set()
        for m in self.operands:
            out |= measure_points(m)
        return frozenset(out)


@dataclass(frozen=True)
class Arc:
    center: str
    a: str
    b: str
    radius: object


@dataclass(frozen=True)
class Scene:
    free: tuple[FreeParam, ...]
    dependents: tuple[DependentPoint, ...]
    constraints: tuple[Constraint, ...]
    segments: tuple[tuple[str, str], ...]
    circles: Mapping[str, object]
    arcs: tuple[Arc, ...] = ()
    labels: Mapping[str, bool] = field(default_factory=dict)
    program: FormalProgram | None = field(default=None, compare=False)

    @property
    def points(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.free if p.kind == "point") + tuple(d.id for d in self.dependents)

    @property
    def scalars(self) -> tuple[FreeParam, ...]:
        return tuple(p for p in self.free if p.kind == "scalar")

    @property
    def dimension(self) -> int:
        return sum(2 if p.kind == "point" else 1 for p in self.free)

    def layout(self) -> list[tuple[FreeParam, int]]:
        """Column offset of every free parameter in a packed vector."""
        out, col = [], 0
        for p in self.free:
            out.append((p, col))
            col += 2 if p.kind == "point" else 1
        return out


# -- assignments and resolution -----------------------------------------------

@dataclass
class Assignment:
    """Concrete values for every free parameter."""

    points: dict[str, tuple[float, float]]
    scalars: dict[str, float]

    def pack(self, scene: Scene) -> np.ndarray:
        vec = np.empty(scene.dimension)
        for p, col in scene.layout():
            if p.kind == "point":
                vec[col:col + 2] = self.points[p.id]
            else:
                vec[col] = self.scalars[p.id]
        return vec

    @classmethod
    def unpack(cls, scene: Scene, vec: np.ndarray) -> "Assignment":
        points, scalars = {}, {}
        for p, col in scene.layout():
            if p.kind == "point":
                points[p.id] = (float(vec[col]), float(vec[col + 1]))
            else:
                scalars[p.id] = float(vec[col])
        return cls(points, scalars)

    def to_dict(self) -> dict:
        return {"points": {k: list(v) for k, v in self.points.items()},
                "scalars": dict(self.scalars)}

    @classmethod
    def from_dict(cls, data: dict) -> "Assignment":
        return cls({k: (float(v[0]), float(v[1])) for k, v in data["points"].items()},
                   {k: float(v) for k, v in data["scalars"].items()})


class Frame:
    """Coordinates of every point for a batch of ``size`` configurations."""

    def __init__(self, size: int):
        self.size = size
        self.x: dict[str, np.ndarray] = {}
        self.y: dict[str, np.ndarray] = {}
        self.scalars: dict[str, np.ndarray] = {}
        self.bad: dict[str, np.ndarray] = {}
        self.circles: Mapping[str, object] = {}

    def xy(self, name: str):
        return self.x[name], self.y[name]

    def radius(self, center: str):
        return np.broadcast_to(np.asarray(self.circles[center].evaluate(self), dtype=float), (self.size,))

    def row(self, k: int) -> dict[str, tuple[float, float]]:
        return {p: (float(self.x[p][k]), float(self.y[p][k])) for p in self.x}

    def degenerate(self, k: int) -> frozenset[str]:
        return frozenset(p for p, mask in self.bad.items() if mask[k])


def resolve_batch(scene: Scene, X: np.ndarray,
                  fallback: Mapping[str, tuple[float, float]] | None = None) -> Frame:
    """Resolve all dependents for each row of the packed matrix ``X``.

    A degenerate resolver yields the fallback coordinate (last known position)
    or, without one, the mean of its input points; its id is flagged, and the
    flag propagates to points built on it.
    """
    X = np.atleast_2d(X)
    frame = Frame(X.shape[0])
    frame.circles = scene.circles
    no_bad = np.zeros(frame.size, dtype=bool)
    for p, col in scene.layout():
        if p.kind == "point":
            frame.x[p.id] = X[:, col]
            frame.y[p.id] = X[:, col + 1]
            frame.bad[p.id] = no_bad
        else:
            frame.scalars[p.id] = X[:, col]
    for dep in scene.dependents:
        x, y, bad = dep.resolver.compute(frame)
        x = np.broadcast_to(np.asarray(x, dtype=float), (frame.size,))
        y = np.broadcast_to(np.asarray(y, dtype=float), (frame.size,))
        bad = np.broadcast_to(np.asarray(bad, dtype=bool), (frame.size,))
        bad = bad | ~np.isfinite(x) | ~np.isfinite(y)
        for inp in dep.inputs:
            if inp in frame.bad:
                bad = bad | frame.bad[inp]
        if bad.any():
            if fallback is not None and dep.id in fallback:
                fx, fy = fallback[dep.id]
            else:
                fx = np.mean([frame.x[i] for i in dep.inputs if i in frame.x], axis=0)
                fy = np.mean([frame.y[i] for i in dep.inputs if i in frame.y], axis=0)
            x = np.where(bad, fx, x)
            y = np.where(bad, fy, y)
        frame.x[dep.id] = x
        frame.y[dep.id] = y
        frame.bad[dep.id] = bad
    return frame


@dataclass(frozen=True)
class Resolution:
    coordinates: dict[str, tuple[float, float]]
    degenerate: frozenset[str]


def resolve_dependents(scene: Scene, free_values: Assignment,
                       fallback: Mapping[str, tuple[float, float]] | None = None) -> Resolution:
    """Coordinates of every point for one assignment, plus degenerate ids."""
    frame = resolve_batch(scene, free_values.pack(scene)[None, :], fallback)
    return Resolution(frame.row(0), frame.degenerate(0))


# -- topological order ----------------------------------------------------------

def topo_order(nodes: Iterable[tuple[str, Iterable[str]]]) -> list[str]:
    """Kahn order of ``(id, inputs)`` pairs; ties go to the earlier node.

    Inputs naming ids outside ``nodes`` are treated as free.  Raises
    :class:`CyclicDependency` with the names on one cycle.
    """
    nodes = [(nid, tuple(inputs)) for nid, inputs in nodes]
    rank = {nid: i for i, (nid, _) in enumerate(nodes)}
    deps = {nid: {i for i in inputs if i in rank and i != nid} | ({nid} if nid in inputs else set())
            for nid, inputs in nodes}
    users: dict[str, list[str]] = {nid: [] for nid in rank}
    for nid, ds in deps.items():
        for d in ds:
            users[d].append(nid)
    indeg = {nid: len(ds) for nid, ds in deps.items()}
    heap = [(rank[n], n) for n, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for u in users[n]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(heap, (rank[u], u))
    if len(order) < len(rank):
        left = {n for n in rank if indeg[n] > 0}
        raise CyclicDependency(_find_cycle(left, deps, rank))
    return order


def _find_cycle(left: set[str], deps: dict[str, set[str]], rank: dict[str, int]) -> list[str]:
    start = min(left, key=rank.__getitem__)
    seen: list[str] = []
    node = start
    while node not in seen:
        seen.append(node)
        node = min((d for d in deps[node] if d in left), key=rank.__getitem__)
    cycle = seen[seen.index(node):]
    return sorted(cycle, key=rank.__getitem__)


# -- compiler -----------------------------------------------------------------------

_TRIG_INVERSE = {
    "sin": (lambda v: math.degrees(math.asin(v)), lambda v: 0 < v <= 1),
    "cos": (lambda v: math.degrees(math.acos(v)), lambda v: -1 < v < 1),
    "tan": (lambda v: math.degrees(math.atan(v)), lambda v: v > 0),
}


class _Compiler:
    def __init__(self, program: FormalProgram):
        self.program = program
        self.points: dict[str, str] = {}             # name -> "free" | "dependent"
        self.free_points: dict[str, FreeParam] = {}
        self.scalars: list[FreeParam] = []
        self.resolvers: dict[str, DependentPoint] = {}
        self.circles: dict[str, object] = {}
        self.on_circle: dict[str, str] = {}
        self.segments: dict[frozenset, tuple[str, str]] = {}
        self.draw_circles: list[str] = []
        self.arcs: list[Arc] = []
        self.constraints: list[Constraint] = []
        self.tangent_branches: dict[tuple[str, str], int] = {}
        self.seq = 0
        self.ring = 0
        self.origin: Origin | None = None
        self.stmt: Statement | None = None

    # bookkeeping ----------------------------------------------------------------
    def fail(self, cls, message: str):
        return cls(message, self.origin)

    def require(self, *names: str) -> None:
        for p in names:
            if p not in self.points:
                raise self.fail(UndeclaredPoint, f"undeclared point {p}")

    def add_free(self, name: str, init: tuple = ("uniform",)) -> None:
        if name in self.points:
            return
        self.points[name] = "free"
        self.free_points[name] = FreeParam(name, "point", "point", init=init)

    def add_scalar(self, role: str, owner: str, lo: float, hi: float, wrap: bool = False,
                   init: tuple = ("uniform",)) -> str:
        pid = f"{role}:{owner}"
        n = 2
        while any(s.id == pid for s in self.scalars):
            pid = f"{role}:{owner}#{n}"
            n += 1
        self.scalars.append(FreeParam(pid, "scalar", role, lo, hi, wrap, init))
        return pid

    def add_dependent(self, name: str, resolver, position: int = 0) -> None:
        state = self.points.get(name)
        if state == "dependent":
            raise self.fail(DuplicateDefinition, f"point {name} already has a construction")
        if state == "free":
            del self.free_points[name]
        self.points[name] = "dependent"
        self.resolvers[name] = DependentPoint(name, resolver, self.origin, (self.seq, position))

    def segment(self, a: str, b: str) -> None:
        key = frozenset((a, b))
        if a != b and key not in self.segments:
            self.segments[key] = (a, b)

    def polygon_sides(self, pts) -> None:
        for i, p in enumerate(pts):
            self.segment(p, pts[(i + 1) % len(pts)])

    def new_ring(self) -> int:
        self.ring += 1
        return self.ring

    def circle(self, center: str):
        if center not in self.points:
            raise self.fail(UndeclaredPoint, f"undeclared point {center}")
        if center not in self.circles:
            raise self.fail(CompileError, f"{center} is not the center of a declared circle")
        return self.circles[center]

    def constraint(self, kind, family, operands, target, mode="") -> None:
        self.constraints.append(Constraint(kind, family, tuple(operands), target, self.origin,
                                           format_statement(self.stmt), mode))

    # driver -----------------------------------------------------------------------
    def run(self) -> Scene:
        for origin, stmt in self.program.iter_statements():
            self.origin, self.stmt = origin, stmt
            self.seq += 1
            handler = getattr(self, "_" + stmt.head, None)
            if handler is None:
                raise self.fail(CompileError, f"unknown statement {stmt.head!r}")
            handler(*stmt.args)
        order = topo_order((d.id, d.inputs) for d in sorted(self.resolvers.values(), key=lambda d: d.order))
        dependents = tuple(self.resolvers[n] for n in order)
        free = tuple(self.free_points.values()) + tuple(self.scalars)
        known = set(self.points)
        for c in self.constraints:
            missing = c.points - known
            if missing:
                raise CompileError(f"constraint references unknown points {sorted(missing)}", c.origin)
        return Scene(
            free=free,
            dependents=dependents,
            constraints=tuple(self.constraints),
            segments=tuple(self.segments.values()),
            circles=dict(self.circles),
            arcs=tuple(self.arcs),
            labels={p: True for p in self.points},
            program=self.program,
        )

    # shapes -------------------------------------------------------------------------
    def _Circle(self, center: Name, radius: Number | None = None) -> None:
        c = center.text
        self.add_free(c, ("center",))
        if c in self.circles:
            return
        if radius is not None:
            self.circles[c] = FixedRadius(radius.value)
        else:
            self.circles[c] = ParamRadius(self.add_scalar("radius", c, 10.0, 45.0))
        self.draw_circles.append(c)

    def _Polygon(self, name: Name) -> None:
        pts = name.points
        ring = self.new_ring()
        for k, p in enumerate(pts):
            self.add_free(p, ("ring", ring, k, len(pts)))
        self.polygon_sides(pts)

    def _template(self, name: Name, anchors: int, param: str | None) -> None:
        pts = name.points
        ring = self.new_ring()
        for k, p in enumerate(pts[:anchors]):
            self.add_free(p, ("ring", ring, k, 4))
        for k in range(anchors, 4):
            self.add_dependent(pts[k], DerivedCorner(self.stmt.head, pts[:anchors], k, param), k)
        self.polygon_sides(pts)

    def _Square(self, name: Name) -> None:
        self._template(name, 2, None)

    def _Rectangle(self, name: Name) -> None:
        self._template(name, 2, self.add_scalar("aspect", name.text, 0.2, 3.0))

    def _Rhombus(self, name: Name) -> None:
        self._template(name, 2, self.add_scalar("angle", name.text, 15.0, 165.0))

    def _Parallelogram(self, name: Name) -> None:
        self._template(name, 3, None)

    def _Sector(self, name: Name, angle: Number, radius: Number | None = None) -> None:
        o, a, b = name.points
        self.add_free(o, ("center",))
        if o not in self.circles:
            self.circles[o] = FixedRadius(radius.value) if radius is not None else \
                ParamRadius(self.add_scalar("radius", o, 10.0, 45.0))
        rad = self.circles[o]
        start = self.add_scalar("angle", a, 0.0, 360.0, wrap=True)
        self.add_dependent(a, PointOnCircle(o, rad, start), 1)
        self.add_dependent(b, PointOnCircle(o, rad, start, angle.value), 2)
        self.on_circle[a] = self.on_circle[b] = o
        self.segment(o, a)
        self.segment(o, b)
        self.arcs.append(Arc(o, a, b, rad))

    def _on_circle(self, center: str, pts, ring: int | None = None) -> None:
        rad = self.circle(center)
        for k, p in enumerate(pts):
            if self.on_circle.get(p) == center:
                continue
            init = ("ring", ring, k, len(pts)) if ring is not None else ("uniform",)
            param = self.add_scalar("angle", p, 0.0, 360.0, wrap=True, init=init)
            self.add_dependent(p, PointOnCircle(center, rad, param), k)
            self.on_circle[p] = center

    def _StringOfCircle(self, center: Name, chord: Name) -> None:
        a, b = chord.points
        self._on_circle(center.text, (a, b), self.new_ring())
        self.segment(a, b)

    def _InscribedPolygon(self, center: Name, polygon: Name) -> None:
        pts = polygon.points
        self._on_circle(center.text, pts, self.new_ring())
        self.polygon_sides(pts)

    def _CircumscribedPolygon(self, center: Name, polygon: Name) -> None:
        pts = polygon.points
        if len(pts) != 3:
            raise self.fail(UnsupportedConstruction,
                            f"inscribed circle of {polygon.text} is only supported for triangles")
        self.require(*pts)
        o = center.text
        self.add_dependent(o, Incenter(pts))
        self.circles[o] = InRadius(pts)
        self.draw_circles.append(o)

    # dependence -------------------------------------------------------------------
    def _PointAtLine(self, point: Name, line: Name, where=None) -> None:
        a, b = line.points
        self.require(a, b)
        if isinstance(where, Ratio):
            resolver = PointOnLine(a, b, ratio=where.first / (where.first + where.second))
        elif where is None or where.value == 0:
            resolver = PointOnLine(a, b, param=self.add_scalar("t", point.text, 0.05, 0.95))
        else:
            resolver = PointOnLine(a, b, ratio=where.value)
        self.add_dependent(point.text, resolver)
        self.segment(a, b)

    def _LineIntersect(self, first: Name, second: Name, point: Name) -> None:
        a, b = first.points
        c, d = second.points
        self.require(a, b, c, d)
        p = point.text
        self.add_dependent(p, Intersection(a, b, c, d))
        self.segment(a, b)
        self.segment(c, d)
        self.segment(b, p)
        self.segment(d, p)

    def _PointAtArc(self, point: Name, where: Name, arc_type=None) -> None:
        pts = where.points
        p = point.text
        if len(pts) == 1:
            rad = self.circle(pts[0])
            param = self.add_scalar("angle", p, 0.0, 360.0, wrap=True)
            self.add_dependent(p, PointOnCircle(pts[0], rad, param))
            self.on_circle[p] = pts[0]
            return
        a, b = pts
        self.require(a, b)
        center = self.on_circle.get(a)
        if center is None or self.on_circle.get(b) != center:
            raise self.fail(UnsupportedConstruction, f"{a} and {b} do not lie on a common circle")
        major = isinstance(arc_type, Word) and arc_type.text == "major"
        param = self.add_scalar("arc", p, 0.05, 0.95)
        self.add_dependent(p, ArcPoint(center, self.circles[center], a, b, param, major))
        self.on_circle[p] = center

    def _ExtensionLine(self, line: Name, point: Name) -> None:
        pts = line.points
        a, b = pts[0], pts[1]
        self.require(a, b)
        p = point.text
        self.add_dependent(p, PointOnExtension(a, b, self.add_scalar("extension", p, 0.1, 2.0)))
        self.segment(a, b)
        self.segment(b, p)

    def _Tangent(self, center: Name, touch: Name, tangent: Name) -> None:
        o, t = center.text, touch.text
        rad = self.circle(o)
        pts = tangent.points
        other = pts[0] if len(pts) == 1 or pts[1] == t else pts[1]
        if t not in pts and len(pts) == 2:
            raise self.fail(CompileError, f"tangent {tangent.text} must pass through {t}")
        t_known = t in self.points
        o_known = other in self.points
        if t_known and self.on_circle.get(t) != o and self.points[t] == "dependent":
            raise self.fail(UnsupportedConstruction, f"point of tangency {t} is not on circle {o}")
        if o_known and not t_known:
            key = (o, other)
            branch = 1 if key not in self.tangent_branches else -self.tangent_branches[key]
            self.tangent_branches[key] = branch
            self.add_dependent(t, TangentPoint(o, rad, other, branch))
            self.on_circle[t] = o
        elif o_known:
            self._on_circle(o, (t,))
            self.constraint("AngleValue", ANGLE, (AngleAt(o, t, other),), 90.0, "angle")
        else:
            self._on_circle(o, (t,))
            self.add_dependent(other, TangentEnd(o, t, self.add_scalar("tangent", other, 0.3, 3.0)))
        self.segment(t, other)

    def _DoPerpendicular(self, point: Name, line: Name, foot: Name) -> None:
        a, b = line.points
        p, f = point.text, foot.text
        self.require(p, a, b)
        self.add_dependent(f, PerpendicularFoot(p, a, b))
        self.segment(a, b)
        self.segment(p, f)
        self.segment(b, f)

    def _PointInShape(self, point: Name, region: Name, _flag=None) -> None:
        pts = region.points
        if len(pts) == 1:
            self.circle(pts[0])
            inside = Inside(point.text, circle=pts[0])
        else:
            self.require(*pts)
            inside = Inside(point.text, polygon=pts)
        self.add_free(point.text)
        self.constraint("Containment", None, (inside,), True)

    # length constraints -------------------------------------------------------------
    def _seg(self, name: Name) -> SegLen:
        a, b = name.points
        self.require(a, b)
        return SegLen(a, b)

    def _Length(self, line: Name, value: Number) -> None:
        self.constraint("LengthRatio", LINE, (self._seg(line), Const(1.0)), (value.value, 1.0), "length")

    def _LengthRatio(self, first: Name, second: Name, ratio: Ratio) -> None:
        self.constraint("LengthRatio", LINE, (self._seg(first), self._seg(second)),
                        (ratio.first, ratio.second), "ratio")

    def _arc_angle(self, arc: Name) -> AngleAt:
        a, b = arc.points
        self.require(a, b)
        center = self.on_circle.get(a)
        if center is None or self.on_circle.get(b) != center:
            raise self.fail(UnsupportedConstruction, f"arc {arc.text} is not on a declared circle")
        return AngleAt(a, center, b)

    def _ArcRatio(self, first: Name, second: Name, ratio: Ratio) -> None:
        self.constraint("AngleRatio", LINE, (self._arc_angle(first), self._arc_angle(second)),
                        (ratio.first, ratio.second), "arc")

    def _sum(self, expr: Expression, length: bool) -> SignedSum:
        terms = []
        for t in expr.terms:
            if t.name is None:
                terms.append((t.coef, Const(1.0)))
                continue
            pts = Name(t.name).points
            self.require(*pts)
            if length:
                m = SegLen(*pts) if len(pts) == 2 else Perimeter(pts)
            else:
                m = AngleAt(*pts)
            terms.append((t.coef, m))
        return SignedSum(tuple(terms))

    def _LengthAddandSub(self, left: Expression, rel, right: Expression) -> None:
        self.constraint("LengthRelation", LINE, (self._sum(left, True), self._sum(right, True)), rel.op)

    def _PointLineDistance(self, point: Name, line: Name, value: Number) -> None:
        a, b = line.points
        self.require(point.text, a, b)
        self.constraint("PointLineDistance", LINE, (PointLineDist(point.text, a, b), Const(1.0)),
                        (value.value, 1.0), "distance")

    def _ConnectPoints(self, line: Name) -> None:
        a, b = line.points
        self.require(a, b)
        self.segment(a, b)

    # angle constraints --------------------------------------------------------------
    def _lines(self, first: Name, second: Name) -> LineAngle:
        return LineAngle(tuple(self._seg(first).__dict__.values()), tuple(self._seg(second).__dict__.values()))

    def _Parallel(self, first: Name, second: Name, _value=None) -> None:
        self.constraint("AngleValue", ANGLE, (self._lines(first, second),), 0.0, "parallel")

    def _Perpendicular(self, first: Name, second: Name, _value=None) -> None:
        self.constraint("AngleValue", ANGLE, (self._lines(first, second),), 90.0, "perpendicular")

    def _angle(self, name: Name) -> AngleAt:
        a, v, c = name.points
        self.require(a, v, c)
        return AngleAt(a, v, c)

    def _Angle(self, name: Name, value: Number) -> None:
        self.constraint("AngleValue", ANGLE, (self._angle(name),), value.value, "angle")

    def _TriFunction(self, fn: Word, name: Name, value: Number) -> None:
        inverse, in_range = _TRIG_INVERSE[fn.text]
        if not in_range(value.value):
            raise self.fail(CompileError, f"{fn.text} value {value.value:g} is out of range")
        self.constraint("AngleValue", ANGLE, (self._angle(name),), inverse(value.value), "angle")

    def _AngleRatio(self, first: Name, second: Name, ratio: Ratio) -> None:
        self.constraint("AngleRatio", ANGLE, (self._angle(first), self._angle(second)),
                        (ratio.first, ratio.second), "ratio")

    def _AngleAddandSub(self, left: Expression, rel, right: Expression) -> None:
        self.constraint("AngleRelation", ANGLE, (self._sum(left, False), self._sum(right, False)), rel.op)


def compile_program(program: FormalProgram) -> Scene:
    """Lower ``program`` into a :class:`Scene`.

    Raises UnsupportedConstruction, CyclicDependency, DuplicateDefinition or
    UndeclaredPoint (all :class:`CompileError`).
    """
    return _Compiler(program).run()


# ``compile`` is the public name used throughout the docs; it shadows the
# builtin only inside this module's namespace when imported explicitly.
compile = compile_program  # noqa: A001
