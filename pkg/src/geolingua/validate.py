"""Static checks over a parsed program.

``validate`` never raises: every problem becomes a :class:`Diagnostic`.  It is
the predicate behind the autoformalization filter and the CLI's compile gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import grammar
from .ast import (
    Expression,
    FormalProgram,
    Name,
    Number,
    Origin,
    Ratio,
    Statement,
    Word,
)

ERROR = "error"
WARNING = "warning"

RULES = {
    "GL001": "unknown statement keyword",
    "GL002": "statement in the wrong section",
    "GL003": "wrong arity or argument kind",
    "GL004": "undeclared point",
    "GL005": "point defined twice",
    "GL006": "degenerate or out-of-range numeric literal",
    "GL007": "repeated point inside a name",
    "GL008": "circle or arc reference does not resolve",
    "GL009": "point defined in terms of itself",
    "GL010": "suspicious but accepted construct",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    rule: str
    message: str
    origin: Origin | None = None
    span: tuple[int, int] | None = None

    def __str__(self) -> str:
        where = f"{self.origin}: " if self.origin else ""
        return f"{self.severity} {self.rule} {where}{self.message}"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "rule": self.rule,
            "message": self.message,
            "section": self.origin.section if self.origin else None,
            "index": self.origin.index if self.origin else None,
            "span": list(self.span) if self.span else None,
        }


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == ERROR for d in self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == ERROR]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "diagnostics": [d.to_dict() for d in self.diagnostics]}


class _Scope:
    """Tracks which points exist, which have resolvers, and circle membership."""

    def __init__(self) -> None:
        self.points: dict[str, str] = {}      # name -> "free" | "dependent"
        self.circles: set[str] = set()
        self.on_circle: dict[str, str] = {}   # point -> center


class _Checker:
    def __init__(self, program: FormalProgram):
        self.program = program
        self.scope = _Scope()
        self.diags: list[Diagnostic] = []
        self.origin: Origin | None = None
        self.span = None

    def report(self, rule: str, message: str, severity: str = ERROR) -> None:
        self.diags.append(Diagnostic(severity, rule, message, self.origin, self.span))

    # point bookkeeping ---------------------------------------------------
    def ref(self, *names: str) -> None:
        for p in names:
            if p not in self.scope.points:
                self.report("GL004", f"undeclared point {p}")
                # declare it so one typo is reported once
                self.scope.points[p] = "free"

    def free(self, *names: str) -> None:
        for p in names:
            self.scope.points.setdefault(p, "free")

    def dependent(self, p: str, inputs: tuple[str, ...] = ()) -> None:
        if p in inputs:
            self.report("GL009", f"point {p} is constructed from itself")
        if self.scope.points.get(p) == "dependent":
            self.report("GL005", f"point {p} already has a construction")
        self.scope.points[p] = "dependent"

    def need_circle(self, center: str) -> bool:
        if center not in self.scope.points:
            self.ref(center)
            return False
        if center not in self.scope.circles:
            self.report("GL008", f"{center} is not the center of a declared circle")
            return False
        return True

    # numeric helpers -----------------------------------------------------
    def positive(self, value: float, what: str) -> None:
        if not (value > 0 and math.isfinite(value)):
            self.report("GL006", f"{what} must be positive, got {value:g}")

    def ratio(self, r: Ratio) -> None:
        if not (r.first > 0 and r.second > 0 and math.isfinite(r.first) and math.isfinite(r.second)):
            self.report("GL006", f"ratio components must be positive, got Ratio({r.first:g},{r.second:g})")

    def angle_value(self, value: float) -> None:
        if not (0 < value <= 180):
            self.report("GL006", f"angle out of range (0,180]: {value:g}")

    # driver ---------------------------------------------------------------
    def run(self) -> list[Diagnostic]:
        for origin, stmt in self.program.iter_statements():
            self.origin, self.span = origin, stmt.span
            try:
                self.check(origin, stmt)
            except Exception as exc:  # keep validation total
                self.report("GL003", f"could not analyse statement: {exc}")
        return self.diags

    def check(self, origin: Origin, stmt: Statement) -> None:
        spec = grammar.HEADS.get(stmt.head)
        if spec is None:
            self.report("GL001", f"unknown statement {stmt.head!r}")
            return
        if spec.section != origin.section:
            self.report("GL002", f"{stmt.head} belongs in {spec.section!r}, not {origin.section!r}")
        if not spec.required <= len(stmt.args) <= spec.max_args:
            self.report("GL003", f"{stmt.head} takes {spec.required}..{spec.max_args} arguments, "
                                 f"got {len(stmt.args)}")
            return
        for i, (kind, arg) in enumerate(zip(spec.params, stmt.args)):
            if grammar.coerce(kind, arg) != arg:
                self.report("GL003", f"{stmt.head} argument {i + 1} must be a "
                                     f"{grammar.describe_kind(kind)}")
                return
        for arg in stmt.args:
            names = [arg.text] if isinstance(arg, Name) else \
                list(arg.names()) if isinstance(arg, Expression) else []
            for text in names:
                pts = Name(text).points
                if len(set(pts)) != len(pts):
                    self.report("GL007", f"name {text} repeats a point")
        getattr(self, "_" + stmt.head)(stmt.args)

    # shapes -----------------------------------------------------------------
    def _Circle(self, args) -> None:
        center = args[0].text
        if len(args) > 1:
            self.positive(args[1].value, "radius")
        if center in self.scope.circles:
            self.report("GL010", f"a circle centered at {center} already exists", WARNING)
        self.free(center)
        self.scope.circles.add(center)

    def _Polygon(self, args) -> None:
        self.free(*args[0].points)

    def _template(self, args, anchors: int) -> None:
        pts = args[0].points
        self.free(*pts[:anchors])
        for p in pts[anchors:]:
            self.dependent(p, pts[:anchors])

    def _Square(self, args) -> None:
        self._template(args, 2)

    _Rectangle = _Rhombus = _Square

    def _Parallelogram(self, args) -> None:
        self._template(args, 3)

    def _Sector(self, args) -> None:
        center, a, b = args[0].points
        if not 0 < args[1].value < 360:
            self.report("GL006", f"sector angle out of range (0,360): {args[1].value:g}")
        if len(args) > 2:
            self.positive(args[2].value, "radius")
        self.free(center)
        self.scope.circles.add(center)
        for p in (a, b):
            self.dependent(p, (center,))
            self.scope.on_circle[p] = center

    def _on_circle(self, center: str, pts) -> None:
        for p in pts:
            if self.scope.on_circle.get(p) == center:
                continue
            self.dependent(p, (center,))
            self.scope.on_circle[p] = center

    def _StringOfCircle(self, args) -> None:
        center = args[0].text
        self.need_circle(center)
        self._on_circle(center, args[1].points)

    _InscribedPolygon = _StringOfCircle

    def _CircumscribedPolygon(self, args) -> None:
        center, pts = args[0].text, args[1].points
        self.ref(*pts)
        if len(pts) != 3:
            self.report("GL010", "an inscribed circle is only constructed for triangles", WARNING)
        self.dependent(center, pts)
        self.scope.circles.add(center)

    # dependence -------------------------------------------------------------
    def _PointAtLine(self, args) -> None:
        p, host = args[0].text, args[1].points
        self.ref(*host)
        if len(args) > 2:
            where = args[2]
            if isinstance(where, Ratio):
                self.ratio(where)
            elif not 0 <= where.value < 1:
                self.report("GL006", f"point ratio must lie in [0,1), got {where.value:g}")
        self.dependent(p, host)

    def _LineIntersect(self, args) -> None:
        a, b, p = args[0].points, args[1].points, args[2].text
        self.ref(*a, *b)
        self.dependent(p, a + b)

    def _PointAtArc(self, args) -> None:
        p, where = args[0].text, args[1].points
        if len(where) == 1:
            self.need_circle(where[0])
            if len(args) > 2 and isinstance(args[2], Word):
                self.report("GL010", "arc type is ignored for a whole circle", WARNING)
            center = where[0]
        else:
            self.ref(*where)
            c1 = self.scope.on_circle.get(where[0])
            c2 = self.scope.on_circle.get(where[1])
            if c1 is None or c1 != c2:
                self.report("GL008", f"{where[0]} and {where[1]} do not lie on a common declared circle")
            center = c1 or ""
        self.dependent(p, where)
        if center:
            self.scope.on_circle[p] = center

    def _ExtensionLine(self, args) -> None:
        line, p = args[0].points, args[1].text
        if len(line) == 3:
            if line[2] != p:
                self.report("GL006", f"three-letter extension name must end with {p}")
            line = line[:2]
        elif p in line:
            self.report("GL006", f"extended point {p} cannot be an endpoint of {args[0].text}")
        self.ref(*line)
        self.dependent(p, line)

    def _Tangent(self, args) -> None:
        center, touch, line = args[0].text, args[1].text, args[2].points
        self.need_circle(center)
        if len(line) == 2:
            if touch not in line:
                self.report("GL006", f"tangent {args[2].text} must pass through {touch}")
                return
            other = line[0] if line[1] == touch else line[1]
        else:
            other = line[0]
        if other == touch or other == center:
            self.report("GL006", "tangent end must differ from the center and the point of tangency")
            return
        t_new = touch not in self.scope.points
        o_new = other not in self.scope.points
        if t_new:
            self.dependent(touch, (center,))
            self.scope.on_circle[touch] = center
        if o_new:
            self.dependent(other, (center, touch))

    def _DoPerpendicular(self, args) -> None:
        p, host, foot = args[0].text, args[1].points, args[2].text
        self.ref(p, *host)
        self.dependent(foot, (p,) + host)

    def _PointInShape(self, args) -> None:
        p, region = args[0].text, args[1].points
        if len(region) == 1:
            self.need_circle(region[0])
        else:
            self.ref(*region)
        if len(args) > 2 and args[2].value != 0:
            self.report("GL010", "third argument of PointInShape is expected to be 0", WARNING)
        self.free(p)

    # length constraints -----------------------------------------------------
    def _Length(self, args) -> None:
        self.ref(*args[0].points)
        self.positive(args[1].value, "length")

    def _LengthRatio(self, args) -> None:
        self.ref(*args[0].points, *args[1].points)
        self.ratio(args[2])

    def _ArcRatio(self, args) -> None:
        self._LengthRatio(args)
        for arc in args[:2]:
            a, b = arc.points
            c1, c2 = self.scope.on_circle.get(a), self.scope.on_circle.get(b)
            if c1 is None or c1 != c2:
                self.report("GL008", f"arc {arc.text} does not lie on a declared circle")

    def _expr(self, expr: Expression) -> None:
        for name in expr.names():
            self.ref(*Name(name).points)

    def _LengthAddandSub(self, args) -> None:
        self._expr(args[0])
        self._expr(args[2])

    _AngleAddandSub = _LengthAddandSub

    def _PointLineDistance(self, args) -> None:
        self.ref(args[0].text, *args[1].points)
        self.positive(args[2].value, "distance")

    def _ConnectPoints(self, args) -> None:
        self.ref(*args[0].points)

    # angle constraints ------------------------------------------------------
    def _Parallel(self, args) -> None:
        self.ref(*args[0].points, *args[1].points)
        if len(args) > 2 and args[2].value != 0:
            self.report("GL006", f"Parallel expects 0 as its angle, got {args[2].value:g}")

    def _Perpendicular(self, args) -> None:
        self.ref(*args[0].points, *args[1].points)
        if len(args) > 2 and args[2].value != 90:
            self.report("GL006", f"Perpendicular expects 90 as its angle, got {args[2].value:g}")

    def _Angle(self, args) -> None:
        self.ref(*args[0].points)
        self.angle_value(args[1].value)

    def _TriFunction(self, args) -> None:
        fn, value = args[0].text, args[2].value
        self.ref(*args[1].points)
        ok = {"sin": 0 < value <= 1, "cos": -1 < value < 1, "tan": 0 < value < math.inf}[fn]
        if not ok:
            self.report("GL006", f"{fn} value {value:g} has no angle in the supported range")

    def _AngleRatio(self, args) -> None:
        self.ref(*args[0].points, *args[1].points)
        self.ratio(args[2])


def validate(program: FormalProgram) -> ValidationReport:
    """Check closed keywords, placement, arity, declarations and literals."""
    return ValidationReport(_Checker(program).run())
