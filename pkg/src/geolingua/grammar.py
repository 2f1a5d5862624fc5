"""The closed GeoLingua keyword table.

Each statement head has a home section, an argument signature and a short
description.  The parser, the validator and the autoformalization prompt are
all driven from this table so they cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Argument, Expression, Name, Number, Ratio, Relation, Term, Word

# argument kinds
POINT = "point"            # one point name
SEGMENT = "segment"        # two point names
ANGLE = "angle"            # three point names, vertex in the middle
POLYGON = "polygon"        # three or more point names
QUAD = "quadrilateral"     # exactly four point names
SECTOR = "sector"          # center followed by the two arc ends
LINE_OR_TRIPLE = "line-or-triple"  # AB, or ABC where C is the extended point
CIRCLE_OR_ARC = "circle-or-arc"    # O (a circle center) or AB (an arc)
POINT_OR_LINE = "point-or-line"    # P or PT
REGION = "region"          # a polygon, or a circle given by its center
NUMBER = "number"
RATIO = "ratio"
NUMBER_OR_RATIO = "number-or-ratio"
RELATION = "relation"
LENGTH_EXPR = "length-expression"
ANGLE_EXPR = "angle-expression"
FUNCTION = "function"
ARC_TYPE = "arc-type"

NAME_POINT_COUNTS = {
    POINT: (1, 1),
    SEGMENT: (2, 2),
    ANGLE: (3, 3),
    POLYGON: (3, None),
    QUAD: (4, 4),
    SECTOR: (3, 3),
    LINE_OR_TRIPLE: (2, 3),
    CIRCLE_OR_ARC: (1, 2),
    POINT_OR_LINE: (1, 2),
}

FUNCTIONS = ("sin", "cos", "tan")
ARC_TYPES = ("minor", "major")
RELATIONS = ("=", ">", ">=", "<", "<=")


@dataclass(frozen=True)
class HeadSpec:
    head: str
    section: str
    params: tuple[str, ...]
    required: int
    form: str
    meaning: str

    @property
    def max_args(self) -> int:
        return len(self.params)


_TABLE = (
    # shapes
    HeadSpec("Circle", "shapes", (POINT, NUMBER), 1,
             "Circle(center_name,radius_value)", "circle with the given center; radius optional"),
    HeadSpec("Polygon", "shapes", (POLYGON,), 1,
             "Polygon(polygon_name)", "triangle, trapezoid or any other polygon"),
    HeadSpec("Parallelogram", "shapes", (QUAD,), 1,
             "Parallelogram(parallelogram_name)", "parallelogram"),
    HeadSpec("Rhombus", "shapes", (QUAD,), 1, "Rhombus(rhombus_name)", "rhombus"),
    HeadSpec("Square", "shapes", (QUAD,), 1, "Square(square_name)", "square"),
    HeadSpec("Rectangle", "shapes", (QUAD,), 1, "Rectangle(rectangle_name)", "rectangle"),
    HeadSpec("Sector", "shapes", (SECTOR, NUMBER, NUMBER), 2,
             "Sector(sector_name,sector_angle,radius_value)",
             "sector named center first (OAB), central angle in degrees"),
    HeadSpec("StringOfCircle", "shapes", (POINT, SEGMENT), 2,
             "StringOfCircle(circle_center,chord_name)", "chord of a circle"),
    HeadSpec("InscribedPolygon", "shapes", (POINT, POLYGON), 2,
             "InscribedPolygon(circle_center,polygon_name)", "polygon inscribed in a circle"),
    HeadSpec("CircumscribedPolygon", "shapes", (POINT, POLYGON), 2,
             "CircumscribedPolygon(circle_center,polygon_name)",
             "inscribed circle (incircle) of a triangle, centered at circle_center"),
    # dependence
    HeadSpec("PointAtLine", "dependence", (POINT, SEGMENT, NUMBER_OR_RATIO), 2,
             "PointAtLine(point_name,line_name,ratio_value)",
             "point on a segment; ratio 0 means anywhere, 0.5 is the midpoint"),
    HeadSpec("LineIntersect", "dependence", (SEGMENT, SEGMENT, POINT), 3,
             "LineIntersect(line_name1,line_name2,intersection)", "intersection of two lines"),
    HeadSpec("PointAtArc", "dependence", (POINT, CIRCLE_OR_ARC, ARC_TYPE), 2,
             "PointAtArc(point_name,circle_center_or_arc_name,arc_type)",
             "point on a circle (0) or on the minor/major arc AB"),
    HeadSpec("ExtensionLine", "dependence", (LINE_OR_TRIPLE, POINT), 2,
             "ExtensionLine(extension_line_name,point_name)",
             "point on the extension of AB beyond B"),
    HeadSpec("Tangent", "dependence", (POINT, POINT, POINT_OR_LINE), 3,
             "Tangent(circle_center,point_of_tangency,tangent)",
             "tangent to a circle at the point of tangency"),
    HeadSpec("DoPerpendicular", "dependence", (POINT, SEGMENT, POINT), 3,
             "DoPerpendicular(point_name,line_name,foot)",
             "perpendicular from a point to a line, with its foot"),
    HeadSpec("PointInShape", "dependence", (POINT, REGION, NUMBER), 2,
             "PointInShape(point_name,polygon_name,0)", "point inside a polygon or circle"),
    # length constraint
    HeadSpec("Length", "length constraint", (SEGMENT, NUMBER), 2,
             "Length(line_name,length_value)", "segment length"),
    HeadSpec("LengthRatio", "length constraint", (SEGMENT, SEGMENT, RATIO), 3,
             "LengthRatio(line_name1,line_name2,Ratio(value1,value2))", "ratio of two segments"),
    HeadSpec("ArcRatio", "length constraint", (SEGMENT, SEGMENT, RATIO), 3,
             "ArcRatio(arc_name1,arc_name2,Ratio(value1,value2))", "ratio of two arcs"),
    HeadSpec("LengthAddandSub", "length constraint", (LENGTH_EXPR, RELATION, LENGTH_EXPR), 3,
             "LengthAddandSub((left side),relation,(right side))",
             "relation between sums/differences of segment lengths; a polygon name is its perimeter"),
    HeadSpec("PointLineDistance", "length constraint", (POINT, SEGMENT, NUMBER), 3,
             "PointLineDistance(point_name,line_name,distance_value)", "distance from a point to a line"),
    HeadSpec("ConnectPoints", "length constraint", (SEGMENT,), 1,
             "ConnectPoints(line_name)", "draw a segment"),
    # angle constraint
    HeadSpec("Parallel", "angle constraint", (SEGMENT, SEGMENT, NUMBER), 2,
             "Parallel(line_name1,line_name2,0)", "two lines are parallel"),
    HeadSpec("Perpendicular", "angle constraint", (SEGMENT, SEGMENT, NUMBER), 2,
             "Perpendicular(line_name1,line_name2,90)", "two lines are perpendicular"),
    HeadSpec("Angle", "angle constraint", (ANGLE, NUMBER), 2,
             "Angle(angle_name,degree_value)", "angle size in degrees"),
    HeadSpec("TriFunction", "angle constraint", (FUNCTION, ANGLE, NUMBER), 3,
             "TriFunction(function,angle_name,value)", "sin/cos/tan of an angle"),
    HeadSpec("AngleRatio", "angle constraint", (ANGLE, ANGLE, RATIO), 3,
             "AngleRatio(angle_name1,angle_name2,Ratio(value1,value2))", "ratio of two angles"),
    HeadSpec("AngleAddandSub", "angle constraint", (ANGLE_EXPR, RELATION, ANGLE_EXPR), 3,
             "AngleAddandSub((left side),relation,(right side))",
             "relation between sums/differences of angles and degree values"),
)

HEADS: dict[str, HeadSpec] = {spec.head: spec for spec in _TABLE}


def heads_in(section: str) -> list[HeadSpec]:
    return [spec for spec in _TABLE if spec.section == section]


def _name_fits(kind: str, name: Name) -> bool:
    pts = name.points
    if "".join(pts) != name.text or not pts:
        return False
    if kind == REGION:
        return len(pts) == 1 or len(pts) >= 3
    lo, hi = NAME_POINT_COUNTS[kind]
    return len(pts) >= lo and (hi is None or len(pts) <= hi)


def _expr_fits(kind: str, expr: Expression) -> bool:
    if not expr.terms:
        return False
    for term in expr.terms:
        if term.name is None:
            continue
        name = Name(term.name)
        if kind == LENGTH_EXPR:
            if not (_name_fits(SEGMENT, name) or _name_fits(POLYGON, name)):
                return False
        elif not _name_fits(ANGLE, name):
            return False
    return True


def coerce(kind: str, arg: Argument) -> Argument | None:
    """Return ``arg`` normalised for ``kind``, or None if it does not fit.

    The only normalisation is wrapping a bare name or number into a
    one-term expression for the expression kinds.
    """
    if kind in NAME_POINT_COUNTS or kind == REGION:
        return arg if isinstance(arg, Name) and _name_fits(kind, arg) else None
    if kind == NUMBER:
        return arg if isinstance(arg, Number) else None
    if kind == RATIO:
        return arg if isinstance(arg, Ratio) else None
    if kind == NUMBER_OR_RATIO:
        return arg if isinstance(arg, (Number, Ratio)) else None
    if kind == RELATION:
        return arg if isinstance(arg, Relation) else None
    if kind == FUNCTION:
        return arg if isinstance(arg, Word) and arg.text in FUNCTIONS else None
    if kind == ARC_TYPE:
        if isinstance(arg, Word) and arg.text in ARC_TYPES:
            return arg
        if isinstance(arg, Number) and arg.value == 0:
            return arg
        return None
    if kind in (LENGTH_EXPR, ANGLE_EXPR):
        if isinstance(arg, Name):
            arg = Expression((Term(1.0, arg.text),))
        elif isinstance(arg, Number):
            arg = Expression((Term(arg.value, None),))
        if isinstance(arg, Expression) and _expr_fits(kind, arg):
            return arg
        return None
    raise KeyError(kind)


def describe_kind(kind: str) -> str:
    return kind.replace("-", " ")
