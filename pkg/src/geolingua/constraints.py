"""Constraint satisfaction scores and the max-deviation loss.

Scorers work elementwise on numpy arrays so one call can score a whole batch
of candidate configurations; the scalar entry points wrap them.  Every score
lies in [0, 1], with 1 meaning the constraint holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import geometry as geo
from .ast import Origin
from .scene import (
    AngleAt, Const, Constraint, Frame, Inside, LineAngle, Perimeter, PointLineDist, Scene,
    SegLen, SignedSum,
)

EPS = 1e-12
MARGIN = 1e-9


# -- scorers --------------------------------------------------------------------

def _ratio_score(gi, gj, ti, tj):
    gi, gj = np.asarray(gi, dtype=float), np.asarray(gj, dtype=float)
    bad = (gi < EPS) | (gj < EPS)
    with np.errstate(over="ignore"):
        r = (gi / np.where(bad, 1.0, gj)) / (ti / tj)
    r = np.where(bad | (r <= 0), 1.0, r)
    return np.where(bad, 0.0, np.minimum(r, 1.0 / r))


def _relation_score(left, right, op: str):
    left, right = np.asarray(left, dtype=float), np.asarray(right, dtype=float)
    if op == "=":
        lz, rz = np.abs(left) < EPS, np.abs(right) < EPS
        r = left / np.where(rz, 1.0, right)
        safe = np.where(r > 0, r, 1.0)
        s = np.where(r > 0, np.minimum(safe, 1.0 / safe), 0.0)
        s = np.where(rz, np.where(lz, 1.0, 0.0), s)
        return np.clip(s, 0.0, 1.0)
    if op == ">":
        holds = left - right > MARGIN
    elif op == ">=":
        holds = left - right >= -MARGIN
    elif op == "<":
        holds = right - left > MARGIN
    elif op == "<=":
        holds = right - left >= -MARGIN
    else:
        raise ValueError(f"unknown relation {op!r}")
    return holds.astype(float)


def _angle_value_score(theta, target):
    theta = np.asarray(theta, dtype=float)
    tz, gz = target == 0, theta == 0
    safe = np.where(gz, 1.0, theta)
    t = 1.0 if tz else target
    with np.errstate(over="ignore"):
        s = np.minimum(safe / t, t / safe)
    return np.where(gz & tz, 1.0, np.where(gz | tz, 0.0, s))


def _parallel_score(folded):
    return np.clip(1.0 - np.asarray(folded, dtype=float) / 90.0, 0.0, 1.0)


def segment_length(a, b) -> float:
    return float(np.hypot(b[0] - a[0], b[1] - a[1]))


def angle_at(a, vertex, c) -> float:
    """Angle at ``vertex`` in degrees; zero-length rays give 0."""
    deg, _ = geo.angle_at(a[0], a[1], vertex[0], vertex[1], c[0], c[1])
    return float(deg)


def score_length_ratio(gen_i: float, gen_j: float, target) -> float:
    ti, tj = _pair(target)
    return float(_ratio_score(gen_i, gen_j, ti, tj))


def score_length_relation(left: float, right: float, rel) -> float:
    return float(_relation_score(left, right, getattr(rel, "op", rel)))


def score_angle_value(theta: float, target: float) -> float:
    return float(_angle_value_score(theta, float(target)))


def score_angle_ratio(gen_i: float, gen_j: float, target) -> float:
    ti, tj = _pair(target)
    return float(_ratio_score(gen_i, gen_j, ti, tj))


def score_angle_relation(left: float, right: float, rel) -> float:
    return float(_relation_score(left, right, getattr(rel, "op", rel)))


def _pair(target) -> tuple[float, float]:
    if hasattr(target, "first"):
        return float(target.first), float(target.second)
    return float(target[0]), float(target[1])


# -- measurement ------------------------------------------------------------------

def measure(m, frame: Frame):
    """Value of measure ``m`` over the batch, and a mask of ill-defined rows."""
    no_bad = np.zeros(frame.size, dtype=bool)
    if isinstance(m, SegLen):
        (ax, ay), (bx, by) = frame.xy(m.a), frame.xy(m.b)
        return geo.norm(bx - ax, by - ay), no_bad
    if isinstance(m, Perimeter):
        total = np.zeros(frame.size)
        n = len(m.points)
        for i in range(n):
            (ax, ay), (bx, by) = frame.xy(m.points[i]), frame.xy(m.points[(i + 1) % n])
            total = total + geo.norm(bx - ax, by - ay)
        return total, no_bad
    if isinstance(m, AngleAt):
        return geo.angle_at(*frame.xy(m.a), *frame.xy(m.vertex), *frame.xy(m.c))
    if isinstance(m, LineAngle):
        deg, bad = geo.direction_angle(*frame.xy(m.first[0]), *frame.xy(m.first[1]),
                                       *frame.xy(m.second[0]), *frame.xy(m.second[1]))
        return np.minimum(deg, 180.0 - deg), bad
    if isinstance(m, PointLineDist):
        return geo.point_line_distance(*frame.xy(m.point), *frame.xy(m.a), *frame.xy(m.b))
    if isinstance(m, Const):
        return np.full(frame.size, m.value), no_bad
    if isinstance(m, Inside):
        px, py = frame.xy(m.point)
        if m.circle is not None:
            ox, oy = frame.xy(m.circle)
            inside = geo.norm(px - ox, py - oy) <= frame.radius(m.circle) + MARGIN
        else:
            xs = [frame.x[p] for p in m.polygon]
            ys = [frame.y[p] for p in m.polygon]
            inside = geo.point_in_polygon(px, py, xs, ys, MARGIN)
        return inside.astype(float), no_bad
    if isinstance(m, SignedSum):
        total, bad = np.zeros(frame.size), no_bad
        for coef, sub in m.terms:
            v, b = measure(sub, frame)
            total = total + coef * v
            bad = bad | b
        return total, bad
    raise TypeError(f"unknown measure {m!r}")


def score_batch(c: Constraint, frame: Frame):
    """Scores of one constraint over the batch, and its degeneracy mask."""
    values, bad = [], np.zeros(frame.size, dtype=bool)
    for m in c.operands:
        v, b = measure(m, frame)
        values.append(v)
        bad = bad | b
    for p in c.points:
        bad = bad | frame.bad.get(p, False)
    if c.kind in ("LengthRatio", "AngleRatio", "PointLineDistance"):
        s = _ratio_score(values[0], values[1], *c.target)
    elif c.kind in ("LengthRelation", "AngleRelation"):
        s = _relation_score(values[0], values[1], c.target)
    elif c.kind == "AngleValue":
        s = _parallel_score(values[0]) if c.mode == "parallel" else _angle_value_score(values[0], c.target)
    elif c.kind == "Containment":
        s = values[0]
    else:
        raise ValueError(f"unknown constraint kind {c.kind!r}")
    s = np.where(bad, 0.0, np.clip(s, 0.0, 1.0))
    return s, bad


def score_matrix(scene: Scene, frame: Frame):
    """(K, n) scores and degeneracy masks for every constraint."""
    n = len(scene.constraints)
    scores = np.ones((frame.size, n))
    bad = np.zeros((frame.size, n), dtype=bool)
    for k, c in enumerate(scene.constraints):
        scores[:, k], bad[:, k] = score_batch(c, frame)
    return scores, bad


def batch_loss(scores: np.ndarray) -> np.ndarray:
    if scores.shape[1] == 0:
        return np.zeros(scores.shape[0])
    return np.max(np.abs(1.0 - scores), axis=1)


# -- score vectors and loss --------------------------------------------------------

@dataclass(frozen=True)
class ScoreEntry:
    origin: Origin
    kind: str
    family: str | None
    score: float
    text: str = ""

    def to_dict(self) -> dict:
        return {"origin": str(self.origin), "kind": self.kind, "family": self.family,
                "score": self.score, "statement": self.text}


@dataclass(frozen=True)
class ScoreVector:
    entries: tuple[ScoreEntry, ...]
    degeneracy_penalized: tuple[Origin, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def scores(self) -> list[float]:
        return [e.score for e in self.entries]

    def to_list(self) -> list[dict]:
        return [e.to_dict() for e in self.entries]


@dataclass(frozen=True)
class Loss:
    value: float
    argmax: Origin | None

    @classmethod
    def of(cls, scores: ScoreVector) -> "Loss":
        if not scores.entries:
            return cls(0.0, None)
        devs = [abs(1.0 - e.score) for e in scores.entries]
        k = int(np.argmax(devs))
        return cls(devs[k], scores.entries[k].origin)


def loss_value(scores) -> float:
    """max |1 - C_k|, or 0 for no scores."""
    arr = np.asarray(list(scores), dtype=float)
    return float(np.max(np.abs(1.0 - arr))) if arr.size else 0.0


def frame_from_coordinates(scene: Scene, coordinates: Mapping[str, tuple[float, float]],
                           degenerate=(), scalars: Mapping[str, float] | None = None) -> Frame:
    frame = Frame(1)
    frame.circles = scene.circles
    for p, (x, y) in coordinates.items():
        frame.x[p] = np.array([float(x)])
        frame.y[p] = np.array([float(y)])
        frame.bad[p] = np.array([p in degenerate])
    for s in scene.scalars:
        frame.scalars[s.id] = np.array([float((scalars or {}).get(s.id, s.lo))])
    return frame


def score_vector(scene: Scene, frame: Frame, row: int = 0) -> ScoreVector:
    scores, bad = score_matrix(scene, frame)
    entries = tuple(ScoreEntry(c.origin, c.kind, c.family, float(scores[row, k]), c.text)
                    for k, c in enumerate(scene.constraints))
    penalized = tuple(c.origin for k, c in enumerate(scene.constraints) if bad[row, k])
    return ScoreVector(entries, penalized)


def evaluate(scene: Scene, coordinates: Mapping[str, tuple[float, float]], degenerate=(),
             scalars: Mapping[str, float] | None = None) -> tuple[ScoreVector, Loss]:
    """Score every constraint of ``scene`` at ``coordinates``.

    ``scalars`` supplies free radii needed by circle containment; it may be
    omitted when no such constraint exists.
    """
    sv = score_vector(scene, frame_from_coordinates(scene, coordinates, degenerate, scalars))
    return sv, Loss.of(sv)
