import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geolingua.ast import Origin
from geolingua.constraints import (
    Loss, ScoreEntry, ScoreVector, angle_at, evaluate, loss_value, score_angle_ratio,
    score_angle_relation, score_angle_value, score_length_ratio, score_length_relation, segment_length,
)
from geolingua.parser import parse_text
from geolingua.scene import Assignment, compile_program, resolve_dependents
from oracles import angle_oracle, angle_value_oracle, ratio_oracle, relation_oracle

RELS = [">", ">=", "<", "<=", "="]


def scene_of(text):
    return compile_program(parse_text(text))


# -- documented examples -------------------------------------------------------------

@pytest.mark.parametrize("a, b, want", [((0, 0), (3, 4), 5), ((1, 1), (1, 1), 0), ((0, 0), (1, 0), 1)])
def test_segment_length(a, b, want):
    assert segment_length(a, b) == want


@pytest.mark.parametrize("a, v, c, want", [((1, 0), (0, 0), (0, 1), 90), ((1, 0), (0, 0), (1, 0), 0),
                                           ((1, 0), (0, 0), (-1, 0), 180), ((1, 0), (0, 0), (0, 0), 0)])
def test_angle_at(a, v, c, want):
    assert angle_at(a, v, c) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("gi, gj, want", [(4, 2, 1.0), (3, 2, 0.75), (5, 1, 0.4), (0, 2, 0.0)])
def test_length_ratio_examples(gi, gj, want):
    assert score_length_ratio(gi, gj, (2, 1)) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("left, right, op, want", [(3, 3, "=", 1.0), (4, 3, ">", 1), (2, 3, ">", 0),
                                                   (0, 0, "=", 1.0), (1, 0, "=", 0.0)])
def test_length_relation_examples(left, right, op, want):
    assert score_length_relation(left, right, op) == want


@pytest.mark.parametrize("theta, target, want", [(90, 90, 1.0), (0, 0, 1.0), (45, 60, 0.75), (80, 60, 0.75),
                                                 (0, 60, 0.0), (30, 0, 0.0)])
def test_angle_value_examples(theta, target, want):
    assert score_angle_value(theta, target) == pytest.approx(want, abs=1e-15)


@pytest.mark.parametrize("gi, gj, want", [(90, 45, 1.0), (60, 60, 0.5), (60, 0, 0.0)])
def test_angle_ratio_examples(gi, gj, want):
    assert score_angle_ratio(gi, gj, (2, 1)) == want


@pytest.mark.parametrize("left, right, op, want", [(90, 90, "=", 1), (30, 60, "<", 1), (60, 30, "<", 0)])
def test_angle_relation_examples(left, right, op, want):
    assert score_angle_relation(left, right, op) == want


def test_inequality_margin():
    assert score_length_relation(1.0 + 5e-10, 1.0, ">") == 0
    assert score_length_relation(1.0 - 5e-10, 1.0, ">=") == 1
    assert score_length_relation(1.0, 1.0, "<=") == 1
    assert score_length_relation(1.0, 1.0, "<") == 0


# -- oracle equivalence ------------------------------------------------------------------

def _cases(seed, n=40):
    rng = random.Random(seed)
    return [(rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(0.1, 5), rng.uniform(0.1, 5)) for _ in range(n)]


@pytest.mark.parametrize("case", _cases(1) + [(0.0, 3, 1, 1), (3, 0.0, 1, 1), (1e-13, 1, 1, 1)])
def test_length_ratio_oracle(case):
    gi, gj, ti, tj = case
    assert abs(score_length_ratio(gi, gj, (ti, tj)) - ratio_oracle(gi, gj, ti, tj)) <= 1e-12


@pytest.mark.parametrize("case", _cases(2) + [(0.0, 30, 1, 1), (45, 0.0, 2, 1)])
def test_angle_ratio_oracle(case):
    gi, gj, ti, tj = case
    assert abs(score_angle_ratio(gi, gj, (ti, tj)) - ratio_oracle(gi, gj, ti, tj)) <= 1e-12


@pytest.mark.parametrize("case", [(a, b, RELS[i % 5]) for i, (a, b, _, _) in enumerate(_cases(3))] +
                         [(0.0, 0.0, "="), (2.0, 0.0, "="), (-1.0, 2.0, "="), (3.0, 3.0, ">="), (3.0, 3.0, "<")])
def test_length_relation_oracle(case):
    left, right, op = case
    assert abs(score_length_relation(left, right, op) - relation_oracle(left, right, op)) <= 1e-12


@pytest.mark.parametrize("case", [(a * 3, b * 3, RELS[i % 5]) for i, (a, b, _, _) in enumerate(_cases(4))] +
                         [(180.0, 180.0, "="), (0.0, 0.0, "="), (90.0, 45.0, ">")])
def test_angle_relation_oracle(case):
    left, right, op = case
    assert abs(score_angle_relation(left, right, op) - relation_oracle(left, right, op)) <= 1e-12


@pytest.mark.parametrize("case", [(a * 3.6, b * 3.6) for a, b, _, _ in _cases(5)] +
                         [(0.0, 0.0), (0.0, 90.0), (45.0, 0.0), (180.0, 180.0), (1e-9, 90.0)])
def test_angle_value_oracle(case):
    theta, target = case
    assert abs(score_angle_value(theta, target) - angle_value_oracle(theta, target)) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_angle_measure_oracle(seed):
    rng = random.Random(seed)
    a, v, c = [(rng.uniform(-50, 50), rng.uniform(-50, 50)) for _ in range(3)]
    assert abs(angle_at(a, v, c) - angle_oracle(a, v, c)) <= 1e-9


# -- properties ------------------------------------------------------------------------------

val = st.floats(0, 1e4, allow_nan=False)
pos = st.floats(1e-3, 1e3)


@settings(max_examples=500)
@given(val, val, pos, pos, st.sampled_from(RELS), st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_scores_in_unit_interval(gi, gj, ti, tj, op, left, right):
    for s in (score_length_ratio(gi, gj, (ti, tj)), score_angle_ratio(gi, gj, (ti, tj)),
              score_length_relation(left, right, op), score_angle_relation(left, right, op),
              score_angle_value(min(gi, 180), min(gj, 180))):
        assert 0.0 <= s <= 1.0


@settings(max_examples=300)
@given(val, val, pos, pos)
def test_ratio_swap_symmetry(gi, gj, ti, tj):
    assert score_length_ratio(gi, gj, (ti, tj)) == pytest.approx(score_length_ratio(gj, gi, (tj, ti)), abs=1e-12)


@settings(max_examples=300)
@given(pos, pos, pos)
def test_exact_ratio_scores_one(gj, ti, tj):
    assert score_length_ratio(gj * ti / tj, gj, (ti, tj)) == pytest.approx(1.0, abs=1e-12)


SCALE_SCENE = """
shapes:
Polygon(ABCD)
length constraint:
LengthRatio(AB,CD,Ratio(3,2))
LengthAddandSub((AB+BC),>,(AC))
LengthAddandSub((AB+BC),=,(2*CD))
angle constraint:
Angle(ABC,70)
AngleRatio(ABC,BCD,Ratio(1,2))
AngleAddandSub((ABC+BCD),<,(200))
Parallel(AB,CD,0)
Perpendicular(AC,BD,90)
"""


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=4, max_size=4),
       st.floats(0.1, 10))
def test_scale_invariance(pts, k):
    s = scene_of(SCALE_SCENE)
    coords = dict(zip("ABCD", pts))
    scaled = {p: (x * k, y * k) for p, (x, y) in coords.items()}
    a, _ = evaluate(s, coords)
    b, _ = evaluate(s, scaled)
    for ea, eb in zip(a.entries, b.entries):
        if ea.kind in ("LengthRelation", "AngleRelation") and ea.score in (0.0, 1.0):
            # Iverson brackets can flip only within the absolute margin
            continue
        assert ea.score == pytest.approx(eb.score, abs=1e-9)


# -- evaluate and loss -------------------------------------------------------------------------

def test_empty_scene_loss_zero():
    s = scene_of("shapes:\nPolygon(ABC)\n")
    scores, loss = evaluate(s, {"A": (0, 0), "B": (1, 0), "C": (0, 1)})
    assert len(scores) == 0 and loss.value == 0 and loss.argmax is None


def test_loss_argmax():
    entries = tuple(ScoreEntry(Origin("angle constraint", i), "AngleValue", "angle", s)
                    for i, s in enumerate([1.0, 0.8, 0.95]))
    loss = Loss.of(ScoreVector(entries))
    assert loss.value == pytest.approx(0.2) and loss.argmax == Origin("angle constraint", 1)


def test_unit_square_perpendicular():
    s = scene_of("shapes:\nSquare(ABCD)\nangle constraint:\nPerpendicular(AB,BC,90)\n")
    r = resolve_dependents(s, Assignment({"A": (0, 0), "B": (1, 0)}, {}))
    scores, loss = evaluate(s, r.coordinates, r.degenerate)
    assert scores.scores == [1.0] and loss.value == 0.0


def test_parallel_wraparound():
    s = scene_of("shapes:\nPolygon(ABCD)\nangle constraint:\nParallel(AB,CD,0)\n")
    # CD points the opposite way: still parallel
    scores, _ = evaluate(s, {"A": (0, 0), "B": (1, 0), "C": (5, 1), "D": (2, 1)})
    assert scores.scores[0] == pytest.approx(1.0, abs=1e-12)
    scores, _ = evaluate(s, {"A": (0, 0), "B": (1, 0), "C": (0, 1), "D": (1, 2)})
    assert scores.scores[0] == pytest.approx(0.5, abs=1e-12)


def test_degenerate_points_score_zero():
    s = scene_of("shapes:\nPolygon(ABCD)\ndependence:\nLineIntersect(AB,CD,E)\n"
                 "length constraint:\nLengthRatio(AE,AB,Ratio(1,1))\nLength(CD,1)\n")
    r = resolve_dependents(s, Assignment({"A": (0, 0), "B": (1, 0), "C": (0, 1), "D": (1, 1)}, {}))
    scores, loss = evaluate(s, r.coordinates, r.degenerate)
    assert scores.scores == [0.0, 1.0]
    assert scores.degeneracy_penalized == (Origin("length constraint", 0),)
    assert loss.value == 1.0


def test_containment_indicator():
    s = scene_of("shapes:\nPolygon(ABC)\nCircle(O,2)\ndependence:\nPointInShape(P,ABC,0)\n"
                 "PointInShape(Q,O,0)\n")
    base = {"A": (0, 0), "B": (4, 0), "C": (0, 4), "O": (10, 10)}
    inside, _ = evaluate(s, {**base, "P": (1, 1), "Q": (11, 10)})
    edge, _ = evaluate(s, {**base, "P": (2, 0), "Q": (12, 10)})
    outside, _ = evaluate(s, {**base, "P": (5, 5), "Q": (13, 10)})
    assert inside.scores == [1.0, 1.0] and edge.scores == [1.0, 1.0] and outside.scores == [0.0, 0.0]


def test_loss_value_matches_definition():
    rng = np.random.default_rng(0)
    for _ in range(100):
        scores = rng.uniform(0, 1, rng.integers(1, 10))
        assert loss_value(scores) == max(abs(1 - s) for s in scores)
