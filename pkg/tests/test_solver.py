import numpy as np
import pytest

from geolingua.parser import parse_text
from geolingua.scene import Assignment, compile_program
from geolingua.solver import SolverConfig, initialize, perturb, solve, trace_csv
from geolingua.constraints import evaluate

FAST = dict(inner_iterations=200, outer_iterations=200)


def scene_of(text):
    return compile_program(parse_text(text))


def test_config_defaults():
    c = SolverConfig()
    assert (c.alpha, c.inner_iterations, c.outer_iterations, c.restarts) == (0.05, 1000, 1000, 3)
    assert (c.sigma_initial, c.sigma_final) == (0.10, 0.005)


@pytest.mark.parametrize("kwargs", [dict(alpha=0), dict(alpha=1), dict(restarts=0), dict(inner_iterations=0),
                                    dict(sigma_final=0.2), dict(time_budget=-1)])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_sigma_anneals_linearly():
    c = SolverConfig(outer_iterations=11)
    assert c.sigma(0) == pytest.approx(10.0) and c.sigma(10) == pytest.approx(0.5)
    assert c.sigma(5) == pytest.approx(5.25)


def test_initialize_free_point_in_canvas():
    s = scene_of("shapes:\nPolygon(ABC)\ndependence:\nPointInShape(P,ABC,0)\n")
    a = initialize(s, np.random.default_rng(42))
    x, y = a.points["P"]
    assert 0 <= x <= 100 and 0 <= y <= 100


def test_initialize_polygon_on_ring():
    s = scene_of("shapes:\nPolygon(ABCDE)\n")
    a = initialize(s, np.random.default_rng(1))
    for x, y in a.points.values():
        assert np.hypot(x - 50, y - 50) == pytest.approx(30)


def test_initialize_scalar_in_range():
    s = scene_of("shapes:\nCircle(O,5)\ndependence:\nPointAtArc(P,O,0)\n")
    for seed in range(20):
        v = initialize(s, np.random.default_rng(seed)).scalars[s.scalars[0].id]
        assert 0 <= v < 360


def test_initialize_deterministic():
    s = scene_of("shapes:\nRectangle(ABCD)\nCircle(O)\n")
    assert initialize(s, np.random.default_rng(7)) == initialize(s, np.random.default_rng(7))


def test_perturb_zero_sigma_is_identity():
    s = scene_of("shapes:\nRectangle(ABCD)\n")
    a = initialize(s, np.random.default_rng(0))
    b = perturb(s, a, 0.0, np.random.default_rng(1))
    assert b == a


def test_perturb_wraps_angles():
    s = scene_of("shapes:\nCircle(O,5)\ndependence:\nPointAtArc(P,O,0)\n")
    sid = s.scalars[0].id
    a = Assignment({"O": (0.0, 0.0)}, {sid: 359.0})
    # sigma 100 canvas units is the full range: noise sd equals 360 degrees
    for seed in range(50):
        v = perturb(s, a, 100.0, np.random.default_rng(seed)).scalars[sid]
        assert 0 <= v < 360


def test_wrap_rule_example():
    from geolingua.solver import _fit
    (p,) = scene_of("shapes:\nCircle(O,5)\ndependence:\nPointAtArc(P,O,0)\n").scalars
    assert _fit(p, 359.0 + 5.0) == pytest.approx(4.0)


def test_perturb_clamps_bounded_scalars():
    s = scene_of("shapes:\nRectangle(ABCD)\n")
    (p,) = s.scalars
    a = Assignment({"A": (0.0, 0.0), "B": (1.0, 0.0)}, {p.id: p.hi})
    for seed in range(50):
        assert p.lo <= perturb(s, a, 100.0, np.random.default_rng(seed)).scalars[p.id] <= p.hi


def test_perturb_leaves_input_untouched():
    s = scene_of("shapes:\nPolygon(ABC)\n")
    a = initialize(s, np.random.default_rng(0))
    before = Assignment(dict(a.points), dict(a.scalars))
    perturb(s, a, 5.0, np.random.default_rng(0))
    assert a == before


def test_perturb_reproducible():
    s = scene_of("shapes:\nPolygon(ABC)\n")
    a = initialize(s, np.random.default_rng(0))
    assert perturb(s, a, 3.0, np.random.default_rng(9)) == perturb(s, a, 3.0, np.random.default_rng(9))


def test_zero_constraints_converges_immediately():
    r = solve(scene_of("shapes:\nPolygon(ABC)\n"))
    assert r.converged and r.final_loss == 0 and r.telemetry.outer_iterations == 0


def test_equilateral_example():
    s = scene_of("shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,60)\nAngle(BCA,60)\n")
    r = solve(s, SolverConfig(seed=42))
    assert r.converged and r.final_loss <= 0.05
    assert all(e.score >= 0.95 for e in r.scores.entries)


def test_unsatisfiable_example():
    s = scene_of("shapes:\nPolygon(ABC)\nlength constraint:\nLengthRatio(AB,AB,Ratio(2,1))\n")
    r = solve(s, SolverConfig(seed=0, **FAST))
    assert not r.converged and r.final_loss == pytest.approx(0.5, abs=1e-12)
    assert r.telemetry.restarts_run == 3


def test_final_loss_recomputed_from_assignment():
    s = scene_of("shapes:\nPolygon(ABCD)\nlength constraint:\nLengthRatio(AB,CD,Ratio(3,1))\n"
                 "angle constraint:\nAngle(ABC,100)\nParallel(AB,CD,0)\n")
    r = solve(s, SolverConfig(seed=5, **FAST))
    _, loss = evaluate(s, r.coordinates, r.degenerate, r.assignment.scalars)
    assert loss.value == r.final_loss


def test_trace_non_increasing():
    s = scene_of("shapes:\nPolygon(ABC)\nlength constraint:\nLengthRatio(AB,AB,Ratio(3,2))\n"
                 "angle constraint:\nAngle(ABC,80)\n")
    r = solve(s, SolverConfig(seed=3, **FAST))
    for tr in r.telemetry.traces:
        assert all(b <= a for a, b in zip(tr.losses, tr.losses[1:]))


def test_determinism_and_jobs():
    s = scene_of("shapes:\nPolygon(ABC)\nlength constraint:\nLengthRatio(AB,AB,Ratio(3,2))\n"
                 "angle constraint:\nAngle(ABC,80)\n")
    cfg = SolverConfig(seed=11, **FAST)
    a, b = solve(s, cfg), solve(s, SolverConfig(seed=11, jobs=3, **FAST))
    assert a.assignment == b.assignment and a.final_loss == b.final_loss
    assert a.telemetry.to_dict() == b.telemetry.to_dict()


def test_time_budget_stops_early():
    s = scene_of("shapes:\nPolygon(ABC)\nlength constraint:\nLengthRatio(AB,AB,Ratio(2,1))\n")
    r = solve(s, SolverConfig(time_budget=0.05))
    assert not r.converged and r.telemetry.outer_iterations < 3000


def test_trace_csv_format():
    s = scene_of("shapes:\nPolygon(ABC)\nangle constraint:\nAngle(ABC,60)\n")
    r = solve(s, SolverConfig(seed=1, **FAST))
    lines = trace_csv(r.telemetry).splitlines()
    assert lines[0] == "restart,iteration,best_loss"
    assert len(lines) == 1 + sum(len(t.losses) for t in r.telemetry.traces)
