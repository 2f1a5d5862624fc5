"""Monte Carlo coordinate solver.

Each outer iteration draws ``inner_iterations`` independent perturbations of
the current state, resolves every candidate's dependent points, and keeps the
best candidate only if it strictly lowers the loss.  Candidates are scored as
one numpy batch, which is what makes the default budget practical.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import Loss, ScoreVector, batch_loss, score_matrix, score_vector
from .scene import CANVAS_SPAN, Assignment, Scene, resolve_batch

CENTER = CANVAS_SPAN / 2
RING_RADIUS = 30.0


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.05
    inner_iterations: int = 1000
    outer_iterations: int = 1000
    restarts: int = 3
    sigma_initial: float = 0.10
    sigma_final: float = 0.005
    seed: int = 0
    time_budget: float | None = None
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if min(self.inner_iterations, self.outer_iterations, self.restarts, self.jobs) < 1:
            raise ValueError("iteration counts, restarts and jobs must be at least 1")
        if not 0 < self.sigma_final <= self.sigma_initial:
            raise ValueError("need 0 < sigma_final <= sigma_initial")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget must be positive")

    def sigma(self, t: int) -> float:
        """Perturbation scale in canvas units at outer iteration ``t``."""
        T = self.outer_iterations
        frac = t / (T - 1) if T > 1 else 0.0
        return (self.sigma_initial + (self.sigma_final - self.sigma_initial) * frac) * CANVAS_SPAN

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "inner_iterations": self.inner_iterations,
                "outer_iterations": self.outer_iterations, "restarts": self.restarts,
                "sigma_initial": self.sigma_initial, "sigma_final": self.sigma_final,
                "seed": self.seed, "time_budget": self.time_budget}


@dataclass
class RestartTrace:
    restart: int
    losses: list[float]
    evaluations: int
    converged: bool


@dataclass
class Telemetry:
    outer_iterations: int
    evaluations: int
    wall_time: float
    restarts_run: int
    best_restart: int
    traces: list[RestartTrace] = field(default_factory=list)

    @property
    def loss_trace(self) -> list[float]:
        return self.traces[self.best_restart].losses if self.traces else []

    def to_dict(self) -> dict:
        """Counts only; wall time is kept out so solutions stay reproducible."""
        return {"outer_iterations": self.outer_iterations, "evaluations": self.evaluations,
                "restarts_run": self.restarts_run, "best_restart": self.best_restart,
                "loss_trace": self.loss_trace}


@dataclass
class SolveResult:
    assignment: Assignment
    coordinates: dict[str, tuple[float, float]]
    degenerate: frozenset[str]
    final_loss: float
    loss: Loss
    scores: ScoreVector
    converged: bool
    telemetry: Telemetry

    def trace_csv(self) -> str:
        return trace_csv(self.telemetry)


# -- initialisation and perturbation -----------------------------------------------

def initialize(scene: Scene, rng: np.random.Generator) -> Assignment:
    """Starting values: template anchors on a jittered ring, the rest uniform."""
    points, scalars = {}, {}
    rotations: dict = {}
    for p in scene.free:
        hint = p.init
        if p.kind == "point":
            if hint[0] == "ring":
                _, group, k, n = hint
                if group not in rotations:
                    rotations[group] = rng.uniform(0.0, 2 * np.pi)
                theta = rotations[group] + 2 * np.pi * k / n + rng.normal(0.0, 0.15)
                points[p.id] = (CENTER + RING_RADIUS * np.cos(theta), CENTER + RING_RADIUS * np.sin(theta))
            elif hint[0] == "center":
                points[p.id] = tuple(CENTER + rng.normal(0.0, 3.0, size=2))
            else:
                points[p.id] = tuple(rng.uniform(0.0, CANVAS_SPAN, size=2))
            points[p.id] = (float(points[p.id][0]), float(points[p.id][1]))
        elif hint[0] == "ring":
            _, group, k, n = hint
            if group not in rotations:
                rotations[group] = rng.uniform(0.0, 360.0)
            v = rotations[group] + 360.0 * k / n + rng.normal(0.0, 8.0)
            scalars[p.id] = _fit(p, v)
        else:
            scalars[p.id] = float(rng.uniform(p.lo, p.hi))
    return Assignment(points, scalars)


def _fit(p, v):
    if p.wrap:
        return np.mod(v, p.hi - p.lo) + p.lo
    return np.clip(v, p.lo, p.hi)


def _noise_scale(scene: Scene, sigma: float) -> np.ndarray:
    scale = []
    for p in scene.free:
        if p.kind == "point":
            scale += [sigma, sigma]
        else:
            scale.append(sigma / CANVAS_SPAN * p.width)
    return np.asarray(scale)


def _perturb_batch(scene: Scene, base: np.ndarray, sigma: float, rng: np.random.Generator,
                   count: int) -> np.ndarray:
    X = base + rng.standard_normal((count, base.size)) * _noise_scale(scene, sigma)
    for p, col in scene.layout():
        if p.kind == "scalar":
            X[:, col] = _fit(p, X[:, col])
    return X


def perturb(scene: Scene, assignment: Assignment, sigma: float, rng: np.random.Generator) -> Assignment:
    """Gaussian move of every free parameter; the input is left untouched."""
    base = assignment.pack(scene)
    return Assignment.unpack(scene, _perturb_batch(scene, base, sigma, rng, 1)[0])


# -- search ----------------------------------------------------------------------------

@dataclass
class _RestartOutcome:
    vector: np.ndarray
    fallback: dict
    loss: float
    trace: RestartTrace


def _losses(scene: Scene, X: np.ndarray, fallback):
    frame = resolve_batch(scene, X, fallback)
    scores, _ = score_matrix(scene, frame)
    return batch_loss(scores), frame


def _run_restart(scene: Scene, config: SolverConfig, r: int, deadline: float | None) -> _RestartOutcome:
    rng = np.random.default_rng([config.seed, r])
    vec = initialize(scene, rng).pack(scene)
    losses, frame = _losses(scene, vec[None, :], None)
    loss, fallback = float(losses[0]), frame.row(0)
    trace, evaluations = [loss], 1
    if scene.dimension and scene.constraints:
        t = 0
        while t < config.outer_iterations and loss > config.alpha:
            X = _perturb_batch(scene, vec, config.sigma(t), rng, config.inner_iterations)
            cand, frame = _losses(scene, X, fallback)
            evaluations += len(cand)
            k = int(np.argmin(cand))
            if cand[k] < loss:
                vec, loss, fallback = X[k].copy(), float(cand[k]), frame.row(k)
            t += 1
            trace.append(loss)
            if deadline is not None and time.perf_counter() >= deadline:
                break
    return _RestartOutcome(vec, fallback, loss,
                           RestartTrace(r, trace, evaluations, loss <= config.alpha))


def solve(scene: Scene, config: SolverConfig | None = None) -> SolveResult:
    """Run up to ``config.restarts`` restarts and return the best one.

    Restarts stop at the first that converges.  With ``jobs > 1`` they run
    concurrently and anything after the first converged restart is dropped,
    so the result never depends on the thread count.
    """
    config = config or SolverConfig()
    start = time.perf_counter()
    deadline = start + config.time_budget if config.time_budget else None
    outcomes: list[_RestartOutcome] = []
    if config.jobs == 1 or config.restarts == 1:
        for r in range(config.restarts):
            outcomes.append(_run_restart(scene, config, r, deadline))
            if outcomes[-1].trace.converged:
                break
            if deadline is not None and time.perf_counter() >= deadline:
                break
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_run_restart, scene, config, r, deadline) for r in range(config.restarts)]
            for fut in futures:
                outcomes.append(fut.result())
                if outcomes[-1].trace.converged:
                    break
            for fut in futures:
                fut.cancel()
    best = min(range(len(outcomes)), key=lambda i: (outcomes[i].loss, i))
    chosen = outcomes[best]
    assignment = Assignment.unpack(scene, chosen.vector)
    frame = resolve_batch(scene, chosen.vector[None, :], chosen.fallback)
    scores = score_vector(scene, frame)
    loss = Loss.of(scores)
    traces = [o.trace for o in outcomes]
    telemetry = Telemetry(
        outer_iterations=sum(len(tr.losses) - 1 for tr in traces),
        evaluations=sum(tr.evaluations for tr in traces),
        wall_time=time.perf_counter() - start,
        restarts_run=len(outcomes),
        best_restart=best,
        traces=traces,
    )
    return SolveResult(
        assignment=assignment,
        coordinates=frame.row(0),
        degenerate=frame.degenerate(0),
        final_loss=loss.value,
        loss=loss,
        scores=scores,
        converged=loss.value <= config.alpha,
        telemetry=telemetry,
    )


def trace_csv(telemetry: Telemetry) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["restart", "iteration", "best_loss"])
    for tr in telemetry.traces:
        for i, value in enumerate(tr.losses):
            writer.writerow([tr.restart, i, repr(float(value))])
    return buf.getvalue()


def with_overrides(config: SolverConfig, **changes) -> SolverConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})
