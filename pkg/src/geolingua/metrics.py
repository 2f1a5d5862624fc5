"""Line consistency (LCI) and angle deviation (ADI) indices.

Both are one minus the mean score of their constraint family.  A family with
no constraints has no index (``None``), which keeps constraint-free scenes
from looking perfect.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .constraints import ScoreVector
from .scene import ANGLE, LINE, Scene

SCHEMA_VERSION = 1


def _family(scores: ScoreVector, family: str) -> list[float]:
    return [e.score for e in scores.entries if e.family == family]


def _index(values: list[float]) -> float | None:
    if not values:
        return None
    return 1.0 - sum(values) / len(values)


def compute_lci(scores: ScoreVector) -> float | None:
    return _index(_family(scores, LINE))


def compute_adi(scores: ScoreVector) -> float | None:
    return _index(_family(scores, ANGLE))


@dataclass(frozen=True)
class EvalReport:
    lci: float | None
    adi: float | None
    n_line: int
    n_angle: int
    per_constraint: ScoreVector
    unsatisfied: tuple[str, ...]

    @property
    def average(self) -> float | None:
        if self.lci is None or self.adi is None:
            return None
        return (self.lci + self.adi) / 2

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "lci": self.lci,
            "adi": self.adi,
            "avg": self.average,
            "n_line": self.n_line,
            "n_angle": self.n_angle,
            "per_constraint": self.per_constraint.to_list(),
            "unsatisfied": list(self.unsatisfied),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def build_report(scores: ScoreVector, alpha: float = 0.05) -> EvalReport:
    failing = [e for e in scores.entries if e.score < 1.0 - alpha]
    failing.sort(key=lambda e: e.score)
    return EvalReport(
        lci=compute_lci(scores),
        adi=compute_adi(scores),
        n_line=len(_family(scores, LINE)),
        n_angle=len(_family(scores, ANGLE)),
        per_constraint=scores,
        unsatisfied=tuple(str(e.origin) for e in failing),
    )


def report(scene: Scene, solve_result, alpha: float = 0.05) -> EvalReport:
    """Package the solution's scores; ``scene`` must be the one solved."""
    if len(solve_result.scores) != len(scene.constraints):
        raise ValueError("solve result does not belong to this scene")
    return build_report(solve_result.scores, alpha)
