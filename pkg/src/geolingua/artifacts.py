"""File formats shared by the CLI and the library.

Every document carries ``schema_version`` and a ``kind`` tag.  Writers are
atomic: content goes to a temporary file in the target directory first.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .ast import FormalProgram
from .constraints import ScoreEntry, ScoreVector, frame_from_coordinates
from .parser import parse, serialize
from .render import ArcShape, CircleShape, Diagram
from .scene import Assignment, Scene, compile_program, resolve_dependents

SCHEMA_VERSION = 1


def write_atomic(path: str | os.PathLike, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def diagram_for(scene: Scene, coordinates, scalars=None) -> Diagram:
    """Drawable view of a solved scene."""
    frame = frame_from_coordinates(scene, coordinates, (), scalars)
    circles = [CircleShape(c, float(frame.radius(c)[0])) for c in scene.circles]
    arcs = [ArcShape(a.center, float(frame.radius(a.center)[0]), a.a, a.b) for a in scene.arcs]
    # a sector's circle is shown only as its arc
    sector_centers = {a.center for a in scene.arcs}
    circles = [c for c in circles if c.center not in sector_centers]
    return Diagram(
        points={p: (float(x), float(y)) for p, (x, y) in coordinates.items()},
        segments=list(scene.segments),
        circles=circles,
        arcs=arcs,
        labels=[p for p, show in scene.labels.items() if show],
    )


def solution_document(program: FormalProgram, scene: Scene, result, config) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "solution",
        "program": serialize(program),
        "config": config.to_dict(),
        "converged": result.converged,
        "final_loss": result.final_loss,
        "worst_constraint": str(result.loss.argmax) if result.loss.argmax else None,
        "assignment": result.assignment.to_dict(),
        "coordinates": {k: list(v) for k, v in result.coordinates.items()},
        "scores": result.scores.to_list(),
        "degenerate": sorted(result.degenerate),
        "telemetry": result.telemetry.to_dict(),
        "diagram": diagram_for(scene, result.coordinates, result.assignment.scalars).to_dict(),
    }


class SolutionFile:
    """A solution document re-read from disk."""

    def __init__(self, data: dict):
        if data.get("kind") != "solution" or "schema_version" not in data:
            raise ValueError("not a solution document")
        self.data = data
        self.program = parse(data["program"])
        self.assignment = Assignment.from_dict(data["assignment"])
        self.coordinates = {k: (float(v[0]), float(v[1])) for k, v in data["coordinates"].items()}
        self.diagram = Diagram.from_dict(data["diagram"])

    @classmethod
    def load(cls, path) -> "SolutionFile":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def scene(self) -> Scene:
        return compile_program(self.program)

    def stored_scores(self) -> ScoreVector:
        return ScoreVector(tuple(
            ScoreEntry(e["origin"], e["kind"], e["family"], float(e["score"]), e.get("statement", ""))
            for e in self.data["scores"]))

    def resolved(self):
        """Recompute every point from the stored free values."""
        scene = self.scene()
        fallback = self.coordinates
        return scene, resolve_dependents(scene, self.assignment, fallback)
