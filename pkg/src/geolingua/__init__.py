"""GeoLingua: formal geometry descriptions to solved, rendered diagrams."""

__version__ = "0.1.0"

from .ast import FormalProgram, Origin, Statement
from .autoformalize import EndpointConfig, Exhausted, FormalizationOutcome, PromptTemplate, build_prompt, formalize
from .constraints import (
    Loss, ScoreVector, angle_at, evaluate, score_angle_ratio, score_angle_relation, score_angle_value,
    score_length_ratio, score_length_relation, segment_length,
)
from .metrics import EvalReport, compute_adi, compute_lci, report
from .parser import parse, parse_json, parse_text, serialize
from .render import CanvasSpec, Diagram, EmptyDiagram, adaptive_canvas, render_svg
from .scene import Assignment, Scene, compile_program, resolve_dependents, topo_order
from .solver import SolveResult, SolverConfig, initialize, perturb, solve
from .validate import ValidationReport, validate

compile = compile_program  # noqa: A001

__all__ = [
    "Assignment", "CanvasSpec", "Diagram", "EmptyDiagram", "EndpointConfig", "EvalReport", "Exhausted",
    "FormalProgram", "FormalizationOutcome", "Loss", "Origin", "PromptTemplate", "Scene", "ScoreVector",
    "SolveResult", "SolverConfig", "Statement", "ValidationReport", "adaptive_canvas", "angle_at",
    "build_prompt", "compile", "compile_program", "compute_adi", "compute_lci", "evaluate", "formalize",
    "initialize", "parse", "parse_json", "parse_text", "perturb", "render_svg", "report",
    "resolve_dependents", "score_angle_ratio", "score_angle_relation", "score_angle_value",
    "score_length_ratio", "score_length_relation", "segment_length", "serialize", "solve",
    "topo_order", "validate",
]
