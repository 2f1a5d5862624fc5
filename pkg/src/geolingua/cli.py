"""Command-line interface: formalize, validate, solve, eval, render and run.

Exit codes:
  0 success            1 file I/O error           2 formalization exhausted
  3 network/credential 4 parse/validate/compile    5 not converged (--strict)
  6 empty diagram      64 usage error
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .artifacts import SCHEMA_VERSION, SolutionFile, dump_json, solution_document, write_atomic
from .autoformalize import EndpointConfig, MissingCredential, PromptTemplate, formalize, load_examples
from .constraints import evaluate
from .metrics import build_report
from .parser import ParseError, parse, serialize_json
from .render import Diagram, EmptyDiagram, render_svg
from .scene import CompileError, compile_program
from .solver import SolverConfig, solve, trace_csv
from .validate import validate

log = logging.getLogger("geolingua")

EXIT_OK = 0
EXIT_IO = 1
EXIT_EXHAUSTED = 2
EXIT_NETWORK = 3
EXIT_INVALID = 4
EXIT_NOT_CONVERGED = 5
EXIT_EMPTY = 6
EXIT_USAGE = 64

DEFAULTS = {"alpha": 0.05, "inner": 1000, "outer": 1000, "restarts": 3, "seed": 0,
            "jobs": 1, "time_budget": None}
ENV_KEYS = {"alpha": ("GEOLINGUA_ALPHA", float), "inner": ("GEOLINGUA_INNER", int),
            "outer": ("GEOLINGUA_OUTER", int), "restarts": ("GEOLINGUA_RESTARTS", int),
            "seed": ("GEOLINGUA_SEED", int)}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- configuration ---------------------------------------------------------------

def resolve_config(args, env=None) -> tuple[SolverConfig, dict]:
    """Merge defaults < config file < environment < flags."""
    env = os.environ if env is None else env
    values = dict(DEFAULTS)
    sources = {k: "default" for k in values}
    if getattr(args, "config", None):
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_USAGE, f"config {args.config} is not valid JSON: {exc}") from exc
        for key in values:
            if key in data:
                values[key], sources[key] = data[key], "file"
    for key, (var, cast) in ENV_KEYS.items():
        if env.get(var):
            try:
                values[key], sources[key] = cast(env[var]), "env"
            except ValueError as exc:
                raise CliError(EXIT_USAGE, f"{var}: {exc}") from exc
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key], sources[key] = flag, "flag"
    try:
        config = SolverConfig(alpha=float(values["alpha"]), inner_iterations=int(values["inner"]),
                              outer_iterations=int(values["outer"]), restarts=int(values["restarts"]),
                              seed=int(values["seed"]), jobs=int(values["jobs"]),
                              time_budget=values["time_budget"])
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"invalid solver configuration: {exc}") from exc
    overrides = {k: values[k] for k, src in sources.items() if src != "default"}
    return config, overrides


# -- helpers -----------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _write(path: str | None, data: str | bytes) -> None:
    if path in (None, "-"):
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        sys.stdout.flush()
        return
    try:
        write_atomic(path, data)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from exc


def load_program(path: str):
    """Parse, validate and compile; any failure is exit code 4."""
    text = _read(path)
    try:
        program = parse(text)
    except ParseError as exc:
        raise CliError(EXIT_INVALID, f"{path}: {exc}") from exc
    report = validate(program)
    for d in report.diagnostics:
        log.warning("%s: %s", path, d)
    if not report.ok:
        raise CliError(EXIT_INVALID, f"{path}: program failed validation")
    try:
        scene = compile_program(program)
    except CompileError as exc:
        raise CliError(EXIT_INVALID, f"{path}: {exc}") from exc
    return program, scene


def _load_solution(path: str) -> SolutionFile:
    try:
        return SolutionFile(json.loads(_read(path)))
    except (ValueError, KeyError, TypeError, ParseError) as exc:
        raise CliError(EXIT_INVALID, f"{path}: not a valid solution file: {exc}") from exc


def _formalize(text: str, args):
    endpoint = EndpointConfig.from_env(base_url=args.base_url, model=args.model, timeout=args.timeout)
    examples = load_examples(args.fewshot) if args.fewshot else None
    try:
        outcome = formalize(text, endpoint, PromptTemplate.default(examples))
    except MissingCredential as exc:
        raise CliError(EXIT_NETWORK, str(exc)) from exc
    return outcome


def _outcome_exit(outcome) -> CliError:
    if outcome.network_only:
        return CliError(EXIT_NETWORK, "endpoint unreachable on every attempt: " + outcome.attempts[-1].error)
    return CliError(EXIT_EXHAUSTED, f"no valid program after {len(outcome.attempts)} attempts")


# -- subcommands -----------------------------------------------------------------

def cmd_formalize(args) -> int:
    outcome = _formalize(_read(args.input), args)
    if args.audit:
        _write(args.audit, dump_json({"schema_version": SCHEMA_VERSION, "kind": "audit", **outcome.to_dict()}))
    if not outcome.succeeded:
        raise _outcome_exit(outcome)
    _write(args.output, serialize_json(outcome.program) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        program = parse(_read(args.input))
    except ParseError as exc:
        raise CliError(EXIT_INVALID, f"{args.input}: {exc}") from exc
    report = validate(program)
    _write(None, dump_json({"schema_version": SCHEMA_VERSION, "kind": "validation", **report.to_dict()}))
    return EXIT_OK if report.ok else EXIT_INVALID


def _solve(program, scene, config):
    result = solve(scene, config)
    log.info("loss %.6f converged=%s after %d outer iterations", result.final_loss,
             result.converged, result.telemetry.outer_iterations)
    return result, solution_document(program, scene, result, config)


def cmd_solve(args) -> int:
    program, scene = load_program(args.input)
    config, _ = resolve_config(args)
    result, doc = _solve(program, scene, config)
    _write(args.output, dump_json(doc))
    if args.trace:
        _write(args.trace, trace_csv(result.telemetry))
    if args.strict and not result.converged:
        raise CliError(EXIT_NOT_CONVERGED, f"not converged: loss {result.final_loss:.6f} > {config.alpha}")
    return EXIT_OK


def cmd_render(args) -> int:
    sol = _load_solution(args.input)
    try:
        svg = render_svg(sol.diagram)
    except EmptyDiagram as exc:
        raise CliError(EXIT_EMPTY, str(exc)) from exc
    _write(args.output, svg)
    return EXIT_OK


def _eval_document(scene, sol: SolutionFile, alpha: float) -> dict:
    res = sol.resolved()[1]
    scores, _ = evaluate(scene, res.coordinates, res.degenerate, sol.assignment.scalars)
    return build_report(scores, alpha).to_dict() | {"kind": "report"}


def cmd_eval(args) -> int:
    _, scene = load_program(args.program)
    sol = _load_solution(args.solution)
    if len(sol.data["scores"]) != len(scene.constraints):
        raise CliError(EXIT_INVALID, "solution does not belong to this program")
    alpha = args.alpha if args.alpha is not None else sol.data["config"]["alpha"]
    _write(args.output, dump_json(_eval_document(scene, sol, alpha)))
    return EXIT_OK


def cmd_run(args) -> int:
    out = Path(args.out)
    manifest = {"schema_version": SCHEMA_VERSION, "kind": "manifest", "input": str(args.input),
                "output_dir": str(out), "stages": [], "exit_status": None}
    status = EXIT_OK
    try:
        config, overrides = resolve_config(args)
        manifest["config_overrides"] = overrides
        manifest["seed"] = config.seed

        def stage(name, fn):
            t0 = time.perf_counter()
            try:
                return fn()
            finally:
                manifest["stages"].append({"stage": name, "seconds": time.perf_counter() - t0})

        natural = args.natural or Path(args.input).suffix.lower() not in (".geo", ".json")
        program_path = args.input
        if natural:
            outcome = stage("formalize", lambda: _formalize(_read(args.input), args))
            _write(out / "audit.json", dump_json({"schema_version": SCHEMA_VERSION, "kind": "audit",
                                                  **outcome.to_dict()}))
            if not outcome.succeeded:
                raise _outcome_exit(outcome)
            program_path = str(out / "program.json")
            _write(program_path, serialize_json(outcome.program) + "\n")
        program, scene = stage("compile", lambda: load_program(program_path))
        result, doc = stage("solve", lambda: _solve(program, scene, config))
        _write(out / "solution.json", dump_json(doc))
        _write(out / "trace.csv", trace_csv(result.telemetry))
        sol = SolutionFile(doc)
        report = stage("eval", lambda: _eval_document(scene, sol, config.alpha))
        _write(out / "report.json", dump_json(report))

        def draw():
            try:
                return render_svg(Diagram.from_dict(doc["diagram"]))
            except EmptyDiagram as exc:
                raise CliError(EXIT_EMPTY, str(exc)) from exc

        _write(out / "diagram.svg", stage("render", draw))
        if args.strict and not result.converged:
            raise CliError(EXIT_NOT_CONVERGED, f"not converged: loss {result.final_loss:.6f}")
    except CliError as exc:
        status = exc.code
        manifest["error"] = str(exc)
        raise
    except Exception as exc:
        status = EXIT_IO
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        manifest["exit_status"] = status
        try:
            write_atomic(out / "manifest.json", dump_json(manifest))
        except OSError as exc:
            log.error("cannot write manifest: %s", exc)
    return status


# -- argument parsing --------------------------------------------------------------

def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="loss tolerance (default 0.05)")
    p.add_argument("--inner", type=int, help="candidates per outer iteration (default 1000)")
    p.add_argument("--outer", type=int, help="outer iterations per restart (default 1000)")
    p.add_argument("--restarts", type=int, help="independent restarts (default 3)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--jobs", type=int, help="threads for restarts (default 1)")
    p.add_argument("--time-budget", dest="time_budget", type=float, help="wall-clock cap in seconds")
    p.add_argument("--config", help="JSON file with solver settings")
    p.add_argument("--strict", action="store_true", help="exit 5 when the solver does not converge")


def _endpoint_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base-url", dest="base_url", help="chat-completion base URL")
    p.add_argument("--model", help="model identifier")
    p.add_argument("--timeout", type=float, help="request timeout in seconds")
    p.add_argument("--fewshot", help="JSON file with replacement examples")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geolingua", description="GeoLingua diagram toolchain",
                     formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__.split("\n", 1)[1])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("formalize", help="natural language to a program JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="program JSON path (default stdout)")
    p.add_argument("--audit", help="write every attempt to this JSON file")
    _endpoint_flags(p)
    p.set_defaults(func=cmd_formalize)

    p = sub.add_parser("validate", help="check a program and print diagnostics")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve a program for coordinates")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="solution JSON path (default stdout)")
    p.add_argument("--trace", help="write the loss trace as CSV")
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("render", help="draw a solution as SVG")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="SVG path (default stdout)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score a solution against its program")
    p.add_argument("program")
    p.add_argument("solution")
    p.add_argument("-o", "--output", help="report JSON path (default stdout)")
    p.add_argument("--alpha", type=float, help="threshold for the unsatisfied list")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline into an output directory")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--natural", action="store_true", help="treat the input as natural language")
    _solver_flags(p)
    _endpoint_flags(p)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"geolingua: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"geolingua: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
