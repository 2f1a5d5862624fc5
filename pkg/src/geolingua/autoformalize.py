"""Natural language to GeoLingua through a chat-completion endpoint.

A response is accepted only if it contains a four-key JSON object that parses
and validates.  Failed attempts resend the identical prompt, up to three
times in total.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

from .ast import SECTIONS, FormalProgram
from .grammar import heads_in
from .parser import ParseError, parse_json
from .validate import ValidationReport, validate

MAX_ATTEMPTS = 3
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o-mini"

SCHEMA_LITERAL = '{ "shapes": [], "dependence": [], "length constraint": [], "angle constraint": [] }'


class FormalizeError(RuntimeError):
    pass


class NetworkError(FormalizeError):
    pass


class MissingCredential(FormalizeError):
    pass


class Exhausted(FormalizeError):
    def __init__(self, outcome: "FormalizationOutcome"):
        super().__init__(f"no valid program after {len(outcome.attempts)} attempts")
        self.outcome = outcome


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL
    api_key: str | None = None
    timeout: float = 60.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_env(cls, env=None, **overrides) -> "EndpointConfig":
        env = os.environ if env is None else env
        values = {
            "base_url": env.get("GEOLINGUA_BASE_URL", DEFAULT_BASE_URL),
            "model": env.get("GEOLINGUA_MODEL", DEFAULT_MODEL),
            "api_key": env.get("GEOLINGUA_API_KEY"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class PromptTemplate:
    role_preamble: str
    framework: str
    examples: tuple[tuple[str, dict], ...]
    requirements: str

    @classmethod
    def default(cls, examples=None) -> "PromptTemplate":
        if examples is None:
            examples = load_examples()
        return cls(ROLE, framework_text(), tuple(examples), REQUIREMENTS)


ROLE = (
    "You are an expert in plane geometry and in the GeoLingua formal language. "
    "Your job is to turn a geometry problem statement into a GeoLingua program "
    "that describes how to construct its diagram."
)

REQUIREMENTS = (
    "Use only the statements listed in the framework, each in its own section. "
    "Introduce every point in shapes or dependence before any constraint uses it. "
    "Write point names as single capital letters. Do not add explanations.\n"
    "The final output JSON format is as follows:\n" + SCHEMA_LITERAL
)


def framework_text() -> str:
    """Reference of every statement, generated from the keyword table."""
    lines = ["GeoLingua has four sections. Each lists its statements as `form`: meaning."]
    for section in SECTIONS:
        lines.append("")
        lines.append(f"## {section}")
        for spec in heads_in(section):
            lines.append(f"- `{spec.form}`: {spec.meaning}")
    return "\n".join(lines)


def load_examples(path: str | None = None) -> list[tuple[str, dict]]:
    if path is None:
        text = resources.files("geolingua").joinpath("data/fewshot.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return [(e["natural"], e["formal"]) for e in json.loads(text)["examples"]]


def build_prompt(template: PromptTemplate, natural: str) -> str:
    if not natural.strip():
        raise ValueError("natural-language input is empty")
    parts = ["# Role", template.role_preamble, "", "# Formal language framework", template.framework, ""]
    parts.append("# Examples")
    if not template.examples:
        parts.append("(none)")
    for k, (text, formal) in enumerate(template.examples, 1):
        parts.append(f"Example {k} input: {text}")
        parts.append(f"Example {k} output: {json.dumps(formal, ensure_ascii=False)}")
    parts += ["", "# Requirements", template.requirements, "", "# Input", natural.strip(), ""]
    return "\n".join(parts)


def extract_json(text: str) -> dict | None:
    """First JSON object embedded in ``text``, ignoring prose and fences."""
    decoder = json.JSONDecoder()
    start = text.find("{")
    while start != -1:
        try:
            obj, _ = decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict):
            return obj
        start = text.find("{", start + 1)
    return None


@dataclass
class Attempt:
    raw: str | None
    report: ValidationReport | None = None
    error: str | None = None
    network: bool = False

    @property
    def ok(self) -> bool:
        return self.report is not None and self.report.ok

    def to_dict(self) -> dict:
        return {"raw": self.raw, "ok": self.ok, "error": self.error, "network_error": self.network,
                "report": self.report.to_dict() if self.report else None}


@dataclass
class FormalizationOutcome:
    program: FormalProgram | None
    attempts: list[Attempt] = field(default_factory=list)

    @property
    def succeeded(self) -> bool:
        return self.program is not None

    @property
    def network_only(self) -> bool:
        return bool(self.attempts) and all(a.network for a in self.attempts)

    def raise_for_status(self) -> FormalProgram:
        if self.program is None:
            raise Exhausted(self)
        return self.program

    def to_dict(self) -> dict:
        return {"succeeded": self.succeeded, "attempts": [a.to_dict() for a in self.attempts]}


Client = Callable[[str, EndpointConfig], str]


def http_client(prompt: str, endpoint: EndpointConfig) -> str:
    """POST the prompt to ``{base_url}/chat/completions`` and return the reply text."""
    import httpx

    if not endpoint.api_key:
        raise MissingCredential("GEOLINGUA_API_KEY is not set")
    body = {
        "model": endpoint.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": endpoint.temperature,
    }
    headers = {"Authorization": f"Bearer {endpoint.api_key}"}
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    try:
        resp = httpx.post(url, json=body, headers=headers, timeout=endpoint.timeout)
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]
    except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise NetworkError(f"{type(exc).__name__}: {exc}") from exc


def check_response(raw: str) -> tuple[FormalProgram | None, Attempt]:
    obj = extract_json(raw)
    if obj is None:
        return None, Attempt(raw, error="no JSON object in response")
    try:
        program = parse_json(obj)
    except ParseError as exc:
        return None, Attempt(raw, error=str(exc))
    report = validate(program)
    return (program if report.ok else None), Attempt(raw, report)


def formalize(natural: str, endpoint: EndpointConfig | None = None,
              template: PromptTemplate | None = None, client: Client | None = None) -> FormalizationOutcome:
    """Ask the endpoint up to three times for a valid program.

    Network failures count as failed attempts.  A missing credential aborts
    before any request is made.
    """
    endpoint = endpoint or EndpointConfig.from_env()
    template = template or PromptTemplate.default()
    client = client or http_client
    prompt = build_prompt(template, natural)
    outcome = FormalizationOutcome(None)
    for _ in range(MAX_ATTEMPTS):
        try:
            raw = client(prompt, endpoint)
        except MissingCredential:
            raise
        except NetworkError as exc:
            outcome.attempts.append(Attempt(None, error=str(exc), network=True))
            continue
        program, attempt = check_response(raw)
        outcome.attempts.append(attempt)
        if program is not None:
            outcome.program = program
            break
    return outcome


__all__ = [
    "EndpointConfig", "Exhausted", "FormalizationOutcome", "MissingCredential", "NetworkError",
    "PromptTemplate", "build_prompt", "extract_json", "formalize", "framework_text",
]
