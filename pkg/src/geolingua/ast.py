"""Syntax tree for GeoLingua programs.

All nodes are frozen dataclasses so programs compare structurally and can be
shared between threads.  Source positions are carried for diagnostics but are
excluded from equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

SECTIONS = ("shapes", "dependence", "length constraint", "angle constraint")
SECTION_ATTRS = {
    "shapes": "shapes",
    "dependence": "dependence",
    "length constraint": "length_constraints",
    "angle constraint": "angle_constraints",
}

POINT_RE = re.compile(r"[A-Z]'?")
ENTITY_RE = re.compile(r"(?:[A-Z]'?)+")


def split_points(text: str) -> tuple[str, ...]:
    """Split an entity name such as ``A'BC`` into point names."""
    return tuple(POINT_RE.findall(text))


@dataclass(frozen=True)
class Name:
    """A point, segment, angle or polygon name (concatenated point names)."""

    text: str

    @property
    def points(self) -> tuple[str, ...]:
        return split_points(self.text)


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Ratio:
    first: float
    second: float


@dataclass(frozen=True)
class Relation:
    op: str  # one of "=", ">", ">=", "<", "<="


@dataclass(frozen=True)
class Word:
    """Lower-case keyword argument: trig function names and arc types."""

    text: str


@dataclass(frozen=True)
class Term:
    """``coef * name`` or, when ``name`` is None, the constant ``coef``."""

    coef: float
    name: str | None = None


@dataclass(frozen=True)
class Expression:
    terms: tuple[Term, ...]

    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms if t.name is not None)


Argument = Union[Name, Number, Ratio, Relation, Word, Expression]


@dataclass(frozen=True)
class Statement:
    head: str
    args: tuple[Argument, ...]
    line: int | None = field(default=None, compare=False)
    span: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Origin:
    """Where a statement lives inside a program."""

    section: str
    index: int

    def __str__(self) -> str:
        return f"{self.section}[{self.index}]"


@dataclass(frozen=True)
class FormalProgram:
    shapes: tuple[Statement, ...] = ()
    dependence: tuple[Statement, ...] = ()
    length_constraints: tuple[Statement, ...] = ()
    angle_constraints: tuple[Statement, ...] = ()
    source_text: str | None = field(default=None, compare=False)

    def section(self, name: str) -> tuple[Statement, ...]:
        return getattr(self, SECTION_ATTRS[name])

    def iter_statements(self) -> Iterator[tuple[Origin, Statement]]:
        """Yield statements in processing order: section by section."""
        for name in SECTIONS:
            for i, stmt in enumerate(self.section(name)):
                yield Origin(name, i), stmt

    def statement(self, origin: Origin) -> Statement:
        return self.section(origin.section)[origin.index]

    def __len__(self) -> int:
        return sum(len(self.section(s)) for s in SECTIONS)
