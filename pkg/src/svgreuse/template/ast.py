"""AST for the template program DSL.

A template is a list of parameter declarations, a required data schema,
scale definitions, and an ordered list of render directives whose
attribute values are small s-expression trees.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..ir import ColumnKind

FIXED_PARAMS = ("chart_width", "chart_height", "origin_x", "origin_y")


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple = ()

    def size(self) -> int:
        n = 1
        for a in self.args:
            if isinstance(a, Expr):
                n += a.size()
        return n


def lit(value) -> Expr:
    return Expr("lit", (value,))


def param(name: str) -> Expr:
    return Expr("param", (name,))


def field_ref(column: str) -> Expr:
    return Expr("field", (column,))


def scale_apply(scale_id: str, expr: Expr) -> Expr:
    return Expr("scale", (scale_id, expr))


def op(name: str, *args) -> Expr:
    return Expr(name, tuple(args))


class ParamKind(enum.Enum):
    NUMBER = "number"
    COLOR = "color"
    TEXT = "text"
    CHOICE = "choice"


@dataclass
class ParameterSpec:
    name: str
    kind: ParamKind
    default: object
    range: tuple[float, float, float] | None = None  # min, max, step
    options: list[str] | None = None


class ScaleKind(enum.Enum):
    LINEAR = "linear"
    BAND = "band"
    POINT = "point"
    ORDINAL_COLOR = "colors"


@dataclass
class FieldDomain:
    column: str


@dataclass
class ScaleDef:
    id: str
    kind: ScaleKind
    domain: list[Expr] | FieldDomain
    range: list[Expr]
    band_padding: float = 0.0


@dataclass
class Emit:
    tag: str
    bindings: list[tuple[str, Expr]]


@dataclass
class SetAttr:
    element_id: int
    name: str
    expr: Expr


@dataclass
class Clone:
    element_id: int
    bindings: list[tuple[str, Expr]]


@dataclass
class PathTemplate:
    skeleton: list  # str | Expr segments
    bindings: list[tuple[str, Expr]]


@dataclass
class ForEach:
    body: list


@dataclass
class Slot:
    name: str
    body: list


Directive = Emit | SetAttr | Clone | PathTemplate | ForEach | Slot


@dataclass
class TemplateProgram:
    params: list[ParameterSpec] = field(default_factory=list)
    scales: list[ScaleDef] = field(default_factory=list)
    directives: list = field(default_factory=list)
    required_schema: list[tuple[str, ColumnKind]] = field(default_factory=list)

    def param_map(self) -> dict[str, ParameterSpec]:
        return {p.name: p for p in self.params}

    def scale_map(self) -> dict[str, ScaleDef]:
        return {s.id: s for s in self.scales}

    def default_params(self) -> dict[str, object]:
        return {p.name: p.default for p in self.params}


def walk_exprs(program: TemplateProgram):
    """Yield every expression tree in the program, in document order."""
    for s in program.scales:
        if isinstance(s.domain, list):
            yield from s.domain
        yield from s.range

    def from_directives(directives):
        for d in directives:
            if isinstance(d, (Emit, Clone)):
                for _, e in d.bindings:
                    yield e
            elif isinstance(d, SetAttr):
                yield d.expr
            elif isinstance(d, PathTemplate):
                for seg in d.skeleton:
                    if isinstance(seg, Expr):
                        yield seg
                for _, e in d.bindings:
                    yield e
            elif isinstance(d, (ForEach, Slot)):
                yield from from_directives(d.body)

    yield from from_directives(program.directives)


def subexprs(expr: Expr):
    yield expr
    for a in expr.args:
        if isinstance(a, Expr):
            yield from subexprs(a)
