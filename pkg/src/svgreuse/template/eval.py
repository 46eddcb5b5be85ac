"""Deterministic template evaluation.

``evaluate`` is a pure function of (program, marked-up SVG, dataset,
params): identical inputs yield byte-identical SVG output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import EvalError, UnknownId
from ..ir import ColumnKind, Dataset
from ..numfmt import format_number
from ..svg.markers import find_slot, is_marker, strip_markers
from ..svg.model import ID_ATTR, SvgDocument, SvgNode
from .ast import (
    Clone,
    Emit,
    Expr,
    FieldDomain,
    ForEach,
    ParamKind,
    PathTemplate,
    ScaleDef,
    ScaleKind,
    SetAttr,
    Slot,
    TemplateProgram,
)

_DOMAIN_EPS = 1e-9


@dataclass
class BuiltScale:
    spec: ScaleDef
    domain: list
    range: list

    def apply(self, value):
        kind = self.spec.kind
        if kind is ScaleKind.LINEAR:
            d0, d1 = self.domain
            r0, r1 = self.range
            span = d1 - d0
            if span <= 0:
                raise EvalError(f"scale {self.spec.id}: linear domain must have min < max")
            v = float(value)
            slack = _DOMAIN_EPS * max(1.0, abs(span))
            if v < d0 - slack or v > d1 + slack:
                raise EvalError(
                    f"scale {self.spec.id}: value {v} outside domain [{d0}, {d1}]"
                )
            return r0 + (v - d0) / span * (r1 - r0)
        if kind in (ScaleKind.BAND, ScaleKind.POINT):
            try:
                i = self.domain.index(value)
            except ValueError:
                raise EvalError(
                    f"scale {self.spec.id}: value {value!r} not in domain"
                ) from None
            r0, r1 = self.range
            n = len(self.domain)
            if kind is ScaleKind.POINT:
                if n == 1:
                    return (r0 + r1) / 2
                return r0 + i * (r1 - r0) / (n - 1)
            step = (r1 - r0) / n
            return r0 + i * step + step * self.spec.band_padding / 2
        # OrdinalColor: cycle the color list over the domain.
        try:
            i = self.domain.index(value)
        except ValueError:
            raise EvalError(f"scale {self.spec.id}: value {value!r} not in domain") from None
        return self.range[i % len(self.range)]

    def bandwidth(self):
        if self.spec.kind is not ScaleKind.BAND:
            raise EvalError(f"scale {self.spec.id} has no bandwidth (not a band scale)")
        r0, r1 = self.range
        step = (r1 - r0) / len(self.domain)
        return step * (1 - self.spec.band_padding)


class _Env:
    def __init__(self, program: TemplateProgram, data: Dataset, params: dict):
        self.program = program
        self.data = data
        self.params = params
        self.row: tuple | None = None
        self.row_index: int | None = None
        self.columns = {name: i for i, (name, _) in enumerate(data.columns)}
        self.scales: dict[str, BuiltScale] = {}
        for spec in program.scales:
            self.scales[spec.id] = self._build_scale(spec)

    def _build_scale(self, spec: ScaleDef) -> BuiltScale:
        if isinstance(spec.domain, FieldDomain):
            col = spec.domain.column
            if col not in self.columns:
                raise EvalError(f"scale {spec.id}: unknown column {col!r}")
            values = []
            for row in self.data.rows:
                v = row[self.columns[col]]
                if v not in values:
                    values.append(v)
            domain = values
        else:
            domain = [self.eval(e) for e in spec.domain]
        range_ = [self.eval(e) for e in spec.range]
        if spec.kind is not ScaleKind.ORDINAL_COLOR:
            for v in range_:
                if not isinstance(v, float) or not math.isfinite(v):
                    raise EvalError(f"scale {spec.id}: range must be finite numbers")
        if spec.kind in (ScaleKind.BAND, ScaleKind.POINT, ScaleKind.ORDINAL_COLOR) and not domain:
            raise EvalError(f"scale {spec.id}: empty domain")
        return BuiltScale(spec, domain, range_)

    def field(self, column: str):
        if self.row is None:
            raise EvalError(f"field {column!r} used outside a row context")
        if column not in self.columns:
            raise EvalError(f"unknown column {column!r}")
        v = self.row[self.columns[column]]
        return float(v) if isinstance(v, (int, float)) else v

    def column_numbers(self, column: str) -> list[float]:
        if column not in self.columns:
            raise EvalError(f"unknown column {column!r}")
        j = self.columns[column]
        return [float(r[j]) for r in self.data.rows]

    def eval(self, e: Expr):
        op = e.op
        a = e.args
        if op == "lit":
            return a[0]
        if op == "param":
            if a[0] not in self.params:
                raise EvalError(f"unknown parameter {a[0]!r}")
            return self.params[a[0]]
        if op == "field":
            return self.field(a[0])
        if op == "scale":
            scale = self.scales.get(a[0])
            if scale is None:
                raise EvalError(f"unknown scale {a[0]!r}")
            return scale.apply(self.eval(a[1]))
        if op == "band-width":
            scale = self.scales.get(a[0])
            if scale is None:
                raise EvalError(f"unknown scale {a[0]!r}")
            return scale.bandwidth()
        if op in ("+", "-", "*", "/"):
            x = self._num(self.eval(a[0]))
            for rest in a[1:]:
                y = self._num(self.eval(rest))
                if op == "+":
                    x += y
                elif op == "-":
                    x -= y
                elif op == "*":
                    x *= y
                else:
                    if y == 0:
                        raise EvalError("division by zero")
                    x /= y
            return x
        if op == "neg":
            return -self._num(self.eval(a[0]))
        if op == "concat":
            return "".join(to_attr_text(self.eval(x)) for x in a)
        if op in ("=", "!=", "<", ">", "<=", ">="):
            x, y = self.eval(a[0]), self.eval(a[1])
            return {
                "=": x == y, "!=": x != y, "<": x < y,
                ">": x > y, "<=": x <= y, ">=": x >= y,
            }[op]
        if op == "if":
            return self.eval(a[1]) if self.eval(a[0]) else self.eval(a[2])
        if op == "cos":
            return math.cos(self._num(self.eval(a[0])))
        if op == "sin":
            return math.sin(self._num(self.eval(a[0])))
        if op == "pi":
            return math.pi
        if op == "min":
            return min(self._num(self.eval(a[0])), self._num(self.eval(a[1])))
        if op == "max":
            return max(self._num(self.eval(a[0])), self._num(self.eval(a[1])))
        if op == "index":
            if self.row_index is None:
                raise EvalError("index used outside a row context")
            return float(self.row_index)
        if op == "count":
            return float(len(self.data.rows))
        if op == "sum":
            return float(sum(self.column_numbers(a[0])))
        if op == "cumsum":
            if self.row_index is None:
                raise EvalError("cumsum used outside a row context")
            return float(sum(self.column_numbers(a[0])[: self.row_index]))
        if op == "rows":
            sep = to_attr_text(self.eval(a[0]))
            parts = []
            saved = (self.row, self.row_index)
            for i, row in enumerate(self.data.rows):
                self.row, self.row_index = row, i
                parts.append(to_attr_text(self.eval(a[1])))
            self.row, self.row_index = saved
            return sep.join(parts)
        if op in ("first", "last"):
            if not self.data.rows:
                raise EvalError(f"{op} used on an empty dataset")
            saved = (self.row, self.row_index)
            i = 0 if op == "first" else len(self.data.rows) - 1
            self.row, self.row_index = self.data.rows[i], i
            try:
                return self.eval(a[0])
            finally:
                self.row, self.row_index = saved
        raise EvalError(f"unknown operator {op!r}")

    @staticmethod
    def _num(v):
        if isinstance(v, bool):
            return 1.0 if v else 0.0
        if not isinstance(v, (int, float)):
            raise EvalError(f"expected a number, got {v!r}")
        return float(v)


def to_attr_text(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, float)):
        return format_number(float(value))
    return str(value)


def apply_scale(spec: ScaleDef, value, data: Dataset | None = None,
                params: dict | None = None):
    """Apply one scale outside a full evaluation (testing / inspection)."""
    program = TemplateProgram(scales=[spec])
    env = _Env(program, data or Dataset([], []), params or {})
    return env.scales[spec.id].apply(value)


def scale_bandwidth(spec: ScaleDef, data: Dataset | None = None,
                    params: dict | None = None) -> float:
    program = TemplateProgram(scales=[spec])
    env = _Env(program, data or Dataset([], []), params or {})
    return env.scales[spec.id].bandwidth()


def check_schema(program: TemplateProgram, data: Dataset):
    have = {name: kind for name, kind in data.columns}
    for name, kind in program.required_schema:
        if name not in have:
            raise EvalError(f"dataset is missing required column {name!r}")
        if have[name] is not kind:
            raise EvalError(
                f"column {name!r} has kind {have[name].value}, expected {kind.value}"
            )


def complete_params(program: TemplateProgram, params: dict | None) -> dict:
    """Fill gaps with declared defaults; reject unknown names and bad kinds."""
    out = program.default_params()
    for name, value in (params or {}).items():
        if name not in out:
            raise EvalError(f"unknown parameter {name!r}")
        spec = program.param_map()[name]
        if spec.kind is ParamKind.NUMBER:
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise EvalError(f"parameter {name!r} must be a number") from None
            if spec.range is not None and not (spec.range[0] <= value <= spec.range[1]):
                raise EvalError(f"parameter {name!r}={value} outside its range")
        else:
            value = str(value)
            if spec.kind is ParamKind.CHOICE and value not in (spec.options or []):
                raise EvalError(f"parameter {name!r}={value!r} not an allowed option")
        out[name] = value
    return out


def evaluate(program: TemplateProgram, marked: SvgDocument, data: Dataset,
             params: dict | None = None) -> SvgDocument:
    """Run the program against the marked-up reference and a dataset."""
    check_schema(program, data)
    full_params = complete_params(program, params)
    try:
        env = _Env(program, data, full_params)
    except EvalError as exc:
        raise EvalError(str(exc), directive_index=0) from exc
    work = marked.copy()
    for index, directive in enumerate(program.directives):
        try:
            _execute(directive, env, work, marked, work.root)
        except (EvalError, UnknownId) as exc:
            raise EvalError(str(exc), directive_index=index) from exc
    return strip_markers(work)


def _execute(directive, env: _Env, work: SvgDocument, source: SvgDocument,
             target: SvgNode):
    if isinstance(directive, Slot):
        slot = find_slot(work, directive.name)
        if slot is None:
            raise EvalError(f"no slot named {directive.name!r} in the markup")
        slot.children = []
        for d in directive.body:
            _execute(d, env, work, source, slot)
    elif isinstance(directive, ForEach):
        saved = (env.row, env.row_index)
        for i, row in enumerate(env.data.rows):
            env.row, env.row_index = row, i
            for d in directive.body:
                _execute(d, env, work, source, target)
        env.row, env.row_index = saved
    elif isinstance(directive, Emit):
        target.children.append(_build_node(directive.tag, directive.bindings, env))
    elif isinstance(directive, PathTemplate):
        d_value = "".join(
            to_attr_text(env.eval(seg)) if isinstance(seg, Expr) else seg
            for seg in directive.skeleton
        )
        node = _build_node("path", directive.bindings, env)
        node.attrs.insert(0, ("d", d_value))
        target.children.append(node)
    elif isinstance(directive, Clone):
        original = source.find_by_id(directive.element_id)
        copy = original.copy()
        for n in copy.iter_elements():
            n.remove(ID_ATTR)
        for name, expr in directive.bindings:
            copy.set(name, to_attr_text(env.eval(expr)))
        target.children.append(copy)
    elif isinstance(directive, SetAttr):
        node = work.find_by_id(directive.element_id)
        node.set(directive.name, to_attr_text(env.eval(directive.expr)))
    else:
        raise EvalError(f"unknown directive {directive!r}")


def _build_node(tag: str, bindings, env: _Env) -> SvgNode:
    node = SvgNode(tag)
    for name, expr in bindings:
        if name == "text":
            node.text = to_attr_text(env.eval(expr))
        else:
            node.attrs.append((name, to_attr_text(env.eval(expr))))
    return node
