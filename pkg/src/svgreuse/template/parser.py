"""Line-oriented parser and canonical printer for template source (.dwt).

Each declaration sits on one line; block directives (slot / foreach /
emit / clone / path) end with a bare ``end``. Attribute values are
s-expressions; bare numbers and quoted strings are literals.
"""

from __future__ import annotations

import re

from ..errors import DslSyntaxError, DuplicateParam, UnknownDirective
from ..ir import ColumnKind
from ..numfmt import format_number
from .ast import (
    Clone,
    Emit,
    Expr,
    FieldDomain,
    ForEach,
    ParameterSpec,
    ParamKind,
    PathTemplate,
    ScaleDef,
    ScaleKind,
    SetAttr,
    Slot,
    TemplateProgram,
    lit,
)

_NUMBER_RE = re.compile(r"[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?$")

# Ops taking a bare name as the first argument.
_NAME_ARG_OPS = {"param", "field", "scale", "band-width", "sum", "cumsum"}
# Ops with no arguments.
_NULLARY_OPS = {"pi", "index", "count"}
_KNOWN_OPS = _NAME_ARG_OPS | _NULLARY_OPS | {
    "+", "-", "*", "/", "neg", "concat", "=", "!=", "<", ">", "<=", ">=",
    "if", "cos", "sin", "min", "max", "rows", "first", "last",
}


def tokenize(text: str, line_no: int) -> list[str]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "#":
            break
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    buf.append(text[j + 1])
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise DslSyntaxError("unterminated string", line=line_no)
            tokens.append('"' + "".join(buf))
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"#':
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


class _TokenStream:
    def __init__(self, tokens, line_no):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise DslSyntaxError("unexpected end of line", line=self.line_no)
        self.pos += 1
        return tok

    @property
    def exhausted(self):
        return self.pos >= len(self.tokens)


def _read_expr(ts: _TokenStream) -> Expr:
    tok = ts.next()
    if tok == "(":
        op_name = ts.next()
        if op_name not in _KNOWN_OPS:
            raise DslSyntaxError(f"unknown operator {op_name!r}", line=ts.line_no)
        args: list = []
        if op_name in _NAME_ARG_OPS:
            args.append(ts.next())
        while ts.peek() != ")":
            if ts.peek() is None:
                raise DslSyntaxError("missing ')'", line=ts.line_no)
            args.append(_read_expr(ts))
        ts.next()  # consume ')'
        return Expr(op_name, tuple(args))
    if tok == ")":
        raise DslSyntaxError("unexpected ')'", line=ts.line_no)
    if tok.startswith('"'):
        return lit(tok[1:])
    if _NUMBER_RE.match(tok):
        return lit(float(tok))
    raise DslSyntaxError(f"unexpected token {tok!r} (names must be quoted)", line=ts.line_no)


def _read_value(ts: _TokenStream):
    """A bare literal for declaration lines: number, quoted string, or name."""
    tok = ts.next()
    if tok.startswith('"'):
        return tok[1:]
    if _NUMBER_RE.match(tok):
        return float(tok)
    return tok


_HOLE_RE = re.compile(r"\{([^{}]*)\}")


def parse_skeleton(text: str, line_no: int) -> list:
    """Split a path skeleton string into literal and expression segments."""
    segments: list = []
    pos = 0
    for m in _HOLE_RE.finditer(text):
        if m.start() > pos:
            segments.append(text[pos : m.start()])
        ts = _TokenStream(tokenize(m.group(1), line_no), line_no)
        expr = _read_expr(ts)
        if not ts.exhausted:
            raise DslSyntaxError("extra tokens in skeleton hole", line=line_no)
        segments.append(expr)
        pos = m.end()
    if pos < len(text):
        segments.append(text[pos:])
    return segments


def parse_program(text: str) -> TemplateProgram:
    program = TemplateProgram()
    seen_params: set[str] = set()
    lines = text.splitlines()
    # Stack of open directive bodies; top of stack receives new directives.
    body_stack: list[list] = [program.directives]
    block_stack: list = []

    i = 0
    while i < len(lines):
        line_no = i + 1
        tokens = tokenize(lines[i], line_no)
        i += 1
        if not tokens:
            continue
        ts = _TokenStream(tokens, line_no)
        head = ts.next()

        if head == "end":
            if not block_stack:
                raise DslSyntaxError("'end' without an open block", line=line_no)
            block_stack.pop()
            body_stack.pop()
            continue

        in_binding_block = block_stack and isinstance(block_stack[-1], (Emit, Clone, PathTemplate))
        if in_binding_block:
            # Inside emit/clone/path every line is "<attr> <expr>".
            attr = head
            expr = _read_expr(ts)
            if not ts.exhausted:
                raise DslSyntaxError("extra tokens after binding", line=line_no)
            block_stack[-1].bindings.append((attr, expr))
            continue

        if head == "param":
            spec = _parse_param(ts, line_no)
            if spec.name in seen_params:
                raise DuplicateParam(f"duplicate parameter {spec.name!r}", line=line_no)
            seen_params.add(spec.name)
            program.params.append(spec)
        elif head == "schema":
            name = _read_value(ts)
            kind = ts.next()
            if kind not in ("number", "string"):
                raise DslSyntaxError(f"unknown column kind {kind!r}", line=line_no)
            program.required_schema.append(
                (name, ColumnKind.NUMBER if kind == "number" else ColumnKind.STRING)
            )
        elif head == "scale":
            program.scales.append(_parse_scale(ts, line_no))
        elif head == "slot":
            d = Slot(str(_read_value(ts)), [])
            body_stack[-1].append(d)
            block_stack.append(d)
            body_stack.append(d.body)
        elif head == "foreach":
            d = ForEach([])
            body_stack[-1].append(d)
            block_stack.append(d)
            body_stack.append(d.body)
        elif head == "emit":
            d = Emit(ts.next(), [])
            body_stack[-1].append(d)
            block_stack.append(d)
            body_stack.append([])  # emit bodies are bindings, not directives
        elif head == "clone":
            d = Clone(int(float(ts.next())), [])
            body_stack[-1].append(d)
            block_stack.append(d)
            body_stack.append([])
        elif head == "path":
            skeleton_text = _read_value(ts)
            d = PathTemplate(parse_skeleton(str(skeleton_text), line_no), [])
            body_stack[-1].append(d)
            block_stack.append(d)
            body_stack.append([])
        elif head == "set":
            element_id = int(float(ts.next()))
            attr = ts.next()
            expr = _read_expr(ts)
            body_stack[-1].append(SetAttr(element_id, attr, expr))
        else:
            raise UnknownDirective(f"unknown directive {head!r}", line=line_no)

        if head in ("schema", "scale", "set", "param") and not ts.exhausted:
            raise DslSyntaxError("extra tokens at end of line", line=line_no)

    if block_stack:
        raise DslSyntaxError("unclosed block at end of input")
    return program


def _parse_param(ts: _TokenStream, line_no: int) -> ParameterSpec:
    name = ts.next()
    kind_tok = ts.next()
    try:
        kind = ParamKind(kind_tok)
    except ValueError:
        raise DslSyntaxError(f"unknown parameter kind {kind_tok!r}", line=line_no) from None
    default = _read_value(ts)
    rng = None
    options = None
    while not ts.exhausted:
        word = ts.next()
        if word == "range":
            rng = (float(ts.next()), float(ts.next()), float(ts.next()))
        elif word == "options":
            options = []
            while not ts.exhausted:
                options.append(str(_read_value(ts)))
        else:
            raise DslSyntaxError(f"unexpected {word!r} in param declaration", line=line_no)
    if kind is ParamKind.NUMBER:
        default = float(default)
        if rng is not None and not (rng[0] <= default <= rng[1]):
            raise DslSyntaxError(f"default {default} outside range", line=line_no)
    else:
        default = str(default)
        if kind is ParamKind.CHOICE:
            if not options:
                raise DslSyntaxError("choice parameter needs options", line=line_no)
            if default not in options:
                raise DslSyntaxError(f"default {default!r} not in options", line=line_no)
    return ParameterSpec(name, kind, default, rng, options)


def _parse_scale(ts: _TokenStream, line_no: int) -> ScaleDef:
    scale_id = ts.next()
    kind_tok = ts.next()
    try:
        kind = ScaleKind(kind_tok)
    except ValueError:
        raise DslSyntaxError(f"unknown scale kind {kind_tok!r}", line=line_no) from None
    domain: list[Expr] | FieldDomain | None = None
    range_: list[Expr] = []
    padding = 0.0
    while not ts.exhausted:
        word = ts.next()
        if word == "field":
            domain = FieldDomain(str(_read_value(ts)))
        elif word == "domain":
            domain = []
            while ts.peek() not in ("range", "padding", None):
                domain.append(_read_expr(ts))
        elif word == "range":
            while ts.peek() not in ("padding", None):
                range_.append(_read_expr(ts))
        elif word == "padding":
            padding = float(ts.next())
        else:
            raise DslSyntaxError(f"unexpected {word!r} in scale declaration", line=line_no)
    if domain is None:
        raise DslSyntaxError("scale needs a domain or field", line=line_no)
    if not range_:
        raise DslSyntaxError("scale needs a range", line=line_no)
    return ScaleDef(scale_id, kind, domain, range_, padding)


# ---------------------------------------------------------------------------
# Canonical printer


def _print_literal(value) -> str:
    if isinstance(value, float):
        if value.is_integer():
            return str(int(value))
        return repr(value)
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_expr(e: Expr) -> str:
    if e.op == "lit":
        return _print_literal(e.args[0])
    parts = [e.op]
    for a in e.args:
        if isinstance(a, Expr):
            parts.append(print_expr(a))
        else:
            parts.append(str(a))
    return "(" + " ".join(parts) + ")"


def _print_skeleton(skeleton) -> str:
    out = []
    for seg in skeleton:
        if isinstance(seg, Expr):
            out.append("{" + print_expr(seg) + "}")
        else:
            out.append(seg)
    return "".join(out)


def _print_directives(directives, indent, out):
    pad = "  " * indent
    for d in directives:
        if isinstance(d, Slot):
            out.append(f'{pad}slot "{d.name}"')
            _print_directives(d.body, indent + 1, out)
            out.append(f"{pad}end")
        elif isinstance(d, ForEach):
            out.append(f"{pad}foreach")
            _print_directives(d.body, indent + 1, out)
            out.append(f"{pad}end")
        elif isinstance(d, Emit):
            out.append(f"{pad}emit {d.tag}")
            for name, e in d.bindings:
                out.append(f"{pad}  {name} {print_expr(e)}")
            out.append(f"{pad}end")
        elif isinstance(d, Clone):
            out.append(f"{pad}clone {d.element_id}")
            for name, e in d.bindings:
                out.append(f"{pad}  {name} {print_expr(e)}")
            out.append(f"{pad}end")
        elif isinstance(d, PathTemplate):
            skeleton = _print_skeleton(d.skeleton).replace("\\", "\\\\").replace('"', '\\"')
            out.append(f'{pad}path "{skeleton}"')
            for name, e in d.bindings:
                out.append(f"{pad}  {name} {print_expr(e)}")
            out.append(f"{pad}end")
        elif isinstance(d, SetAttr):
            out.append(f"{pad}set {d.element_id} {d.name} {print_expr(d.expr)}")
        else:
            raise TypeError(f"unknown directive {d!r}")


def print_program(program: TemplateProgram) -> str:
    out: list[str] = []
    for p in program.params:
        line = f"param {p.name} {p.kind.value} {_print_literal(p.default)}"
        if p.range is not None:
            line += " range " + " ".join(format_number(v, 6) for v in p.range)
        if p.options:
            line += " options " + " ".join(_print_literal(o) for o in p.options)
        out.append(line)
    for name, kind in program.required_schema:
        out.append(f'schema "{name}" {"number" if kind == ColumnKind.NUMBER else "string"}')
    for s in program.scales:
        line = f"scale {s.id} {s.kind.value}"
        if isinstance(s.domain, FieldDomain):
            line += f' field "{s.domain.column}"'
        else:
            line += " domain " + " ".join(print_expr(e) for e in s.domain)
        line += " range " + " ".join(print_expr(e) for e in s.range)
        if s.band_padding:
            line += f" padding {format_number(s.band_padding, 6)}"
        out.append(line)
    _print_directives(program.directives, 0, out)
    return "\n".join(out) + "\n"
