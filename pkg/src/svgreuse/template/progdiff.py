"""Structural diff between two template programs.

Used to rank refinement candidates (fewest changed nodes wins) and to
represent one chat turn's edit as a reconstructible diff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    Clone,
    Emit,
    Expr,
    ForEach,
    PathTemplate,
    SetAttr,
    Slot,
    TemplateProgram,
)
from .parser import parse_program, print_program


def _expr_nodes(e: Expr) -> int:
    return e.size()


def _diff_exprs(a: Expr | None, b: Expr | None) -> int:
    """Changed-node count between two expression trees, aligned by position."""
    if a is None and b is None:
        return 0
    if a is None:
        return _expr_nodes(b)
    if b is None:
        return _expr_nodes(a)
    if a.op != b.op or len(a.args) != len(b.args):
        # Replaced node: count it once, then its children pairwise.
        cost = 1
        ca = [x for x in a.args if isinstance(x, Expr)]
        cb = [x for x in b.args if isinstance(x, Expr)]
        for i in range(max(len(ca), len(cb))):
            cost += _diff_exprs(ca[i] if i < len(ca) else None, cb[i] if i < len(cb) else None)
        return cost
    cost = 0
    for x, y in zip(a.args, b.args):
        if isinstance(x, Expr) and isinstance(y, Expr):
            cost += _diff_exprs(x, y)
        elif x != y:
            cost += 1
    return cost


def _bindings_cost(a: list, b: list) -> int:
    names = []
    for n, _ in a:
        if n not in names:
            names.append(n)
    for n, _ in b:
        if n not in names:
            names.append(n)
    da, db = dict(a), dict(b)
    cost = 0
    for n in names:
        cost += _diff_exprs(da.get(n), db.get(n))
    return cost


def _directive_nodes(d) -> int:
    if isinstance(d, (Emit, Clone)):
        return 1 + sum(_expr_nodes(e) for _, e in d.bindings)
    if isinstance(d, PathTemplate):
        return 1 + sum(_expr_nodes(s) for s in d.skeleton if isinstance(s, Expr)) + sum(
            _expr_nodes(e) for _, e in d.bindings
        )
    if isinstance(d, SetAttr):
        return 1 + _expr_nodes(d.expr)
    if isinstance(d, (Slot, ForEach)):
        return 1 + sum(_directive_nodes(x) for x in d.body)
    return 1


def _diff_directives(a, b) -> int:
    if a is None:
        return _directive_nodes(b)
    if b is None:
        return _directive_nodes(a)
    if type(a) is not type(b):
        return _directive_nodes(a) if _directive_nodes(a) >= _directive_nodes(b) else _directive_nodes(b)
    if isinstance(a, (Slot, ForEach)):
        cost = 0
        if isinstance(a, Slot) and a.name != b.name:
            cost += 1
        for i in range(max(len(a.body), len(b.body))):
            cost += _diff_directives(
                a.body[i] if i < len(a.body) else None,
                b.body[i] if i < len(b.body) else None,
            )
        return cost
    if isinstance(a, (Emit, Clone)):
        cost = 0
        if isinstance(a, Emit) and a.tag != b.tag:
            cost += 1
        if isinstance(a, Clone) and a.element_id != b.element_id:
            cost += 1
        return cost + _bindings_cost(a.bindings, b.bindings)
    if isinstance(a, PathTemplate):
        cost = _bindings_cost(a.bindings, b.bindings)
        sa = [s for s in a.skeleton if isinstance(s, Expr)]
        sb = [s for s in b.skeleton if isinstance(s, Expr)]
        la = [s for s in a.skeleton if not isinstance(s, Expr)]
        lb = [s for s in b.skeleton if not isinstance(s, Expr)]
        if la != lb:
            cost += 1
        for i in range(max(len(sa), len(sb))):
            cost += _diff_exprs(sa[i] if i < len(sa) else None, sb[i] if i < len(sb) else None)
        return cost
    if isinstance(a, SetAttr):
        cost = 0
        if (a.element_id, a.name) != (b.element_id, b.name):
            cost += 1
        return cost + _diff_exprs(a.expr, b.expr)
    return 0


def _scales_cost(a: TemplateProgram, b: TemplateProgram) -> int:
    ids = list(dict.fromkeys([s.id for s in a.scales] + [s.id for s in b.scales]))
    ma, mb = a.scale_map(), b.scale_map()
    cost = 0
    for i in ids:
        sa, sb = ma.get(i), mb.get(i)
        if sa is None or sb is None:
            cost += 1
            continue
        if sa.kind != sb.kind or sa.band_padding != sb.band_padding:
            cost += 1
        da = sa.domain if isinstance(sa.domain, list) else None
        db = sb.domain if isinstance(sb.domain, list) else None
        if (da is None) != (db is None):
            cost += 1
        elif da is None:
            if sa.domain.column != sb.domain.column:
                cost += 1
        else:
            for j in range(max(len(da), len(db))):
                cost += _diff_exprs(da[j] if j < len(da) else None, db[j] if j < len(db) else None)
        for j in range(max(len(sa.range), len(sb.range))):
            cost += _diff_exprs(
                sa.range[j] if j < len(sa.range) else None,
                sb.range[j] if j < len(sb.range) else None,
            )
    return cost


def minimal_change_score(before: TemplateProgram, after: TemplateProgram) -> tuple[int, int]:
    """(changed directive/expression nodes, parameters added)."""
    nodes = _scales_cost(before, after)
    for i in range(max(len(before.directives), len(after.directives))):
        nodes += _diff_directives(
            before.directives[i] if i < len(before.directives) else None,
            after.directives[i] if i < len(after.directives) else None,
        )
    before_names = {p.name for p in before.params}
    params_added = sum(1 for p in after.params if p.name not in before_names)
    return nodes, params_added


@dataclass
class ProgramDiff:
    """A minimal, reconstructible program edit: full after-source plus scores.

    The after-source is authoritative (apply simply parses it); the score
    fields record how small the edit was.
    """

    after_source: str
    nodes_changed: int = 0
    params_added: int = 0
    removed_params: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.nodes_changed == 0 and self.params_added == 0

    def apply(self, before: TemplateProgram) -> TemplateProgram:
        # Always parse: an edit may change only a parameter default,
        # which the structural scores do not count.
        return parse_program(self.after_source)


def make_diff(before: TemplateProgram, after: TemplateProgram) -> ProgramDiff:
    nodes, added = minimal_change_score(before, after)
    before_names = {p.name for p in before.params}
    after_names = {p.name for p in after.params}
    return ProgramDiff(
        after_source=print_program(after),
        nodes_changed=nodes,
        params_added=added,
        removed_params=sorted(before_names - after_names),
    )
