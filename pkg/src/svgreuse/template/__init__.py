from .ast import (
    Clone,
    Emit,
    Expr,
    FIXED_PARAMS,
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
    field_ref,
    lit,
    op,
    param,
    scale_apply,
)
from .diff import FidelityScore, diff_geometry
from .eval import apply_scale, evaluate, scale_bandwidth
from .parser import parse_program, print_expr, print_program
from .progdiff import ProgramDiff, make_diff, minimal_change_score
from .validate import validate_program
