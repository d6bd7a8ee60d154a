"""Expression parsing, Taylor-mode jets and hypothesis checks."""

from certquad.funcmodel.convexity import (
    ABS_CONVEX,
    ABS_Q_CONCAVE,
    ConvexityVerdict,
    assumed,
    check_convexity,
    check_function_convex,
)
from certquad.funcmodel.exact import eval_jet_exact, to_polynomial
from certquad.funcmodel.expr import (
    X,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    Var,
    is_exact_capable,
    to_source,
)
from certquad.funcmodel.jets import MAX_ORDER, Jet, derivatives, eval_jet, evaluate
from certquad.funcmodel.parser import parse

__all__ = [
    "ABS_CONVEX",
    "ABS_Q_CONCAVE",
    "MAX_ORDER",
    "Add",
    "Const",
    "ConvexityVerdict",
    "Div",
    "Expr",
    "Func",
    "Jet",
    "Mul",
    "Neg",
    "Pow",
    "Sub",
    "Var",
    "X",
    "assumed",
    "check_convexity",
    "check_function_convex",
    "derivatives",
    "eval_jet",
    "eval_jet_exact",
    "evaluate",
    "is_exact_capable",
    "parse",
    "to_polynomial",
    "to_source",
]
