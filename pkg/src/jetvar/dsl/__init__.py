"""The ``.jv`` model language: parser, diagnostics and renderers."""

from .diagnostics import Diagnostic, ModelError
from .parser import ModelDocument, parse_expr, parse_model
from .render import expr_from_json, expr_to_json, render_expr, render_latex, render_model

__all__ = [
    "Diagnostic",
    "ModelDocument",
    "ModelError",
    "expr_from_json",
    "expr_to_json",
    "parse_expr",
    "parse_model",
    "render_expr",
    "render_latex",
    "render_model",
]
