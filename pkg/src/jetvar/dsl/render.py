"""Text, LaTeX and JSON renderings of expressions.

The text form re-parses to the same expression in a model that declares the
same names (see ``GRAMMAR.md``).  The JSON form is a versioned term tree.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from ..kernel import BASE, FUNC, PARAM, Atom, BaseCoord, Expr, FormalFn, JetVar, MultiIndex, Param

EXPR_SCHEMA = "jetvar/expr@1"

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon",
    "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi",
    "Sigma", "Phi", "Psi", "Omega",
}
_FAMILY = re.compile(r"^([A-Za-z][A-Za-z0-9]*)((?:\[\d+\])+)$")


def _subscript(alpha: Sequence[int], coords: Sequence[str] | None) -> str:
    if not any(alpha):
        return ""
    dirs = MultiIndex(alpha).directions()
    if coords and all(len(c) == 1 for c in coords):
        return "_" + "".join(coords[s] for s in dirs)
    return "_" + "".join(f"[{s}]" for s in dirs)


def atom_text(a: Atom, coords: Sequence[str] | None = None) -> str:
    if a.kind == BASE:
        s = a.index[0]
        return coords[s] if coords else f"x{s}"
    if a.kind == PARAM:
        return a.name
    return a.name + _subscript(a.index, coords)


def _coeff_text(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _mono_text(m, coords) -> str:
    parts = []
    for a, k in m:
        s = atom_text(a, coords)
        parts.append(s if k == 1 else f"{s}^{k}")
    return "*".join(parts)


def render_expr(e: Expr, coords: Sequence[str] | None = None) -> str:
    """Plain-text form, e.g. ``-(y_tt + omega^2*y)``."""
    terms = e.terms()
    if not terms:
        return "0"
    if len(terms) > 1 and terms[0][1] < 0:
        return f"-({render_expr(-e, coords)})"
    out = []
    for idx, (m, c) in enumerate(terms):
        neg = c < 0
        mag = -c if neg else c
        body = _mono_text(m, coords)
        if not body:
            piece = _coeff_text(mag)
        elif mag == 1:
            piece = body
        else:
            piece = f"{_coeff_text(mag)}*{body}"
        if idx == 0:
            out.append(f"-{piece}" if neg else piece)
        else:
            out.append(f" - {piece}" if neg else f" + {piece}")
    return "".join(out)


# ---------------------------------------------------------------- latex


def _latex_name(name: str) -> tuple[str, str]:
    """Split a field name into a LaTeX symbol and a superscript index string."""
    m = _FAMILY.match(name)
    base, sup = (m.group(1), ",".join(re.findall(r"\d+", m.group(2)))) if m else (name, "")
    sym = f"\\{base}" if base in _GREEK else (base if len(base) == 1 else f"\\mathrm{{{base}}}")
    return sym, sup


def atom_latex(a: Atom, coords: Sequence[str] | None = None) -> str:
    if a.kind == BASE:
        s = a.index[0]
        return coords[s] if coords else f"x^{{{s}}}"
    sym, sup = _latex_name(a.name)
    if a.kind == PARAM:
        return sym + (f"^{{{sup}}}" if sup else "")
    out = sym + (f"^{{{sup}}}" if sup else "")
    if any(a.index):
        dirs = a.index.directions()
        sub = "".join(coords[s] for s in dirs) if coords else "".join(str(s) for s in dirs)
        out += f"_{{{sub}}}"
    return out


def _coeff_latex(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"\\frac{{{c.numerator}}}{{{c.denominator}}}"


def render_latex(e: Expr, coords: Sequence[str] | None = None) -> str:
    terms = e.terms()
    if not terms:
        return "0"
    if len(terms) > 1 and terms[0][1] < 0:
        return f"-\\left({render_latex(-e, coords)}\\right)"
    out = []
    for idx, (m, c) in enumerate(terms):
        neg = c < 0
        mag = -c if neg else c
        factors = []
        for a, k in m:
            s = atom_latex(a, coords)
            if k != 1:
                s = f"{{{s}}}^{{{k}}}" if ("_" in s or "^" in s) else f"{s}^{{{k}}}"
            factors.append(s)
        body = " ".join(factors)
        if not body:
            piece = _coeff_latex(mag)
        elif mag == 1:
            piece = body
        else:
            piece = f"{_coeff_latex(mag)} {body}"
        if idx == 0:
            out.append(f"-{piece}" if neg else piece)
        else:
            out.append(f" - {piece}" if neg else f" + {piece}")
    return "".join(out)


# ---------------------------------------------------------------- json


def atom_to_json(a: Atom) -> dict:
    if a.kind == BASE:
        return {"kind": "base", "index": a.index[0]}
    if a.kind == PARAM:
        return {"kind": "param", "name": a.name}
    kind = "fn" if a.kind == FUNC else "jet"
    return {"kind": kind, "name": a.name, "alpha": list(a.index)}


def atom_from_json(d: dict) -> Atom:
    kind = d["kind"]
    if kind == "base":
        return BaseCoord(int(d["index"]))
    if kind == "param":
        return Param(d["name"])
    if kind == "fn":
        return FormalFn(d["name"], d["alpha"])
    if kind == "jet":
        return JetVar(d["name"], d["alpha"])
    raise ValueError(f"unknown atom kind {kind!r}")


def expr_to_json(e: Expr) -> dict:
    return {
        "schema": EXPR_SCHEMA,
        "terms": [
            {"coeff": _coeff_text(c), "factors": [[atom_to_json(a), k] for a, k in m]}
            for m, c in e.terms()
        ],
    }


def expr_from_json(d: dict) -> Expr:
    if d.get("schema") != EXPR_SCHEMA:
        raise ValueError(f"unsupported expression schema {d.get('schema')!r}")
    pairs = []
    for t in d["terms"]:
        factors = tuple((atom_from_json(a), int(k)) for a, k in t["factors"])
        pairs.append((factors, Fraction(t["coeff"])))
    return Expr.from_terms(pairs)


# ---------------------------------------------------------------- documents


def _key_text(name: str, key: tuple[int, ...]) -> str:
    return name + "".join(f"[{i}]" for i in key)


def render_model(doc) -> str:
    """Canonical text of a model document with every family and abbreviation expanded."""
    spec = doc.spec
    coords = spec.coords
    lines = ["bundle {", f"  base {', '.join(coords)}", f"  fields {', '.join(spec.fields)}"]
    if spec.functions:
        lines.append(f"  functions {', '.join(spec.functions)}")
    if spec.constants:
        lines.append(f"  constants {', '.join(spec.constants)}")
    lines += [f"  order {spec.max_order}", "}"]
    g = doc.gauge
    if g is not None:
        lines.append("params {")
        if g.xi:
            lines.append(f"  xi {g.xi}")
        if g.gauge:
            lines.append(f"  gauge {', '.join(g.gauge)}")
        lines += [f"  r {g.r}", f"  k {g.k}", "}"]
    if doc.lift:
        lines.append("lift {")
        lines += [f"  {f} = {render_expr(e, coords)}" for f, e in doc.lift.items()]
        lines.append("}")
    if doc.defs:
        lines.append("defs {")
        for name, table in doc.defs.items():
            for key in sorted(table):
                lines.append(f"  {_key_text(name, key)} = {render_expr(table[key], coords)}")
        lines.append("}")
    for name, e in doc.lagrangians.items():
        lines.append(f"lagrangian {name} = {render_expr(e, coords)}")
    for name, comps in doc.sources.items():
        lines.append(f"source {name} {{")
        lines += [f"  {f} = {render_expr(e, coords)}" for f, e in comps.items()]
        lines.append("}")
    return "\n".join(lines) + "\n"
