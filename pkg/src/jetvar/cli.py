"""Command-line front end: ``jetvar <command> --model FILE``.

Exit codes: 0 success, 1 model diagnostics or usage errors, 2 engine errors,
3 when ``check`` finds a failing identity.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field

from . import gauge as G
from .dsl import ModelDocument, ModelError, parse_model
from .dsl.render import atom_latex, expr_to_json, render_expr, render_latex
from .errors import BianchiNonzero, EngineError, ExtractionIncomplete, NotInvariantWarning
from .jets import CovectorDensity, d_H
from .kernel import Expr, JetVar, MultiIndex
from .variational import (
    euler_lagrange,
    helmholtz,
    jacobi,
    self_adjointness_residual,
)

COMMANDS = ("el", "helmholtz", "jacobi", "noether", "bianchi", "superpotential", "invariance", "check")
RESULT_SCHEMA = "jetvar/result@1"
EXIT_OK, EXIT_DIAG, EXIT_ENGINE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class Entry:
    label: str
    latex: str
    expr: Expr


@dataclass
class Result:
    command: str
    model: str
    subject: str
    entries: list[Entry] = field(default_factory=list)
    notes: list[tuple[str, str]] = field(default_factory=list)
    rows: list[tuple[str, str, str]] = field(default_factory=list)

    def failed(self) -> bool:
        return any(status == "FAIL" for _, status, _ in self.rows)


# ---------------------------------------------------------------- labels


class _Labels:
    def __init__(self, doc: ModelDocument):
        self.coords = doc.spec.coords
        self.n = doc.spec.n

    def d(self, mu: int) -> str:
        return self.coords[mu]

    def multi(self, alpha: MultiIndex) -> str:
        if not any(alpha):
            return "0"
        return "".join(self.coords[s] for s in alpha.directions())

    def field_latex(self, name: str) -> str:
        return atom_latex(JetVar(name, MultiIndex.zero(self.n)), self.coords)


# ---------------------------------------------------------------- commands


def _gauge(doc: ModelDocument):
    if doc.gauge is None:
        raise UsageError("this command needs a params block and a lift block in the model")
    return doc.gauge, doc.lift_spec()


def cmd_el(doc, L, lab):
    el = euler_lagrange(L, doc.spec).E
    return [Entry(f"E[{i}]", f"E_{{{lab.field_latex(i)}}}", el[i]) for i in doc.spec.fields], []


def cmd_helmholtz(doc, L, lab, source=None):
    if source is None:
        source = euler_lagrange(L, doc.spec).E
        what = "Euler-Lagrange expressions"
    else:
        what = "source"
        source = CovectorDensity({i: source.get(i, Expr()) for i in doc.spec.fields})
    H = helmholtz(source, doc.spec)
    entries = [
        Entry(f"H[{i},{j},{lab.multi(a)}]", f"H_{{{lab.field_latex(i)} {lab.field_latex(j)}}}^{{{lab.multi(a)}}}", c)
        for (i, j, a), c in sorted(H.coeffs.items(), key=_key3)]
    return entries, [("subject", what), ("locally variational", "yes" if H.is_zero() else "no")]


def _key3(item):
    (i, j, a), _ = item
    return (i, j, a.sort_key())


def cmd_jacobi(doc, L, lab):
    J = jacobi(L, doc.spec)
    entries = [
        Entry(f"J[{i},{j},{lab.multi(a)}]", f"\\mathcal{{J}}_{{{lab.field_latex(i)} {lab.field_latex(j)}}}^{{{lab.multi(a)}}}", c)
        for (i, j, a), c in sorted(J.coeffs.items(), key=_key3)]
    sa = self_adjointness_residual(L, doc.spec)
    return entries, [("self-adjoint", "yes" if not sa else "no")]


def cmd_noether(doc, L, lab):
    model, lift = _gauge(doc)
    eps = G.noether_current(L, model, lift, doc.spec)
    return [Entry(f"eps^{lab.d(m)}", f"\\epsilon^{{{lab.d(m)}}}", eps[m]) for m in range(doc.spec.n)], []


def cmd_bianchi(doc, L, lab):
    model, lift = _gauge(doc)
    b = G.bianchi_decompose(L, model, lift, doc.spec)
    entries = [Entry(f"beta[{p}]", f"\\beta_{{{lab.field_latex(p)}}}", b.beta[p]) for p in model.params]
    entries += [Entry(f"reduced^{lab.d(m)}", f"\\tilde\\epsilon^{{{lab.d(m)}}}", b.reduced[m])
                for m in range(doc.spec.n)]
    return entries, [("residual", render_expr(b.residual, doc.spec.coords)),
                     ("beta vanishes", "yes" if b.beta_is_zero() else "no")]


def cmd_superpotential(doc, L, lab):
    model, lift = _gauge(doc)
    nu, res = G.superpotential(L, model, lift, doc.spec)
    n = doc.spec.n
    entries = [Entry(f"nu^{lab.d(a)}{lab.d(b)}", f"\\nu^{{{lab.d(a)}{lab.d(b)}}}", nu.comps[a][b])
               for a in range(n) for b in range(a + 1, n)]
    resid = "0" if res.is_zero() else "; ".join(render_expr(c, doc.spec.coords) for c in res.comps)
    return entries, [("residual", resid)]


def cmd_invariance(doc, L, lab):
    model, lift = _gauge(doc)
    r = G.invariance_residual(L, model, lift, doc.spec)
    return [Entry("residual", "\\mathrm{residual}", r)], [("invariant", "yes" if r.is_zero() else "no")]


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def cmd_check(doc, L, lab):
    spec = doc.spec
    rows = []
    el = euler_lagrange(L, spec).E
    rows.append(("helmholtz of EL", _status(helmholtz(el, spec).is_zero()), "H(E(L)) = 0"))
    sa = self_adjointness_residual(L, spec)
    rows.append(("jacobi self-adjoint", _status(not sa), f"{len(sa)} nonzero coefficients"))
    for name, comps in doc.sources.items():
        src = CovectorDensity({i: comps.get(i, Expr()) for i in spec.fields})
        var = helmholtz(src, spec).is_zero()
        rows.append((f"source {name}", "INFO", "locally variational" if var else "not variational"))
    if doc.gauge is not None:
        model, lift = _gauge(doc)
        inv = G.invariance_residual(L, model, lift, spec)
        rows.append(("invariance", _status(inv.is_zero()), "residual 0" if inv.is_zero() else "residual nonzero"))
        nid = G.noether_identity_residual(L, model, lift, spec)
        rows.append(("noether identity", _status(nid.is_zero()), "D eps = £.E + invariance residual"))
        b = G.bianchi_decompose(L, model, lift, spec)
        rows.append(("bianchi decomposition", _status(b.residual.is_zero()), "omega = P.beta + D reduced"))
        bad = [p for p in model.params if not b.beta[p].is_zero()]
        rows.append(("bianchi beta", _status(not bad), "beta = 0" if not bad else f"nonzero in {', '.join(bad)}"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotInvariantWarning)
            eps = G.noether_current(L, model, lift, spec, check=False)
        div = d_H(eps - b.reduced, spec.with_order(2 * spec.max_order + model.k + 2)).L
        rows.append(("strong conservation", _status(div.is_zero()),
                     "D(eps - reduced) = 0" if div.is_zero() else "D(eps - reduced) nonzero"))
        try:
            _, res = G.superpotential(L, model, lift, spec)
            rows.append(("superpotential exactness", _status(res.is_zero()),
                         "eps - reduced = D nu" if res.is_zero() else "residual nonzero"))
        except BianchiNonzero as e:
            rows.append(("superpotential exactness", "FAIL", str(e)))
        except ExtractionIncomplete as e:
            rows.append(("superpotential exactness", "FAIL", str(e)))
        kern = G.kernel_residual(L, model, lift, spec)
        rows.append(("gauge jacobi kernel", "INFO",
                     "lifted directions in kernel" if not kern else f"{len(kern)} nonzero Jacobi expressions"))
        hc = G.hessian_comparison_residual(L, model, lift, spec)
        rows.append(("hessian comparison", _status(all(v.is_zero() for v in hc.values())),
                     "Xi_V.J(Xi_V) = second variation mod divergence"))
    return [], [], rows


HANDLERS = {
    "el": cmd_el, "helmholtz": cmd_helmholtz, "jacobi": cmd_jacobi, "noether": cmd_noether,
    "bianchi": cmd_bianchi, "superpotential": cmd_superpotential, "invariance": cmd_invariance,
}


# ---------------------------------------------------------------- rendering


def render_result(res: Result, fmt: str, coords) -> str:
    if fmt == "json":
        payload = {
            "schema": RESULT_SCHEMA,
            "command": res.command,
            "model": res.model,
            "subject": res.subject,
            "entries": [{"label": e.label, "expr": expr_to_json(e.expr)} for e in res.entries],
            "notes": {k: v for k, v in res.notes},
        }
        if res.command == "check":
            payload["rows"] = [{"check": n, "status": s, "detail": d} for n, s, d in res.rows]
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    lines = []
    if fmt == "latex":
        lines.append(f"% {res.command} {res.model} ({res.subject})")
        lines += [f"{e.latex} = {render_latex(e.expr, coords)}" for e in res.entries]
        lines += [f"% {k}: {v}" for k, v in res.notes]
    else:
        lines.append(f"# {res.command} {res.model} ({res.subject})")
        lines += [f"{e.label} = {render_expr(e.expr, coords)}" for e in res.entries]
        lines += [f"{k}: {v}" for k, v in res.notes]
    if res.rows:
        width = max(len(n) for n, _, _ in res.rows)
        prefix = "% " if fmt == "latex" else ""
        lines += [f"{prefix}{s:<4}  {n:<{width}}  {d}" for n, s, d in res.rows]
        fails = sum(s == "FAIL" for _, s, _ in res.rows)
        lines.append(f"{prefix}{'all identities hold' if not fails else f'{fails} check(s) failed'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jetvar", description="Variational calculus on jet bundles for .jv models.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", required=True, help="path to a .jv model file")
    p.add_argument("--lagrangian", help="name of the lagrangian to use (default: the first one)")
    p.add_argument("--source", help="helmholtz: test this source block instead of the Euler-Lagrange form")
    p.add_argument("--format", choices=("text", "latex", "json"), default="text")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--max-order", type=int, help="override the jet order cap")
    return p


def _print_diagnostics(path: str, text: str | None, err: ModelError, fmt: str):
    if fmt == "json":
        print(json.dumps({"error": "diagnostics", "model": path,
                          "diagnostics": [d.to_json() for d in err.diagnostics]}, indent=2), file=sys.stderr)
        return
    src = text.splitlines() if text else []
    for d in err.diagnostics:
        print(d.format(path), file=sys.stderr)
        if 0 < d.line <= len(src):
            line = src[d.line - 1]
            print(f"    {line}", file=sys.stderr)
            print(f"    {' ' * (d.column - 1)}{'^' * max(d.length, 1)}", file=sys.stderr)


def run(args) -> tuple[Result, ModelDocument]:
    try:
        with open(args.model, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.model}: {e.strerror}") from None
    try:
        doc = parse_model(text)
    except ModelError as e:
        e.text = text
        raise
    if args.max_order is not None:
        if args.max_order < 1:
            raise UsageError("--max-order must be at least 1")
        doc.spec = doc.spec.with_order(args.max_order)
    lab = _Labels(doc)
    if doc.lagrangians:
        if args.lagrangian is not None and args.lagrangian not in doc.lagrangians:
            raise UsageError(f"no lagrangian named {args.lagrangian!r} in {args.model}")
        name, L = doc.lagrangian(args.lagrangian)
    elif args.command == "helmholtz" and doc.sources:
        name, L = None, None
    else:
        raise UsageError(f"{args.model} defines no lagrangian")
    subject = f"lagrangian {name}" if name else ""
    res = Result(args.command, args.model, subject)
    if args.command == "check":
        res.entries, res.notes, res.rows = cmd_check(doc, L, lab)
    elif args.command == "helmholtz":
        source = None
        if args.source is not None or L is None:
            if args.source is not None and args.source not in doc.sources:
                raise UsageError(f"no source named {args.source!r} in {args.model}")
            sname, source = doc.source(args.source)
            res.subject = f"source {sname}"
        res.entries, res.notes = cmd_helmholtz(doc, L, lab, source)
    else:
        res.entries, res.notes = HANDLERS[args.command](doc, L, lab)
    return res, doc


def main(argv: list[str] | None = None) -> int:
    fmt = "text"
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NotInvariantWarning)
            res, doc = run(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        out = render_result(res, fmt, doc.spec.coords)
    except ModelError as e:
        _print_diagnostics(args.model, getattr(e, "text", None), e, fmt)
        return EXIT_DIAG
    except UsageError as e:
        print(f"jetvar: error: {e}", file=sys.stderr)
        return EXIT_DIAG
    except EngineError as e:
        if fmt == "json":
            print(json.dumps({"error": e.code, "message": str(e)}, indent=2), file=sys.stderr)
        else:
            print(f"error[{e.code}]: {e}", file=sys.stderr)
        return EXIT_ENGINE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return EXIT_CHECK if res.failed() else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
