"""Parser for ``.jv`` model files.

A file is a sequence of blocks (``bundle``, ``params``, ``lift``, ``defs``,
``source``) and ``lagrangian`` statements.  Parsing is two-phase: a syntax
pass builds statement trees, then a semantic pass resolves names in file
order, expands index families and abbreviations, and checks jet orders.
Errors are collected as span-bearing diagnostics and raised together.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ..gauge import GaugeModel, LiftSpec
from ..jets import BundleSpec, total_derivative
from ..kernel import BaseCoord, Expr, FormalFn, JetVar, MultiIndex, Param
from .diagnostics import Diagnostic, ModelError
from .lexer import Token, tokenize

BLOCKS = ("bundle", "params", "lift", "defs", "source", "lagrangian")
RESERVED = {"sum"}


# ---------------------------------------------------------------- document


@dataclass
class ModelDocument:
    spec: BundleSpec
    gauge: GaugeModel | None = None
    lift: dict[str, Expr] = field(default_factory=dict)
    defs: dict[str, dict[tuple[int, ...], Expr]] = field(default_factory=dict)
    lagrangians: dict[str, Expr] = field(default_factory=dict)
    sources: dict[str, dict[str, Expr]] = field(default_factory=dict)

    def lift_spec(self) -> LiftSpec:
        """Validated lift; raises :class:`MalformedLift` on a bad lift block."""
        if self.gauge is None:
            raise ValueError("model has no params block")
        return LiftSpec.from_expressions(self.gauge, self.spec, self.lift)

    def lagrangian(self, name: str | None = None) -> tuple[str, Expr]:
        if name is None:
            if not self.lagrangians:
                raise KeyError("model defines no lagrangian")
            name = next(iter(self.lagrangians))
        return name, self.lagrangians[name]

    def source(self, name: str | None = None) -> tuple[str, dict[str, Expr]]:
        if name is None:
            if not self.sources:
                raise KeyError("model defines no source")
            name = next(iter(self.sources))
        return name, self.sources[name]


# ---------------------------------------------------------------- syntax trees


@dataclass
class Num:
    value: Fraction
    tok: Token


@dataclass
class Name:
    tok: Token
    indices: list[Token]
    sub: list[Token]  # IDENT tokens (coordinate letters) or index tokens in brackets
    sub_bracket: list[bool]


@dataclass
class Neg:
    x: object
    tok: Token


@dataclass
class Bin:
    op: str
    left: object
    right: object
    tok: Token


@dataclass
class Pow:
    base: object
    exp: int
    tok: Token


@dataclass
class Sum:
    var: Token
    body: object
    tok: Token


@dataclass
class Lhs:
    tok: Token
    indices: list[Token]


class _Bail(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


# ---------------------------------------------------------------- syntax pass


class _Syntax:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.toks) - 1)
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = "end of file" if tok.kind == "EOF" else ("newline" if tok.kind == "NEWLINE" else repr(tok.text))
            raise _Bail(tok.diag(f"expected {what or kind}, found {shown}"))
        return self.next()

    def skip_newlines(self):
        while self.at("NEWLINE") or self.at(";"):
            self.next()

    def end_statement(self):
        if self.at("}") or self.at("EOF"):
            return
        if not (self.at("NEWLINE") or self.at(";")):
            tok = self.peek()
            raise _Bail(tok.diag(f"unexpected {tok.text!r}; expected end of statement"))
        self.skip_newlines()

    def sync(self):
        while not (self.at("NEWLINE") or self.at(";") or self.at("}") or self.at("EOF")):
            self.next()
        self.skip_newlines()

    # -- document

    def document(self) -> list:
        stmts = []
        self.skip_newlines()
        while not self.at("EOF"):
            tok = self.peek()
            try:
                if tok.kind != "IDENT" or tok.text not in BLOCKS:
                    raise _Bail(tok.diag(f"expected one of {', '.join(BLOCKS)}"))
                stmts.append(getattr(self, "block_" + tok.text)())
            except _Bail as b:
                self.diags.append(b.diag)
                self.recover_top()
            self.skip_newlines()
        return stmts

    def recover_top(self):
        # skip to the start of the next top-level keyword
        depth = 0
        while not self.at("EOF"):
            tok = self.peek()
            if tok.kind == "{":
                depth += 1
            elif tok.kind == "}":
                depth = max(depth - 1, 0)
                if depth == 0:
                    self.next()
                    return
            elif depth == 0 and tok.kind == "IDENT" and tok.text in BLOCKS and self.prev_is_break():
                return
            self.next()

    def prev_is_break(self) -> bool:
        return self.pos == 0 or self.toks[self.pos - 1].kind in ("NEWLINE", ";", "}")

    def body(self, item) -> list:
        """``{ item* }`` with per-statement error recovery."""
        self.expect("{", "'{'")
        self.skip_newlines()
        items = []
        while not self.at("}"):
            if self.at("EOF"):
                raise _Bail(self.peek().diag("unterminated block; expected '}'"))
            try:
                items.append(item())
                self.end_statement()
            except _Bail as b:
                self.diags.append(b.diag)
                self.sync()
        self.next()
        return items

    def keyword_item(self, allowed: tuple[str, ...]):
        def item():
            kw = self.expect("IDENT", "a keyword")
            if kw.text not in allowed:
                raise _Bail(kw.diag(f"unknown entry {kw.text!r}; expected one of {', '.join(allowed)}"))
            args = []
            while True:
                if self.at("INT"):
                    args.append(self.next())
                else:
                    name = self.expect("IDENT", "a name")
                    args.append(Lhs(name, self.index_list()))
                if not self.at(","):
                    break
                self.next()
            return kw, args
        return item

    def block_bundle(self):
        tok = self.next()
        return ("bundle", tok, self.body(self.keyword_item(("base", "fields", "functions", "constants", "order"))))

    def block_params(self):
        tok = self.next()
        return ("params", tok, self.body(self.keyword_item(("xi", "gauge", "r", "k"))))

    def assignment(self):
        name = self.expect("IDENT", "a name")
        lhs = Lhs(name, self.index_list())
        self.expect("=", "'='")
        return lhs, self.expr()

    def block_lift(self):
        tok = self.next()
        return ("lift", tok, self.body(self.assignment))

    def block_defs(self):
        tok = self.next()
        return ("defs", tok, self.body(self.assignment))

    def block_source(self):
        tok = self.next()
        name = self.expect("IDENT", "a source name")
        return ("source", tok, name, self.body(self.assignment))

    def block_lagrangian(self):
        tok = self.next()
        name = None
        if self.at("IDENT"):
            name = self.next()
        self.expect("=", "'='")
        e = self.expr()
        self.end_statement()
        return ("lagrangian", tok, name, e)

    # -- expressions

    def index_list(self) -> list[Token]:
        out = []
        while self.at("["):
            self.next()
            tok = self.peek()
            if tok.kind not in ("INT", "IDENT"):
                raise _Bail(tok.diag("expected an index (integer or index variable)"))
            out.append(self.next())
            self.expect("]", "']'")
        return out

    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.next()
            node = Bin(op.text, node, self.term(), op)
        return node

    def term(self):
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.next()
            node = Bin(op.text, node, self.unary(), op)
        return node

    def unary(self):
        if self.at("-"):
            tok = self.next()
            return Neg(self.unary(), tok)
        if self.at("+"):
            self.next()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.at("^"):
            tok = self.next()
            sign = 1
            if self.at("-"):
                self.next()
                sign = -1
            exp = self.expect("INT", "an integer exponent")
            return Pow(base, sign * int(exp.text), tok)
        return base

    def primary(self):
        tok = self.peek()
        if tok.kind in ("INT", "DEC"):
            self.next()
            return Num(Fraction(tok.text), tok)
        if tok.kind == "(":
            self.next()
            e = self.expr()
            self.expect(")", "')'")
            return e
        if tok.kind == "IDENT" and tok.text == "sum" and self.peek(1).kind == "(":
            self.next()
            self.next()
            var = self.expect("IDENT", "an index variable")
            self.expect(",", "','")
            body = self.expr()
            self.expect(")", "')'")
            return Sum(var, body, tok)
        if tok.kind == "IDENT":
            self.next()
            indices = self.index_list()
            sub, bracket = [], []
            if self.at("_"):
                us = self.next()
                while True:
                    nxt = self.peek()
                    prev = self.toks[self.pos - 1]
                    adjacent = nxt.line == prev.line and nxt.col == prev.col + prev.length
                    if not adjacent:
                        break
                    if nxt.kind == "IDENT":
                        sub.append(self.next())
                        bracket.append(False)
                    elif nxt.kind == "[":
                        self.next()
                        itok = self.peek()
                        if itok.kind not in ("INT", "IDENT"):
                            raise _Bail(itok.diag("expected a direction index"))
                        sub.append(self.next())
                        bracket.append(True)
                        self.expect("]", "']'")
                    else:
                        break
                if not sub:
                    raise _Bail(us.diag("expected a jet subscript after '_'"))
            return Name(tok, indices, sub, bracket)
        shown = "end of file" if tok.kind == "EOF" else ("newline" if tok.kind == "NEWLINE" else repr(tok.text))
        raise _Bail(tok.diag(f"expected an expression, found {shown}"))


# ---------------------------------------------------------------- semantic pass


class _Semantic:
    def __init__(self):
        self.diags: list[Diagnostic] = []
        self.coords: list[str] = []
        self.fields: list[str] = []
        self.field_ranks: dict[str, int] = {}
        self.functions: list[str] = []
        self.constants: list[str] = []
        self.order: int | None = None
        self.xi: str | None = None
        self.gauge: list[str] = []
        self.r = 1
        self.k = 1
        self.has_params = False
        self.param_ranks: dict[str, int] = {}
        self.param_fields: set[str] = set()
        self.defs: dict[str, dict[tuple[int, ...], Expr]] = {}
        self.def_ranks: dict[str, int] = {}
        self.def_spec: dict[str, dict[tuple[int, ...], int]] = {}
        self.lift: dict[str, Expr] = {}
        self.lagrangians: dict[str, Expr] = {}
        self.sources: dict[str, dict[str, Expr]] = {}
        self.names: dict[str, str] = {}
        self.jet_uses: list[tuple[Token, int]] = []
        self.have_bundle = False
        self.big: BundleSpec | None = None

    @property
    def n(self) -> int:
        return len(self.coords)

    def error(self, tok: Token, message: str):
        raise _Bail(tok.diag(message))

    def declare(self, tok: Token, kind: str):
        name = tok.text
        if name in RESERVED or name in BLOCKS:
            self.error(tok, f"{name!r} is reserved")
        if name in self.names:
            self.error(tok, f"{name!r} is already declared as a {self.names[name]}")
        self.names[name] = kind

    # -- blocks

    def run(self, stmts: list):
        for st in stmts:
            kind, tok = st[0], st[1]
            try:
                if kind != "bundle" and not self.have_bundle:
                    self.error(tok, "the bundle block must come first")
                getattr(self, "do_" + kind)(*st[1:])
            except _Bail as b:
                self.diags.append(b.diag)
        if not self.have_bundle and not self.diags:
            self.diags.append(Diagnostic("error", "missing bundle block", 1, 1, 1))

    def do_bundle(self, tok, items):
        if self.have_bundle:
            self.error(tok, "duplicate bundle block")
        by_kw: dict[str, list] = {}
        for kw, args in items:
            if kw.text in by_kw:
                self.diags.append(kw.diag(f"duplicate {kw.text!r} entry"))
                continue
            by_kw[kw.text] = (kw, args)
        if "base" not in by_kw:
            self.error(tok, "bundle block needs a 'base' entry")
        for kwname in ("base", "functions", "constants"):
            if kwname not in by_kw:
                continue
            kw, args = by_kw[kwname]
            for a in args:
                if not isinstance(a, Lhs) or a.indices:
                    t = a if isinstance(a, Token) else a.tok
                    self.diags.append(t.diag(f"expected a plain name in {kwname!r}"))
                    continue
                try:
                    self.declare(a.tok, {"base": "base coordinate", "functions": "function",
                                         "constants": "constant"}[kwname])
                except _Bail as b:
                    self.diags.append(b.diag)
                    continue
                {"base": self.coords, "functions": self.functions, "constants": self.constants}[kwname].append(
                    a.tok.text)
        if not self.coords:
            self.error(tok, "bundle needs at least one base coordinate")
        if "fields" not in by_kw:
            self.error(tok, "bundle block needs a 'fields' entry")
        kw, args = by_kw["fields"]
        for a in args:
            if not isinstance(a, Lhs):
                self.diags.append(a.diag("expected a field name"))
                continue
            try:
                self.fields.extend(self.expand_decl(a, self.field_ranks, "field"))
            except _Bail as b:
                self.diags.append(b.diag)
        if "order" in by_kw:
            kw, args = by_kw["order"]
            if len(args) != 1 or not isinstance(args[0], Token):
                self.error(kw, "order takes one integer")
            self.order = int(args[0].text)
            if self.order < 1:
                self.error(args[0], "order must be at least 1")
        self.have_bundle = True
        self.big = BundleSpec(tuple(self.coords), tuple(self.fields) or ("_",), 10_000)

    def expand_decl(self, a: Lhs, ranks: dict, kind: str) -> list[str]:
        name = a.tok.text
        rank = len(a.indices)
        if name in ranks:
            if ranks[name] != rank:
                self.error(a.tok, f"{name!r} was declared with {ranks[name]} indices")
        else:
            self.declare(a.tok, kind)
            ranks[name] = rank
        out = []
        for key, _ in self.index_values(a.indices, {}):
            full = name + "".join(f"[{i}]" for i in key)
            if full in self.fields or full in self.param_fields:
                self.error(a.tok, f"{full} declared twice")
            out.append(full)
        return out

    def index_values(self, indices: list[Token], env: Mapping[str, int]):
        """Concrete index tuples for a left-hand side; free variables range over ``0..n-1``."""
        free = []
        for t in indices:
            if t.kind == "INT":
                if int(t.text) >= self.n:
                    self.error(t, f"index {t.text} out of range 0..{self.n - 1}")
            elif t.text not in env and t.text not in free:
                free.append(t.text)
        for vals in itertools.product(range(self.n), repeat=len(free)):
            bind = dict(env)
            bind.update(zip(free, vals))
            yield tuple(int(t.text) if t.kind == "INT" else bind[t.text] for t in indices), bind

    def do_params(self, tok, items):
        if self.has_params:
            self.error(tok, "duplicate params block")
        self.has_params = True
        for kw, args in items:
            try:
                if kw.text in ("r", "k"):
                    if len(args) != 1 or not isinstance(args[0], Token):
                        self.error(kw, f"{kw.text} takes one integer")
                    setattr(self, kw.text, int(args[0].text))
                elif kw.text == "xi":
                    if len(args) != 1 or not isinstance(args[0], Lhs) or args[0].indices:
                        self.error(kw, "xi takes one family name")
                    if self.xi:
                        self.error(kw, "duplicate xi entry")
                    self.declare(args[0].tok, "parameter")
                    self.xi = args[0].tok.text
                    self.param_ranks[self.xi] = 1
                    self.param_fields.update(f"{self.xi}[{mu}]" for mu in range(self.n))
                else:
                    for a in args:
                        if not isinstance(a, Lhs) or a.indices:
                            t = a if isinstance(a, Token) else a.tok
                            self.error(t, "gauge parameters are plain names")
                        self.declare(a.tok, "parameter")
                        self.param_ranks[a.tok.text] = 0
                        self.param_fields.add(a.tok.text)
                        self.gauge.append(a.tok.text)
            except _Bail as b:
                self.diags.append(b.diag)
        if self.r > self.k:
            self.error(tok, f"gauge order r={self.r} exceeds base order k={self.k}")
        if self.r < 0 or self.k < 1:
            self.error(tok, "need r >= 0 and k >= 1")

    def do_lift(self, tok, items):
        if not self.has_params:
            self.error(tok, "a lift block needs a preceding params block")
        for lhs, rhs in items:
            try:
                if lhs.tok.text not in self.field_ranks:
                    self.error(lhs.tok, f"lift target {lhs.tok.text!r} is not a declared field")
                if len(lhs.indices) != self.field_ranks[lhs.tok.text]:
                    self.error(lhs.tok, f"{lhs.tok.text!r} takes {self.field_ranks[lhs.tok.text]} indices")
                for key, env in self.index_values(lhs.indices, {}):
                    full = lhs.tok.text + "".join(f"[{i}]" for i in key)
                    if full in self.lift:
                        self.error(lhs.tok, f"lift of {full} given twice")
                    self.lift[full] = self.eval(rhs, env, True)
            except _Bail as b:
                self.diags.append(b.diag)

    def do_defs(self, tok, items):
        for lhs, rhs in items:
            try:
                name = lhs.tok.text
                rank = len(lhs.indices)
                if name not in self.defs:
                    self.declare(lhs.tok, "definition")
                    self.defs[name] = {}
                    self.def_spec[name] = {}
                    self.def_ranks[name] = rank
                elif self.def_ranks[name] != rank:
                    self.error(lhs.tok, f"{name!r} was defined with {self.def_ranks[name]} indices")
                specificity = sum(t.kind == "INT" for t in lhs.indices)
                table, spec = self.defs[name], self.def_spec[name]
                new = {}
                for key, env in self.index_values(lhs.indices, {}):
                    have = spec.get(key)
                    if have is not None and have > specificity:
                        continue
                    if have == specificity:
                        self.error(lhs.tok, f"{name}{''.join(f'[{i}]' for i in key)} is defined twice")
                    new[key] = self.eval(rhs, env, True)
                for key, val in new.items():
                    table[key] = val
                    spec[key] = specificity
            except _Bail as b:
                self.diags.append(b.diag)

    def do_lagrangian(self, tok, name, e):
        label = name.text if name is not None else "L"
        where = name or tok
        if label in self.lagrangians:
            self.error(where, f"lagrangian {label!r} defined twice")
        self.lagrangians[label] = self.eval(e, {}, False, where)

    def do_source(self, tok, name, items):
        if name.text in self.sources:
            self.error(name, f"source {name.text!r} defined twice")
        comps: dict[str, Expr] = {}
        self.sources[name.text] = comps
        for lhs, rhs in items:
            try:
                if lhs.tok.text not in self.field_ranks:
                    self.error(lhs.tok, f"{lhs.tok.text!r} is not a declared field")
                if len(lhs.indices) != self.field_ranks[lhs.tok.text]:
                    self.error(lhs.tok, f"{lhs.tok.text!r} takes {self.field_ranks[lhs.tok.text]} indices")
                for key, env in self.index_values(lhs.indices, {}):
                    full = lhs.tok.text + "".join(f"[{i}]" for i in key)
                    if full in comps:
                        self.error(lhs.tok, f"component {full} given twice")
                    comps[full] = self.eval(rhs, env, False, lhs.tok)
            except _Bail as b:
                self.diags.append(b.diag)

    # -- expressions

    def eval(self, node, env, allow_params: bool, where: Token | None = None) -> Expr:
        out = self._eval(node, env, allow_params)
        if not allow_params and out.jets(self.param_fields):
            self.error(where or _first_token(node), "parameter fields may only appear in lift and defs blocks")
        return out

    def _index(self, t: Token, env) -> int:
        if t.kind == "INT":
            v = int(t.text)
            if v >= self.n:
                self.error(t, f"index {v} out of range 0..{self.n - 1}")
            return v
        if t.text not in env:
            self.error(t, f"unbound index variable {t.text!r}")
        return env[t.text]

    def _eval(self, node, env, allow_params) -> Expr:
        if isinstance(node, Num):
            return Expr.const(node.value)
        if isinstance(node, Neg):
            return -self._eval(node.x, env, allow_params)
        if isinstance(node, Bin):
            a = self._eval(node.left, env, allow_params)
            b = self._eval(node.right, env, allow_params)
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            try:
                return a / b
            except ZeroDivisionError:
                self.error(node.tok, "division by zero")
            except ValueError:
                self.error(node.tok, "can only divide by a single term")
        if isinstance(node, Pow):
            base = self._eval(node.base, env, allow_params)
            try:
                return base ** node.exp
            except ZeroDivisionError:
                self.error(node.tok, "negative power of zero")
            except ValueError:
                self.error(node.tok, "negative powers need a single-term base")
        if isinstance(node, Sum):
            if node.var.text in self.names:
                self.error(node.var, f"index variable {node.var.text!r} shadows a declared name")
            out = Expr()
            for v in range(self.n):
                inner = dict(env)
                inner[node.var.text] = v
                out = out + self._eval(node.body, inner, allow_params)
            return out
        return self._name(node, env, allow_params)

    def _name(self, node: Name, env, allow_params) -> Expr:
        tok = node.tok
        ident = tok.text
        idx = tuple(self._index(t, env) for t in node.indices)
        kind = self.names.get(ident)
        zero = MultiIndex.zero(self.n)
        if kind is None:
            if ident in env:
                self.error(tok, f"index variable {ident!r} used as a value")
            self.error(tok, f"undeclared identifier {ident!r}")
        if kind in ("base coordinate", "function", "constant") and idx:
            self.error(tok, f"{ident!r} takes no indices")
        if kind == "base coordinate":
            value = Expr.of(BaseCoord(self.coords.index(ident)))
        elif kind == "function":
            value = Expr.of(FormalFn(ident, zero))
        elif kind == "constant":
            value = Expr.of(Param(ident))
        elif kind in ("field", "parameter"):
            ranks = self.field_ranks if kind == "field" else self.param_ranks
            if len(idx) != ranks[ident]:
                self.error(tok, f"{ident!r} takes {ranks[ident]} indices, got {len(idx)}")
            full = ident + "".join(f"[{i}]" for i in idx)
            if kind == "parameter" and not allow_params:
                self.error(tok, "parameter fields may only appear in lift and defs blocks")
            if kind == "field" and full not in self.fields:
                self.error(tok, f"no field {full}")
            value = Expr.of(JetVar(full, zero))
        else:  # definition
            if len(idx) != self.def_ranks[ident]:
                self.error(tok, f"{ident!r} takes {self.def_ranks[ident]} indices, got {len(idx)}")
            table = self.defs[ident]
            if idx not in table:
                self.error(tok, f"{ident}{''.join(f'[{i}]' for i in idx)} is not defined")
            value = table[idx]
        for t, br in zip(node.sub, node.sub_bracket):
            for sigma in self._directions(t, br, env):
                value = total_derivative(value, sigma, self.big)
        if node.sub:
            order = value.jet_order(self.fields)
            if order > 0:
                self.jet_uses.append((tok, order))
        return value

    def _directions(self, t: Token, bracket: bool, env) -> list[int]:
        if bracket:
            return [self._index(t, env)]
        if any(len(c) != 1 for c in self.coords):
            self.error(t, "letter subscripts need single-letter coordinate names; use _[i]")
        out = []
        for ch in t.text:
            if ch not in self.coords:
                self.error(t, f"{ch!r} in subscript is not a base coordinate")
            out.append(self.coords.index(ch))
        return out

    # -- result

    def document(self) -> ModelDocument:
        exprs = list(self.lagrangians.values())
        for comps in self.sources.values():
            exprs.extend(comps.values())
        top = max((e.jet_order(self.fields) for e in exprs), default=0)
        if self.order is None:
            self.order = max(2, 2 * top)
        for tok, order in self.jet_uses:
            if order > self.order:
                self.diags.append(tok.diag(f"jet order {order} exceeds declared cap {self.order}"))
        if self.diags:
            raise ModelError(sorted(self.diags, key=lambda d: (d.line, d.column)))
        spec = BundleSpec(tuple(self.coords), tuple(self.fields), self.order,
                          tuple(self.functions), tuple(self.constants))
        gauge = GaugeModel(self.n, self.xi, tuple(self.gauge), self.r, self.k) if self.has_params else None
        return ModelDocument(spec, gauge, dict(self.lift), {k: dict(v) for k, v in self.defs.items()},
                             dict(self.lagrangians), {k: dict(v) for k, v in self.sources.items()})


def _first_token(node) -> Token:
    if isinstance(node, (Num, Name)):
        return node.tok
    if isinstance(node, Bin):
        return _first_token(node.left)
    if isinstance(node, Pow):
        return _first_token(node.base)
    return node.tok


def parse_model(text: str) -> ModelDocument:
    """Parse a model file; raises :class:`ModelError` carrying every diagnostic."""
    syntax = _Syntax(tokenize(text))
    stmts = syntax.document()
    sem = _Semantic()
    if syntax.diags:
        raise ModelError(syntax.diags)
    sem.run(stmts)
    return sem.document()


def _seeded(doc: ModelDocument) -> _Semantic:
    sem = _Semantic()
    spec = doc.spec
    sem.coords = list(spec.coords)
    for c in spec.coords:
        sem.names[c] = "base coordinate"
    for f in spec.functions:
        sem.names[f] = "function"
    sem.functions = list(spec.functions)
    for c in spec.constants:
        sem.names[c] = "constant"
    sem.constants = list(spec.constants)
    sem.fields = list(spec.fields)
    for f in spec.fields:
        head = f.split("[", 1)[0]
        sem.names[head] = "field"
        sem.field_ranks[head] = f.count("[")
    if doc.gauge is not None:
        g = doc.gauge
        sem.has_params = True
        if g.xi:
            sem.names[g.xi] = "parameter"
            sem.param_ranks[g.xi] = 1
        for e in g.gauge:
            sem.names[e] = "parameter"
            sem.param_ranks[e] = 0
        sem.param_fields = set(g.params)
    for name, table in doc.defs.items():
        sem.names[name] = "definition"
        sem.defs[name] = dict(table)
        sem.def_ranks[name] = len(next(iter(table))) if table else 0
    sem.order = spec.max_order
    sem.have_bundle = True
    sem.big = spec.with_order(10_000)
    return sem


def parse_expr(text: str, doc: ModelDocument, allow_params: bool = True) -> Expr:
    """Parse one expression against the declarations of ``doc``."""
    syntax = _Syntax(tokenize(text))
    try:
        node = syntax.expr()
        if not syntax.at("EOF"):
            syntax.skip_newlines()
            if not syntax.at("EOF"):
                raise _Bail(syntax.peek().diag(f"unexpected {syntax.peek().text!r} after expression"))
    except _Bail as b:
        raise ModelError([b.diag]) from None
    sem = _seeded(doc)
    try:
        out = sem.eval(node, {}, allow_params)
    except _Bail as b:
        raise ModelError([b.diag]) from None
    for tok, order in sem.jet_uses:
        if order > sem.order:
            raise ModelError([tok.diag(f"jet order {order} exceeds declared cap {sem.order}")])
    return out
