"""Exact symbolic scalars over jet coordinates.

An :class:`Expr` is a finite sum of terms ``c * a1^e1 * ... * ak^ek`` with exact
rational ``c`` and atoms drawn from base coordinates, jet variables, named
constants and formal background functions of the base point.  Expressions are
immutable and always held in normal form, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import comb, factorial, prod
from typing import Callable, Iterable, Iterator, Mapping, Union

Number = Union[int, Fraction]

BASE, PARAM, FUNC, JET = 0, 1, 2, 3


class MultiIndex(tuple):
    """Derivative counts per base direction, e.g. ``(2, 0)`` for ``_tt`` on (t, x)."""

    __slots__ = ()

    def __new__(cls, counts: Iterable[int] = ()):
        counts = tuple(counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative entry in multi-index {counts}")
        return super().__new__(cls, counts)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, sigma: int) -> "MultiIndex":
        return cls(1 if k == sigma else 0 for k in range(n))

    @classmethod
    def of_order(cls, n: int, order: int) -> list["MultiIndex"]:
        """All multi-indices of dimension ``n`` with ``|alpha| == order``, colex-sorted."""
        if n == 1:
            return [cls((order,))]
        out = []
        for last in range(order + 1):
            for head in cls.of_order(n - 1, order - last):
                out.append(cls(head + (last,)))
        return out

    @classmethod
    def up_to(cls, n: int, order: int) -> list["MultiIndex"]:
        return [a for k in range(order + 1) for a in cls.of_order(n, k)]

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        return prod(factorial(c) for c in self)

    def plus(self, other: Iterable[int]) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def minus(self, other: Iterable[int]) -> "MultiIndex":
        return MultiIndex(a - b for a, b in zip(self, other))

    def bump(self, sigma: int, by: int = 1) -> "MultiIndex":
        lst = list(self)
        lst[sigma] += by
        return MultiIndex(lst)

    def dominates(self, other: Iterable[int]) -> bool:
        """Componentwise ``other <= self``."""
        return all(b <= a for a, b in zip(self, other))

    def sub_indices(self) -> Iterator["MultiIndex"]:
        """Every ``beta`` with ``beta <= self`` componentwise."""
        if not self:
            yield MultiIndex()
            return
        for rest in MultiIndex(self[1:]).sub_indices():
            for c in range(self[0] + 1):
                yield MultiIndex((c,) + tuple(rest))

    def directions(self) -> list[int]:
        """Direction list with repetition, e.g. ``(2, 1) -> [0, 0, 1]``."""
        return [s for s, c in enumerate(self) for _ in range(c)]

    def sort_key(self) -> tuple:
        return (self.order, tuple(reversed(self)))

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)})"


def choose(alpha: Iterable[int], beta: Iterable[int]) -> int:
    """Multi-index binomial ``alpha! / (beta! (alpha-beta)!)``; zero unless beta <= alpha."""
    out = 1
    for a, b in zip(alpha, beta):
        if b > a:
            return 0
        out *= comb(a, b)
    return out


# ---------------------------------------------------------------- atoms


class Atom:
    """Interned symbol.  Subclasses fix the kind; instances are unique per key."""

    __slots__ = ("name", "index", "key", "_hash")
    kind = -1
    _cache: dict = {}

    def __new__(cls, name: str, index: tuple):
        ck = (cls.kind, name, index)
        hit = Atom._cache.get(ck)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.name = name
        self.index = index
        if isinstance(index, MultiIndex):
            self.key = (cls.kind, name) + index.sort_key()
        else:
            self.key = (cls.kind, name, 0, index)
        self._hash = hash(ck)
        Atom._cache[ck] = self
        return self

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return self.key < other.key

    def __reduce__(self):
        return (_rebuild_atom, (self.kind, self.name, self.index))


class BaseCoord(Atom):
    __slots__ = ()
    kind = BASE

    def __new__(cls, sigma: int):
        return super().__new__(cls, "", (sigma,))

    @property
    def sigma(self) -> int:
        return self.index[0]

    def __repr__(self):
        return f"BaseCoord({self.sigma})"


class Param(Atom):
    __slots__ = ()
    kind = PARAM

    def __new__(cls, name: str):
        return super().__new__(cls, name, ())

    def __repr__(self):
        return f"Param({self.name!r})"


class FormalFn(Atom):
    """Undetermined smooth function of the base point, with formal partials."""

    __slots__ = ()
    kind = FUNC

    def __new__(cls, name: str, alpha: Iterable[int]):
        return super().__new__(cls, name, MultiIndex(alpha))

    def __repr__(self):
        return f"FormalFn({self.name!r}, {tuple(self.index)})"


class JetVar(Atom):
    """Jet coordinate ``y^i_alpha``."""

    __slots__ = ()
    kind = JET

    def __new__(cls, field: str, alpha: Iterable[int]):
        return super().__new__(cls, field, MultiIndex(alpha))

    @property
    def field(self) -> str:
        return self.name

    @property
    def alpha(self) -> MultiIndex:
        return self.index

    def __repr__(self):
        return f"JetVar({self.name!r}, {tuple(self.index)})"


_KINDS = {BASE: BaseCoord, PARAM: Param, FUNC: FormalFn, JET: JetVar}


def _rebuild_atom(kind, name, index):
    if kind == BASE:
        return BaseCoord(index[0])
    if kind == PARAM:
        return Param(name)
    return _KINDS[kind](name, index)


# ---------------------------------------------------------------- expressions


def _canon(c: Number) -> Number:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _mono_key(m: tuple) -> tuple:
    return (sum(e for _, e in m), tuple((a.key, e) for a, e in m))


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        s = d.get(a, 0) + e
        if s:
            d[a] = s
        else:
            del d[a]
    return tuple(sorted(d.items(), key=lambda p: p[0].key))


def _mono_replace(m: tuple, atom: Atom, new_exp: int) -> tuple:
    out = [(a, e) for a, e in m if a is not atom]
    if new_exp:
        out.append((atom, new_exp))
        out.sort(key=lambda p: p[0].key)
    return tuple(out)


class Expr:
    """Normalized sum of rational-coefficient monomials.

    Terms live in a dict ``monomial -> coefficient`` with no zero coefficients
    and no repeated atoms inside a monomial, so two expressions are equal iff
    their dicts are.  :meth:`terms` gives the canonical graded-lex ordering.
    """

    __slots__ = ("_t", "_sorted", "_hash")

    def __init__(self, terms: Mapping[tuple, Number] | None = None):
        self._t = dict(terms) if terms else {}
        self._sorted = None
        self._hash = None

    @classmethod
    def _raw(cls, d: dict) -> "Expr":
        e = object.__new__(cls)
        e._t = d
        e._sorted = None
        e._hash = None
        return e

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[tuple, Number]]) -> "Expr":
        """Build from possibly unnormalized ``(factors, coeff)`` pairs."""
        acc: dict = {}
        for factors, c in pairs:
            m = ()
            for a, e in factors:
                m = _mono_mul(m, ((a, e),)) if e else m
            _acc_add(acc, m, c)
        return cls._raw(acc)

    @classmethod
    def const(cls, c: Number) -> "Expr":
        c = _canon(Fraction(c) if isinstance(c, (str, float)) else c)
        return cls._raw({(): c} if c else {})

    @classmethod
    def of(cls, atom: Atom, exp: int = 1) -> "Expr":
        return cls._raw({((atom, exp),): 1} if exp else {(): 1})

    # -- inspection

    def terms(self) -> list[tuple[tuple, Number]]:
        if self._sorted is None:
            self._sorted = sorted(self._t.items(), key=lambda kv: _mono_key(kv[0]))
        return self._sorted

    def is_zero(self) -> bool:
        return not self._t

    def is_constant(self) -> bool:
        return all(not m for m in self._t)

    def constant_value(self) -> Number:
        if not self.is_constant():
            raise ValueError("expression is not constant")
        return self._t.get((), 0)

    def atoms(self) -> set[Atom]:
        return {a for m in self._t for a, _ in m}

    def jets(self, fields: Iterable[str] | None = None) -> set[JetVar]:
        fs = None if fields is None else set(fields)
        return {a for a in self.atoms() if a.kind == JET and (fs is None or a.name in fs)}

    def jet_order(self, fields: Iterable[str] | None = None) -> int:
        """Highest jet order present (``-1`` if no jet atoms of those fields)."""
        return max((a.index.order for a in self.jets(fields)), default=-1)

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._t), default=0)

    def __len__(self):
        return len(self._t)

    def __iter__(self):
        return iter(self.terms())

    # -- arithmetic

    @staticmethod
    def lift(x) -> "Expr":
        if isinstance(x, Expr):
            return x
        if isinstance(x, Atom):
            return Expr.of(x)
        if isinstance(x, (int, Fraction)):
            return Expr.const(x)
        return NotImplemented

    def __add__(self, other):
        other = Expr.lift(other)
        if other is NotImplemented:
            return other
        if not other._t:
            return self
        if not self._t:
            return other
        acc = dict(self._t)
        for m, c in other._t.items():
            _acc_add(acc, m, c)
        return Expr._raw(acc)

    __radd__ = __add__

    def __neg__(self):
        return Expr._raw({m: -c for m, c in self._t.items()})

    def __sub__(self, other):
        other = Expr.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return Expr.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = Expr.lift(other)
        if other is NotImplemented:
            return other
        if not self._t or not other._t:
            return Expr()
        acc: dict = {}
        for m1, c1 in self._t.items():
            for m2, c2 in other._t.items():
                _acc_add(acc, _mono_mul(m1, m2), c1 * c2)
        return Expr._raw(acc)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "Expr":
        if not c:
            return Expr()
        if c == 1:
            return self
        return Expr._raw({m: _canon(v * c) for m, v in self._t.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division of expression by zero")
            return self.scale(Fraction(1, 1) / other)
        other = Expr.lift(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Expr.lift(other) * self.inverse()

    def inverse(self) -> "Expr":
        """Inverse of a single nonzero term; general division is not supported."""
        if not self._t:
            raise ZeroDivisionError("inverse of zero")
        if len(self._t) != 1:
            raise ValueError("only single-term expressions are invertible")
        (m, c), = self._t.items()
        return Expr._raw({tuple((a, -e) for a, e in m): _canon(Fraction(1) / c)})

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Expr.const(1)
        if len(self._t) == 1:
            (m, c), = self._t.items()
            return Expr._raw({tuple((a, e * n) for a, e in m): _canon(c ** n)})
        out, base = Expr.const(1), self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # -- comparison

    def __eq__(self, other):
        if isinstance(other, Expr):
            return self._t == other._t
        if isinstance(other, (int, Fraction)):
            return self._t == ({(): other} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def __bool__(self):
        return bool(self._t)

    def __repr__(self):
        from .dsl.render import render_expr

        return f"Expr({render_expr(self)!r})"

    def __reduce__(self):
        return (Expr.from_terms, (list(self._t.items()),))


def _acc_add(acc: dict, m: tuple, c: Number) -> None:
    s = acc.get(m, 0) + c
    if s:
        acc[m] = _canon(s)
    else:
        acc.pop(m, None)


ExprLike = Union[Expr, Atom, int, Fraction]


def E(x: ExprLike) -> Expr:
    """Coerce a number or atom to an :class:`Expr`."""
    out = Expr.lift(x)
    if out is NotImplemented:
        raise TypeError(f"cannot coerce {type(x).__name__} to Expr")
    return out


def esum(items: Iterable[ExprLike]) -> Expr:
    acc: dict = {}
    for x in items:
        for m, c in E(x)._t.items():
            _acc_add(acc, m, c)
    return Expr._raw(acc)


def normalize(e: Expr) -> Expr:
    """Canonical form; rebuilds from the ordered term list (idempotent)."""
    return Expr.from_terms(e.terms())


def equals_zero(e: Expr) -> bool:
    return e.is_zero()


# ---------------------------------------------------------------- calculus


def partial(e: Expr, atom: Atom) -> Expr:
    """Partial derivative treating every other atom as independent."""
    acc: dict = {}
    for m, c in e._t.items():
        for a, k in m:
            if a is atom:
                _acc_add(acc, _mono_replace(m, a, k - 1), c * k)
                break
    return Expr._raw(acc)


def partial_jet(e: Expr, field: str, alpha: Iterable[int]) -> Expr:
    return partial(e, JetVar(field, alpha))


def partial_base(e: Expr, sigma: int) -> Expr:
    """Explicit x^sigma derivative: base coords and formal functions only."""
    acc: dict = {}
    for m, c in e._t.items():
        for a, k in m:
            if a.kind == BASE and a.index[0] == sigma:
                _acc_add(acc, _mono_replace(m, a, k - 1), c * k)
            elif a.kind == FUNC:
                rest = _mono_replace(m, a, k - 1)
                bumped = FormalFn(a.name, a.index.bump(sigma))
                _acc_add(acc, _mono_mul(rest, ((bumped, 1),)), c * k)
    return Expr._raw(acc)


def substitute(e: Expr, bindings: Mapping[Atom, ExprLike]) -> Expr:
    """Simultaneous substitution of Param/JetVar atoms, result normalized."""
    for a in bindings:
        if a.kind not in (PARAM, JET):
            raise ValueError(f"can only substitute Param or JetVar atoms, got {a!r}")
    if not bindings:
        return e
    binds = {a: E(v) for a, v in bindings.items()}
    powers: dict = {}

    def power(a, k):
        hit = powers.get((a, k))
        if hit is None:
            hit = powers[(a, k)] = binds[a] ** k
        return hit

    acc: dict = {}
    for m, c in e._t.items():
        keep = tuple((a, k) for a, k in m if a not in binds)
        if len(keep) == len(m):
            _acc_add(acc, m, c)
            continue
        piece = Expr._raw({keep: c})
        for a, k in m:
            if a in binds:
                piece = piece * power(a, k)
                if not piece._t:
                    break
        for pm, pc in piece._t.items():
            _acc_add(acc, pm, pc)
    return Expr._raw(acc)


def evaluate(e: Expr, env: Callable[[Atom], object]):
    """Numeric evaluation; ``env`` maps each atom to a float or numpy array."""
    total = 0.0
    cache: dict = {}
    for m, c in e._t.items():
        val = float(c)
        for a, k in m:
            v = cache.get(a)
            if v is None:
                v = cache[a] = env(a)
            val = val * (v ** k if k != 1 else v)
        total = total + val
    return total


def linear_parts(e: Expr, is_target: Callable[[Atom], bool]) -> tuple[dict[Atom, Expr], Expr]:
    """Split ``e = sum_a coeff[a] * a + rest`` over target atoms.

    Raises ValueError if some term is nonlinear in target atoms.
    """
    coeffs: dict = {}
    rest: dict = {}
    for m, c in e._t.items():
        hits = [(a, k) for a, k in m if is_target(a)]
        if not hits:
            _acc_add(rest, m, c)
            continue
        if len(hits) > 1 or hits[0][1] != 1:
            raise ValueError("expression is not linear in the selected atoms")
        a = hits[0][0]
        _acc_add(coeffs.setdefault(a, {}), _mono_replace(m, a, 0), c)
    return {a: Expr._raw(d) for a, d in coeffs.items() if d}, Expr._raw(rest)


def product(items: Iterable[ExprLike]) -> Expr:
    return reduce(lambda a, b: a * b, (E(x) for x in items), Expr.const(1))
