"""Exact expression trees over jet variables.

Expressions are immutable trees with rational constants kept exact
(``fractions.Fraction``), so equality of two expressions can be decided
structurally and, after normalization, semantically.  Generators are
plain variables (independent, dependent, parameter) and jet variables
(partial derivatives of a dependent variable with respect to the
independent ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

INDEPENDENT = "independent"
DEPENDENT = "dependent"
PARAMETER = "parameter"

_KIND_RANK = {INDEPENDENT: 0, DEPENDENT: 1, PARAMETER: 2}

FUNCTION_NAMES = ("sin", "cos", "sqrt", "arctan")


class ExprError(Exception):
    """Base class for expression-level failures."""


class JetOrderError(ExprError):
    """A requested derivative exceeds the context's maximum jet order."""


class SubstitutionCycleError(ExprError):
    """The substitution bindings contain a cyclic dependency."""


class EvalDomainError(ExprError):
    """Numeric evaluation left the domain (sqrt of a negative, division by zero)."""


class UnboundGeneratorError(ExprError):
    """Numeric evaluation met a generator with no binding."""


@dataclass(frozen=True)
class VarId:
    """A declared variable: independent, dependent, or parameter."""

    kind: str
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class JetVar:
    """A derivative of a dependent variable.

    ``orders`` maps independent-variable names to derivative counts and is
    stored as a tuple sorted alphabetically, so mixed derivatives have a
    single canonical spelling (the suffix of ``u_tx`` and ``u_xt`` is the
    same jet variable, written ``u_tx``).
    """

    dep: VarId
    orders: tuple[tuple[str, int], ...]

    @property
    def total_order(self) -> int:
        return sum(n for _, n in self.orders)

    def order_in(self, indep_name: str) -> int:
        for name, n in self.orders:
            if name == indep_name:
                return n
        return 0

    @property
    def suffix(self) -> str:
        return "".join(name * n for name, n in self.orders)

    @property
    def name(self) -> str:
        return f"{self.dep.name}_{self.suffix}"

    def __repr__(self) -> str:
        return self.name


Gen = Union[VarId, JetVar]


def ref_sort_key(g: Gen) -> tuple:
    """Deterministic total order over plain and jet variables."""
    if isinstance(g, VarId):
        return (0, _KIND_RANK.get(g.kind, 9), g.name, "")
    return (1, g.dep.name, g.total_order, g.suffix)


class Expr:
    """Base node.  Subclasses are frozen dataclasses; trees are immutable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, exponent):
        return pow_(self, exponent)

    def __neg__(self):
        return neg(self)

    def __repr__(self) -> str:
        return render(self)


@dataclass(frozen=True, repr=False)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True, repr=False)
class Var(Expr):
    ref: Gen


@dataclass(frozen=True, repr=False)
class Sum(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True, repr=False)
class Prod(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, repr=False)
class FuncApp(Expr):
    fn: str
    arg: Expr


def const(value) -> Const:
    return Const(Fraction(value))


ZERO = const(0)
ONE = const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    raise TypeError(f"cannot interpret {x!r} as an expression")


def var(ref: Gen) -> Var:
    return Var(ref)


def add(*terms) -> Expr:
    flat: list[Expr] = []
    rat = Fraction(0)
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Sum):
            for s in t.terms:
                if isinstance(s, Const):
                    rat += s.value
                else:
                    flat.append(s)
        elif isinstance(t, Const):
            rat += t.value
        else:
            flat.append(t)
    if rat != 0:
        flat.append(const(rat))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    rat = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Prod):
            for g in f.factors:
                if isinstance(g, Const):
                    rat *= g.value
                else:
                    flat.append(g)
        elif isinstance(f, Const):
            rat *= f.value
        else:
            flat.append(f)
    if rat == 0:
        return ZERO
    if rat != 1:
        flat.insert(0, const(rat))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Prod(tuple(flat))


def neg(e: Expr) -> Expr:
    return mul(const(-1), e)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


def pow_(base, exponent: int) -> Expr:
    base = as_expr(base)
    if not isinstance(exponent, int):
        raise TypeError("exponents must be integers")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and exponent < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return const(base.value**exponent)
    if isinstance(base, Pow):
        return pow_(base.base, base.exponent * exponent)
    return Pow(base, exponent)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("division by zero constant")
        return mul(const(Fraction(1) / b.value), a)
    return mul(a, pow_(b, -1))


def _sqrt_fold(value: Fraction) -> Fraction | None:
    if value < 0:
        return None
    pn = math.isqrt(value.numerator)
    pd = math.isqrt(value.denominator)
    if pn * pn == value.numerator and pd * pd == value.denominator:
        return Fraction(pn, pd)
    return None


def func(fn: str, arg) -> Expr:
    arg = as_expr(arg)
    if fn not in FUNCTION_NAMES:
        raise ValueError(f"unknown function {fn!r}")
    if isinstance(arg, Const):
        if fn == "sin" and arg.value == 0:
            return ZERO
        if fn == "cos" and arg.value == 0:
            return ONE
        if fn == "arctan" and arg.value == 0:
            return ZERO
        if fn == "sqrt":
            if arg.value < 0:
                raise EvalDomainError("sqrt of a negative constant")
            folded = _sqrt_fold(arg.value)
            if folded is not None:
                return const(folded)
    return FuncApp(fn, arg)


def sin_(arg) -> Expr:
    return func("sin", arg)


def cos_(arg) -> Expr:
    return func("cos", arg)


def sqrt_(arg) -> Expr:
    return func("sqrt", arg)


def arctan_(arg) -> Expr:
    return func("arctan", arg)


# ---------------------------------------------------------------------------
# rendering


_PREC_SUM = 10
_PREC_PROD = 20
_PREC_POW = 30
_PREC_ATOM = 40


def _prec(e: Expr) -> int:
    if isinstance(e, Sum):
        return _PREC_SUM
    if isinstance(e, Prod):
        return _PREC_PROD
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Const) and e.value < 0:
        return _PREC_SUM
    return _PREC_ATOM


def _wrap(e: Expr, parent_prec: int) -> str:
    s = render(e)
    if _prec(e) < parent_prec:
        return f"({s})"
    return s


def _split_negative(t: Expr) -> tuple[bool, Expr]:
    """Peel a negative rational coefficient off a sum term for display."""
    if isinstance(t, Const) and t.value < 0:
        return True, const(-t.value)
    if isinstance(t, Prod) and isinstance(t.factors[0], Const) and t.factors[0].value < 0:
        head = const(-t.factors[0].value)
        return True, mul(head, *t.factors[1:])
    return False, t


def render(e: Expr) -> str:
    """Render an expression to text in the input grammar.

    Round trip: parsing the rendered text reproduces the expression tree
    exactly (both the parser and this renderer go through the same
    canonicalizing constructors).
    """
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.ref.name if isinstance(e.ref, JetVar) else e.ref.name
    if isinstance(e, Sum):
        parts = [render(e.terms[0])]
        for t in e.terms[1:]:
            negative, body = _split_negative(t)
            parts.append((" - " if negative else " + ") + render(body))
        return "".join(parts)
    if isinstance(e, Prod):
        factors = list(e.factors)
        prefix = ""
        if isinstance(factors[0], Const):
            c = factors[0].value
            if c == -1:
                prefix = "-"
                factors = factors[1:]
        if not factors:
            return "-1"
        return prefix + "*".join(_wrap(f, _PREC_PROD) for f in factors)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_POW + 1)}^{e.exponent}"
    if isinstance(e, FuncApp):
        return f"{e.fn}({render(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# structural queries


def collect_refs(e: Expr, out: set | None = None) -> set[Gen]:
    """All plain and jet variables appearing in the tree."""
    if out is None:
        out = set()
    if isinstance(e, Var):
        out.add(e.ref)
    elif isinstance(e, Sum):
        for t in e.terms:
            collect_refs(t, out)
    elif isinstance(e, Prod):
        for f in e.factors:
            collect_refs(f, out)
    elif isinstance(e, Pow):
        collect_refs(e.base, out)
    elif isinstance(e, FuncApp):
        collect_refs(e.arg, out)
    return out


def jet_order(e: Expr) -> int:
    """Highest total derivative order of any jet variable in the tree."""
    best = 0
    for g in collect_refs(e):
        if isinstance(g, JetVar):
            best = max(best, g.total_order)
    return best


def is_zero_expr(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


# ---------------------------------------------------------------------------
# calculus on the tree


def partial(e: Expr, g: Gen) -> Expr:
    """Formal partial derivative treating every generator as independent.

    In particular ``partial(u_x, u) == 0``: a jet variable is its own
    generator, and explicit dependence is all that counts.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.ref == g else ZERO
    if isinstance(e, Sum):
        return add(*(partial(t, g) for t in e.terms))
    if isinstance(e, Prod):
        pieces = []
        for i, f in enumerate(e.factors):
            df = partial(f, g)
            if is_zero_expr(df):
                continue
            rest = e.factors[:i] + e.factors[i + 1 :]
            pieces.append(mul(df, *rest))
        return add(*pieces)
    if isinstance(e, Pow):
        db = partial(e.base, g)
        if is_zero_expr(db):
            return ZERO
        return mul(const(e.exponent), pow_(e.base, e.exponent - 1), db)
    if isinstance(e, FuncApp):
        da = partial(e.arg, g)
        if is_zero_expr(da):
            return ZERO
        if e.fn == "sin":
            return mul(cos_(e.arg), da)
        if e.fn == "cos":
            return mul(const(-1), sin_(e.arg), da)
        if e.fn == "sqrt":
            return mul(const(Fraction(1, 2)), pow_(sqrt_(e.arg), -1), da)
        if e.fn == "arctan":
            return mul(pow_(add(ONE, pow_(e.arg, 2)), -1), da)
    raise TypeError(f"not an expression node: {e!r}")


def _check_acyclic(bindings: Mapping[Gen, Expr]) -> None:
    keys = set(bindings)
    edges = {g: collect_refs(rhs) & keys for g, rhs in bindings.items()}
    WHITE, GREY, BLACK = 0, 1, 2
    state = dict.fromkeys(keys, WHITE)

    def visit(node, trail):
        state[node] = GREY
        for nxt in sorted(edges[node], key=ref_sort_key):
            if state[nxt] == GREY:
                cycle = " -> ".join(str(x) for x in trail + [node, nxt])
                raise SubstitutionCycleError(f"cyclic substitution: {cycle}")
            if state[nxt] == WHITE:
                visit(nxt, trail + [node])
        state[node] = BLACK

    for k in sorted(keys, key=ref_sort_key):
        if state[k] == WHITE:
            visit(k, [])


def substitute(e: Expr, bindings: Mapping[Gen, Expr], *, checked: bool = True) -> Expr:
    """Simultaneous substitution of generators by expressions.

    Bindings must be acyclic as a dependency graph; a cycle such as
    ``{u: v + 1, v: u}`` raises :class:`SubstitutionCycleError`.
    """
    if checked:
        _check_acyclic(bindings)
    return _subst(e, bindings)


def _subst(e: Expr, bindings: Mapping[Gen, Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        hit = bindings.get(e.ref)
        return hit if hit is not None else e
    if isinstance(e, Sum):
        return add(*(_subst(t, bindings) for t in e.terms))
    if isinstance(e, Prod):
        return mul(*(_subst(f, bindings) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(_subst(e.base, bindings), e.exponent)
    if isinstance(e, FuncApp):
        return func(e.fn, _subst(e.arg, bindings))
    raise TypeError(f"not an expression node: {e!r}")


def eval_numeric(e: Expr, bindings: Mapping[Gen, float]) -> float:
    """Evaluate to a float.  Every generator present must be bound."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(bindings[e.ref])
        except KeyError:
            raise UnboundGeneratorError(f"no value bound for {e.ref}") from None
    if isinstance(e, Sum):
        return sum(eval_numeric(t, bindings) for t in e.terms)
    if isinstance(e, Prod):
        out = 1.0
        for f in e.factors:
            out *= eval_numeric(f, bindings)
        return out
    if isinstance(e, Pow):
        base = eval_numeric(e.base, bindings)
        if base == 0.0 and e.exponent < 0:
            raise EvalDomainError(f"zero base with negative exponent in {render(e)}")
        return base**e.exponent
    if isinstance(e, FuncApp):
        a = eval_numeric(e.arg, bindings)
        if e.fn == "sin":
            return math.sin(a)
        if e.fn == "cos":
            return math.cos(a)
        if e.fn == "sqrt":
            if a < 0:
                raise EvalDomainError(f"sqrt of negative value {a} in {render(e)}")
            return math.sqrt(a)
        if e.fn == "arctan":
            return math.atan(a)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# declaration context


class Context:
    """Declared variables plus the jet-order cap.

    Independent variables must be single lowercase letters because jet
    suffixes are words over those letters (``u_tx``).
    """

    def __init__(
        self,
        independents: Iterable[str],
        dependents: Iterable[str],
        parameters: Iterable[str] = (),
        max_order: int = 4,
    ) -> None:
        self.independents = tuple(VarId(INDEPENDENT, n) for n in independents)
        self.dependents = tuple(VarId(DEPENDENT, n) for n in dependents)
        self.parameters = tuple(VarId(PARAMETER, n) for n in parameters)
        self.max_order = int(max_order)
        if self.max_order < 1:
            raise ValueError("max_order must be at least 1")
        names: dict[str, VarId] = {}
        for v in self.independents + self.dependents + self.parameters:
            if not v.name.isidentifier() or not v.name[0].islower():
                raise ValueError(f"bad variable name {v.name!r}")
            if v.name in names:
                raise ValueError(f"duplicate variable name {v.name!r}")
            if v.name in FUNCTION_NAMES:
                raise ValueError(f"{v.name!r} is a reserved function name")
            names[v.name] = v
        for v in self.independents:
            if len(v.name) != 1:
                raise ValueError(
                    f"independent variable {v.name!r} must be a single letter"
                )
        self._by_name = names

    def lookup(self, name: str) -> VarId | None:
        return self._by_name.get(name)

    def __getitem__(self, name: str) -> VarId:
        v = self.lookup(name)
        if v is None:
            raise KeyError(name)
        return v

    def is_independent_letter(self, ch: str) -> bool:
        v = self._by_name.get(ch)
        return v is not None and v.kind == INDEPENDENT

    def jet(self, dep, suffix: str) -> JetVar:
        """Jet variable from a suffix word, e.g. ``jet(u, 'xt')`` == u_tx."""
        if isinstance(dep, str):
            dep = self[dep]
        if dep.kind != DEPENDENT:
            raise ValueError(f"cannot take derivatives of non-dependent {dep.name!r}")
        counts: dict[str, int] = {}
        for ch in suffix:
            if not self.is_independent_letter(ch):
                raise ValueError(
                    f"bad derivative suffix {suffix!r}: {ch!r} is not an "
                    "independent variable"
                )
            counts[ch] = counts.get(ch, 0) + 1
        orders = tuple(sorted(counts.items()))
        total = sum(counts.values())
        if total < 1:
            raise ValueError("empty derivative suffix")
        if total > self.max_order:
            raise JetOrderError(
                f"jet order {total} exceeds maximum {self.max_order}"
            )
        return JetVar(dep, orders)

    def bump(self, g: Gen, wrt: VarId) -> JetVar:
        """One more derivative of a dependent-like generator."""
        if wrt.kind != INDEPENDENT:
            raise ValueError(f"cannot differentiate with respect to {wrt.name!r}")
        if isinstance(g, VarId):
            if g.kind != DEPENDENT:
                raise ValueError(f"{g.name!r} has no jet variables")
            counts = {wrt.name: 1}
        else:
            counts = dict(g.orders)
            counts[wrt.name] = counts.get(wrt.name, 0) + 1
        orders = tuple(sorted(counts.items()))
        total = sum(counts.values())
        if total > self.max_order:
            name = g.name if isinstance(g, JetVar) else g.name
            raise JetOrderError(
                f"differentiating {name} past maximum jet order {self.max_order}"
            )
        dep = g if isinstance(g, VarId) else g.dep
        return JetVar(dep, orders)

    def parse(self, text: str) -> Expr:
        from .parse import parse

        return parse(text, self)
