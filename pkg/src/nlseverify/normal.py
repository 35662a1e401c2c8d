"""Canonical polynomial normal form with opaque trig atoms.

A normal form maps monomials over a fixed, totally ordered set of
generators (plain variables, jet variables, and sin/cos atoms) to
nonzero exact rational coefficients.  Two expressions that agree as
polynomial/trig identities normalize to equal forms; the empty form is
the decisive zero test used by every verification predicate.

Trig handling: sine and cosine of a normalized argument become opaque
atoms.  Double angles are expanded on construction (``sin(2A)`` to
``2*sin(A)*cos(A)``, ``cos(2A)`` to ``cos(A)^2 - sin(A)^2``) so one atom
pair per argument family survives, and every occurrence of ``sin(A)^2``
is rewritten to ``1 - cos(A)^2`` before coefficients are collected.
Square roots and arctangents are not polynomial and are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .exprs import (
    Const,
    Expr,
    ExprError,
    FuncApp,
    JetVar,
    Pow,
    Prod,
    Sum,
    Var,
    VarId,
    add,
    const,
    func,
    mul,
    pow_,
    ref_sort_key,
    render,
    var,
)


class NormalizationError(ExprError):
    """The expression is not polynomial in the supported generators."""


@dataclass(frozen=True, repr=False)
class TrigAtom:
    """sin or cos of a canonical (normalized) argument."""

    fn: str  # "sin" | "cos"
    arg: "PolyNF"

    @property
    def name(self) -> str:
        return f"{self.fn}({render(self.arg.to_expr())})"

    def __repr__(self) -> str:
        return self.name


NGen = Union[VarId, JetVar, TrigAtom]
Monomial = tuple[tuple[NGen, int], ...]


def gen_key(g: NGen) -> tuple:
    if isinstance(g, TrigAtom):
        return (2, 0 if g.fn == "sin" else 1, nf_key(g.arg))
    return ref_sort_key(g)


def mono_key(m: Monomial) -> tuple:
    return tuple((gen_key(g), e) for g, e in m)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def nf_key(nf: "PolyNF") -> tuple:
    return tuple(
        (mono_key(m), (c.numerator, c.denominator)) for m, c in nf.terms
    )


@dataclass(frozen=True, repr=False)
class PolyNF:
    """Sorted, fully collected normal form.  Construct via :func:`build_nf`."""

    terms: tuple[tuple[Monomial, Fraction], ...]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> Fraction | None:
        """The rational value if the form is constant, else None."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and not self.terms[0][0]:
            return self.terms[0][1]
        return None

    def to_expr(self) -> Expr:
        pieces = []
        for m, c in self.terms:
            factors = [const(c)]
            for g, e in m:
                base = (
                    func(g.fn, g.arg.to_expr())
                    if isinstance(g, TrigAtom)
                    else var(g)
                )
                factors.append(pow_(base, e))
            pieces.append(mul(*factors))
        return add(*pieces)

    def __repr__(self) -> str:
        return f"<nf {render(self.to_expr())}>"


ZERO_NF = PolyNF(())


def _mono_from_dict(d: dict[NGen, int]) -> Monomial:
    items = [(g, e) for g, e in d.items() if e != 0]
    items.sort(key=lambda ge: gen_key(ge[0]))
    return tuple(items)


def _first_square_sine(m: Monomial) -> TrigAtom | None:
    for g, e in m:
        if isinstance(g, TrigAtom) and g.fn == "sin" and e >= 2:
            return g
    return None


def build_nf(pairs: Iterable[tuple[Monomial, Fraction]]) -> PolyNF:
    """Collect, apply the sin^2 rewrite, drop zeros, sort."""
    work = list(pairs)
    acc: dict[Monomial, Fraction] = {}
    while work:
        m, c = work.pop()
        if c == 0:
            continue
        s = _first_square_sine(m)
        if s is None:
            acc[m] = acc.get(m, Fraction(0)) + c
            continue
        # sin(A)^k -> sin(A)^(k-2) * (1 - cos(A)^2)
        d = dict(m)
        d[s] -= 2
        base = _mono_from_dict(d)
        cos_atom = TrigAtom("cos", s.arg)
        d2 = dict(base)
        d2[cos_atom] = d2.get(cos_atom, 0) + 2
        work.append((base, c))
        work.append((_mono_from_dict(d2), -c))
    terms = [(m, c) for m, c in acc.items() if c != 0]
    terms.sort(key=lambda mc: (mono_degree(mc[0]), mono_key(mc[0])), reverse=True)
    return PolyNF(tuple(terms))


def const_nf(value) -> PolyNF:
    frac = Fraction(value)
    if frac == 0:
        return ZERO_NF
    return PolyNF((((), frac),))


ONE_NF = const_nf(1)


def gen_nf(g: NGen, exp: int = 1) -> PolyNF:
    return build_nf([(((g, exp),), Fraction(1))])


def nf_add(*forms: PolyNF) -> PolyNF:
    pairs: list[tuple[Monomial, Fraction]] = []
    for f in forms:
        pairs.extend(f.terms)
    return build_nf(pairs)


def nf_scale(f: PolyNF, k) -> PolyNF:
    k = Fraction(k)
    return build_nf([(m, c * k) for m, c in f.terms])


def nf_neg(f: PolyNF) -> PolyNF:
    return nf_scale(f, -1)


def nf_sub(a: PolyNF, b: PolyNF) -> PolyNF:
    return nf_add(a, nf_neg(b))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for g, e in b:
        d[g] = d.get(g, 0) + e
    return _mono_from_dict(d)


def nf_mul(a: PolyNF, b: PolyNF) -> PolyNF:
    pairs = []
    for m1, c1 in a.terms:
        for m2, c2 in b.terms:
            pairs.append((_mono_mul(m1, m2), c1 * c2))
    return build_nf(pairs)


def nf_pow(f: PolyNF, n: int) -> PolyNF:
    if n < 0:
        raise ValueError("nf_pow expects a nonnegative exponent")
    out = ONE_NF
    base = f
    while n:
        if n & 1:
            out = nf_mul(out, base)
        base_needed = n >> 1
        if base_needed:
            base = nf_mul(base, base)
        n = base_needed
    return out


def _invert_monomial_form(f: PolyNF, e: Expr) -> PolyNF:
    """Reciprocal of a single-monomial form; anything else is not polynomial."""
    if len(f.terms) != 1:
        raise NormalizationError(
            f"cannot normalize reciprocal of a non-monomial: {render(e)}"
        )
    m, c = f.terms[0]
    inv = tuple((g, -k) for g, k in m)
    return build_nf([(inv, Fraction(1) / c)])


def _coeffs_all_even(f: PolyNF) -> bool:
    return all(c.denominator == 1 and c.numerator % 2 == 0 for _, c in f.terms)


def _leading_negative(f: PolyNF) -> bool:
    return bool(f.terms) and f.terms[0][1] < 0


def trig_nf(fn: str, argnf: PolyNF) -> PolyNF:
    """Atom construction with constant folding, double-angle expansion,
    and odd/even argument-sign canonicalization."""
    if argnf.is_zero:
        return ZERO_NF if fn == "sin" else ONE_NF
    if _coeffs_all_even(argnf):
        half = nf_scale(argnf, Fraction(1, 2))
        s = trig_nf("sin", half)
        c = trig_nf("cos", half)
        if fn == "sin":
            return nf_scale(nf_mul(s, c), 2)
        return nf_sub(nf_mul(c, c), nf_mul(s, s))
    if _leading_negative(argnf):
        flipped = trig_nf(fn, nf_neg(argnf))
        return nf_neg(flipped) if fn == "sin" else flipped
    return gen_nf(TrigAtom(fn, argnf))


def normalize(e: Expr) -> PolyNF:
    """Normal form of an expression tree.

    Raises :class:`NormalizationError` on sqrt or arctan nodes and on
    reciprocals of non-monomial subexpressions; those shapes live outside
    the polynomial fragment this form covers.
    """
    if isinstance(e, Const):
        return const_nf(e.value)
    if isinstance(e, Var):
        return gen_nf(e.ref)
    if isinstance(e, Sum):
        return nf_add(*(normalize(t) for t in e.terms))
    if isinstance(e, Prod):
        out = ONE_NF
        for f in e.factors:
            out = nf_mul(out, normalize(f))
        return out
    if isinstance(e, Pow):
        basenf = normalize(e.base)
        if e.exponent >= 0:
            return nf_pow(basenf, e.exponent)
        return nf_pow(_invert_monomial_form(basenf, e.base), -e.exponent)
    if isinstance(e, FuncApp):
        if e.fn in ("sin", "cos"):
            return trig_nf(e.fn, normalize(e.arg))
        raise NormalizationError(
            f"{e.fn} is not polynomial; offending subtree: {render(e)}"
        )
    raise TypeError(f"not an expression node: {e!r}")


def is_identically_zero(e: Expr) -> bool:
    return normalize(e).is_zero


def canonical(e: Expr) -> Expr:
    """Re-expansion of the normal form: a canonical representative tree."""
    return normalize(e).to_expr()


def replace_even_powers(f: PolyNF, src: VarId, dst: VarId) -> PolyNF:
    """Map ``src^(2k)`` to ``dst^k`` in every monomial.

    Raises ValueError if ``src`` occurs to an odd power anywhere; callers
    use this to eliminate an auxiliary square-root symbol exactly.
    """
    pairs = []
    for m, c in f.terms:
        d = dict(m)
        if src in d:
            k = d.pop(src)
            if k % 2 != 0:
                raise ValueError(
                    f"{src.name} occurs to odd power {k}; cannot eliminate"
                )
            if k:
                d[dst] = d.get(dst, 0) + k // 2
        pairs.append((_mono_from_dict(d), c))
    return build_nf(pairs)
