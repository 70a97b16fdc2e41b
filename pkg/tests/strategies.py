"""Shared hypothesis strategies and sympy bridges for the test suite."""

from fractions import Fraction

import sympy
from hypothesis import strategies as st

from loopline.algebra import LaurentPoly, RatFunc

t = sympy.Symbol("t")

small = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def laurent(draw, span=2, max_terms=4):
    exps = draw(st.lists(st.integers(-span, span), max_size=max_terms, unique=True))
    return LaurentPoly({e: draw(small) for e in exps})


@st.composite
def nonsingular_den(draw):
    """Polynomial denominator with value 1 at t = 1 (so never singular there)."""
    p = draw(laurent(span=2, max_terms=3))
    return p - LaurentPoly(p(1)) + LaurentPoly(1)


@st.composite
def ratfunc(draw):
    return RatFunc(draw(laurent()), draw(nonsingular_den()))


def to_sympy(p: LaurentPoly):
    return sum((sympy.Rational(c.numerator, c.denominator) * t**e for e, c in p.items()), sympy.Integer(0))


def from_sympy(expr) -> LaurentPoly:
    expr = sympy.expand(expr)
    out = {}
    for term in sympy.Add.make_args(expr):
        coeff, rest = term.as_coeff_Mul()
        e = 0 if rest == 1 else sympy.degree(rest, t) if rest.is_polynomial(t) else -sympy.degree(1 / rest, t)
        out[int(e)] = out.get(int(e), 0) + Fraction(int(coeff.p), int(coeff.q))
    return LaurentPoly(out)
