"""Exact Laurent polynomials, rational functions and small matrix algebra.

Coefficients are :class:`fractions.Fraction` throughout; nothing here ever
touches floating point.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from loopline.errors import (
    NotIntegrable,
    NotSymmetrizable,
    NotUnimodular,
    SingularAtOne,
)

__all__ = [
    "LaurentPoly",
    "RatFunc",
    "T",
    "bar",
    "det_laurent",
    "normalize_alexander",
    "invert_ratfunc_matrix",
    "signature_at_1",
    "is_hermitian",
    "matrix_at",
    "mat_mul",
    "identity_matrix",
    "parse_laurent",
    "divides_power_of",
]


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"exact rational expected, got {type(value).__name__}")


# --------------------------------------------------------------------------
# dense univariate polynomial helpers (ascending coefficient lists over Q)
# --------------------------------------------------------------------------

def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], _trim(a)
    lead = b[-1]
    quot = [Fraction(0)] * (len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1] / lead
        quot[k] = c
        if c:
            for i, bc in enumerate(b):
                a[k + i] -= c * bc
    return _trim(quot), _trim(a[: len(b) - 1])


def _poly_gcd(a: list, b: list) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def _primitive_scale(coeffs: Sequence[Fraction]) -> Fraction:
    """Factor turning ``coeffs`` into coprime integers with positive top coefficient."""
    den_lcm = 1
    for c in coeffs:
        den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    num_gcd = 0
    for c in coeffs:
        num_gcd = gcd(num_gcd, (c * den_lcm).numerator)
    scale = Fraction(den_lcm, num_gcd)
    if coeffs[-1] < 0:
        scale = -scale
    return scale


# --------------------------------------------------------------------------
# Laurent polynomials
# --------------------------------------------------------------------------

class LaurentPoly:
    """Immutable polynomial in ``t`` and ``t**-1`` with rational coefficients.

    ``LaurentPoly({-1: 1, 0: -3, 1: 1})`` is ``t - 3 + 1/t``. Zero coefficients
    are never stored, so the zero polynomial has an empty coefficient map.
    """

    __slots__ = ("_coeffs", "_hash")

    def __init__(self, coeffs: Mapping[int, object] | int | Fraction | None = None):
        if coeffs is None:
            items = {}
        elif isinstance(coeffs, Mapping):
            items = {}
            for e, c in coeffs.items():
                c = _to_fraction(c)
                if c:
                    items[int(e)] = c
        else:
            c = _to_fraction(coeffs)
            items = {0: c} if c else {}
        self._coeffs = items
        self._hash = None

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._coeffs)

    def items(self) -> list[tuple[int, Fraction]]:
        return sorted(self._coeffs.items())

    def coeff(self, exponent: int) -> Fraction:
        return self._coeffs.get(exponent, Fraction(0))

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    @property
    def min_exp(self) -> int:
        if not self._coeffs:
            raise ValueError("zero polynomial has no exponents")
        return min(self._coeffs)

    @property
    def max_exp(self) -> int:
        if not self._coeffs:
            raise ValueError("zero polynomial has no exponents")
        return max(self._coeffs)

    def is_constant(self) -> bool:
        return not self._coeffs or set(self._coeffs) == {0}

    # arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for e1, c1 in self._coeffs.items():
            for e2, c2 in other._coeffs.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._coeffs) == 1:
                (e, c), = self._coeffs.items()
                return LaurentPoly({e * n: c ** n})
            raise ValueError("only monomials have Laurent inverses")
        result = LaurentPoly(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self._coeffs.items())))
        return self._hash

    def __call__(self, value) -> Fraction:
        value = _to_fraction(value)
        return sum((c * value ** e for e, c in self._coeffs.items()), Fraction(0))

    def bar(self) -> "LaurentPoly":
        """Substitute ``t -> 1/t``."""
        return LaurentPoly({-e: c for e, c in self._coeffs.items()})

    def shift(self, n: int) -> "LaurentPoly":
        """Multiply by ``t**n``."""
        return LaurentPoly({e + n: c for e, c in self._coeffs.items()})

    def to_dense(self) -> tuple[int, list[Fraction]]:
        """Return ``(offset, coeffs)`` with ``self = t**offset * sum(coeffs[i] t**i)``."""
        if not self._coeffs:
            return 0, []
        lo, hi = self.min_exp, self.max_exp
        return lo, [self._coeffs.get(e, Fraction(0)) for e in range(lo, hi + 1)]

    @classmethod
    def from_dense(cls, offset: int, coeffs: Sequence) -> "LaurentPoly":
        return cls({offset + i: c for i, c in enumerate(coeffs)})

    def exact_div(self, other: "LaurentPoly") -> "LaurentPoly":
        """Quotient when ``other`` divides ``self`` exactly in Q[t, 1/t]."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return LaurentPoly()
        o1, a = self.to_dense()
        o2, b = other.to_dense()
        q, r = _poly_divmod(a, b)
        if r:
            raise ArithmeticError("inexact Laurent polynomial division")
        return LaurentPoly.from_dense(o1 - o2, q)

    def sort_key(self) -> tuple:
        return tuple(sorted(self._coeffs.items()))

    def format(self) -> str:
        """Render as ``a*t^e`` terms sorted by exponent, e.g. ``1*t^-1 - 3*t^0 + 1*t^1``."""
        if not self._coeffs:
            return "0"
        parts = []
        for e, c in self.items():
            mag = abs(c)
            term = f"{mag}*t^{e}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(("+ " if c > 0 else "- ") + term)
        return " ".join(parts)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"LaurentPoly({self.format()!r})"


T = LaurentPoly.monomial(1)

_TERM = re.compile(r"\s*([+-]?)\s*([0-9]+(?:/[0-9]+)?)\*t\^(-?[0-9]+)\s*")


def parse_laurent(text: str) -> LaurentPoly:
    """Inverse of :meth:`LaurentPoly.format`."""
    text = text.strip()
    if text == "0":
        return LaurentPoly()
    coeffs: dict[int, Fraction] = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse Laurent polynomial at {text[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        e = int(m.group(3))
        coeffs[e] = coeffs.get(e, 0) + sign * Fraction(m.group(2))
        pos = m.end()
    return LaurentPoly(coeffs)


# --------------------------------------------------------------------------
# rational functions non-singular at t = 1
# --------------------------------------------------------------------------

class RatFunc:
    """Quotient ``num/den`` of Laurent polynomials with ``den(1) != 0``.

    The stored form is canonical: ``den`` is an ordinary polynomial with
    nonzero constant term, coprime integer coefficients and positive leading
    coefficient, and ``gcd(num, den) = 1``. Equal functions therefore have
    equal representations.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num=0, den=1):
        if isinstance(num, RatFunc) or isinstance(den, RatFunc):
            q = RatFunc._lift(num) / RatFunc._lift(den)
            self.num, self.den, self._hash = q.num, q.den, None
            return
        num = num if isinstance(num, LaurentPoly) else LaurentPoly(num)
        den = den if isinstance(den, LaurentPoly) else LaurentPoly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den(1) == 0:
            raise SingularAtOne(f"denominator {den} vanishes at t = 1")
        self._hash = None
        if num.is_zero():
            self.num, self.den = LaurentPoly(), LaurentPoly(1)
            return
        a, n = num.to_dense()
        b, d = den.to_dense()
        g = _poly_gcd(n, d)
        if len(g) > 1:
            n, _ = _poly_divmod(n, g)
            d, _ = _poly_divmod(d, g)
        scale = _primitive_scale(d)
        self.num = LaurentPoly.from_dense(a - b, [c * scale for c in n])
        self.den = LaurentPoly.from_dense(0, [c * scale for c in d])

    @staticmethod
    def _lift(x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (LaurentPoly, int, Fraction)):
            return RatFunc(x)
        return NotImplemented

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent(self) -> bool:
        return self.den == 1

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        out = RatFunc.__new__(RatFunc)
        out.num, out.den, out._hash = -self.num, self.den, None
        return out

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n)

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __call__(self, value) -> Fraction:
        return self.num(value) / self.den(value)

    def bar(self) -> "RatFunc":
        return RatFunc(self.num.bar(), self.den.bar())

    def sort_key(self) -> tuple:
        return (self.num.sort_key(), self.den.sort_key())

    def format(self) -> str:
        if self.den == 1:
            return self.num.format()
        return f"({self.num.format()})/({self.den.format()})"

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"RatFunc({self.format()!r})"


def bar(p):
    """Conjugation ``t -> 1/t`` on Laurent polynomials and rational functions."""
    if isinstance(p, (LaurentPoly, RatFunc)):
        return p.bar()
    if isinstance(p, (int, Fraction)):
        return p
    raise TypeError(f"cannot conjugate {type(p).__name__}")


# --------------------------------------------------------------------------
# matrices (lists of rows)
# --------------------------------------------------------------------------

def identity_matrix(n: int, one=None) -> list[list]:
    one = LaurentPoly(1) if one is None else one
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = a[i][0] * b[0][j]
            for k in range(1, m):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def matrix_at(m: Sequence[Sequence], value=1) -> list[list[Fraction]]:
    """Evaluate every entry at ``t = value``."""
    return [[entry(value) if callable(entry) else Fraction(entry) for entry in row] for row in m]


def is_hermitian(m: Sequence[Sequence]) -> bool:
    n = len(m)
    return all(
        len(m[i]) == n and m[i][j] == bar(m[j][i]) for i in range(n) for j in range(n)
    )


def _minor(m, row, col):
    return [r[:col] + r[col + 1:] for k, r in enumerate(m) if k != row]


def _det_cofactor(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j, entry in enumerate(m[0]):
        if not entry:
            continue
        term = entry * _det_cofactor(_minor(m, 0, j))
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else m[0][0] - m[0][0]


def _det_bareiss(m):
    a = [list(row) for row in m]
    n = len(a)
    sign = 1
    prev = None
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((r for r in range(k + 1, n) if a[r][k]), None)
            if swap is None:
                return a[k][k] - a[k][k]
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                val = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = val if prev is None else val.exact_div(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


CofactorLimit = 6


def det_laurent(m: Sequence[Sequence[LaurentPoly]]) -> LaurentPoly:
    """Exact determinant of a square matrix of Laurent polynomials.

    Cofactor expansion up to size 6, fraction-free Bareiss elimination above.
    """
    n = len(m)
    if n == 0:
        return LaurentPoly(1)
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    rows = [[e if isinstance(e, LaurentPoly) else LaurentPoly(e) for e in row] for row in m]
    if n <= CofactorLimit:
        return _det_cofactor(rows)
    return _det_bareiss(rows)


def normalize_alexander(p: LaurentPoly) -> LaurentPoly:
    """Return the unit multiple ``±t^m p`` that is symmetric and equals 1 at ``t = 1``."""
    value = p(1)
    if value not in (1, -1):
        raise NotUnimodular(f"p(1) = {value}, expected +1 or -1")
    span = p.min_exp + p.max_exp
    if span % 2:
        raise NotSymmetrizable(f"{p} has no symmetric unit multiple")
    centred = p.shift(-span // 2)
    if centred != centred.bar():
        raise NotSymmetrizable(f"{p} has no symmetric unit multiple")
    return centred if value == 1 else -centred


def invert_ratfunc_matrix(m: Sequence[Sequence[LaurentPoly]]) -> list[list[RatFunc]]:
    """Exact inverse over rational functions non-singular at 1 (adjugate over det)."""
    n = len(m)
    det = det_laurent(m)
    if det(1) not in (1, -1):
        raise NotIntegrable(f"det M(1) = {det(1)}, expected +1 or -1")
    if n == 1:
        return [[RatFunc(1, det)]]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            cof = det_laurent(_minor(m, j, i))
            if (i + j) % 2:
                cof = -cof
            inv[i][j] = RatFunc(cof, det)
    return inv


def signature_at_1(m: Sequence[Sequence]) -> tuple[int, int]:
    """Counts ``(positive, negative)`` of eigenvalues of ``M(1)``.

    Exact symmetric elimination over the rationals with 1x1 pivots, falling
    back to 2x2 blocks with zero diagonal (one positive, one negative).
    """
    a = matrix_at(m, 1)
    n = len(a)
    for i in range(n):
        for j in range(i):
            if a[i][j] != a[j][i]:
                raise ValueError("M(1) is not symmetric")
    active = list(range(n))
    pos = neg = 0
    while active:
        piv = next((i for i in active if a[i][i] != 0), None)
        if piv is not None:
            d = a[piv][piv]
            if d > 0:
                pos += 1
            else:
                neg += 1
            active.remove(piv)
            for r in active:
                f = a[r][piv] / d
                if f:
                    for s in active:
                        a[r][s] -= f * a[piv][s]
            continue
        pair = next(((i, j) for i in active for j in active if i < j and a[i][j] != 0), None)
        if pair is None:
            raise SingularAtOne("M(1) is singular")
        i, j = pair
        b = a[i][j]
        pos += 1
        neg += 1
        active.remove(i)
        active.remove(j)
        ri = {r: a[r][i] for r in active}
        rj = {r: a[r][j] for r in active}
        for r in active:
            for s in active:
                a[r][s] -= (ri[r] * rj[s] + rj[r] * ri[s]) / b
    return pos, neg


def divides_power_of(d: LaurentPoly, a: LaurentPoly) -> bool:
    """Whether ``d`` divides some power of ``a`` up to units ``c t^m``.

    Strips common factors with ``a`` until nothing is left or a factor
    coprime to ``a`` remains.
    """
    if d.is_zero():
        return False
    _, cur = d.to_dense()
    _, base = a.to_dense()
    while len(_trim(list(cur))) > 1:
        g = _poly_gcd(cur, base)
        if len(g) <= 1:
            return False
        cur, rem = _poly_divmod(cur, g)
        if rem:
            return False
    return True
