"""Truncated power series over the rationals and the t -> e^k substitution."""

from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from typing import Sequence

from loopline.algebra import LaurentPoly, RatFunc
from loopline.diagrams import DiagramSeries, JacobiDiagram, expand_labels
from loopline.errors import NotInZ1

__all__ = [
    "PowerSeries",
    "exp_monomial",
    "laurent_at_exp",
    "expand_label",
    "b2n",
    "b2n_bernoulli",
    "bernoulli_numbers",
    "wh_prime_coeffs",
    "thr_d",
]


class PowerSeries:
    """``c_0 + c_1 v + ... + c_N v^N`` with everything beyond ``v^N`` dropped."""

    __slots__ = ("coeffs", "order", "var")

    def __init__(self, coeffs: Sequence = (), order: int | None = None, var: str = "k"):
        cs = [Fraction(c) for c in coeffs]
        if order is None:
            order = max(len(cs) - 1, 0)
        cs = cs[: order + 1] + [Fraction(0)] * (order + 1 - len(cs))
        self.coeffs = tuple(cs)
        self.order = order
        self.var = var

    @classmethod
    def constant(cls, c, order: int, var: str = "k") -> "PowerSeries":
        return cls([c], order, var)

    @classmethod
    def variable(cls, order: int, var: str = "k") -> "PowerSeries":
        return cls([0, 1], order, var)

    def __getitem__(self, r: int) -> Fraction:
        return self.coeffs[r] if 0 <= r <= self.order else Fraction(0)

    def _like(self, coeffs, order=None) -> "PowerSeries":
        return PowerSeries(coeffs, self.order if order is None else order, self.var)

    def _lift(self, other) -> "PowerSeries":
        if isinstance(other, PowerSeries):
            return other
        return PowerSeries.constant(other, self.order, self.var)

    def __add__(self, other):
        other = self._lift(other)
        n = min(self.order, other.order)
        return self._like([self[r] + other[r] for r in range(n + 1)], n)

    __radd__ = __add__

    def __neg__(self):
        return self._like([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            c = Fraction(other)
            return self._like([c * a for a in self.coeffs])
        n = min(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            a = self.coeffs[i]
            if a:
                for j in range(n + 1 - i):
                    out[i + j] += a * other.coeffs[j]
        return self._like(out, n)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = PowerSeries.constant(1, self.order, self.var)
        for _ in range(e):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, PowerSeries):
            n = min(self.order, other.order)
            return all(self[r] == other[r] for r in range(n + 1))
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def truncate(self, order: int) -> "PowerSeries":
        return self._like(self.coeffs, min(order, self.order))

    def inverse(self) -> "PowerSeries":
        if not self.coeffs[0]:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = 1 / self.coeffs[0]
        out = [inv0]
        for r in range(1, self.order + 1):
            s = sum(self.coeffs[j] * out[r - j] for j in range(1, r + 1))
            out.append(-s * inv0)
        return self._like(out)

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def derivative(self) -> "PowerSeries":
        return self._like([r * self.coeffs[r] for r in range(1, self.order + 1)], max(self.order - 1, 0))

    def log(self) -> "PowerSeries":
        """Logarithm of a series with constant term 1 (``log f = integral f'/f``)."""
        if self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        if self.order == 0:
            return self._like([0])
        q = self.derivative() * self.truncate(self.order - 1).inverse()
        return self._like([0] + [q[r - 1] / r for r in range(1, self.order + 1)])

    def exp(self) -> "PowerSeries":
        """Exponential of a series with zero constant term (``f' = f g'``)."""
        if self.coeffs[0]:
            raise ValueError("exp needs zero constant term")
        out = [Fraction(1)]
        for r in range(1, self.order + 1):
            s = sum(j * self.coeffs[j] * out[r - j] for j in range(1, r + 1))
            out.append(s / r)
        return self._like(out)

    def compose(self, inner: "PowerSeries") -> "PowerSeries":
        """``self(inner)``; ``inner`` must have zero constant term."""
        if inner[0]:
            raise ValueError("inner series must have zero constant term")
        n = min(self.order, inner.order)
        result = PowerSeries.constant(0, n, inner.var)
        power = PowerSeries.constant(1, n, inner.var)
        for r in range(n + 1):
            if self.coeffs[r]:
                result = result + power * self.coeffs[r]
            power = power * inner
        return result

    def bar(self) -> "PowerSeries":
        """``v -> -v``, the image of ``t -> 1/t``."""
        return self._like([c if r % 2 == 0 else -c for r, c in enumerate(self.coeffs)])

    def scale_var(self, a) -> "PowerSeries":
        a = Fraction(a)
        return self._like([c * a**r for r, c in enumerate(self.coeffs)])

    def is_even(self) -> bool:
        return all(not c for c in self.coeffs[1::2])

    def format(self) -> str:
        terms = [f"{c}*{self.var}^{r}" for r, c in enumerate(self.coeffs) if c]
        return (" + ".join(terms) if terms else "0") + f" + O({self.var}^{self.order + 1})"

    def __repr__(self):
        return f"PowerSeries({self.format()})"


def exp_monomial(a, order: int, var: str = "k") -> PowerSeries:
    """``e^{a v}``."""
    a = Fraction(a)
    return PowerSeries([a**r / factorial(r) for r in range(order + 1)], order, var)


def laurent_at_exp(p: LaurentPoly, order: int, var: str = "k") -> PowerSeries:
    """``p(e^v)``: the ``v^r`` coefficient is ``sum_e c_e e^r / r!``."""
    items = p.items()
    return PowerSeries(
        [sum((c * e**r for e, c in items), Fraction(0)) / factorial(r) for r in range(order + 1)],
        order,
        var,
    )


def expand_label(f, order: int, var: str = "k") -> PowerSeries:
    """``f(e^k)`` to order ``order``; ``f`` is a RatFunc or LaurentPoly."""
    if isinstance(f, LaurentPoly):
        return laurent_at_exp(f, order, var)
    f = f if isinstance(f, RatFunc) else RatFunc(f)
    num = laurent_at_exp(f.num, order, var)
    if f.den == LaurentPoly(1):
        return num
    return num * laurent_at_exp(f.den, order, var).inverse()


def b2n(order: int) -> dict[int, Fraction]:
    """``{2m: b_2m}`` for ``2m <= order`` from ``1/2 log(sinh(x/2)/(x/2))``."""
    n = max(order, 1)
    # sinh(x/2)/(x/2) = sum x^(2j) / (4^j (2j+1)!)
    s = PowerSeries(
        [Fraction(1, 4 ** (r // 2) * factorial(r + 1)) if r % 2 == 0 else 0 for r in range(n + 1)],
        n,
        "x",
    )
    half_log = s.log() * Fraction(1, 2)
    if not half_log.is_even():
        raise ArithmeticError("odd coefficient in 1/2 log(sinh(x/2)/(x/2))")
    return {r: half_log[r] for r in range(2, order + 1, 2)}


def bernoulli_numbers(n: int) -> list[Fraction]:
    """``B_0 .. B_n`` with ``B_1 = -1/2``."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return b


def b2n_bernoulli(order: int) -> dict[int, Fraction]:
    """Same constants through ``b_2m = B_2m / (4m (2m)!)``.

    Follows from ``d/dx log(sinh(x/2)/(x/2)) = coth(x/2)/2 - 1/x`` and the
    Bernoulli expansion of ``coth``.
    """
    bern = bernoulli_numbers(order)
    return {2 * m: bern[2 * m] / (4 * m * factorial(2 * m)) for m in range(1, order // 2 + 1)}


def wh_prime_coeffs(p: LaurentPoly, order: int) -> dict[int, Fraction]:
    """``{2m: c_2m}`` with ``c_2m = b_2m - 1/2 [h^2m] log(P(e^h)/P(1))``."""
    if not isinstance(p, LaurentPoly):
        p = LaurentPoly(p)
    p1 = p(1)
    if p1 not in (1, -1):
        raise NotInZ1(f"P(1) = {p1}, expected +1 or -1")
    if p.bar() != p:
        raise NotInZ1("P(t) != P(1/t)")
    n = max(order, 1)
    log = (laurent_at_exp(p, n, "h") * p1).log()
    if not log.is_even():
        raise ArithmeticError("odd h-coefficient in log P(e^h)")
    base = b2n(order)
    return {r: base[r] - log[r] / 2 for r in range(2, order + 1, 2)}


def thr_d(s: DiagramSeries, order: int | None = None, max_legs: int | None = None) -> DiagramSeries:
    """Substitute ``t -> e^k`` in every label, growing ``k`` legs on edges and loops.

    Output is truncated at grade ``order`` (default: the input's) and, if
    given, at ``max_legs`` new ``k`` legs per diagram.
    """
    order = s.order if order is None else order
    if order is None:
        raise ValueError("thr_d needs a finite order")
    # each new leg adds one trivalent vertex, i.e. half a unit of grade
    cache: dict[RatFunc, PowerSeries] = {}

    def series_of(lab):
        if lab not in cache:
            cache[lab] = expand_label(lab, 2 * order)
        return cache[lab]

    def expand(d: JacobiDiagram):
        room = int(2 * (order - d.grade))
        if room < 0:
            return []
        cap = room if max_legs is None else min(room, max_legs)
        return expand_labels(d, series_of, "k", cap)

    return s.map_terms(expand, order=order)

