"""Polynomials in the wheels ``omega_2m`` under disjoint union."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from loopline.diagrams import (
    DiagramSeries,
    JacobiDiagram,
    canonical_form,
    connected_components,
    union,
    wheel,
)

__all__ = ["WheelPolynomial", "wheel_key", "from_diagram_series"]


def _mono_mul(a: tuple, b: tuple) -> tuple:
    """Monomials are sorted tuples of ``(m, exponent)`` for ``omega_m``."""
    exps = dict(a)
    for m, e in b:
        exps[m] = exps.get(m, 0) + e
    return tuple(sorted(exps.items()))


def _mono_grade(mono: tuple) -> int:
    # omega_m has m trivalent vertices, so grade m/2
    return sum(m * e for m, e in mono) // 2


class WheelPolynomial:
    """Truncated polynomial in the even wheels, graded by half the spoke count."""

    __slots__ = ("terms", "order")

    def __init__(self, terms: Mapping[tuple, object] | None = None, order: int = 0):
        self.order = order
        self.terms: dict[tuple, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c and _mono_grade(mono) <= order:
                self.terms[mono] = self.terms.get(mono, 0) + c

    @classmethod
    def constant(cls, c, order: int) -> "WheelPolynomial":
        return cls({(): c}, order)

    @classmethod
    def linear(cls, coeffs: Mapping[int, object], order: int) -> "WheelPolynomial":
        """``sum_m c_m omega_m`` from ``{m: c_m}``."""
        return cls({((m, 1),): c for m, c in coeffs.items()}, order)

    @classmethod
    def exp_of(cls, coeffs: Mapping[int, object], order: int) -> "WheelPolynomial":
        return cls.linear(coeffs, order).exp()

    @property
    def scalar(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def coeff(self, mono) -> Fraction:
        if isinstance(mono, int):
            mono = ((mono, 1),)
        return self.terms.get(tuple(sorted(mono)), Fraction(0))

    def __add__(self, other: "WheelPolynomial") -> "WheelPolynomial":
        out = WheelPolynomial(self.terms, min(self.order, other.order))
        for mono, c in other.terms.items():
            if _mono_grade(mono) <= out.order:
                v = out.terms.get(mono, 0) + c
                if v:
                    out.terms[mono] = v
                else:
                    out.terms.pop(mono, None)
        return out

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, WheelPolynomial):
            c = Fraction(other)
            return WheelPolynomial({m: v * c for m, v in self.terms.items()}, self.order)
        order = min(self.order, other.order)
        out: dict[tuple, Fraction] = {}
        for m1, c1 in self.terms.items():
            g1 = _mono_grade(m1)
            for m2, c2 in other.terms.items():
                if g1 + _mono_grade(m2) <= order:
                    m = _mono_mul(m1, m2)
                    out[m] = out.get(m, 0) + c1 * c2
        return WheelPolynomial(out, order)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, WheelPolynomial):
            return NotImplemented
        order = min(self.order, other.order)
        return self.truncate(order).terms == other.truncate(order).terms

    def truncate(self, order: int) -> "WheelPolynomial":
        return WheelPolynomial(self.terms, min(order, self.order))

    def is_zero(self) -> bool:
        return not self.terms

    def exp(self) -> "WheelPolynomial":
        if self.scalar:
            raise ValueError("exp needs zero constant term")
        result = WheelPolynomial.constant(1, self.order)
        term = WheelPolynomial.constant(1, self.order)
        for k in range(1, self.order + 1):
            term = term * self * Fraction(1, k)
            if term.is_zero():
                break
            result = result + term
        return result

    def log(self) -> "WheelPolynomial":
        if self.scalar != 1:
            raise ValueError("log needs constant term 1")
        x = self - WheelPolynomial.constant(1, self.order)
        result = WheelPolynomial({}, self.order)
        power = WheelPolynomial.constant(1, self.order)
        for k in range(1, self.order + 1):
            power = power * x
            if power.is_zero():
                break
            result = result + power * Fraction((-1) ** (k + 1), k)
        return result

    def as_scalar_exp(self) -> tuple[Fraction, dict[int, Fraction]] | None:
        """Write as ``s * exp(sum c_m omega_m)`` if possible, else ``None``."""
        s = self.scalar
        if not s:
            return None
        log = (self * (1 / s)).log()
        coeffs = {}
        for mono, c in log.terms.items():
            if len(mono) != 1 or mono[0][1] != 1:
                return None
            coeffs[mono[0][0]] = c
        return s, coeffs

    def to_series(self) -> DiagramSeries:
        terms = []
        for mono, c in self.terms.items():
            d = JacobiDiagram()
            for m, e in mono:
                for _ in range(e):
                    d = union(d, wheel(m))
            terms.append((d, c))
        return DiagramSeries(terms, order=self.order)

    def format(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (_mono_grade(m), m)):
            name = "*".join(f"w{m}" + (f"^{e}" if e > 1 else "") for m, e in mono) or "1"
            parts.append(f"{self.terms[mono]}*{name}")
        return " + ".join(parts)

    def __repr__(self):
        return f"WheelPolynomial(order={self.order}, {self.format()})"


_wheel_keys: dict[int, tuple] = {}


def wheel_key(m: int):
    """Canonical key and factor of the reference wheel ``omega_m``."""
    if m not in _wheel_keys:
        _wheel_keys[m] = canonical_form(wheel(m))
    return _wheel_keys[m]


def from_diagram_series(s: DiagramSeries, leg: str = "k") -> tuple[WheelPolynomial, DiagramSeries]:
    """Split a series into its part in the even wheels and the rest.

    Returns ``(wheels, rest)`` where ``wheels`` collects diagrams that are
    disjoint unions of ``leg``-legged wheels ``omega_m`` (``m >= 2``), with
    coefficients expressed relative to the reference wheels.
    """
    order = int(s.order) if s.order is not None else 0
    key_to_m = {}
    for m in range(2, 2 * order + 1, 2):
        key, f = wheel_key(m)
        key_to_m[key] = (m, f)
    terms: dict[tuple, Fraction] = {}
    rest = DiagramSeries(order=s.order)
    for d, c in s.terms.items():
        mono = {}
        coeff = c
        ok = True
        if d.loops:
            ok = False
        else:
            for comp in connected_components(d):
                key, f = canonical_form(comp)
                hit = key_to_m.get(key)
                if hit is None or any(name != leg for name, _ in comp.legs):
                    ok = False
                    break
                m, ref = hit
                # comp = f * key and omega_m = ref * key
                coeff *= f / ref
                mono[m] = mono.get(m, 0) + 1
        if ok:
            k = tuple(sorted(mono.items()))
            terms[k] = terms.get(k, 0) + coeff
        else:
            rest.terms[d] = c
    return WheelPolynomial(terms, order), rest
