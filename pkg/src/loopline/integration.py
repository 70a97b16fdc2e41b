"""Formal Gaussian integration, the degree-n LMO map, and surgery assembly."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from loopline.algebra import (
    LaurentPoly,
    RatFunc,
    det_laurent,
    divides_power_of,
    invert_ratfunc_matrix,
    is_hermitian,
    normalize_alexander,
    signature_at_1,
)
from loopline.diagrams import (
    ONE,
    DiagramSeries,
    JacobiDiagram,
    chord,
    connected_components,
    exp_truncated,
    glue_legs,
    log_truncated,
    pair_glue,
    perfect_matchings,
    x_label,
)
from loopline.errors import MalformedR, NotHermitian, NotIntegrable, NotSpecial
from loopline.presentation import Presentation, validate_special, winding_matrix
from loopline.series import PowerSeries, b2n, expand_label, thr_d, wh_prime_coeffs
from loopline.wheels import WheelPolynomial

__all__ = [
    "IntegrableElement",
    "LoopExpansion",
    "chord_exponential",
    "decompose_integrable",
    "fg_integrate",
    "fg_integrate_threaded",
    "lmo_integrate_n",
    "nu",
    "wheels_line_lhs",
    "wheels_line_rhs",
    "wheels_line_general",
    "wheels_line_check",
    "surgery_assemble",
    "label_denominators_ok",
]


def _is_x(name: str) -> bool:
    return name.startswith("x") and not name.startswith("x'")


def _x_index(name: str) -> int:
    return int(name[1:]) - 1


def _as_ratfunc(entry) -> RatFunc:
    return entry if isinstance(entry, RatFunc) else RatFunc(entry)


@dataclass
class IntegrableElement:
    """``exp(1/2 sum W_ij chord_ij) * R`` with ``det W(1) = ±1`` and ``R`` chord-free."""

    w: list
    r: DiagramSeries

    def __post_init__(self):
        if not is_hermitian(self.w):
            raise NotHermitian("W is not Hermitian")
        d = det_laurent(self.w) if self.w else LaurentPoly(1)
        if d(1) not in (1, -1):
            raise NotIntegrable(f"det W(1) = {d(1)}, expected +1 or -1")
        for diagram in self.r.terms:
            if _has_x_chord(diagram):
                raise MalformedR("R contains a bare chord between x-legs")

    @property
    def mu(self) -> int:
        return len(self.w)


def _has_x_chord(d: JacobiDiagram) -> bool:
    owner = {h: name for name, h in d.legs}
    return any(
        _is_x(owner[2 * e]) and _is_x(owner[2 * e + 1]) for e in d.chords()
    )


def chord_exponential(w, max_power: int | None = None, order=None) -> DiagramSeries:
    """``exp(1/2 sum_ij W_ij chord_ij)`` with chords ``x_i -> x_j`` labelled ``W_ij``.

    Chords have grade zero, so the expansion stops after ``max_power`` chords
    (default: enough for the degree ``n = 1`` pairing, one per variable).
    """
    mu = len(w)
    terms = []
    for i in range(mu):
        for j in range(mu):
            lab = _as_ratfunc(w[i][j])
            if not lab.is_zero():
                terms.append((chord(x_label(i), x_label(j), lab), Fraction(1, 2)))
    c = DiagramSeries(terms, order=order)
    return exp_truncated(c, order=order, max_power=mu if max_power is None else max_power)


def decompose_integrable(s: DiagramSeries, mu: int | None = None) -> IntegrableElement:
    """Split ``s = exp(1/2 sum W chords) * R`` and validate the quadratic part."""
    if mu is None:
        mu = max((_x_index(n) + 1 for d in s.terms for n, _ in d.legs if _is_x(n)), default=0)
    zero = LaurentPoly()
    w = [[RatFunc(zero) for _ in range(mu)] for _ in range(mu)]
    r_terms = []
    max_chords = 0
    for d, c in s.terms.items():
        comps = connected_components(d)
        n_chords = sum(1 for comp in comps if _is_x_chord_component(comp))
        max_chords = max(max_chords, n_chords)
        if n_chords == 0:
            r_terms.append((d, c))
        if n_chords == 1 and len(comps) == 1:
            (a, _), (b, _) = sorted(d.legs, key=lambda leg: leg[1])
            i, j = _x_index(a), _x_index(b)
            lab = d.labels[0] * RatFunc(c)
            if i == j:
                w[i][i] = w[i][i] + lab + lab.bar()
            else:
                w[i][j] = w[i][j] + lab
                w[j][i] = w[j][i] + lab.bar()
    laurent = []
    for row in w:
        out_row = []
        for entry in row:
            if not entry.is_laurent():
                raise NotIntegrable("quadratic part must have Laurent polynomial labels")
            out_row.append(entry.num)
        laurent.append(out_row)
    r = DiagramSeries(r_terms, order=s.order)
    elem = IntegrableElement(laurent, r)
    # the series must really factor as exp(quadratic) * R
    rebuilt = chord_exponential(laurent, max_power=max_chords, order=s.order) * r
    if not _agree_up_to_chords(rebuilt, s, max_chords):
        raise NotIntegrable("series is not exp(1/2 sum W chords) times a chord-free part")
    return elem


def _is_x_chord_component(comp: JacobiDiagram) -> bool:
    return (
        not comp.trivalent
        and not comp.loops
        and len(comp.legs) == 2
        and all(_is_x(name) for name, _ in comp.legs)
    )


def _agree_up_to_chords(a: DiagramSeries, b: DiagramSeries, max_chords: int) -> bool:
    def n_chords(d):
        return sum(1 for comp in connected_components(d) if _is_x_chord_component(comp))

    keys = set(a.terms) | set(b.terms)
    return all(
        a.terms.get(d, 0) == b.terms.get(d, 0) for d in keys if n_chords(d) <= max_chords
    )


def _neg_inverse(w) -> list[list[RatFunc]]:
    inv = invert_ratfunc_matrix(w)
    return [[-entry for entry in row] for row in inv]


def _element(s_or_elem, r=None) -> IntegrableElement:
    if isinstance(s_or_elem, IntegrableElement):
        return s_or_elem
    if r is not None:
        return IntegrableElement(s_or_elem, r)
    return decompose_integrable(s_or_elem)


def fg_integrate(s, r: DiagramSeries | None = None) -> DiagramSeries:
    """Glue ``-W^{-1}``-labelled chords into all x-legs of ``R``.

    Accepts an integrable series, an :class:`IntegrableElement`, or ``(W, R)``.
    """
    elem = _element(s, r)
    if elem.mu == 0:
        return elem.r
    return pair_glue(_neg_inverse(elem.w), elem.r)


def fg_integrate_threaded(s, order: int, r: DiagramSeries | None = None) -> DiagramSeries:
    """Thread ``R`` first, then glue chords labelled by ``-W^{-1}(e^k)``.

    Power-series labels live only transiently on the glued diagrams and are
    expanded into ``k`` legs before canonicalisation.
    """
    elem = _element(s, r)
    threaded = thr_d(elem.r, order)
    if elem.mu == 0:
        return threaded
    depth = 2 * order
    weights = [[expand_label(entry, depth) for entry in row] for row in _neg_inverse(elem.w)]
    one = PowerSeries.constant(1, depth)
    out = DiagramSeries(order=order)
    for d, c in threaded.terms.items():
        chosen = [l for l, (name, _) in enumerate(d.legs) if _is_x(name)]
        room = int(2 * (order - d.grade))
        for matching in perfect_matchings(chosen):
            pairs = [
                (a, b, weights[_x_index(d.legs[a][0])][_x_index(d.legs[b][0])]) for a, b in matching
            ]
            glued = glue_legs(d, pairs, one=one)
            glued = JacobiDiagram(
                glued.trivalent,
                glued.legs,
                tuple(_series_or_one(lab, depth) for lab in glued.labels),
                tuple(_series_or_one(lab, depth) for lab in glued.loops),
            )
            out._accumulate(
                (nd, c * nc) for nd, nc in _expand_series_labels(glued, room)
            )
    return out


def _series_or_one(lab, depth):
    if isinstance(lab, PowerSeries):
        return lab
    return expand_label(lab, depth)


def _expand_series_labels(d: JacobiDiagram, max_legs: int):
    from loopline.diagrams import expand_labels

    plain = JacobiDiagram(d.trivalent, d.legs, tuple(_Marked(lab) for lab in d.labels),
                          tuple(_Marked(lab) for lab in d.loops))
    return expand_labels(plain, lambda m: m.series.coeffs, "k", max_legs)


class _Marked:
    """Wrapper so that series labels never compare equal to the unit label."""

    __slots__ = ("series",)

    def __init__(self, series):
        self.series = series

    def __eq__(self, other):
        return False

    __hash__ = object.__hash__


def lmo_integrate_n(f: DiagramSeries, n: int, legs: Sequence[str] | None = None) -> DiagramSeries:
    """The degree-``n`` LMO pairing followed by ``loop -> -2n``.

    ``legs`` names the integrated variables; by default every ``x_i`` label
    occurring in ``f``. A diagram survives only with exactly ``2n`` legs of
    each variable; all perfect matchings per variable are glued with weight 1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if legs is None:
        legs = sorted({name for d in f.terms for name, _ in d.legs if _is_x(name)})
    legs = list(legs)
    variables = set(legs)

    def integrate(d: JacobiDiagram):
        by_var: dict[str, list[int]] = {v: [] for v in legs}
        for l, (name, _) in enumerate(d.legs):
            if name in variables:
                by_var[name].append(l)
        if any(len(ls) != 2 * n for ls in by_var.values()):
            return []
        out = []
        for choice in product(*(list(perfect_matchings(by_var[v])) for v in legs)):
            pairs = [(a, b, ONE) for matching in choice for a, b in matching]
            glued = glue_legs(d, pairs)
            loops = 0
            for lab in glued.loops:
                if lab != ONE:
                    raise ValueError("labelled loops must be threaded before integration")
                loops += 1
            out.append(
                (JacobiDiagram(glued.trivalent, glued.legs, glued.labels, ()), Fraction(-2 * n) ** loops)
            )
        return out

    return f.map_terms(integrate, order=n if f.order is None else min(f.order, n))


def nu(order: int) -> WheelPolynomial:
    """The unknot series ``exp(sum b_2m omega_2m)`` up to grade ``order``."""
    return WheelPolynomial.exp_of(b2n(2 * order), order)


# --------------------------------------------------------------------------
# the wheels line
# --------------------------------------------------------------------------

def _chord_multigraphs(mu: int, n: int):
    """Symmetric nonnegative ``a`` with ``2 a_ii + sum_{j != i} a_ij = 2n`` for all i."""
    pairs = [(i, j) for i in range(mu) for j in range(i + 1, mu)]

    def rec(idx, deg, acc):
        if idx == len(pairs):
            if all((2 * n - d) % 2 == 0 and d <= 2 * n for d in deg):
                yield dict(acc), [(2 * n - d) // 2 for d in deg]
            return
        i, j = pairs[idx]
        for a in range(0, 2 * n - max(deg[i], deg[j]) + 1):
            deg[i] += a
            deg[j] += a
            acc[(i, j)] = a
            yield from rec(idx + 1, deg, acc)
            deg[i] -= a
            deg[j] -= a
        acc.pop((i, j), None)

    yield from rec(0, [0] * mu, {})


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def wheels_line_lhs(w, n: int, order: int) -> WheelPolynomial:
    """``nu * int^(n) exp(1/2 sum W_ij(e^k) chords)`` restricted to the wheels.

    Works directly on cycles: every gluing of chords closes up into cycles,
    and a cycle whose chord labels multiply to ``P(k)`` contributes
    ``-2n P_0 + sum_m P_m omega_m``. ``order`` is the grade cap.
    """
    mu = len(w)
    depth = 2 * order
    series = [[expand_label(_as_ratfunc(w[i][j]), depth) for j in range(mu)] for i in range(mu)]
    cycle_cache: dict[tuple, WheelPolynomial] = {}

    def cycle_poly(key: tuple) -> WheelPolynomial:
        poly = cycle_cache.get(key)
        if poly is None:
            p = PowerSeries.constant(1, depth)
            for i, j in key:
                p = p * series[i][j]
            terms = {(): -2 * n * p[0]}
            for m in range(2, depth + 1, 2):
                terms[((m, 1),)] = p[m]
            poly = WheelPolynomial(terms, order)
            cycle_cache[key] = poly
        return poly

    total = WheelPolynomial({}, order)
    for off, diag in _chord_multigraphs(mu, n):
        weight = Fraction(1)
        chords = []  # (i, j) with the chord running from x_i to x_j
        for i in range(mu):
            weight *= Fraction(1, 2 ** diag[i] * _factorial(diag[i]))
            chords += [(i, i)] * diag[i]
        for (i, j), a in off.items():
            weight /= _factorial(a)
            chords += [(i, j)] * a
        # chord end 2c sits at x_{chords[c][0]}, end 2c+1 at x_{chords[c][1]}
        at = [[] for _ in range(mu)]
        for c, (i, j) in enumerate(chords):
            at[i].append(2 * c)
            at[j].append(2 * c + 1)
        shapes: Counter = Counter()
        for choice in product(*(list(perfect_matchings(ends)) for ends in at)):
            partner = {}
            for matching in choice:
                for a, b in matching:
                    partner[a] = b
                    partner[b] = a
            seen = set()
            cycles = []
            for start in range(len(chords)):
                if start in seen:
                    continue
                key = []
                end = 2 * start
                while True:
                    seen.add(end // 2)
                    i, j = chords[end // 2]
                    key.append((i, j) if end % 2 == 0 else (j, i))
                    end = partner[end ^ 1]
                    if end == 2 * start:
                        break
                cycles.append(tuple(key))
            shapes[tuple(sorted(cycles))] += 1
        for shape, count in shapes.items():
            poly = WheelPolynomial.constant(weight * count, order)
            for key in shape:
                poly = poly * cycle_poly(key)
            total = total + poly
    return nu(order) * total


def wheels_line_rhs(w, n: int, order: int) -> WheelPolynomial:
    """``(-1)^{n sigma_+} Wh'(det W)`` up to grade ``order``."""
    d = det_laurent(w) if w else LaurentPoly(1)
    pos, _ = signature_at_1(w) if w else (0, 0)
    coeffs = wh_prime_coeffs(d, 2 * order)
    return WheelPolynomial.exp_of(coeffs, order) * ((-1) ** (n * pos))


def wheels_line_general(w, n: int, order: int) -> WheelPolynomial:
    """Same quantity as :func:`wheels_line_lhs` through generic diagram code.

    Builds the chord exponential, threads it, integrates with
    :func:`lmo_integrate_n` and reads off the wheels. Exponentially slower;
    meant for cross-checking small cases.
    """
    from loopline.wheels import from_diagram_series

    mu = len(w)
    s = chord_exponential(w, max_power=mu * n, order=order)
    s = DiagramSeries(
        [(d, c) for d, c in s.terms.items() if len(d.legs) == 2 * n * mu], order=order
    )
    threaded = thr_d(s, order)
    integrated = lmo_integrate_n(threaded, n, [x_label(i) for i in range(mu)])
    wheels, rest = from_diagram_series(integrated.truncate(order))
    if not rest.is_zero():
        raise ArithmeticError("integration produced non-wheel diagrams")
    return nu(order) * wheels


@dataclass
class WheelsLineResult:
    lhs: WheelPolynomial
    rhs: WheelPolynomial
    order: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.equal))


def wheels_line_check(w, n: int, order: int | None = None) -> WheelsLineResult:
    """Compare both sides of the wheels-line identity.

    ``order`` bounds the wheel size (``omega_2m`` with ``2m <= order``) and
    may not exceed ``2n``; by default ``2n``.
    """
    d = det_laurent(w) if w else LaurentPoly(1)
    if d(1) not in (1, -1):
        raise NotIntegrable(f"det W(1) = {d(1)}, expected +1 or -1")
    order = 2 * n if order is None else order
    if order > 2 * n:
        raise ValueError("order may not exceed 2n")
    grade = min(n, order // 2)
    return WheelsLineResult(wheels_line_lhs(w, n, grade), wheels_line_rhs(w, n, grade), grade)


# --------------------------------------------------------------------------
# surgery assembly
# --------------------------------------------------------------------------

@dataclass
class LoopExpansion:
    alexander: LaurentPoly
    det: LaurentPoly
    wheel_coeffs: dict[int, Fraction]
    loop_terms: dict[int, DiagramSeries] = field(default_factory=dict)
    scalar: Fraction = Fraction(1)
    sigma: tuple[int, int] = (0, 0)
    metadata: dict = field(default_factory=dict)


def label_denominators_ok(s: DiagramSeries, alexander: LaurentPoly) -> bool:
    """Every edge label's denominator divides a power of ``alexander``."""
    for d in s.terms:
        for lab in d.labels + d.loops:
            if not divides_power_of(lab.den, alexander):
                return False
    return True


def surgery_assemble(
    p: Presentation,
    r: DiagramSeries | None = None,
    order: int = 2,
    loop_bound: int = 2,
) -> LoopExpansion:
    """Wheels line plus connected loop terms from a user-supplied remainder ``R``.

    ``order`` caps the wheel size (``2m <= order``); ``loop_bound`` the loop
    degree ``i`` of the terms of Euler characteristic ``-i``. One-loop
    corrections (``i = 0``) vanish for a genuine knot remainder but are kept
    for synthetic ones; terms outside ``0..loop_bound`` are only counted.
    """
    report = validate_special(p)
    if not report.is_special:
        raise NotSpecial("presentation is not special", report)
    w = winding_matrix(p)
    det = det_laurent(w) if w else LaurentPoly(1)
    alexander = normalize_alexander(det)
    sigma = signature_at_1(w) if w else (0, 0)
    result = LoopExpansion(
        alexander=alexander,
        det=det,
        wheel_coeffs=wh_prime_coeffs(alexander, order),
        sigma=sigma,
        metadata={
            "normalization": "U+/U- denominators enter through their leading terms (-1)^n, (+1)^n only",
            "sigma_plus": sigma[0],
            "sigma_minus": sigma[1],
        },
    )
    if r is None or r.is_zero():
        return result
    for d in r.terms:
        for lab in d.labels + d.loops:
            if not isinstance(lab, RatFunc):
                raise MalformedR("R labels must be rational functions")
    if r.order is None:
        # an untruncated file is read as exact up to its own top grade
        r = r.truncate(max(d.grade for d in r.terms))
    glued = fg_integrate(IntegrableElement(w, r))
    c0 = glued.constant_term
    if not c0:
        raise MalformedR("integrated remainder has zero constant term")
    logged = log_truncated(glued.scale(1 / c0))
    result.scalar = c0
    dropped = 0
    for d, c in logged.terms.items():
        comps = connected_components(d)
        if len(comps) != 1:
            raise ArithmeticError("log produced a disconnected diagram")
        i = -d.euler_characteristic()
        if 0 <= i <= loop_bound:
            result.loop_terms.setdefault(i, DiagramSeries(order=logged.order)).terms[d] = c
        else:
            dropped += 1
    result.metadata["droppedTerms"] = dropped
    if not all(label_denominators_ok(s, alexander) for s in result.loop_terms.values()):
        raise ArithmeticError("edge label denominator does not divide a power of A")
    return result
