import random
from fractions import Fraction

import pytest

from loopline import fig8_path
from loopline.algebra import LaurentPoly, RatFunc, T, det_laurent, invert_ratfunc_matrix
from loopline.diagrams import (
    ONE,
    DiagramBuilder,
    DiagramSeries,
    JacobiDiagram,
    chord,
    connected_components,
    exp_truncated,
    pair_glue,
    translate,
    union,
    wheel,
)
from loopline.errors import MalformedR, NotHermitian, NotIntegrable, NotSpecial
from loopline.integration import (
    IntegrableElement,
    chord_exponential,
    decompose_integrable,
    fg_integrate,
    fg_integrate_threaded,
    label_denominators_ok,
    lmo_integrate_n,
    nu,
    surgery_assemble,
    wheels_line_check,
    wheels_line_general,
    wheels_line_lhs,
    wheels_line_rhs,
)
from loopline.presentation import parse_presentation
from loopline.sampling import random_diagram, random_hermitian, random_remainder
from loopline.series import b2n, thr_d
from loopline.wheels import WheelPolynomial, from_diagram_series

FIG8_WHEELS = {2: Fraction(25, 48), 4: Fraction(1679, 5760), 6: Fraction(15221, 72576)}


def fig8():
    with open(fig8_path()) as fh:
        return parse_presentation(fh.read())


def h_diagram(a, b, c, d, label=ONE):
    """Two trivalent vertices joined by a labelled edge, legs a, b on one side and c, d on the other."""
    bld = DiagramBuilder()
    mid = bld.edge(label)
    ends = [bld.edge() for _ in range(4)]
    bld.vertex(mid[0], ends[0][0], ends[1][0])
    bld.vertex(mid[1], ends[2][0], ends[3][0])
    for (_, h), name in zip(ends, [a, b, c, d]):
        bld.leg(name, h)
    return bld.build()


def test_chord_exponential_coefficients():
    s = chord_exponential([[LaurentPoly(3)]], max_power=2)
    assert s.coeff(chord("x1", "x1")) == Fraction(3, 2)
    assert s.coeff(union(chord("x1", "x1"), chord("x1", "x1"))) == Fraction(9, 8)


def test_decompose_round_trip():
    rng = random.Random(41)
    for _ in range(5):
        mu = rng.randint(1, 2)
        w = random_hermitian(rng, mu, 1)
        r = DiagramSeries([(JacobiDiagram(), 1), (random_diagram(rng, 2, ["x1", "x1"]), 2)], order=2)
        s = chord_exponential(w, max_power=2, order=2) * r
        elem = decompose_integrable(s, mu)
        assert elem.w == w
        assert elem.r == r


def test_decompose_rejects_bad_input():
    with pytest.raises(NotIntegrable):
        decompose_integrable(chord_exponential([[LaurentPoly(2)]], max_power=2))
    broken = chord_exponential([[LaurentPoly(1)]], max_power=2) + DiagramSeries.of(
        union(chord("x1", "x1"), chord("x1", "x1"))
    )
    with pytest.raises(NotIntegrable):
        decompose_integrable(broken)
    with pytest.raises(NotHermitian):
        IntegrableElement([[T]], DiagramSeries.one())
    with pytest.raises(MalformedR):
        IntegrableElement([[LaurentPoly(1)]], DiagramSeries.of(chord("x1", "x1")))


def test_fg_integrate_h_diagram():
    w = [[T - 3 + T**-1]]
    r = DiagramSeries([(JacobiDiagram(), 1), (h_diagram("x1", "k", "x1", "k"), 1)])
    out = fg_integrate(w, r)
    label = -invert_ratfunc_matrix(w)[0][0]
    expected = pair_glue([[label]], r)
    assert out == expected
    assert out.constant_term == 1 and len(out) == 2
    (d, _), = [(d, c) for d, c in out.items() if not d.is_empty()]
    assert sorted(lab.den for lab in d.labels if lab.den != LaurentPoly(1)) == [T**2 - 3 * T + 1]


def test_fg_integrate_accepts_series():
    w = [[LaurentPoly(-1)]]
    r = DiagramSeries([(JacobiDiagram(), 1), (h_diagram("x1", "k", "x1", "k"), 1)], order=2)
    s = chord_exponential(w, max_power=2, order=2) * r
    assert fg_integrate(s) == fg_integrate(w, r)


def test_fg_integrate_without_variables():
    r = DiagramSeries.of(wheel(2), order=2)
    assert fg_integrate([], r) == r


def test_threaded_route_matches():
    rng = random.Random(42)
    for _ in range(6):
        mu = rng.randint(1, 2)
        w = random_hermitian(rng, mu, 1)
        terms = [(JacobiDiagram(), 1)]
        for _ in range(2):
            legs = [f"x{rng.randint(1, mu)}" for _ in range(2)] + ["k"] * rng.randint(0, 1)
            n_tri = next(t for t in range(1, 4) if (3 * t + len(legs)) % 2 == 0)
            terms.append((random_diagram(rng, n_tri, legs, denominators=False), rng.randint(1, 3)))
        r = DiagramSeries(terms, order=2)
        assert fg_integrate_threaded(w, 2, r) == thr_d(fg_integrate(w, r), 2)


def test_lmo_free_loop():
    loop = DiagramSeries.of(JacobiDiagram(loops=(ONE,)))
    assert lmo_integrate_n(loop, 2, []) == DiagramSeries.one().scale(-4)
    assert lmo_integrate_n(loop, 1, []) == DiagramSeries.one().scale(-2)


def test_lmo_single_chord_exponential():
    lam = Fraction(3, 5)
    f = exp_truncated(DiagramSeries.of(chord("x1", "x1"), lam / 2), max_power=3)
    assert lmo_integrate_n(f, 1) == DiagramSeries.one().scale(-lam)
    # two chords at n = 2: three matchings, each closing 1 or 2 loops
    out = lmo_integrate_n(f, 2)
    assert out == DiagramSeries.one().scale(lam**2 / 8 * (16 + 2 * -4))


def test_lmo_needs_exact_leg_count():
    assert lmo_integrate_n(DiagramSeries.of(chord("x1", "x1")), 2).is_zero()
    with pytest.raises(ValueError):
        lmo_integrate_n(DiagramSeries.of(chord("x1", "x1")), 0)


def test_nu_is_exp_of_b():
    n = nu(2)
    assert n.as_scalar_exp() == (1, {2: b2n(4)[2], 4: b2n(4)[4]})


def test_wheels_line_unit_matrix():
    for n in (1, 2, 3):
        res = wheels_line_check([[LaurentPoly(1)]], n)
        assert res.equal
        assert res.lhs.scalar == (-1) ** n
        res = wheels_line_check([[LaurentPoly(-1)]], n)
        assert res.equal and res.lhs.scalar == 1


def test_wheels_line_fig8():
    w = [[T - 3 + T**-1]]
    for n in (1, 2, 3):
        lhs, rhs, equal = wheels_line_check(w, n)
        assert equal
        scalar, coeffs = rhs.as_scalar_exp()
        assert scalar == 1
        assert coeffs == {m: c for m, c in FIG8_WHEELS.items() if m <= 2 * n}


def test_wheels_line_random():
    rng = random.Random(43)
    for _ in range(12):
        mu = rng.randint(1, 3)
        n = rng.randint(1, 2)
        assert wheels_line_check(random_hermitian(rng, mu), n).equal


def test_wheels_line_order_bound():
    with pytest.raises(ValueError):
        wheels_line_check([[LaurentPoly(1)]], 1, order=4)
    with pytest.raises(NotIntegrable):
        wheels_line_check([[LaurentPoly(3)]], 1)
    assert wheels_line_check([[LaurentPoly(1)]], 2, order=2).order == 1


def test_general_route_matches_cycle_route():
    rng = random.Random(44)
    for _ in range(4):
        mu = rng.randint(1, 2)
        n = 1 if mu == 2 else rng.randint(1, 2)
        w = random_hermitian(rng, mu, 1)
        assert wheels_line_general(w, n, n) == wheels_line_lhs(w, n, n)


def test_wheels_translation_invariant():
    """Wheel part of the LMO pairing is unchanged by x -> x + M(k) x' with diagonal M."""
    rng = random.Random(46)
    for _ in range(3):
        w = random_hermitian(rng, 1, 1)
        f = thr_d(chord_exponential(w, max_power=2, order=2), 2)
        moved = translate(f, [[[0, 1, Fraction(1, 2)]]], order=2)
        for n in (1, 2):
            plain, _ = from_diagram_series(lmo_integrate_n(f, n, ["x1"]))
            shifted = lmo_integrate_n(moved, n, ["x1"])
            unprimed = DiagramSeries(
                [(d, c) for d, c in shifted.terms.items() if all(name != "x'1" for name, _ in d.legs)],
                order=shifted.order,
            )
            wheels, _ = from_diagram_series(unprimed)
            assert wheels == plain
    s = DiagramSeries([(wheel(2), Fraction(1, 3)), (wheel(4), 2)], order=2)
    assert translate(s, [[[1, 1]]]) == s


def test_from_diagram_series():
    s = DiagramSeries([(JacobiDiagram(), 2), (wheel(2), 3), (union(wheel(2), wheel(2)), 1), (chord("x1", "k"), 1)],
                      order=2)
    wheels, rest = from_diagram_series(s)
    assert wheels.scalar == 2
    assert rest == DiagramSeries.of(chord("x1", "k"))
    assert wheels.to_series() == s - rest


def test_surgery_assemble_fig8_without_r():
    le = surgery_assemble(fig8(), order=6)
    assert le.alexander == -T + 3 - T**-1
    assert le.det == T - 3 + T**-1
    assert le.wheel_coeffs == FIG8_WHEELS
    assert le.sigma == (0, 1)
    assert le.loop_terms == {} and le.scalar == 1
    assert "leading" in le.metadata["normalization"]


def test_surgery_assemble_trivial_presentation():
    le = surgery_assemble(parse_presentation("strands 0\n"), order=4)
    assert le.alexander == LaurentPoly(1)
    assert le.wheel_coeffs == b2n(4)
    assert le.sigma == (0, 0)


def test_surgery_assemble_requires_special():
    with pytest.raises(NotSpecial):
        surgery_assemble(parse_presentation("strands 1\nstrand 1: D+\n"))


def test_surgery_assemble_with_remainder():
    rng = random.Random(45)
    p = fig8()
    for _ in range(8):
        r = random_remainder(rng, mu=1, terms=3, order=2)
        le = surgery_assemble(p, r, order=4, loop_bound=3)
        for i, s in le.loop_terms.items():
            assert 0 <= i <= 3
            assert label_denominators_ok(s, le.alexander)
            for d in s.terms:
                assert len(connected_components(d)) == 1
                assert -d.euler_characteristic() == i
                assert not any(name.startswith("x") for name, _ in d.legs)


def test_surgery_assemble_hand_example():
    """exp(c H) with H = H(x1, k, x1, k) glues to one wheel labelled 1/(t - 3 + 1/t)."""
    h = h_diagram("x1", "k", "x1", "k")
    r = exp_truncated(DiagramSeries.of(h, 2, order=1))
    le = surgery_assemble(fig8(), r, order=2, loop_bound=2)
    assert le.scalar == 1
    assert list(le.loop_terms) == [0]
    assert le.metadata["droppedTerms"] == 0
    (d, c), = le.loop_terms[0].items()
    assert len(d.trivalent) == 2 and sorted(n for n, _ in d.legs) == ["k", "k"]
    assert abs(c) == 2
    assert [lab.den for lab in d.labels if lab.den != LaurentPoly(1)] == [T**2 - 3 * T + 1]


def test_label_denominators_ok():
    a = -T + 3 - T**-1
    good = DiagramSeries.of(chord("k", "k", RatFunc(1, (T - 3 + T**-1) * (T - 3 + T**-1))))
    bad = DiagramSeries.of(chord("k", "k", RatFunc(1, T + 1)))
    assert label_denominators_ok(good, a)
    assert not label_denominators_ok(bad, a)


def test_wheel_polynomial_algebra():
    a = WheelPolynomial.linear({2: Fraction(1, 3), 4: 2}, 2)
    assert a.exp().log() == a
    assert (a.exp() * a.exp()) == (a + a).exp()
    assert WheelPolynomial.exp_of({2: 1}, 2).as_scalar_exp() == (1, {2: 1})
    assert (WheelPolynomial.exp_of({2: 1}, 2) * 3).as_scalar_exp() == (3, {2: 1})


def test_surgery_assemble_untruncated_remainder():
    h = h_diagram("x1", "k", "x1", "k")
    r = DiagramSeries([(JacobiDiagram(), 1), (h, 2)])
    le = surgery_assemble(fig8(), r, order=2, loop_bound=2)
    assert le.loop_terms[0].order == 1
    assert len(le.loop_terms[0]) == 1
