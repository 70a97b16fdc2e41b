import random
from fractions import Fraction

import pytest

from loopline.algebra import LaurentPoly, RatFunc, T
from loopline.diagrams import DiagramSeries, JacobiDiagram, canonical_form, chord, connected_components, glue_legs, pair_glue
from loopline.integration import lmo_integrate_n
from loopline.oracles import brute_lmo_integrate, brute_pair_glue
from loopline.sampling import (
    random_diagram,
    random_hermitian,
    random_special_presentation,
    random_unimodular_symmetric,
)
from loopline.algebra import det_laurent, is_hermitian


def four_leg_diagram(names, n_tri=4):
    """A connected diagram with the given legs that AS does not kill."""
    rng = random.Random(61)
    for _ in range(200):
        d = random_diagram(rng, n_tri, list(names), labels=False)
        if canonical_form(d).factor:
            return d
    raise AssertionError("no surviving diagram found")


def test_four_x1_legs_three_matchings():
    lam = RatFunc(T + 1 + T**-1)
    d = four_leg_diagram(["x1"] * 4)
    out = pair_glue([[lam]], DiagramSeries.of(d))
    assert out == brute_pair_glue([[lam]], d)
    expected = DiagramSeries()
    for pairs in ([(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]):
        expected = expected + DiagramSeries.of(glue_legs(d, [(a, b, lam) for a, b in pairs]))
    assert out == expected


def test_mixed_legs_diagonal_weights():
    d = four_leg_diagram(["x1", "x1", "x2", "x2"])
    w = [[RatFunc(2), RatFunc(0)], [RatFunc(0), RatFunc(3)]]
    out = pair_glue(w, DiagramSeries.of(d))
    assert out == brute_pair_glue(w, d)
    assert out == DiagramSeries.of(glue_legs(d, [(0, 1, RatFunc(2)), (2, 3, RatFunc(3))]))
    w = [[RatFunc(2), RatFunc(T)], [RatFunc(T**-1), RatFunc(3)]]
    assert pair_glue(w, DiagramSeries.of(d)) == brute_pair_glue(w, d)


def test_brute_pairing_respects_other_legs():
    d = four_leg_diagram(["x1", "k", "x1", "k"])
    w = [[RatFunc(T - 3 + T**-1)]]
    assert pair_glue(w, DiagramSeries.of(d)) == brute_pair_glue(w, d)
    assert brute_pair_glue(w, four_leg_diagram(["x1", "k", "k", "k"])).is_zero()


def test_brute_lmo_examples():
    loop_free = chord("x1", "x1")
    assert brute_lmo_integrate(loop_free, 1, ["x1"]) == DiagramSeries.one().scale(-2)
    assert brute_lmo_integrate(loop_free, 2, ["x1"]).is_zero()
    rng = random.Random(62)
    for _ in range(10):
        d = random_diagram(rng, 2, ["x1"] * 4 + ["k", "k"], labels=False, connected=False, no_bare_chords=False)
        assert lmo_integrate_n(DiagramSeries.of(d), 2) == brute_lmo_integrate(d, 2, ["x1"]).truncate(2)


def test_samplers_meet_their_contracts():
    rng = random.Random(63)
    for _ in range(30):
        s = random_unimodular_symmetric(rng, rng.randint(1, 4), 3)
        assert det_laurent([[LaurentPoly(x) for x in row] for row in s])(1) in (1, -1)
        w = random_hermitian(rng, rng.randint(1, 3))
        assert is_hermitian(w)
        p = random_special_presentation(rng, max_events=20)
        assert all(len(strand) <= 20 for strand in p.strands)
        d = random_diagram(rng, 3, ["x1", "x1", "k"])
        assert len(connected_components(d)) == 1 and not d.chords()
    with pytest.raises(ValueError):
        random_diagram(rng, 1, ["x1", "x1"])
