import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopline import fig8_path
from loopline.algebra import LaurentPoly, T, det_laurent, is_hermitian, matrix_at, normalize_alexander
from loopline.errors import DanglingCrossing, IllegalMove, NotSpecial, PresentationSyntaxError, UnknownCrossing
from loopline.presentation import (
    CrossingEnd,
    DeleteDiscPair,
    DeleteR2,
    DiscPass,
    InsertDiscPair,
    InsertR2,
    SlideR3,
    apply_move,
    cover_linking_oracle,
    crossing_passes,
    disc_pair_candidates,
    epsilon,
    format_presentation,
    linking_matrix,
    parse_presentation,
    r2_candidates,
    r3_candidates,
    validate_special,
    winding_matrix,
)
from loopline.sampling import prepare_r3, random_move, random_special_presentation

HOPF = """
strands 2
crossing a sign=+1
crossing b sign=+1
strand 1: O:a D+ O:b D-
strand 2: U:a U:b
"""


def fig8():
    with open(fig8_path()) as fh:
        return parse_presentation(fh.read())


def test_parse_fig8():
    p = fig8()
    assert p.mu == 1
    assert len(p.crossings) == 5
    assert [p.signs[c] for c in "abcde"] == [1, 1, -1, -1, -1]
    assert parse_presentation(format_presentation(p)) == p


def test_fig8_winding_and_alexander():
    p = fig8()
    w = winding_matrix(p)
    assert w == [[T - 3 + T**-1]]
    assert cover_linking_oracle(p) == w
    assert linking_matrix(p) == [[-1]]
    report = validate_special(p)
    assert report.is_special and report.det_lk == -1 and report.net_passages == (0,)
    assert normalize_alexander(det_laurent(w)) == -T + 3 - T**-1


def test_two_strand_example():
    p = parse_presentation(HOPF)
    half = Fraction(1, 2)
    w = winding_matrix(p)
    assert w[0][1] == half + half * T
    assert w[1][0] == half + half * T**-1
    assert w[0][0] == LaurentPoly() and w[1][1] == LaurentPoly()
    assert w == cover_linking_oracle(p)
    assert matrix_at(w, 1) == [[0, 1], [1, 0]]
    assert normalize_alexander(det_laurent(w)) == (T + 2 + T**-1) * Fraction(1, 4)


def test_epsilon_examples():
    p = parse_presentation("strands 1\ncrossing c sign=+1\nstrand 1: D+ O:c U:c D-\n")
    assert epsilon(p, "c") == 0
    p = parse_presentation("strands 1\ncrossing c sign=+1\nstrand 1: D+ O:c D- U:c\n")
    assert epsilon(p, "c") == 1
    a, b = crossing_passes(p, "c")
    assert epsilon(p, "c", (b, a)) == -1
    assert winding_matrix(p) == [[(T + T**-1) * Fraction(1, 2)]]
    with pytest.raises(UnknownCrossing):
        epsilon(p, "zz")


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("strands 1\nstrand 1: O:a\n", 2, 11),
        ("strands 1\ncrossing a sign=+1\nstrand 1: O:a X U:a\n", 3, 15),
        ("strand 1: D+\n", 1, 1),
        ("strands 1\nbogus line\n", 2, 1),
        ("strands 1\n  strand 2: D+\n", 2, 3),
        ("", 1, 1),
    ],
)
def test_syntax_errors_carry_position(text, line, col):
    with pytest.raises(PresentationSyntaxError) as info:
        parse_presentation(text)
    assert (info.value.lineno, info.value.offset) == (line, col)


def test_dangling_crossing():
    with pytest.raises(DanglingCrossing):
        parse_presentation("strands 1\ncrossing a sign=+1\nstrand 1: O:a\n")
    with pytest.raises(DanglingCrossing):
        parse_presentation("strands 1\ncrossing a sign=+1\nstrand 1: O:a O:a\n")


def test_not_special():
    p = parse_presentation("strands 1\nstrand 1: D+\n")
    report = validate_special(p)
    assert not report.is_special and report.net_passages == (1,)
    with pytest.raises(NotSpecial):
        cover_linking_oracle(p)
    p = parse_presentation("strands 1\n")
    assert validate_special(p).det_lk == 0


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_epsilon_antisymmetric_on_special(rng):
    p = random_special_presentation(rng)
    for c in p.crossings:
        a, b = crossing_passes(p, c)
        assert epsilon(p, c, (a, b)) == -epsilon(p, c, (b, a))


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_winding_hermitian_and_oracle(rng):
    p = random_special_presentation(rng)
    w = winding_matrix(p)
    assert is_hermitian(w)
    assert matrix_at(w, 1) == linking_matrix(p)
    assert w == cover_linking_oracle(p)
    assert validate_special(p).is_special


def test_disc_pair_moves():
    p = fig8()
    q = apply_move(p, InsertDiscPair(0, 3, -1))
    assert q.strands[0][3:5] == (DiscPass(-1), DiscPass(1))
    assert DeleteDiscPair(0, 3) in disc_pair_candidates(q)
    assert apply_move(q, DeleteDiscPair(0, 3)) == p
    with pytest.raises(IllegalMove):
        apply_move(p, DeleteDiscPair(0, 0))


def test_r2_insert_delete_round_trip():
    p = fig8()
    q = apply_move(p, InsertR2(0, 2, 0, 8, ("m0", "m1"), -1))
    assert len(q.crossings) == 7
    assert q.signs["m0"] == -q.signs["m1"]
    assert winding_matrix(q) == winding_matrix(p)
    assert DeleteR2(("m0", "m1")) in r2_candidates(q)
    assert apply_move(q, DeleteR2(("m0", "m1"))) == p
    with pytest.raises(IllegalMove):
        apply_move(p, InsertR2(0, 0, 0, 1, ("a", "m1")))
    with pytest.raises(IllegalMove):
        apply_move(p, DeleteR2(("a", "b")))


def test_r3_slide_preserves_winding():
    rng = random.Random(5)
    done = 0
    while done < 20:
        p = random_special_presentation(rng, max_events=10)
        moves = prepare_r3(rng, p)
        if moves is None:
            continue
        assert isinstance(moves[-1], SlideR3)
        q = p
        for mv in moves:
            q = apply_move(q, mv)
        assert winding_matrix(q) == winding_matrix(p)
        assert q != apply_move(p, moves[0])
        done += 1
    with pytest.raises(IllegalMove):
        apply_move(fig8(), SlideR3(("a", "b", "c")))


def test_random_walk_invariance():
    rng = random.Random(6)
    for _ in range(10):
        p = random_special_presentation(rng, max_events=12)
        w = winding_matrix(p)
        for _ in range(20):
            p = apply_move(p, random_move(rng, p))
            assert winding_matrix(p) == w
            for mv in r3_candidates(p):
                assert winding_matrix(apply_move(p, mv)) == w


def test_crossing_end_roles():
    p = parse_presentation(HOPF)
    assert p.strands[1] == (CrossingEnd("a", "under"), CrossingEnd("b", "under"))
