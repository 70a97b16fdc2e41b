"""Random inputs: special presentations, move walks, Hermitian matrices, diagrams."""

from __future__ import annotations

import random
from fractions import Fraction

from loopline.algebra import LaurentPoly, RatFunc, T, det_laurent
from loopline.diagrams import ONE, DiagramSeries, JacobiDiagram, connected_components, exp_truncated
from loopline.presentation import (
    CrossingEnd,
    DeleteDiscPair,
    DeleteR2,
    DiscPass,
    InsertDiscPair,
    InsertR2,
    Presentation,
    SlideR3,
    apply_move,
    disc_pair_candidates,
    r2_candidates,
    r3_candidates,
)

__all__ = [
    "random_unimodular_symmetric",
    "random_special_presentation",
    "random_move",
    "prepare_r3",
    "random_hermitian",
    "random_laurent",
    "random_label",
    "random_diagram",
    "random_remainder",
]


def _unimodular(rng: random.Random, mu: int, steps: int) -> list[list[int]]:
    s = [[int(i == j) for j in range(mu)] for i in range(mu)]
    for _ in range(steps):
        if mu < 2:
            break
        i, j = rng.sample(range(mu), 2)
        c = rng.choice((-1, 1))
        for k in range(mu):
            s[i][k] += c * s[j][k]
    return s


def random_unimodular_symmetric(rng: random.Random, mu: int, steps: int = 2) -> list[list[int]]:
    """``S^T D S`` with ``D = diag(±1)`` and ``S`` a product of elementary matrices."""
    s = _unimodular(rng, mu, steps)
    d = [rng.choice((-1, 1)) for _ in range(mu)]
    return [[sum(s[k][i] * d[k] * s[k][j] for k in range(mu)) for j in range(mu)] for i in range(mu)]


def random_special_presentation(
    rng: random.Random, max_mu: int = 4, max_events: int = 20, max_tries: int = 200
) -> Presentation:
    """A presentation with zero net disc passage and unimodular linking matrix."""
    for _ in range(max_tries):
        mu = rng.randint(1, max_mu)
        lk = random_unimodular_symmetric(rng, mu, rng.randint(0, 2))
        crossings: list[tuple[int, int, int]] = []  # (strand_a, strand_b, sign)
        for i in range(mu):
            sgn = 1 if lk[i][i] > 0 else -1
            crossings += [(i, i, sgn)] * abs(lk[i][i])
            for j in range(i + 1, mu):
                sgn = 1 if lk[i][j] > 0 else -1
                crossings += [(i, j, sgn)] * (2 * abs(lk[i][j]))
        for _ in range(rng.randint(0, 2)):
            i, j = rng.randrange(mu), rng.randrange(mu)
            crossings += [(i, j, 1), (i, j, -1)]
        strands: list[list] = [[] for _ in range(mu)]
        signs = {}
        for n, (i, j, sgn) in enumerate(crossings):
            name = f"c{n}"
            signs[name] = sgn
            roles = ["over", "under"]
            rng.shuffle(roles)
            for strand, role in ((i, roles[0]), (j, roles[1])):
                pos = rng.randint(0, len(strands[strand]))
                strands[strand].insert(pos, CrossingEnd(name, role))
        for strand in strands:
            for _ in range(rng.randint(0, 3)):
                for direction in (1, -1):
                    strand.insert(rng.randint(0, len(strand)), DiscPass(direction))
        if all(len(s) <= max_events for s in strands):
            return Presentation(tuple(tuple(s) for s in strands), signs).validate()
    raise RuntimeError("could not sample a presentation within the event budget")


def _fresh(p: Presentation, k: int) -> list[str]:
    names, n = [], 0
    while len(names) < k:
        name = f"m{n}"
        if name not in p.signs:
            names.append(name)
        n += 1
    return names


def _site(rng: random.Random, p: Presentation) -> tuple[int, int]:
    s = rng.randrange(p.mu)
    return s, rng.randint(0, len(p.strands[s]))


def random_move(rng: random.Random, p: Presentation):
    """Pick a random legal move (as a move object) for ``p``."""
    kinds = ["disc", "r2"]
    deletions = disc_pair_candidates(p) + r2_candidates(p)
    slides = r3_candidates(p)
    if deletions:
        kinds.append("delete")
    if slides:
        kinds += ["r3", "r3"]
    kind = rng.choice(kinds)
    if kind == "disc":
        s, i = _site(rng, p)
        return InsertDiscPair(s, i, rng.choice((1, -1)))
    if kind == "r2":
        (s1, i1), (s2, i2) = _site(rng, p), _site(rng, p)
        return InsertR2(s1, i1, s2, i2, tuple(_fresh(p, 2)), rng.choice((1, -1)), rng.random() < 0.5)
    if kind == "delete":
        return rng.choice(deletions)
    return rng.choice(slides)


def _index_of(p: Presentation, name: str, role: str) -> tuple[int, int]:
    for s, strand in enumerate(p.strands):
        for i, ev in enumerate(strand):
            if isinstance(ev, CrossingEnd) and ev.crossing == name and ev.role == role:
                return s, i
    raise KeyError(name)


def prepare_r3(rng: random.Random, p: Presentation):
    """Build a slidable triangle with three R2 insertions.

    Returns the list of moves (the three insertions followed by the slide),
    or ``None`` if the random sites did not produce a legal triangle.
    """
    moves = []
    x1, x2, y1, y2, z1, z2 = _fresh(p, 6)
    (sa, ia), (sb, ib) = _site(rng, p), _site(rng, p)
    mv = InsertR2(sa, ia, sb, ib, (x1, x2), rng.choice((1, -1)))
    q = apply_move(p, mv)
    moves.append(mv)
    sa, ia = _index_of(q, x1, "over")
    sc, ic = _site(rng, q)
    mv = InsertR2(sa, ia + 1, sc, ic, (y1, y2), rng.choice((1, -1)))
    q = apply_move(q, mv)
    moves.append(mv)
    sb, ib = _index_of(q, x1, "under")
    sc, ic = _index_of(q, y1, "under")
    mv = InsertR2(sb, ib + 1, sc, ic + 1, (z1, z2), rng.choice((1, -1)))
    try:
        q = apply_move(q, mv)
    except Exception:
        return None
    moves.append(mv)
    slide = SlideR3((x2, y2, z2))
    if slide not in r3_candidates(q):
        return None
    moves.append(slide)
    return moves


def random_laurent(rng: random.Random, span: int = 2, max_coeff: int = 2) -> LaurentPoly:
    return LaurentPoly({e: rng.randint(-max_coeff, max_coeff) for e in range(-span, span + 1)})


def random_hermitian(rng: random.Random, mu: int, span: int = 2) -> list[list[LaurentPoly]]:
    """Hermitian Laurent matrix whose value at 1 is unimodular (so ``det W(1) = ±1``)."""
    base = random_unimodular_symmetric(rng, mu, rng.randint(0, 2))
    w = [[LaurentPoly(base[i][j]) for j in range(mu)] for i in range(mu)]
    one = LaurentPoly(1)
    for i in range(mu):
        for _ in range(rng.randint(0, 2)):
            e, c = rng.randint(1, span), rng.choice((-1, 1))
            w[i][i] = w[i][i] + (T**e + T**-e - 2 * one) * c
        for j in range(i + 1, mu):
            for _ in range(rng.randint(0, 2)):
                e, c = rng.choice([x for x in range(-span, span + 1) if x]), rng.choice((-1, 1))
                extra = (T**e - one) * c
                w[i][j] = w[i][j] + extra
                w[j][i] = w[j][i] + extra.bar()
    assert det_laurent(w)(1) in (1, -1)
    return w


_LABELS = [T, T**-1, T + 1, 2 * T - 1, T**2 - T + 1]


def random_label(rng: random.Random, denominators: bool = True) -> RatFunc:
    num = rng.choice(_LABELS + [LaurentPoly(1)] * 3)
    if denominators and rng.random() < 0.3:
        return RatFunc(num, rng.choice([T + 1, 2 * T - 1, T**2 + 1]))
    return RatFunc(num)


def random_diagram(
    rng: random.Random,
    n_trivalent: int,
    legs: list[str],
    labels: bool = True,
    connected: bool = True,
    no_bare_chords: bool = True,
    denominators: bool = True,
    max_tries: int = 500,
) -> JacobiDiagram:
    """Random uni-trivalent graph by pairing half-edges uniformly (configuration model)."""
    if (3 * n_trivalent + len(legs)) % 2:
        raise ValueError("odd number of half-edges")
    for _ in range(max_tries):
        slots = [("T", v) for v in range(n_trivalent) for _ in range(3)] + [("L", l) for l in range(len(legs))]
        rng.shuffle(slots)
        edges = [(slots[2 * e], slots[2 * e + 1]) for e in range(len(slots) // 2)]
        tri = [[] for _ in range(n_trivalent)]
        leg_ends = [None] * len(legs)
        for e, (a, b) in enumerate(edges):
            for owner, end in ((a, 2 * e), (b, 2 * e + 1)):
                if owner[0] == "T":
                    tri[owner[1]].append(end)
                else:
                    leg_ends[owner[1]] = end
        lab = tuple(random_label(rng, denominators) if labels and rng.random() < 0.5 else ONE for _ in edges)
        d = JacobiDiagram(
            tuple(tuple(t) for t in tri),
            tuple((name, h) for name, h in zip(legs, leg_ends)),
            lab,
        )
        if connected and len(connected_components(d)) != 1:
            continue
        if no_bare_chords and d.chords():
            continue
        return d
    raise RuntimeError("could not sample a diagram with the requested shape")


def random_remainder(rng: random.Random, mu: int = 1, terms: int = 3, order: int = 4) -> DiagramSeries:
    """Group-like chord-free series ``exp(sum c_i D_i)``, ``D_i`` connected and labelled, on x-legs."""
    out = []
    for _ in range(terms):
        n_legs = rng.choice((2, 4))
        n_tri = rng.choice([t for t in range(1, 5) if (3 * t + n_legs) % 2 == 0])
        legs = [f"x{rng.randint(1, mu)}" for _ in range(n_legs)]
        out.append((random_diagram(rng, n_tri, legs, denominators=False), Fraction(rng.randint(1, 5), rng.randint(1, 3))))
    return exp_truncated(DiagramSeries(out, order=order))
