"""Brute-force reference computations used to cross-check the fast routes."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import permutations, product
from math import factorial
from typing import Sequence

from loopline.diagrams import ONE, DiagramSeries, JacobiDiagram, glue_legs, x_label

__all__ = ["brute_pair_glue", "brute_lmo_integrate"]


def _bijection_matchings(leg_ids: Sequence[int], end_types: Sequence[int], leg_types: Sequence[int]):
    """Yield, for every label-respecting bijection legs -> chord ends, the induced pairing.

    Chord ``c`` owns ends ``2c`` and ``2c + 1``; the result maps each chord
    to ``(leg at its tail, leg at its head)``.
    """
    n = len(leg_ids)
    for perm in permutations(range(n)):
        if any(end_types[perm[k]] != leg_types[k] for k in range(n)):
            continue
        at = [None] * n
        for k, end in enumerate(perm):
            at[end] = leg_ids[k]
        yield tuple((at[2 * c], at[2 * c + 1]) for c in range(n // 2))


def brute_pair_glue(weights, d: JacobiDiagram, legs: Sequence[str] | None = None) -> DiagramSeries:
    """Expand ``exp(1/2 sum w_ij chord_ij)`` literally and pair it with ``d``.

    Every ordered word of chord types, every bijection between designated legs
    and chord ends, and the ``(1/2)^p / p!`` prefactor are all enumerated.
    """
    mu = len(weights)
    legs = [x_label(i) for i in range(mu)] if legs is None else list(legs)
    index = {name: i for i, name in enumerate(legs)}
    chosen = [l for l, (name, _) in enumerate(d.legs) if name in index]
    out = DiagramSeries()
    if len(chosen) % 2:
        return out
    p = len(chosen) // 2
    leg_types = [index[d.legs[l][0]] for l in chosen]
    pref = Fraction(1, 2**p * factorial(p))
    tally: dict[tuple, Fraction] = defaultdict(Fraction)
    for word in product(range(mu * mu), repeat=p):
        kinds = [divmod(w, mu) for w in word]
        end_types = [x for i, j in kinds for x in (i, j)]
        if sorted(end_types) != sorted(leg_types):
            continue
        for pairing in _bijection_matchings(chosen, end_types, leg_types):
            key = tuple(sorted(
                (a, b, kinds[c][0], kinds[c][1]) for c, (a, b) in enumerate(pairing)
            ))
            tally[key] += pref
    for key, coeff in tally.items():
        pairs = []
        for a, b, i, j in key:
            w = weights[i][j]
            pairs.append((a, b, w if hasattr(w, "bar") else ONE * w))
        out._accumulate([(glue_legs(d, pairs), coeff)])
    return out


def brute_lmo_integrate(d: JacobiDiagram, n: int, legs: Sequence[str]) -> DiagramSeries:
    """Pair ``d`` with ``prod_i (1/n!) (1/2 chord_ii)^n`` by enumerating bijections.

    Closed loops are then replaced by ``-2n`` each; no grade truncation.
    """
    legs = list(legs)
    by_var = []
    for name in legs:
        ids = [l for l, (lab, _) in enumerate(d.legs) if lab == name]
        if len(ids) != 2 * n:
            return DiagramSeries()
        by_var.append(ids)
    pref = Fraction(1, 2**n * factorial(n)) ** len(legs)
    tally: dict[tuple, Fraction] = defaultdict(Fraction)
    for choice in product(
        *(list(_bijection_matchings(ids, [0] * len(ids), [0] * len(ids))) for ids in by_var)
    ):
        key = tuple(sorted(pair for pairing in choice for pair in pairing))
        tally[key] += pref
    out = DiagramSeries()
    for key, coeff in tally.items():
        glued = glue_legs(d, [(a, b, ONE) for a, b in key])
        loops = len(glued.loops)
        core = JacobiDiagram(glued.trivalent, glued.legs, glued.labels, ())
        out._accumulate([(core, coeff * Fraction(-2 * n) ** loops)])
    return out
