"""Framed string links in the solid torus, encoded as per-strand event lists.

A strand is read from base to top and records two kinds of event: a passage
through the meridional disc (``D+``/``D-``) or one end of a crossing
(``O:<id>`` when the strand is the over-strand, ``U:<id>`` when under).
Crossing signs are stored separately. ``D+`` is the direction that moves a
lift to the universal cyclic cover up one level (multiplication by ``t``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

from loopline.algebra import LaurentPoly, det_laurent
from loopline.errors import (
    DanglingCrossing,
    IllegalMove,
    NotSpecial,
    PresentationSyntaxError,
    UnknownCrossing,
)

__all__ = [
    "DiscPass",
    "CrossingEnd",
    "Pass",
    "Presentation",
    "SpecialnessReport",
    "parse_presentation",
    "format_presentation",
    "crossing_passes",
    "epsilon",
    "winding_matrix",
    "linking_matrix",
    "cover_linking_oracle",
    "validate_special",
    "InsertDiscPair",
    "DeleteDiscPair",
    "InsertR2",
    "DeleteR2",
    "SlideR3",
    "apply_move",
    "r3_candidates",
    "r2_candidates",
    "disc_pair_candidates",
]


class DiscPass(NamedTuple):
    direction: int


class CrossingEnd(NamedTuple):
    crossing: str
    role: str  # "over" | "under"


Event = Union[DiscPass, CrossingEnd]


class Pass(NamedTuple):
    """Location of one crossing end: strand index (0-based) and event index."""

    strand: int
    index: int


@dataclass(frozen=True)
class Presentation:
    strands: tuple[tuple[Event, ...], ...]
    signs: dict[str, int] = field(default_factory=dict, compare=True, hash=False)

    @property
    def mu(self) -> int:
        return len(self.strands)

    @property
    def crossings(self) -> list[str]:
        return list(self.signs)

    def __hash__(self):
        return hash((self.strands, tuple(sorted(self.signs.items()))))

    def validate(self) -> "Presentation":
        seen: dict[str, list[str]] = {c: [] for c in self.signs}
        for strand in self.strands:
            for ev in strand:
                if isinstance(ev, CrossingEnd):
                    if ev.crossing not in seen:
                        raise DanglingCrossing(f"crossing {ev.crossing!r} has no declared sign")
                    seen[ev.crossing].append(ev.role)
                elif ev.direction not in (1, -1):
                    raise ValueError(f"disc pass direction must be +-1, got {ev.direction}")
        for c, roles in seen.items():
            if sorted(roles) != ["over", "under"]:
                raise DanglingCrossing(
                    f"crossing {c!r} appears {len(roles)} time(s) with roles {roles}; "
                    "expected exactly one over and one under"
                )
        for c, s in self.signs.items():
            if s not in (1, -1):
                raise ValueError(f"crossing {c!r} has sign {s}")
        return self


@dataclass(frozen=True)
class SpecialnessReport:
    net_passages: tuple[int, ...]
    linking: tuple[tuple[Fraction, ...], ...]
    det_lk: Fraction
    is_special: bool


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------

_STRANDS = re.compile(r"strands\s+(\d+)\s*$")
_CROSSING = re.compile(r"crossing\s+(\S+)\s+sign=([+-]?1)\s*$")
_STRAND = re.compile(r"strand\s+(\d+)\s*:(.*)$")
_EVENT = re.compile(r"D\+|D-|[OU]:\S+")


def parse_presentation(text: str) -> Presentation:
    """Parse the line-oriented presentation format.

    ::

        strands 1
        crossing a sign=+1
        strand 1: O:a D+ U:a D-
    """
    mu = None
    signs: dict[str, int] = {}
    strands: dict[int, list[Event]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.lstrip()
        if not stripped:
            continue
        col = len(line) - len(stripped) + 1
        if m := _STRANDS.match(stripped):
            if mu is not None:
                raise PresentationSyntaxError("duplicate 'strands' line", lineno, col)
            mu = int(m.group(1))
        elif m := _CROSSING.match(stripped):
            cid = m.group(1)
            if cid in signs:
                raise PresentationSyntaxError(f"crossing {cid!r} declared twice", lineno, col)
            signs[cid] = int(m.group(2))
        elif m := _STRAND.match(stripped):
            if mu is None:
                raise PresentationSyntaxError("'strand' before 'strands'", lineno, col)
            k = int(m.group(1))
            if not 1 <= k <= mu:
                raise PresentationSyntaxError(f"strand {k} out of range 1..{mu}", lineno, col)
            if k in strands:
                raise PresentationSyntaxError(f"strand {k} listed twice", lineno, col)
            events: list[Event] = []
            body = m.group(2)
            body_col = col + m.start(2)
            for tok in re.finditer(r"\S+", body):
                word = tok.group(0)
                if not _EVENT.fullmatch(word):
                    raise PresentationSyntaxError(
                        f"bad event {word!r}", lineno, body_col + tok.start()
                    )
                if word == "D+":
                    events.append(DiscPass(1))
                elif word == "D-":
                    events.append(DiscPass(-1))
                else:
                    cid = word[2:]
                    if cid not in signs:
                        raise PresentationSyntaxError(
                            f"undeclared crossing {cid!r}", lineno, body_col + tok.start()
                        )
                    events.append(CrossingEnd(cid, "over" if word[0] == "O" else "under"))
            strands[k] = events
        else:
            raise PresentationSyntaxError(f"unrecognised line {stripped!r}", lineno, col)
    if mu is None:
        raise PresentationSyntaxError("missing 'strands' line", 1, 1)
    pres = Presentation(
        strands=tuple(tuple(strands.get(k, ())) for k in range(1, mu + 1)),
        signs=signs,
    )
    return pres.validate()


def format_presentation(p: Presentation) -> str:
    lines = [f"strands {p.mu}"]
    for c, s in p.signs.items():
        lines.append(f"crossing {c} sign={'+1' if s > 0 else '-1'}")
    for k, strand in enumerate(p.strands, start=1):
        words = []
        for ev in strand:
            if isinstance(ev, DiscPass):
                words.append("D+" if ev.direction > 0 else "D-")
            else:
                words.append(("O:" if ev.role == "over" else "U:") + ev.crossing)
        lines.append(f"strand {k}: " + " ".join(words))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# winding data
# --------------------------------------------------------------------------

def crossing_passes(p: Presentation, c: str) -> tuple[Pass, Pass]:
    """The two passes through ``c``, in (strand, index) order.

    For a self-crossing this lists the first encounter first.
    """
    if c not in p.signs:
        raise UnknownCrossing(c)
    found = [
        Pass(s, i)
        for s, strand in enumerate(p.strands)
        for i, ev in enumerate(strand)
        if isinstance(ev, CrossingEnd) and ev.crossing == c
    ]
    if len(found) != 2:
        raise DanglingCrossing(f"crossing {c!r} has {len(found)} passes")
    return found[0], found[1]


def _disc_sum(events: Sequence[Event]) -> int:
    return sum(ev.direction for ev in events if isinstance(ev, DiscPass))


def epsilon(p: Presentation, c: str, passes: tuple[Pass, Pass] | None = None) -> int:
    """Algebraic disc intersection of base -> c along one pass, then c -> top along the other.

    ``passes`` is the ordered pair (leave, enter); by default the canonical
    order of :func:`crossing_passes`, which for self-crossings switches
    strands at the first encounter.
    """
    leave, enter = passes if passes is not None else crossing_passes(p, c)
    for ps in (leave, enter):
        ev = p.strands[ps.strand][ps.index]
        if not (isinstance(ev, CrossingEnd) and ev.crossing == c):
            raise UnknownCrossing(f"{ps} is not a pass through {c!r}")
    prefix = _disc_sum(p.strands[leave.strand][: leave.index])
    suffix = _disc_sum(p.strands[enter.strand][enter.index + 1:])
    return prefix + suffix


def _zero_matrix(mu):
    return [[LaurentPoly() for _ in range(mu)] for _ in range(mu)]


def winding_matrix(p: Presentation) -> list[list[LaurentPoly]]:
    """Hermitian Laurent-polynomial refinement of the linking matrix."""
    half = Fraction(1, 2)
    w = _zero_matrix(p.mu)
    for c, sgn in p.signs.items():
        a, b = crossing_passes(p, c)
        i, j = a.strand, b.strand
        e_ab = epsilon(p, c, (a, b))
        if i == j:
            w[i][i] = w[i][i] + LaurentPoly({e_ab: half * sgn}) + LaurentPoly({-e_ab: half * sgn})
        else:
            e_ba = epsilon(p, c, (b, a))
            w[i][j] = w[i][j] + LaurentPoly({e_ab: half * sgn})
            w[j][i] = w[j][i] + LaurentPoly({e_ba: half * sgn})
    return w


def linking_matrix(p: Presentation) -> list[list[Fraction]]:
    """Half the signed count of mixed crossings off the diagonal, writhe on it."""
    lk = [[Fraction(0)] * p.mu for _ in range(p.mu)]
    for c, sgn in p.signs.items():
        a, b = crossing_passes(p, c)
        if a.strand == b.strand:
            lk[a.strand][a.strand] += sgn
        else:
            lk[a.strand][b.strand] += Fraction(sgn, 2)
            lk[b.strand][a.strand] += Fraction(sgn, 2)
    return lk


def net_passages(p: Presentation) -> tuple[int, ...]:
    return tuple(_disc_sum(strand) for strand in p.strands)


def cover_linking_oracle(p: Presentation) -> list[list[LaurentPoly]]:
    """Linking matrix of the lift to the infinite cyclic cover, by arc levels.

    Each arc between disc passages sits on a level (running disc sum from the
    base). A crossing between an arc of ``i`` on level ``a`` and an arc of
    ``j`` on level ``b`` lifts to a crossing of ``K_i`` with ``t^(a-b) K_j``.
    """
    nets = net_passages(p)
    if any(nets):
        raise NotSpecial(f"net disc passages {nets} are not all zero")
    ends: dict[str, list[tuple[int, int]]] = {c: [] for c in p.signs}
    for s, strand in enumerate(p.strands):
        level = 0
        for ev in strand:
            if isinstance(ev, DiscPass):
                level += ev.direction
            else:
                ends[ev.crossing].append((s, level))
    half = Fraction(1, 2)
    w = _zero_matrix(p.mu)
    for c, sgn in p.signs.items():
        (i, a), (j, b) = ends[c]
        w[i][j] = w[i][j] + LaurentPoly({a - b: half * sgn})
        w[j][i] = w[j][i] + LaurentPoly({b - a: half * sgn})
    return w


def validate_special(p: Presentation) -> SpecialnessReport:
    nets = net_passages(p)
    lk = linking_matrix(p)
    det = det_laurent([[LaurentPoly(x) for x in row] for row in lk])(1) if p.mu else Fraction(1)
    special = not any(nets) and det in (1, -1)
    return SpecialnessReport(
        net_passages=nets,
        linking=tuple(tuple(row) for row in lk),
        det_lk=Fraction(det),
        is_special=special,
    )


# --------------------------------------------------------------------------
# isotopy moves
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InsertDiscPair:
    """Insert ``D+ D-`` (or ``D- D+`` when ``first = -1``) before event ``index``."""

    strand: int
    index: int
    first: int = 1


@dataclass(frozen=True)
class DeleteDiscPair:
    """Delete the cancelling pair of disc passes at ``index``, ``index + 1``."""

    strand: int
    index: int


@dataclass(frozen=True)
class InsertR2:
    """Push strand ``over_strand`` across ``under_strand`` creating two crossings.

    The new crossing ends are inserted as adjacent pairs before
    ``over_index`` and ``under_index`` (indices into the original lists; on a
    single strand the two insertion points must differ or coincide with the
    under pair placed after the over pair). ``reversed_under`` lists the pair
    in the opposite order on the under strand.
    """

    over_strand: int
    over_index: int
    under_strand: int
    under_index: int
    names: tuple[str, str]
    first_sign: int = 1
    reversed_under: bool = False


@dataclass(frozen=True)
class DeleteR2:
    crossings: tuple[str, str]


@dataclass(frozen=True)
class SlideR3:
    crossings: tuple[str, str, str]


Move = Union[InsertDiscPair, DeleteDiscPair, InsertR2, DeleteR2, SlideR3]


def _with_strands(p: Presentation, strands, signs=None) -> Presentation:
    return Presentation(strands=tuple(tuple(s) for s in strands), signs=dict(p.signs if signs is None else signs))


def _insert_disc_pair(p: Presentation, mv: InsertDiscPair) -> Presentation:
    if not 0 <= mv.strand < p.mu or not 0 <= mv.index <= len(p.strands[mv.strand]):
        raise IllegalMove(f"insertion point {mv} out of range")
    if mv.first not in (1, -1):
        raise IllegalMove("first direction must be +-1")
    strands = [list(s) for s in p.strands]
    strands[mv.strand][mv.index:mv.index] = [DiscPass(mv.first), DiscPass(-mv.first)]
    return _with_strands(p, strands)


def _delete_disc_pair(p: Presentation, mv: DeleteDiscPair) -> Presentation:
    if not 0 <= mv.strand < p.mu:
        raise IllegalMove(f"no strand {mv.strand}")
    s = p.strands[mv.strand]
    if mv.index < 0 or mv.index + 1 >= len(s):
        raise IllegalMove("no adjacent pair at that index")
    a, b = s[mv.index], s[mv.index + 1]
    if not (isinstance(a, DiscPass) and isinstance(b, DiscPass) and a.direction == -b.direction):
        raise IllegalMove("events are not a cancelling pair of disc passes")
    strands = [list(x) for x in p.strands]
    del strands[mv.strand][mv.index:mv.index + 2]
    return _with_strands(p, strands)


def _insert_r2(p: Presentation, mv: InsertR2) -> Presentation:
    a, b = mv.names
    if a == b or a in p.signs or b in p.signs:
        raise IllegalMove("R2 needs two fresh crossing names")
    if mv.first_sign not in (1, -1):
        raise IllegalMove("sign must be +-1")
    for s, i in ((mv.over_strand, mv.over_index), (mv.under_strand, mv.under_index)):
        if not 0 <= s < p.mu or not 0 <= i <= len(p.strands[s]):
            raise IllegalMove(f"insertion point ({s}, {i}) out of range")
    over = [CrossingEnd(a, "over"), CrossingEnd(b, "over")]
    under = [CrossingEnd(a, "under"), CrossingEnd(b, "under")]
    if mv.reversed_under:
        under.reverse()
    strands = [list(x) for x in p.strands]
    if mv.over_strand == mv.under_strand:
        # insert at the later point first so the earlier index stays valid
        points = sorted([(mv.over_index, 0, over), (mv.under_index, 1, under)], reverse=True)
        for idx, _, evs in points:
            strands[mv.over_strand][idx:idx] = evs
    else:
        strands[mv.over_strand][mv.over_index:mv.over_index] = over
        strands[mv.under_strand][mv.under_index:mv.under_index] = under
    signs = dict(p.signs)
    signs[a] = mv.first_sign
    signs[b] = -mv.first_sign
    return _with_strands(p, strands, signs)


def _adjacent(x: Pass, y: Pass) -> bool:
    return x.strand == y.strand and abs(x.index - y.index) == 1


def _r2_pair_ok(p: Presentation, a: str, b: str) -> bool:
    if p.signs[a] != -p.signs[b]:
        return False
    pa, pb = crossing_passes(p, a), crossing_passes(p, b)
    ends = {}
    for c, passes in ((a, pa), (b, pb)):
        for ps in passes:
            ends[(c, p.strands[ps.strand][ps.index].role)] = ps
    return (
        _adjacent(ends[(a, "over")], ends[(b, "over")])
        and _adjacent(ends[(a, "under")], ends[(b, "under")])
    )


def _delete_r2(p: Presentation, mv: DeleteR2) -> Presentation:
    a, b = mv.crossings
    for c in (a, b):
        if c not in p.signs:
            raise IllegalMove(f"unknown crossing {c!r}")
    if a == b or not _r2_pair_ok(p, a, b):
        raise IllegalMove(f"crossings {a!r}, {b!r} do not bound a bigon")
    strands = [[ev for ev in s if not (isinstance(ev, CrossingEnd) and ev.crossing in (a, b))] for s in p.strands]
    signs = {c: s for c, s in p.signs.items() if c not in (a, b)}
    return _with_strands(p, strands, signs)


def _triangle_pairs(p: Presentation, trio: Sequence[str]):
    """Match the six ends of three crossings into three adjacent cross pairs."""
    ends = []
    for c in trio:
        for ps in crossing_passes(p, c):
            ends.append((c, ps))

    def matchings(rest):
        if not rest:
            yield []
            return
        first, others = rest[0], rest[1:]
        for k, other in enumerate(others):
            if other[0] != first[0] and _adjacent(first[1], other[1]):
                for tail in matchings(others[:k] + others[k + 1:]):
                    yield [(first, other)] + tail

    for pairs in matchings(ends):
        if len({frozenset((x[0], y[0])) for x, y in pairs}) == 3:
            return pairs
    return None


def _r3_ok(p: Presentation, trio: Sequence[str]):
    pairs = _triangle_pairs(p, trio)
    if pairs is None:
        return None
    # one strand passes over both others, one under both
    patterns = sorted(
        tuple(sorted(p.strands[ps.strand][ps.index].role for _, ps in pair)) for pair in pairs
    )
    if patterns != [("over", "over"), ("over", "under"), ("under", "under")]:
        return None
    return pairs


def _slide_r3(p: Presentation, mv: SlideR3) -> Presentation:
    trio = mv.crossings
    if len(set(trio)) != 3 or any(c not in p.signs for c in trio):
        raise IllegalMove("R3 needs three distinct known crossings")
    pairs = _r3_ok(p, trio)
    if pairs is None:
        raise IllegalMove(f"crossings {trio} do not bound a slidable triangle")
    strands = [list(s) for s in p.strands]
    for (_, p1), (_, p2) in pairs:
        s = strands[p1.strand]
        s[p1.index], s[p2.index] = s[p2.index], s[p1.index]
    return _with_strands(p, strands)


def apply_move(p: Presentation, move: Move) -> Presentation:
    """Apply one isotopy move; raises :class:`IllegalMove` if it does not fit."""
    if isinstance(move, InsertDiscPair):
        return _insert_disc_pair(p, move)
    if isinstance(move, DeleteDiscPair):
        return _delete_disc_pair(p, move)
    if isinstance(move, InsertR2):
        return _insert_r2(p, move)
    if isinstance(move, DeleteR2):
        return _delete_r2(p, move)
    if isinstance(move, SlideR3):
        return _slide_r3(p, move)
    raise IllegalMove(f"unknown move {move!r}")


def disc_pair_candidates(p: Presentation) -> list[DeleteDiscPair]:
    out = []
    for s, strand in enumerate(p.strands):
        for i in range(len(strand) - 1):
            a, b = strand[i], strand[i + 1]
            if isinstance(a, DiscPass) and isinstance(b, DiscPass) and a.direction == -b.direction:
                out.append(DeleteDiscPair(s, i))
    return out


def r2_candidates(p: Presentation) -> list[DeleteR2]:
    names = list(p.signs)
    out = []
    for x in range(len(names)):
        for y in range(x + 1, len(names)):
            if _r2_pair_ok(p, names[x], names[y]):
                out.append(DeleteR2((names[x], names[y])))
    return out


def r3_candidates(p: Presentation) -> list[SlideR3]:
    """All triangles of crossings on which an R3 slide is legal."""
    neighbours: dict[str, set[str]] = {c: set() for c in p.signs}
    for strand in p.strands:
        for a, b in zip(strand, strand[1:]):
            if isinstance(a, CrossingEnd) and isinstance(b, CrossingEnd) and a.crossing != b.crossing:
                neighbours[a.crossing].add(b.crossing)
                neighbours[b.crossing].add(a.crossing)
    out = []
    for a in sorted(neighbours):
        for b in sorted(neighbours[a]):
            if b <= a:
                continue
            for c in sorted(neighbours[a] & neighbours[b]):
                if c <= b:
                    continue
                if _r3_ok(p, (a, b, c)) is not None:
                    out.append(SlideR3((a, b, c)))
    return out
