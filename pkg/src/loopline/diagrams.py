"""Jacobi diagrams with labelled legs and rational edge labels.

A diagram is stored through its half-edges ("ends"). Edge ``e`` owns ends
``2e`` (tail) and ``2e + 1`` (head) and carries one label, read from tail to
head. Trivalent vertices list three ends in cyclic order; legs are
univalent vertices with a name (``x1``, ``x'2``, ``k``, ...) and one end.
Closed dashed circles with no vertices live in ``loops``.

Canonical forms respect graph isomorphism, the AS relation (reversing the
cyclic order at one trivalent vertex negates the diagram) and the label
calculus: reversing an edge conjugates its label, and a rational multiple
of a label can be pulled out as a coefficient. IHX and STU are *not*
imposed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Callable, Iterable, Iterator, Sequence

from loopline.algebra import RatFunc
from loopline.errors import NotUnital, TooLarge

__all__ = [
    "ONE",
    "JacobiDiagram",
    "DiagramBuilder",
    "CanonicalForm",
    "canonical_form",
    "chord",
    "wheel",
    "tripod",
    "union",
    "connected_components",
    "glue_legs",
    "expand_labels",
    "perfect_matchings",
    "DiagramSeries",
    "union_product",
    "exp_truncated",
    "log_truncated",
    "pair_glue",
    "translate",
    "x_label",
    "xprime_label",
    "DEFAULT_MAX_VERTICES",
]

ONE = RatFunc(1)
DEFAULT_MAX_VERTICES = 24


def x_label(i: int) -> str:
    """Leg name of the ``i``-th surgery variable (0-based index)."""
    return f"x{i + 1}"


def xprime_label(i: int) -> str:
    return f"x'{i + 1}"


@dataclass(frozen=True)
class JacobiDiagram:
    trivalent: tuple[tuple[int, int, int], ...] = ()
    legs: tuple[tuple[str, int], ...] = ()
    labels: tuple = ()
    loops: tuple = ()

    @property
    def n_edges(self) -> int:
        return len(self.labels)

    @property
    def n_vertices(self) -> int:
        return len(self.trivalent) + len(self.legs)

    @property
    def grade(self) -> Fraction:
        """Half the number of trivalent vertices."""
        return Fraction(len(self.trivalent), 2)

    def leg_counts(self) -> Counter:
        return Counter(name for name, _ in self.legs)

    @property
    def isolated_loops(self) -> int:
        return sum(1 for lab in self.loops if lab == ONE)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges

    def is_empty(self) -> bool:
        return not (self.trivalent or self.legs or self.loops)

    def check(self) -> "JacobiDiagram":
        ends = [h for tri in self.trivalent for h in tri] + [h for _, h in self.legs]
        if sorted(ends) != list(range(2 * len(self.labels))):
            raise ValueError("every half-edge must belong to exactly one vertex")
        return self

    def owner_map(self) -> dict[int, tuple[str, int, int]]:
        """End -> ("T", vertex, slot) or ("L", leg, 0)."""
        owner = {}
        for v, tri in enumerate(self.trivalent):
            for slot, h in enumerate(tri):
                owner[h] = ("T", v, slot)
        for l, (_, h) in enumerate(self.legs):
            owner[h] = ("L", l, 0)
        return owner

    def edge_label(self, end: int):
        """Label of the edge containing ``end``, read away from ``end``."""
        lab = self.labels[end // 2]
        return lab if end % 2 == 0 else lab.bar()

    def chords(self) -> list[int]:
        """Edges whose both ends are legs."""
        leg_ends = {h for _, h in self.legs}
        return [e for e in range(self.n_edges) if 2 * e in leg_ends and 2 * e + 1 in leg_ends]


class DiagramBuilder:
    """Incremental construction of a :class:`JacobiDiagram`."""

    def __init__(self):
        self.trivalent: list[tuple[int, int, int]] = []
        self.legs: list[tuple[str, int]] = []
        self.labels: list = []
        self.loops: list = []

    def edge(self, label=ONE) -> tuple[int, int]:
        e = len(self.labels)
        self.labels.append(label)
        return 2 * e, 2 * e + 1

    def vertex(self, a: int, b: int, c: int) -> None:
        self.trivalent.append((a, b, c))

    def leg(self, name: str, end: int) -> None:
        self.legs.append((name, end))

    def loop(self, label=ONE) -> None:
        self.loops.append(label)

    def path(self, start_end: int, n_legs: int, leg_name: str = "k", label=ONE) -> int:
        """Grow a path of ``n_legs`` leg-carrying vertices from ``start_end``.

        ``start_end`` is an end already owned by nothing; it becomes the
        incoming end of the first new vertex. Returns the free end at the far
        side, which the caller must attach. The final segment carries ``label``.
        Vertices are oriented (incoming, outgoing, leg).
        """
        current = start_end
        for _ in range(n_legs):
            tail, head = self.edge()
            leg_tail, leg_head = self.edge()
            self.vertex(current, tail, leg_tail)
            self.leg(leg_name, leg_head)
            current = head
        return current

    def build(self) -> JacobiDiagram:
        return JacobiDiagram(
            trivalent=tuple(self.trivalent),
            legs=tuple(self.legs),
            labels=tuple(self.labels),
            loops=tuple(self.loops),
        )


def chord(a: str, b: str, label=ONE) -> JacobiDiagram:
    """Single dashed edge from leg ``a`` to leg ``b``."""
    return JacobiDiagram(legs=((a, 0), (b, 1)), labels=(label,))


def tripod(a: str, b: str, c: str) -> JacobiDiagram:
    return JacobiDiagram(
        trivalent=((0, 2, 4),), legs=((a, 1), (b, 3), (c, 5)), labels=(ONE, ONE, ONE)
    )


def wheel(m: int, leg: str = "k") -> JacobiDiagram:
    """The wheel with ``m`` spokes; ``m = 0`` is a bare dashed circle.

    Rim vertices are oriented (incoming rim, outgoing rim, spoke) going round
    the rim, the same convention used when legs are grown on an edge.
    """
    b = DiagramBuilder()
    if m == 0:
        b.loop()
        return b.build()
    rim = [b.edge() for _ in range(m)]
    for r in range(m):
        spoke_tail, spoke_head = b.edge()
        b.vertex(rim[r - 1][1], rim[r][0], spoke_tail)
        b.leg(leg, spoke_head)
    return b.build()


def union(a: JacobiDiagram, b: JacobiDiagram) -> JacobiDiagram:
    off = 2 * a.n_edges
    return JacobiDiagram(
        trivalent=a.trivalent + tuple((x + off, y + off, z + off) for x, y, z in b.trivalent),
        legs=a.legs + tuple((n, h + off) for n, h in b.legs),
        labels=a.labels + b.labels,
        loops=a.loops + b.loops,
    )


def connected_components(d: JacobiDiagram) -> list[JacobiDiagram]:
    """Split into connected pieces; each vertexless loop is its own piece."""
    parent = list(range(d.n_edges))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for tri in d.trivalent:
        r = find(tri[0] // 2)
        for h in tri[1:]:
            parent[find(h // 2)] = r
    groups: dict[int, list[int]] = {}
    for e in range(d.n_edges):
        groups.setdefault(find(e), []).append(e)
    pieces = []
    for edges in groups.values():
        edge_set = set(edges)
        remap = {}
        for new, e in enumerate(sorted(edges)):
            remap[2 * e] = 2 * new
            remap[2 * e + 1] = 2 * new + 1
        pieces.append(
            JacobiDiagram(
                trivalent=tuple(
                    tuple(remap[h] for h in tri) for tri in d.trivalent if tri[0] // 2 in edge_set
                ),
                legs=tuple((n, remap[h]) for n, h in d.legs if h // 2 in edge_set),
                labels=tuple(d.labels[e] for e in sorted(edges)),
            )
        )
    pieces.extend(JacobiDiagram(loops=(lab,)) for lab in d.loops)
    return pieces


# --------------------------------------------------------------------------
# label normalisation
# --------------------------------------------------------------------------

def _primitive(f: RatFunc) -> tuple[Fraction, RatFunc]:
    """Split ``f = s * g`` with ``g``'s numerator coprime-integral, top coefficient positive."""
    items = f.num.items()
    den_lcm = 1
    for _, c in items:
        den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    num_gcd = 0
    for _, c in items:
        num_gcd = gcd(num_gcd, (c * den_lcm).numerator)
    s = Fraction(num_gcd, den_lcm)
    if items[-1][1] < 0:
        s = -s
    return s, f * RatFunc(1 / s)


def _normalize_label(f):
    """Return ``(scalar, label, kind)`` for an edge label.

    ``kind`` is ``"sym"`` (label fixed by reversal), ``"anti"`` (reversal
    negates it), ``"fwd"`` (keep orientation) or ``"rev"`` (reverse the edge;
    scalar and label then refer to the reversed edge).
    """
    if not isinstance(f, RatFunc):
        raise TypeError(f"canonical forms need rational labels, got {type(f).__name__}")
    if f.is_zero():
        return Fraction(0), ONE, "sym"
    s1, g1 = _primitive(f)
    if g1 == ONE:
        return s1, ONE, "sym"
    s2, g2 = _primitive(f.bar())
    if g1 == g2:
        return s1, g1, ("sym" if s1 == s2 else "anti")
    if g1.sort_key() < g2.sort_key():
        return s1, g1, "fwd"
    return s2, g2, "rev"


def _normalize_loop(f) -> tuple[Fraction, RatFunc]:
    s, g, kind = _normalize_label(f)
    if kind == "anti":
        return Fraction(0), ONE
    return s, g


# --------------------------------------------------------------------------
# canonical labelling
# --------------------------------------------------------------------------

class CanonicalForm(tuple):
    """``(key, factor)``: ``diagram == factor * key`` with ``key`` canonical.

    ``factor`` is ``±1`` for unlabelled diagrams, picks up rational scalars
    pulled out of labels, and is ``0`` when AS forces the diagram to vanish.
    """

    __slots__ = ()

    def __new__(cls, key, factor):
        return super().__new__(cls, (key, factor))

    @property
    def key(self) -> JacobiDiagram:
        return self[0]

    @property
    def factor(self) -> Fraction:
        return self[1]

    @property
    def sign(self) -> int:
        return (self[1] > 0) - (self[1] < 0)


def _refine(cells: list[list[int]], adj: list[list[int]]) -> list[list[int]]:
    while True:
        cell_of = {}
        for ci, cell in enumerate(cells):
            for v in cell:
                cell_of[v] = ci
        new_cells = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            groups: dict[tuple, list[int]] = {}
            for v in cell:
                sig = tuple(sorted(cell_of[w] for w in adj[v]))
                groups.setdefault(sig, []).append(v)
            if len(groups) > 1:
                changed = True
                for sig in sorted(groups):
                    new_cells.append(groups[sig])
            else:
                new_cells.append(cell)
        cells = new_cells
        if not changed:
            return cells


def _parity(seq: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


_component_cache: dict[JacobiDiagram, tuple] = {}


def _canon_component(comp: JacobiDiagram):
    """Canonical (diagram, factor, code) of a connected diagram with >= 1 edge."""
    cached = _component_cache.get(comp)
    if cached is not None:
        return cached

    T, L, E = len(comp.trivalent), len(comp.legs), comp.n_edges
    V = T + L
    scalar = Fraction(1)
    norm = []
    for lab in comp.labels:
        s, g, kind = _normalize_label(lab)
        scalar *= s
        norm.append((g, kind))
    if scalar == 0:
        result = (JacobiDiagram(), Fraction(0), ())
        _component_cache[comp] = result
        return result

    n = V + 2 * E
    adj: list[list[int]] = [[] for _ in range(n)]
    colors: list[tuple] = [None] * n
    for v, tri in enumerate(comp.trivalent):
        colors[v] = (0, "", 0, ())
        for h in tri:
            adj[v].append(V + h)
            adj[V + h].append(v)
    for l, (name, h) in enumerate(comp.legs):
        colors[T + l] = (1, name, 0, ())
        adj[T + l].append(V + h)
        adj[V + h].append(T + l)
    for e, (g, kind) in enumerate(norm):
        key = g.sort_key()
        t_node, h_node = V + 2 * e, V + 2 * e + 1
        adj[t_node].append(h_node)
        adj[h_node].append(t_node)
        if kind in ("sym", "anti"):
            c = 0 if kind == "sym" else 3
            colors[t_node] = colors[h_node] = (2, "", c, key)
        else:
            tail_c, head_c = (1, 2) if kind == "fwd" else (2, 1)
            colors[t_node] = (2, "", tail_c, key)
            colors[h_node] = (2, "", head_c, key)

    by_color: dict[tuple, list[int]] = {}
    for node in range(n):
        by_color.setdefault(colors[node], []).append(node)
    color_order = sorted(by_color)
    initial = [by_color[c] for c in color_order]
    color_code = tuple(c for c in color_order for _ in by_color[c])

    best_code = None
    best_leaves: list[list[int]] = []

    def leaf(order: list[int]):
        nonlocal best_code, best_leaves
        pos = [0] * n
        for i, node in enumerate(order):
            pos[node] = i
        code = tuple(sorted(
            (min(pos[a], pos[b]), max(pos[a], pos[b])) for a in range(n) for b in adj[a] if a < b
        ))
        if best_code is None or code < best_code:
            best_code, best_leaves = code, [pos]
        elif code == best_code:
            best_leaves.append(pos)

    def search(cells):
        cells = _refine(cells, adj)
        target = None
        for ci, cell in enumerate(cells):
            if len(cell) > 1 and (target is None or len(cell) < len(cells[target])):
                target = ci
        if target is None:
            leaf([cell[0] for cell in cells])
            return
        for v in cells[target]:
            rest = [w for w in cells[target] if w != v]
            search(cells[:target] + [[v], rest] + cells[target + 1:])

    search(initial)

    def build(pos):
        # orient each edge: normalised direction, or by position if unoriented
        sign = 1
        edges = []
        for e, (g, kind) in enumerate(norm):
            t_node, h_node = V + 2 * e, V + 2 * e + 1
            if kind == "fwd":
                tail, head = t_node, h_node
            elif kind == "rev":
                tail, head = h_node, t_node
            else:
                tail, head = (t_node, h_node) if pos[t_node] < pos[h_node] else (h_node, t_node)
                if kind == "anti" and tail != t_node:
                    sign = -sign
            edges.append((pos[tail], pos[head], tail, head, g))
        edges.sort()
        new_end = {}
        labels = []
        for i, (_, _, tail, head, g) in enumerate(edges):
            new_end[tail - V] = 2 * i
            new_end[head - V] = 2 * i + 1
            labels.append(g)
        tri_out = []
        for v in sorted(range(T), key=lambda v: pos[v]):
            mapped = [new_end[h] for h in comp.trivalent[v]]
            sign *= _parity(mapped)
            tri_out.append(tuple(sorted(mapped)))
        legs_out = tuple(
            (comp.legs[l][0], new_end[comp.legs[l][1]])
            for l in sorted(range(L), key=lambda l: pos[T + l])
        )
        return JacobiDiagram(tuple(tri_out), legs_out, tuple(labels), ()), sign

    canon, sign0 = build(best_leaves[0])
    factor = scalar * sign0
    for pos in best_leaves[1:]:
        other, s = build(pos)
        if s != sign0:
            factor = Fraction(0)
            break
    result = (canon, factor, (color_code, best_code))
    _component_cache[comp] = result
    return result


def canonical_form(d: JacobiDiagram, max_vertices: int | None = None) -> CanonicalForm:
    """Canonical representative of ``d`` and the factor relating them.

    Isomorphic diagrams (respecting leg names, labels, and vertex
    orientations up to AS) get equal keys. Disconnected diagrams are handled
    component by component, so disjoint unions of many small pieces stay cheap.
    """
    if max_vertices is None:
        max_vertices = DEFAULT_MAX_VERTICES
    if d.n_vertices > max_vertices:
        raise TooLarge(f"{d.n_vertices} vertices exceeds the canonicalisation bound {max_vertices}")
    factor = Fraction(1)
    pieces = []
    loops = []
    for comp in connected_components(d):
        if comp.loops:
            s, g = _normalize_loop(comp.loops[0])
            factor *= s
            loops.append(g)
            continue
        canon, f, code = _canon_component(comp)
        factor *= f
        pieces.append((code, canon))
        if factor == 0:
            return CanonicalForm(JacobiDiagram(), Fraction(0))
    if factor == 0:
        return CanonicalForm(JacobiDiagram(), Fraction(0))
    pieces.sort(key=lambda item: item[0])
    key = JacobiDiagram()
    for _, canon in pieces:
        key = union(key, canon)
    key = JacobiDiagram(
        key.trivalent, key.legs, key.labels, tuple(sorted(loops, key=lambda g: g.sort_key()))
    )
    return CanonicalForm(key, factor)


# --------------------------------------------------------------------------
# gluing and label expansion
# --------------------------------------------------------------------------

def glue_legs(d: JacobiDiagram, pairs: Sequence[tuple[int, int, object]], one=ONE) -> JacobiDiagram:
    """Join pairs of legs by new edges and smooth the resulting bivalent points.

    ``pairs`` holds ``(leg_a, leg_b, label)`` with leg indices into ``d.legs``;
    the new edge runs from ``leg_a`` to ``leg_b``. Labels along a smoothed
    chain multiply (conjugated where traversed backwards); chains that close
    up without meeting a vertex become entries of ``loops``.
    """
    glued = {}
    for r, (a, b, _) in enumerate(pairs):
        if a in glued or b in glued or a == b:
            raise ValueError("each leg may be glued at most once")
        glued[a] = (r, 0)
        glued[b] = (r, 1)
    E = d.n_edges
    labels = list(d.labels) + [lab for _, _, lab in pairs]
    # partner of an end across a glued leg
    jump: dict[int, int] = {}
    for l, (r, side) in glued.items():
        leg_end = d.legs[l][1]
        chord_end = 2 * (E + r) + side
        jump[leg_end] = chord_end
        jump[chord_end] = leg_end
    real = set(h for tri in d.trivalent for h in tri)
    real.update(h for l, (_, h) in enumerate(d.legs) if l not in glued)

    def step(end):
        lab = labels[end // 2]
        if isinstance(lab, RatFunc) and lab == ONE:
            return end ^ 1, None
        if end % 2:
            lab = lab.bar()
        return end ^ 1, lab

    visited_edges = set()
    merged: list[tuple[int, int, object]] = []
    done = set()
    for start in sorted(real):
        if start in done:
            continue
        acc = None
        x = start
        while True:
            visited_edges.add(x // 2)
            y, lab = step(x)
            if lab is not None:
                acc = lab if acc is None else acc * lab
            if y in real:
                break
            x = jump[y]
        done.add(start)
        done.add(y)
        merged.append((start, y, acc if acc is not None else one))
    loops = list(d.loops)
    for e in range(len(labels)):
        if e in visited_edges:
            continue
        acc = None
        x = 2 * e
        while True:
            visited_edges.add(x // 2)
            y, lab = step(x)
            if lab is not None:
                acc = lab if acc is None else acc * lab
            x = jump[y]
            if x == 2 * e:
                break
        loops.append(acc if acc is not None else one)
    new_end = {}
    out_labels = []
    for i, (s, t, lab) in enumerate(merged):
        new_end[s] = 2 * i
        new_end[t] = 2 * i + 1
        out_labels.append(lab)
    return JacobiDiagram(
        trivalent=tuple(tuple(new_end[h] for h in tri) for tri in d.trivalent),
        legs=tuple((n, new_end[h]) for l, (n, h) in enumerate(d.legs) if l not in glued),
        labels=tuple(out_labels),
        loops=tuple(loops),
    )


def _coefficients(series) -> Sequence[Fraction]:
    return series.coeffs if hasattr(series, "coeffs") else series


def expand_labels(
    d: JacobiDiagram,
    expand: Callable[[object], Sequence[Fraction]],
    leg: str = "k",
    max_legs: int | None = None,
) -> list[tuple[JacobiDiagram, Fraction]]:
    """Replace every labelled edge and loop by a sum over leg-decorated copies.

    ``expand(label)`` returns coefficients ``c_0, c_1, ...``; the edge is
    replaced by ``c_r`` times the same edge carrying ``r`` new ``leg`` legs,
    grown along the edge's orientation. A loop with ``r`` legs becomes the
    wheel with ``r`` spokes. ``max_legs`` caps the number of legs added.
    """
    edge_opts = []
    for lab in d.labels:
        if lab == ONE:
            edge_opts.append([(0, Fraction(1))])
        else:
            edge_opts.append([(r, Fraction(c)) for r, c in enumerate(_coefficients(expand(lab))) if c])
    loop_opts = []
    for lab in d.loops:
        if lab == ONE:
            loop_opts.append([(0, Fraction(1))])
        else:
            loop_opts.append([(r, Fraction(c)) for r, c in enumerate(_coefficients(expand(lab))) if c])
    out = []
    for choice in product(*edge_opts, *loop_opts):
        added = sum(r for r, _ in choice)
        if max_legs is not None and added > max_legs:
            continue
        coeff = Fraction(1)
        for _, c in choice:
            coeff *= c
        edge_choice = choice[: len(edge_opts)]
        loop_choice = choice[len(edge_opts):]
        b = DiagramBuilder()
        end_map = {}
        for e, (r, _) in enumerate(edge_choice):
            tail, head = b.edge()
            end_map[2 * e] = tail
            # the path consumes ``head``; its free far end stands in for the old head
            end_map[2 * e + 1] = b.path(head, r, leg)
        for tri in d.trivalent:
            b.vertex(*(end_map[h] for h in tri))
        for name, h in d.legs:
            b.leg(name, end_map[h])
        for r, _ in loop_choice:
            if r == 0:
                b.loop()
            else:
                rim = [b.edge() for _ in range(r)]
                for s in range(r):
                    st, sh = b.edge()
                    b.vertex(rim[s - 1][1], rim[s][0], st)
                    b.leg(leg, sh)
        out.append((b.build(), coeff))
    return out


def perfect_matchings(items: Sequence) -> Iterator[list[tuple]]:
    """All perfect matchings of ``items`` (empty iterator for odd length)."""
    if len(items) % 2:
        return
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for tail in perfect_matchings(rest):
            yield [(first, items[k])] + tail


# --------------------------------------------------------------------------
# series of diagrams
# --------------------------------------------------------------------------

class DiagramSeries:
    """Rational combination of canonical diagrams, truncated at grade ``order``.

    ``order=None`` means no truncation.
    """

    __slots__ = ("terms", "order", "max_vertices")

    def __init__(self, terms=None, order=None, max_vertices=None):
        self.terms: dict[JacobiDiagram, Fraction] = {}
        self.order = order
        self.max_vertices = max_vertices
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            self._accumulate(items)

    def _accumulate(self, items: Iterable[tuple[JacobiDiagram, object]]):
        for d, c in items:
            c = Fraction(c)
            if not c:
                continue
            if self.order is not None and d.grade > self.order:
                continue
            key, f = canonical_form(d, self.max_vertices)
            if not f:
                continue
            new = self.terms.get(key, 0) + c * f
            if new:
                self.terms[key] = new
            else:
                self.terms.pop(key, None)

    @classmethod
    def one(cls, order=None) -> "DiagramSeries":
        return cls([(JacobiDiagram(), 1)], order)

    @classmethod
    def of(cls, d: JacobiDiagram, coeff=1, order=None) -> "DiagramSeries":
        return cls([(d, coeff)], order)

    def _new(self, order=None) -> "DiagramSeries":
        return DiagramSeries(order=order, max_vertices=self.max_vertices)

    @staticmethod
    def _min_order(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0].grade, repr(kv[0])))

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coeff(self, d: JacobiDiagram) -> Fraction:
        key, f = canonical_form(d, self.max_vertices)
        if not f:
            return Fraction(0)
        return self.terms.get(key, Fraction(0)) * f

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(JacobiDiagram(), Fraction(0))

    def is_zero(self) -> bool:
        return not self.terms

    def truncate(self, order) -> "DiagramSeries":
        out = self._new(order)
        out.terms = {d: c for d, c in self.terms.items() if order is None or d.grade <= order}
        return out

    def __add__(self, other: "DiagramSeries") -> "DiagramSeries":
        out = self._new(self._min_order(self.order, other.order))
        out.terms = dict(self.terms)
        for d, c in other.terms.items():
            new = out.terms.get(d, 0) + c
            if new:
                out.terms[d] = new
            else:
                out.terms.pop(d, None)
        return out.truncate(out.order)

    def __neg__(self):
        out = self._new(self.order)
        out.terms = {d: -c for d, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiagramSeries":
        c = Fraction(c)
        out = self._new(self.order)
        if c:
            out.terms = {d: v * c for d, v in self.terms.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, DiagramSeries):
            return union_product(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiagramSeries):
            return NotImplemented
        return self.terms == other.terms

    def map_terms(self, fn, order="keep") -> "DiagramSeries":
        """Apply ``fn(diagram) -> [(diagram, coeff), ...]`` linearly."""
        out = self._new(self.order if order == "keep" else order)
        for d, c in self.terms.items():
            out._accumulate((nd, c * nc) for nd, nc in fn(d))
        return out

    def max_chords(self) -> int:
        return max((len(d.chords()) for d in self.terms), default=0)

    def __repr__(self):
        body = ", ".join(f"{c}*{d}" for d, c in self.items())
        return f"DiagramSeries(order={self.order}, [{body}])"


def union_product(a: DiagramSeries, b: DiagramSeries) -> DiagramSeries:
    """Disjoint-union product, truncated at the smaller order."""
    order = DiagramSeries._min_order(a.order, b.order)
    caps = [m for m in (a.max_vertices, b.max_vertices) if m is not None]
    out = DiagramSeries(order=order, max_vertices=min(caps) if caps else None)
    out._accumulate(
        (union(d1, d2), c1 * c2)
        for d1, c1 in a.terms.items()
        for d2, c2 in b.terms.items()
        if order is None or d1.grade + d2.grade <= order
    )
    return out


def _has_grade_zero(s: DiagramSeries) -> bool:
    return any(d.grade == 0 and not d.is_empty() for d in s.terms)


def exp_truncated(c: DiagramSeries, order=None, max_power: int | None = None) -> DiagramSeries:
    """``exp`` for the disjoint-union product, truncated at grade ``order``.

    Grade-zero pieces (chords) never raise the grade, so a series containing
    them needs an explicit ``max_power``.
    """
    if c.constant_term:
        raise ValueError("exp needs a series without constant term")
    order = c.order if order is None else order
    c = c.truncate(order)
    if max_power is None and _has_grade_zero(c):
        raise ValueError("series has grade-zero terms; pass max_power")
    result = DiagramSeries.one(order)
    term = DiagramSeries.one(order)
    k = 0
    while True:
        k += 1
        if max_power is not None and k > max_power:
            break
        term = union_product(term, c).scale(Fraction(1, k))
        if term.is_zero():
            break
        result = result + term
    return result


def log_truncated(s: DiagramSeries, order=None, max_power: int | None = None) -> DiagramSeries:
    """Inverse of :func:`exp_truncated` on series with constant term 1."""
    if s.constant_term != 1:
        raise NotUnital(f"log needs constant term 1, got {s.constant_term}")
    order = s.order if order is None else order
    x = s.truncate(order) - DiagramSeries.one(order)
    if max_power is None and _has_grade_zero(x):
        raise ValueError("series has grade-zero terms; pass max_power")
    result = DiagramSeries(order=order)
    power = DiagramSeries.one(order)
    k = 0
    while True:
        k += 1
        if max_power is not None and k > max_power:
            break
        power = union_product(power, x)
        if power.is_zero():
            break
        result = result + power.scale(Fraction((-1) ** (k + 1), k))
    return result


def _leg_index(names: Sequence[str]) -> dict[str, int]:
    return {name: i for i, name in enumerate(names)}


def pair_glue(weights, r: DiagramSeries, legs: Sequence[str] | None = None) -> DiagramSeries:
    """Wick-contract the designated legs of ``r`` with ``exp(1/2 sum weights_ij chord_ij)``.

    Every perfect matching of a diagram's designated legs is counted once;
    a matched pair (``x_i`` leg, ``x_j`` leg) is joined by an edge labelled
    ``weights[i][j]`` running from the ``x_i`` leg to the ``x_j`` leg.
    Diagrams with an odd number of designated legs drop out.
    """
    mu = len(weights)
    legs = [x_label(i) for i in range(mu)] if legs is None else list(legs)
    index = _leg_index(legs)

    def contract(d: JacobiDiagram):
        chosen = [l for l, (name, _) in enumerate(d.legs) if name in index]
        out = []
        for matching in perfect_matchings(chosen):
            pairs = []
            for a, b in matching:
                i, j = index[d.legs[a][0]], index[d.legs[b][0]]
                pairs.append((a, b, _as_label(weights[i][j])))
            out.append((glue_legs(d, pairs), Fraction(1)))
        return out

    return r.map_terms(contract)


def _as_label(w):
    if isinstance(w, RatFunc):
        return w
    return RatFunc(w)


def translate(f: DiagramSeries, m, legs: Sequence[str] | None = None, primes: Sequence[str] | None = None,
              order="keep") -> DiagramSeries:
    """Substitute ``x_i -> x_i + sum_j M_ij(k) x'_j`` leg by leg.

    ``m[i][j]`` is a power series in ``k`` (anything with ``coeffs`` or a
    plain coefficient list). Relabelling a leg to ``x'_j`` grows ``r`` new
    ``k`` legs on it, weighted by the ``k^r`` coefficient, oriented towards
    the new leg.
    """
    mu = len(m)
    legs = [x_label(i) for i in range(mu)] if legs is None else list(legs)
    primes = [xprime_label(i) for i in range(mu)] if primes is None else list(primes)
    index = _leg_index(legs)
    order = f.order if order == "keep" else order

    def expand(d: JacobiDiagram):
        options = []
        for name, _ in d.legs:
            opts = [None]
            if name in index:
                i = index[name]
                for j in range(mu):
                    for r, c in enumerate(_coefficients(m[i][j])):
                        if c:
                            opts.append((j, r, Fraction(c)))
            options.append(opts)
        out = []
        base_grade = d.grade
        for choice in product(*options):
            added = sum(opt[1] for opt in choice if opt is not None)
            if order is not None and base_grade + Fraction(added, 2) > order:
                continue
            b = DiagramBuilder()
            for lab in d.labels:
                b.edge(lab)
            for tri in d.trivalent:
                b.vertex(*tri)
            coeff = Fraction(1)
            for (name, h), opt in zip(d.legs, choice):
                if opt is None:
                    b.leg(name, h)
                    continue
                j, r, c = opt
                coeff *= c
                # the old leg end becomes the incoming end of the first new vertex
                b.leg(primes[j], b.path(h, r, "k"))
            for lab in d.loops:
                b.loop(lab)
            out.append((b.build(), coeff))
        return out

    return f.map_terms(expand, order=order)
