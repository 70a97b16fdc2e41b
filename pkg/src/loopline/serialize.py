"""JSON encoding of polynomials, diagrams, series and pipeline results.

Rationals are always strings ``"p/q"`` (or ``"p"``) so values round-trip
bit-exactly. Laurent polynomials are objects mapping exponent strings to
rationals.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from loopline.algebra import LaurentPoly, RatFunc
from loopline.diagrams import DiagramSeries, JacobiDiagram
from loopline.errors import InputError, MalformedR

__all__ = [
    "rational_to_json",
    "rational_from_json",
    "poly_to_json",
    "poly_from_json",
    "ratfunc_to_json",
    "ratfunc_from_json",
    "diagram_to_json",
    "diagram_from_json",
    "series_to_json",
    "series_from_json",
    "load_r_file",
    "loop_expansion_to_json",
    "SCHEMAS",
]


def rational_to_json(x) -> str:
    return str(Fraction(x))


def rational_from_json(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise MalformedR(f"rational must be a string or integer, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedR(f"bad rational {s!r}") from exc


def poly_to_json(p: LaurentPoly) -> dict[str, str]:
    return {str(e): rational_to_json(c) for e, c in p.items()}


def poly_from_json(obj) -> LaurentPoly:
    if not isinstance(obj, dict):
        raise MalformedR("polynomial must be an object of exponent -> rational")
    try:
        return LaurentPoly({int(e): rational_from_json(c) for e, c in obj.items()})
    except ValueError as exc:
        raise MalformedR(f"bad exponent in {obj!r}") from exc


def ratfunc_to_json(f: RatFunc) -> dict:
    return {"num": poly_to_json(f.num), "den": poly_to_json(f.den)}


def ratfunc_from_json(obj) -> RatFunc:
    if not isinstance(obj, dict) or "num" not in obj:
        raise MalformedR("label must be an object with num and den")
    den = poly_from_json(obj.get("den", {"0": "1"}))
    return RatFunc(poly_from_json(obj["num"]), den)


def diagram_to_json(d: JacobiDiagram) -> dict:
    vertices = [{"kind": "trivalent", "halfEdges": list(tri)} for tri in d.trivalent]
    vertices += [{"kind": "leg", "label": name, "halfEdges": [h]} for name, h in d.legs]
    return {
        "vertices": vertices,
        "edges": [
            {"ends": [2 * e, 2 * e + 1], "label": ratfunc_to_json(lab)} for e, lab in enumerate(d.labels)
        ],
        "loops": [ratfunc_to_json(lab) for lab in d.loops],
    }


def diagram_from_json(obj) -> JacobiDiagram:
    """Inverse of :func:`diagram_to_json`; edge ends are renumbered to ``2e, 2e+1``."""
    if not isinstance(obj, dict) or "vertices" not in obj or "edges" not in obj:
        raise MalformedR("diagram needs vertices and edges")
    remap: dict[int, int] = {}
    labels = []
    for e, edge in enumerate(obj["edges"]):
        ends = edge.get("ends")
        if not isinstance(ends, list) or len(ends) != 2:
            raise MalformedR("edge needs two ends [tail, head]")
        for k, h in enumerate(ends):
            if h in remap:
                raise MalformedR(f"half-edge {h} used by two edges")
            remap[h] = 2 * e + k
        labels.append(ratfunc_from_json(edge["label"]) if "label" in edge else RatFunc(1))
    tri, legs = [], []
    try:
        for v in obj["vertices"]:
            hs = [remap[h] for h in v["halfEdges"]]
            if v["kind"] == "trivalent" and len(hs) == 3:
                tri.append(tuple(hs))
            elif v["kind"] == "leg" and len(hs) == 1:
                legs.append((str(v["label"]), hs[0]))
            else:
                raise MalformedR(f"bad vertex {v!r}")
    except KeyError as exc:
        raise MalformedR(f"vertex refers to unknown half-edge {exc}") from exc
    loops = tuple(ratfunc_from_json(lab) for lab in obj.get("loops", []))
    d = JacobiDiagram(tuple(tri), tuple(legs), tuple(labels), loops)
    try:
        return d.check()
    except ValueError as exc:
        raise MalformedR(str(exc)) from exc


def series_to_json(s: DiagramSeries) -> dict:
    return {
        "order": None if s.order is None else rational_to_json(s.order),
        "terms": [{"coeff": rational_to_json(c), "diagram": diagram_to_json(d)} for d, c in s.items()],
    }


def series_from_json(obj) -> DiagramSeries:
    """Accepts ``{"order", "terms"}`` or a bare list of ``{coeff, diagram}`` records."""
    if isinstance(obj, list):
        order, terms = None, obj
    elif isinstance(obj, dict) and "terms" in obj:
        order = obj.get("order")
        order = None if order is None else rational_from_json(order)
        terms = obj["terms"]
    else:
        raise MalformedR("R file must be a list of terms or an object with terms")
    items = []
    for t in terms:
        if not isinstance(t, dict) or "diagram" not in t:
            raise MalformedR("each term needs a diagram and a coeff")
        items.append((diagram_from_json(t["diagram"]), rational_from_json(t.get("coeff", "1"))))
    return DiagramSeries(items, order=order)


def load_r_file(path: str) -> DiagramSeries:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return series_from_json(obj)


def loop_expansion_to_json(le) -> dict:
    return {
        "alexander": poly_to_json(le.alexander),
        "det": poly_to_json(le.det),
        "wheels": [{"m": m, "coeff": rational_to_json(c)} for m, c in sorted(le.wheel_coeffs.items())],
        "loops": [
            {"eulerChi": -i, "diagrams": series_to_json(s)["terms"]}
            for i, s in sorted(le.loop_terms.items())
        ],
        "scalar": rational_to_json(le.scalar),
        "sigma": {"plus": le.sigma[0], "minus": le.sigma[1]},
        "metadata": le.metadata,
    }


_RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}
_POLY = {"type": "object", "patternProperties": {r"^-?[0-9]+$": _RATIONAL}, "additionalProperties": False}
_RATFUNC = {
    "type": "object",
    "properties": {"num": _POLY, "den": _POLY},
    "required": ["num", "den"],
    "additionalProperties": False,
}
_DIAGRAM = {
    "type": "object",
    "properties": {
        "vertices": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "kind": {"enum": ["trivalent", "leg"]},
                    "label": {"type": "string"},
                    "halfEdges": {"type": "array", "items": {"type": "integer"}},
                },
                "required": ["kind", "halfEdges"],
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "ends": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
                    "label": _RATFUNC,
                },
                "required": ["ends", "label"],
            },
        },
        "loops": {"type": "array", "items": _RATFUNC},
    },
    "required": ["vertices", "edges", "loops"],
}
_TERM = {
    "type": "object",
    "properties": {"coeff": _RATIONAL, "diagram": _DIAGRAM},
    "required": ["coeff", "diagram"],
}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _POLY}}
_SIGMA = {
    "type": "object",
    "properties": {"plus": {"type": "integer"}, "minus": {"type": "integer"}},
    "required": ["plus", "minus"],
}
_WHEELS = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {"m": {"type": "integer"}, "coeff": _RATIONAL},
        "required": ["m", "coeff"],
    },
}

SCHEMAS: dict[str, dict[str, Any]] = {
    "wind": {
        "type": "object",
        "properties": {
            "W": _MATRIX,
            "W1": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
            "sigma": {"anyOf": [_SIGMA, {"type": "null"}]},
            "special": {
                "type": "object",
                "properties": {
                    "netPassages": {"type": "array", "items": {"type": "integer"}},
                    "linking": {"type": "array", "items": {"type": "array", "items": _RATIONAL}},
                    "detLk": _RATIONAL,
                    "isSpecial": {"type": "boolean"},
                },
                "required": ["netPassages", "linking", "detLk", "isSpecial"],
            },
        },
        "required": ["W", "W1", "sigma", "special"],
    },
    "alex": {
        "type": "object",
        "properties": {"alexander": _POLY, "det": _POLY},
        "required": ["alexander", "det"],
    },
    "wheels": {
        "type": "object",
        "properties": {"order": {"type": "integer"}, "alexander": _POLY, "wheels": _WHEELS},
        "required": ["order", "alexander", "wheels"],
    },
    "invert": {
        "type": "object",
        "properties": {
            "det": _POLY,
            "adjugate": _MATRIX,
            "inverse": {"type": "array", "items": {"type": "array", "items": _RATFUNC}},
        },
        "required": ["det", "adjugate", "inverse"],
    },
    "integrate": {
        "type": "object",
        "properties": {
            "alexander": _POLY,
            "det": _POLY,
            "wheels": _WHEELS,
            "loops": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"eulerChi": {"type": "integer"}, "diagrams": {"type": "array", "items": _TERM}},
                    "required": ["eulerChi", "diagrams"],
                },
            },
            "scalar": _RATIONAL,
            "sigma": _SIGMA,
            "metadata": {"type": "object"},
        },
        "required": ["alexander", "det", "wheels", "loops"],
    },
    "check": {
        "type": "object",
        "properties": {
            "seed": {"type": "integer"},
            "suites": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "name": {"type": "string"},
                        "passed": {"type": "integer"},
                        "failed": {"type": "integer"},
                    },
                    "required": ["name", "passed", "failed"],
                },
            },
            "ok": {"type": "boolean"},
        },
        "required": ["seed", "suites", "ok"],
    },
    "series": {
        "type": "object",
        "properties": {"order": {"anyOf": [_RATIONAL, {"type": "null"}]}, "terms": {"type": "array", "items": _TERM}},
        "required": ["terms"],
    },
}
