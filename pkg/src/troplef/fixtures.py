"""Fixture generators and the JSON complex format.

A complex file is a JSON object::

    {"mode": "polyhedral", "ambient_rank": n,
     "vertices": [[...], ...], "cells": [{"dim": d, "vertices": [ids]}, ...],
     "polytope": {"vertices": [...], "cells": [...]},    # optional
     "carrier": {"<cell index>": <polytope cell index>}}  # optional

or, for abstract CW complexes::

    {"mode": "cw", "cells": [{"id": ..., "dim": d}, ...],
     "incidence": [[face, cell, +1 or -1], ...]}
"""

from __future__ import annotations

import json
from itertools import product

from .complex import Complex, build_abstract_cw, build_polyhedral, polytope_faces
from .errors import TroplefError


class ParseError(TroplefError):
    pass


class UnknownFixture(TroplefError):
    pass


def _all_faces(vertices, tops):
    """Every face of the listed top cells as (dim, sorted vertex ids), deduplicated."""
    seen = {}
    for top in tops:
        faces = polytope_faces([vertices[v] for v in top])
        for f, d in sorted(faces.items(), key=lambda kv: (kv[1], sorted(kv[0]))):
            if d == 0:
                continue
            vs = tuple(sorted(top[i] for i in f))
            seen.setdefault(vs, d)
    cells = sorted(seen.items(), key=lambda kv: (kv[1], kv[0]))
    return [{"dim": d, "vertices": list(vs)} for vs, d in cells]


def _polyhedral_doc(vertices, tops, polytope=None):
    doc = {
        "mode": "polyhedral",
        "ambient_rank": len(vertices[0]),
        "vertices": [list(v) for v in vertices],
        "cells": _all_faces(vertices, tops),
    }
    if polytope is not None:
        pv = polytope
        doc["polytope"] = {"vertices": [list(v) for v in pv],
                           "cells": _all_faces(pv, [list(range(len(pv)))])}
    return doc


def _segment():
    v = [(0,), (1,)]
    return _polyhedral_doc(v, [[0, 1]], polytope=v)


def _octahedron():
    v = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    tops = [[a, b, c] for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    return _polyhedral_doc(v, tops)


def _triangle_p112():
    v = [(0, 0), (1, 0), (0, 1), (0, 2)]
    return _polyhedral_doc(v, [[0, 1, 2], [1, 2, 3]], polytope=[(0, 0), (1, 0), (0, 2)])


def _square_22():
    v = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2), (2, 2)]
    tops = [[0, 1, 3, 4], [3, 4, 5], [4, 5, 6], [1, 2, 4, 6]]
    return _polyhedral_doc(v, tops, polytope=[(0, 0), (2, 0), (0, 2), (2, 2)])


def _cube_222():
    corners = [(x, y, z) for x, y, z in product((0, 2), repeat=3)]
    diamond = [(x, y, z) for y in (0, 2) for (x, z) in ((1, 0), (0, 1), (1, 2), (2, 1))]
    v = corners + diamond
    idx = {p: i for i, p in enumerate(v)}

    def prism(xz):
        return [idx[(x, y, z)] for y in (0, 2) for (x, z) in xz]

    tops = [
        prism([(1, 0), (0, 1), (1, 2), (2, 1)]),
        prism([(0, 0), (1, 0), (0, 1)]),
        prism([(2, 0), (1, 0), (2, 1)]),
        prism([(0, 2), (0, 1), (1, 2)]),
        prism([(2, 2), (2, 1), (1, 2)]),
    ]
    return _polyhedral_doc(v, tops, polytope=corners)


def _simplex(n: int):
    v = [tuple(0 for _ in range(n))] + [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return _polyhedral_doc(v, [list(range(n + 1))], polytope=v)


FIXTURES = {
    "segment": _segment,
    "octahedron": _octahedron,
    "triangle-p112": _triangle_p112,
    "square-22": _square_22,
    "cube-222": _cube_222,
}


def fixture_names() -> list[str]:
    return sorted(FIXTURES) + ["simplex-<n>"]


def fixture(name: str) -> dict:
    """The JSON document of a named fixture."""
    if name in FIXTURES:
        return FIXTURES[name]()
    if name.startswith("simplex"):
        rest = name[len("simplex"):].lstrip("-")
        if rest == "" or rest == "n":
            return _simplex(2)
        if rest.isdigit() and 1 <= int(rest) <= 4:
            return _simplex(int(rest))
    raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")


# ---------------------------------------------------------------------------
# parsing and emitting


def _need(doc, key, where="document"):
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _int_list(x, field):
    if not isinstance(x, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in x):
        raise ParseError(f"field {field!r} must be a list of integers")
    return x


def _parse_polyhedral_section(doc, where, strict=False, close=False) -> Complex:
    verts = _need(doc, "vertices", where)
    if not isinstance(verts, list) or not verts:
        raise ParseError(f"{where}: field 'vertices' must be a nonempty list")
    for i, v in enumerate(verts):
        _int_list(v, f"{where}.vertices[{i}]")
    if "ambient_rank" in doc and any(len(v) != doc["ambient_rank"] for v in verts):
        raise ParseError(f"{where}: vertex length differs from 'ambient_rank'")
    cells = []
    for i, c in enumerate(_need(doc, "cells", where)):
        field = f"{where}.cells[{i}]"
        if not isinstance(c, dict):
            raise ParseError(f"{field} must be an object")
        dim = _need(c, "dim", field)
        if not isinstance(dim, int) or dim < 0:
            raise ParseError(f"{field}.dim must be a nonnegative integer")
        cells.append((dim, _int_list(_need(c, "vertices", field), f"{field}.vertices")))
    return build_polyhedral(verts, cells, close=close or doc.get("close", False), strict=strict)


def parse_document(doc: dict, strict: bool = False):
    """Complex (or tropical setup when a polytope section is present) from a JSON object."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    mode = doc.get("mode", "polyhedral")
    if mode == "cw":
        cells = []
        for i, c in enumerate(_need(doc, "cells")):
            field = f"cells[{i}]"
            if not isinstance(c, dict):
                raise ParseError(f"{field} must be an object")
            cid = _need(c, "id", field)
            dim = _need(c, "dim", field)
            if not isinstance(dim, int) or dim < 0:
                raise ParseError(f"{field}.dim must be a nonnegative integer")
            cells.append((cid, dim))
        inc = []
        for i, row in enumerate(doc.get("incidence", [])):
            field = f"incidence[{i}]"
            if not isinstance(row, list) or len(row) != 3:
                raise ParseError(f"{field} must be [face, cell, sign]")
            if row[2] not in (1, -1) or isinstance(row[2], bool):
                raise ParseError(f"{field}: sign must be +1 or -1, got {row[2]!r}")
            inc.append(tuple(row))
        return build_abstract_cw(cells, inc)
    if mode != "polyhedral":
        raise ParseError(f"field 'mode' must be 'polyhedral' or 'cw', got {mode!r}")
    K = _parse_polyhedral_section(doc, "document", strict=strict)
    if "polytope" not in doc:
        return K
    from .tropical import TropicalSetup
    P = _parse_polyhedral_section(doc["polytope"], "polytope", close=True)
    carrier = doc.get("carrier")
    if carrier is not None:
        if not isinstance(carrier, dict):
            raise ParseError("field 'carrier' must be an object")
        carrier = {int(k): int(v) for k, v in carrier.items()}
    return TropicalSetup.from_complexes(P, K, carrier=carrier)


def parse_complex(source, strict: bool = False):
    """Parse a path, a ``fixture:<name>`` reference, JSON text or an already-loaded dict."""
    if isinstance(source, dict):
        return parse_document(source, strict)
    text = str(source)
    if text.startswith("fixture:"):
        return parse_document(fixture(text[len("fixture:"):]), strict)
    if text.lstrip()[:1] in ("{", "["):
        raw = text
    else:
        try:
            with open(text, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {text}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_document(doc, strict)


def emit_complex(K: Complex) -> dict:
    """Canonical JSON document of a complex."""
    if K.mode == "polyhedral":
        return {
            "mode": "polyhedral",
            "ambient_rank": K.ambient_rank,
            "vertices": [list(v) for v in K.coords],
            "cells": [{"dim": c.dim, "vertices": list(c.vertices)} for c in K.cells if c.dim > 0],
        }

    def lab(c):
        x = K.cells[c].label
        if isinstance(x, tuple):
            return "-".join(str(a) for a in x)
        return x if x is not None else c

    return {
        "mode": "cw",
        "cells": [{"id": lab(c.id), "dim": c.dim} for c in K.cells],
        "incidence": [[lab(f), lab(c), s] for f, c, s in sorted(K.covers(), key=lambda t: (t[1], t[0]))],
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
