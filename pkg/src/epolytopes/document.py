"""Point-configuration documents: native text, polymake-style text, and JSON.

Native layout (one section keyword per line, content below it)::

    DIM
    4
    BACKEND
    rational
    POINTS
    1 0 1/2 -1 3
    FACETS
    {0 1 2 9 11}
    META
    construction emn

Points are homogeneous with a leading 1.  Rationals are written as
integers or ``p/q``; floats with 17 significant digits, which round-trips
IEEE doubles exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .geometry import FLOAT, RATIONAL, PointConfiguration
from .lattice import FaceLattice, lattice_from_incidence

SECTIONS = ("DIM", "BACKEND", "POINTS", "FACETS", "META")


class DocumentError(ValueError):
    pass


@dataclass
class Document:
    ambient_dim: int
    backend: str
    points: tuple
    facets: tuple | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: PointConfiguration, lattice: FaceLattice | None = None, **meta) -> "Document":
        facets = None
        if lattice is not None:
            facets = tuple(tuple(sorted(F)) for F in lattice.facets())
        return cls(config.ambient_dim, config.backend, config.points, facets, {k: str(v) for k, v in meta.items()})

    def config(self) -> PointConfiguration:
        return PointConfiguration(self.points, self.backend, self.ambient_dim)

    def lattice(self) -> FaceLattice | None:
        if self.facets is None:
            return None
        return lattice_from_incidence(len(self.points), self.facets)


def format_scalar(x, backend: str) -> str:
    if backend == RATIONAL:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return format(float(x), ".17g")


def parse_scalar(tok: str, backend: str):
    try:
        if backend == RATIONAL:
            if any(c in tok for c in ".eE") and "/" not in tok:
                raise DocumentError(f"decimal literal {tok!r} in a rational document")
            return Fraction(tok)
        return float(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad number {tok!r}") from exc


def _parse_face(line: str) -> tuple:
    body = line.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise DocumentError(f"facet line {line!r} is not brace-delimited")
    try:
        return tuple(sorted(int(t) for t in body[1:-1].replace(",", " ").split()))
    except ValueError as exc:
        raise DocumentError(f"bad facet line {line!r}") from exc


def _homogeneous_rows(doc: Document) -> list[str]:
    one = "1"
    return [" ".join([one] + [format_scalar(c, doc.backend) for c in p]) for p in doc.points]


def _dehomogenize(rows: Iterable[list[str]], backend: str) -> tuple:
    out = []
    for toks in rows:
        vals = [parse_scalar(t, backend) for t in toks]
        if not vals or vals[0] != 1:
            raise DocumentError("homogeneous rows must start with 1")
        out.append(tuple(vals[1:]))
    return tuple(out)


def dumps(doc: Document) -> str:
    lines = ["DIM", str(doc.ambient_dim), "BACKEND", doc.backend, "POINTS"]
    lines += _homogeneous_rows(doc)
    if doc.facets is not None:
        lines.append("FACETS")
        lines += ["{" + " ".join(map(str, F)) + "}" for F in doc.facets]
    if doc.meta:
        lines.append("META")
        lines += [f"{k} {v}" for k, v in sorted(doc.meta.items())]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Document:
    """Parse any supported format (native, polymake-style, JSON)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return loads_json(text)
    if stripped.startswith("_type") or "VERTICES_IN_FACETS" in text:
        return loads_polymake(text)
    return loads_native(text)


def loads_native(text: str) -> Document:
    sections: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in SECTIONS:
            if line in sections:
                raise DocumentError(f"duplicate section {line}")
            current = line
            sections[current] = []
            continue
        if current is None:
            raise DocumentError(f"content before the first section: {line!r}")
        sections[current].append(line)
    for key in ("DIM", "BACKEND", "POINTS"):
        if key not in sections:
            raise DocumentError(f"missing section {key}")
    try:
        dim = int(sections["DIM"][0])
    except (IndexError, ValueError) as exc:
        raise DocumentError("DIM must hold one integer") from exc
    backend = sections["BACKEND"][0] if sections["BACKEND"] else ""
    if backend not in (RATIONAL, FLOAT):
        raise DocumentError(f"unknown backend {backend!r}")
    points = _dehomogenize((ln.split() for ln in sections["POINTS"]), backend)
    if not points:
        raise DocumentError("no points")
    if any(len(p) != dim for p in points):
        raise DocumentError("point length does not match DIM")
    facets = None
    if "FACETS" in sections:
        facets = tuple(_parse_face(ln) for ln in sections["FACETS"])
        _check_labels(facets, len(points))
    meta = {}
    for ln in sections.get("META", []):
        key, _, val = ln.partition(" ")
        meta[key] = val
    return Document(dim, backend, points, facets, meta)


def _check_labels(facets, n):
    for F in facets:
        if not F or any(not 0 <= v < n for v in F):
            raise DocumentError(f"facet {list(F)} has labels outside 0..{n - 1}")


def dumps_polymake(doc: Document) -> str:
    kind = "Rational" if doc.backend == RATIONAL else "Float"
    lines = [f"_type Polytope<{kind}>", "", "POINTS"]
    lines += _homogeneous_rows(doc)
    if doc.facets is not None:
        lines += ["", "VERTICES_IN_FACETS"]
        lines += ["{" + " ".join(map(str, F)) + "}" for F in doc.facets]
    return "\n".join(lines) + "\n"


def loads_polymake(text: str) -> Document:
    backend = RATIONAL
    blocks: dict[str, list[str]] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("_type"):
            backend = FLOAT if "Float" in line else RATIONAL
            continue
        if not line or line.startswith("#"):
            current = None if not line else current
            continue
        if line.isupper() and " " not in line:
            current = line
            blocks[current] = []
            continue
        if current is None:
            raise DocumentError(f"unexpected line {line!r}")
        blocks[current].append(line)
    if "POINTS" not in blocks:
        raise DocumentError("missing POINTS")
    points = _dehomogenize((ln.split() for ln in blocks["POINTS"]), backend)
    facets = None
    if "VERTICES_IN_FACETS" in blocks:
        facets = tuple(_parse_face(ln) for ln in blocks["VERTICES_IN_FACETS"])
        _check_labels(facets, len(points))
    return Document(len(points[0]), backend, points, facets, {})


def dumps_json(doc: Document) -> str:
    data = {
        "ambient_dim": doc.ambient_dim,
        "backend": doc.backend,
        "points": [[format_scalar(c, doc.backend) for c in (1,) + tuple(p)] for p in doc.points],
        "facets": None if doc.facets is None else [list(F) for F in doc.facets],
        "meta": dict(sorted(doc.meta.items())),
    }
    return json.dumps(data, indent=1) + "\n"


def loads_json(text: str) -> Document:
    try:
        data = json.loads(text)
        backend = data["backend"]
        dim = int(data["ambient_dim"])
        rows = [[str(c) for c in row] for row in data["points"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"bad JSON document: {exc}") from exc
    if backend not in (RATIONAL, FLOAT):
        raise DocumentError(f"unknown backend {backend!r}")
    points = _dehomogenize(rows, backend)
    if any(len(p) != dim for p in points):
        raise DocumentError("point length does not match ambient_dim")
    facets = data.get("facets")
    if facets is not None:
        facets = tuple(tuple(sorted(int(v) for v in F)) for F in facets)
        _check_labels(facets, len(points))
    return Document(dim, backend, points, facets, {str(k): str(v) for k, v in (data.get("meta") or {}).items()})


FORMATS = {"native": dumps, "polymake": dumps_polymake, "json": dumps_json}
