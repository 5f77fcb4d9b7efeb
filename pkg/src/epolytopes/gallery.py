"""Fixed coordinate tables and the 4-parameter family of 24-cells.

All data is exact (Fractions).  The tables live in ``data/tables.txt``; the
test suite pins its checksum so transcription drift is caught.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .geometry import RATIONAL, PointConfiguration, affine_rank, discover_facets
from .lattice import lattice_from_incidence

GALLERY_NAMES = ("no_proj_autos_24cell", "regular_squares_e44", "feasible_e33")


@lru_cache(maxsize=None)
def _tables() -> dict[str, tuple]:
    text = resources.files(__package__).joinpath("data/tables.txt").read_text()
    out: dict[str, list] = {}
    current = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            current = line.strip("[]")
            out[current] = []
            continue
        out[current].append(tuple(Fraction(tok) for tok in line.split()))
    return {k: tuple(v) for k, v in out.items()}


def table_text() -> str:
    return resources.files(__package__).joinpath("data/tables.txt").read_text()


def fixed_gallery(name: str) -> PointConfiguration:
    """Exact coordinates of a named table, label = row index."""
    if name not in GALLERY_NAMES:
        raise KeyError(f"unknown gallery entry {name!r}; choose from {', '.join(GALLERY_NAMES)}")
    return PointConfiguration(_tables()[name], RATIONAL)


@dataclass(frozen=True)
class Family24Params:
    a1: Fraction = Fraction(0)
    b1: Fraction = Fraction(0)
    a2: Fraction = Fraction(0)
    b2: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("a1", "b1", "a2", "b2"):
            val = getattr(self, name)
            if not isinstance(val, Fraction):
                val = Fraction(val) if isinstance(val, int) else Fraction(str(val))
                object.__setattr__(self, name, val)
            if not -1 < val < 1:
                raise ValueError(f"parameter {name}={val} outside (-1, 1)")

    def astuple(self) -> tuple:
        return (self.a1, self.b1, self.a2, self.b2)


def family24(p: Family24Params | Sequence = Family24Params()) -> PointConfiguration:
    """Sixteen fixed sign vectors followed by eight points moving with the parameters.

    At p = 0 this is the regular 24-cell {±1}^4 ∪ {±2 e_i}.
    """
    if not isinstance(p, Family24Params):
        p = Family24Params(*p)
    a1, b1, a2, b2 = p.astuple()
    fixed = [tuple(Fraction(c) for c in row) for row in _tables()["family24_signs"]]
    moving = [
        (a1, b1, a2, -2 - b2),
        (a1, b1, 2 - a2, b2),
        (a1, b1, a2, 2 - b2),
        (a1, b1, -2 - a2, b2),
        (a1, 2 - b1, a2, b2),
        (-2 - a1, b1, a2, b2),
        (a1, -2 - b1, a2, b2),
        (2 - a1, b1, a2, b2),
    ]
    return PointConfiguration(tuple(fixed + moving), RATIONAL)


# the three standard cubes inscribed in the regular member of the family
INSCRIBED_CUBES = (
    tuple(range(0, 16)),
    tuple(range(8, 24)),
    tuple(range(0, 8)) + tuple(range(16, 24)),
)


@lru_cache(maxsize=None)
def designated_squares() -> tuple[frozenset, ...]:
    """The 2-faces of the three inscribed cubes of family24(0), as global labels.

    These squares are not faces of the 24-cell but are coplanar at p = 0;
    moving the parameters breaks the ones that involve moving vertices.
    """
    base = family24()
    out = []
    for cube in INSCRIBED_CUBES:
        sub = base.subset(cube)
        L = lattice_from_incidence(len(cube), discover_facets(sub))
        for face in L.faces(2):
            out.append(frozenset(cube[i] for i in face))
    return tuple(sorted(set(out), key=sorted))


def internal_squares(config: PointConfiguration, labels: Iterable[Iterable[int]] | None = None) -> list[int]:
    """Affine rank of each 4-point label set (2 means coplanar)."""
    if labels is None:
        labels = designated_squares()
    ranks = []
    for quad in labels:
        quad = sorted(set(quad))
        if len(quad) != 4 or any(not 0 <= i < len(config) for i in quad):
            raise ValueError(f"bad label set {quad}")
        ranks.append(affine_rank(config.subset(quad)))
    return ranks
