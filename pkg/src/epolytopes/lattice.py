"""Combinatorial face lattices of polytopes and CW spheres.

Faces are stored as vertex sets (Python ints used as bitmasks).  All the
lattices here are atomic and coatomic, so a face is determined by its
vertices and the whole lattice by its vertex-facet incidences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np


class LatticeError(ValueError):
    pass


def _mask(labels: Iterable[int]) -> int:
    m = 0
    for v in labels:
        m |= 1 << int(v)
    return m


def _labels(mask: int) -> frozenset:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def _maximal(cands: Iterable[int]) -> list[int]:
    ordered = sorted(set(cands), key=_popcount, reverse=True)
    kept: list[int] = []
    for c in ordered:
        if not any(c & k == c for k in kept):
            kept.append(c)
    return kept


class FaceLattice:
    """Graded face poset; ``levels[k]`` lists the k-dimensional faces.

    The empty face (dimension -1) and the full face (dimension ``dim``) are
    implicit.
    """

    def __init__(self, n_vertices: int, levels: Sequence[Sequence[int]]):
        self.n_vertices = n_vertices
        self.levels = [list(lv) for lv in levels]
        self.dim = len(self.levels)
        self._index = [{F: i for i, F in enumerate(lv)} for lv in self.levels]
        self._inc_cache: dict = {}

    # -- access -----------------------------------------------------------
    @property
    def full(self) -> int:
        return (1 << self.n_vertices) - 1

    def masks(self, k: int) -> list[int]:
        if k == -1:
            return [0]
        if k == self.dim:
            return [self.full]
        if not 0 <= k < self.dim:
            raise LatticeError(f"no faces of dimension {k} in a {self.dim}-lattice")
        return self.levels[k]

    def faces(self, k: int) -> list[frozenset]:
        return [_labels(F) for F in self.masks(k)]

    def facets(self) -> list[frozenset]:
        return self.faces(self.dim - 1)

    def facet_masks(self) -> list[int]:
        return self.levels[-1]

    def face_index(self, k: int, face: Iterable[int]) -> int:
        return self._index[k][_mask(face)]

    def dim_of(self, face: Iterable[int]) -> int | None:
        m = _mask(face)
        if m == 0:
            return -1
        if m == self.full:
            return self.dim
        for k, idx in enumerate(self._index):
            if m in idx:
                return k
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, FaceLattice):
            return NotImplemented
        return self.n_vertices == other.n_vertices and [set(a) for a in self.levels] == [
            set(b) for b in other.levels
        ]

    def __repr__(self) -> str:
        return f"FaceLattice(dim={self.dim}, f={self.f_vector()})"

    # -- incidence --------------------------------------------------------
    def vertex_matrix(self, k: int) -> np.ndarray:
        key = ("V", k)
        if key not in self._inc_cache:
            M = np.zeros((len(self.masks(k)), self.n_vertices), dtype=np.int64)
            for i, F in enumerate(self.masks(k)):
                for v in _labels(F):
                    M[i, v] = 1
            self._inc_cache[key] = M
        return self._inc_cache[key]

    def containment(self, a: int, b: int) -> np.ndarray:
        """Boolean matrix ``C[i, j]`` = (face i of dim a) is contained in (face j of dim b)."""
        key = ("C", a, b)
        if key not in self._inc_cache:
            A, B = self.vertex_matrix(a), self.vertex_matrix(b)
            sizes = A.sum(axis=1)
            self._inc_cache[key] = (A @ B.T) == sizes[:, None]
        return self._inc_cache[key]

    # -- counting ---------------------------------------------------------
    def f_vector(self) -> tuple:
        return tuple(len(lv) for lv in self.levels)

    def flag_entry(self, S: Iterable[int]) -> int:
        """Number of chains with one face of each dimension in ``S``."""
        S = sorted(set(S))
        if any(s < 0 or s > self.dim for s in S):
            raise LatticeError(f"dimension set {S} outside 0..{self.dim}")
        S = [s for s in S if s != self.dim]
        if not S:
            return 1
        counts = np.ones(len(self.masks(S[0])), dtype=object)
        for a, b in zip(S, S[1:]):
            C = self.containment(a, b).astype(object)
            counts = C.T.dot(counts)
        return int(sum(counts))

    def flag_vector(self) -> "FlagVector":
        entries = {}
        for k in range(self.dim + 1):
            for S in combinations(range(self.dim), k):
                entries[S] = self.flag_entry(S)
        return FlagVector(self.dim, entries)

    # -- structure --------------------------------------------------------
    def children(self, k: int) -> list[list[int]]:
        """For each k-face, indices of the (k-1)-faces it contains."""
        if k == 0:
            return [[0] for _ in self.levels[0]]
        C = self.containment(k - 1, k)
        return [list(np.nonzero(C[:, j])[0]) for j in range(C.shape[1])]

    def validate(self) -> None:
        """Check gradedness: atoms are the vertices and every rank-2 interval is a diamond."""
        if self.dim == 0:
            return
        atoms = {F for F in self.levels[0]}
        if atoms != {1 << v for v in range(self.n_vertices)}:
            raise LatticeError("atoms are not exactly the singleton vertex sets")
        for k in range(1, self.dim):
            C = self.containment(k - 1, k).astype(np.int64)
            if k >= 2:
                D = self.containment(k - 2, k - 1).astype(np.int64)
                paths = D @ C  # (k-2)-faces x k-faces: number of middle faces
                sub = self.containment(k - 2, k)
                bad = paths[sub] != 2
                if np.any(bad):
                    raise LatticeError(f"diamond property fails between dimensions {k - 2} and {k}")
            else:
                if any(_popcount(F) != 2 for F in self.levels[1]):
                    raise LatticeError("an edge does not have exactly two vertices")
        if self.dim >= 2:
            ridges_in = self.containment(self.dim - 2, self.dim - 1).sum(axis=1)
            if np.any(ridges_in != 2):
                raise LatticeError("a ridge does not lie in exactly two facets")
        else:
            if len(self.levels[0]) != 2:
                raise LatticeError("a 1-dimensional lattice needs exactly two vertices")

    def relabel(self, mapping: Sequence[int]) -> "FaceLattice":
        """Lattice with vertex ``v`` renamed ``mapping[v]``."""
        levels = [[_mask(mapping[v] for v in _labels(F)) for F in lv] for lv in self.levels]
        return FaceLattice(self.n_vertices, levels)


@dataclass
class FlagVector:
    dim: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, S) -> int:
        S = tuple(sorted(set(S)))
        S = tuple(s for s in S if s != self.dim)
        return self.entries[S]

    def f_vector(self) -> tuple:
        return tuple(self.entries[(k,)] for k in range(self.dim))


# --------------------------------------------------------------------------
# constructions


def lattice_from_incidence(n_vertices: int, facet_vertex_sets: Sequence[Iterable[int]], validate: bool = True) -> FaceLattice:
    """Close vertex-facet incidences under intersection, top down.

    The k-faces below a face F are the maximal sets among ``F & G`` for
    facets G not containing F.  The dimension is the number of levels
    needed to reach the vertices.
    """
    facets = [_mask(F) for F in facet_vertex_sets]
    if len(set(facets)) != len(facets):
        raise LatticeError("duplicate facets")
    if any(F == 0 for F in facets):
        raise LatticeError("empty facet")
    levels = [facets]
    while True:
        current = levels[-1]
        singles = [_popcount(F) == 1 for F in current]
        if all(singles):
            break
        if any(singles):
            raise LatticeError("not graded: vertices appear at two different ranks")
        below: dict[int, None] = {}
        for F in current:
            cands = [F & G for G in facets if F & G != F]
            for c in _maximal(cands):
                if c == 0:
                    raise LatticeError("not graded: a face has no proper nonempty subface")
                below.setdefault(c, None)
        levels.append(list(below))
        if len(levels) > n_vertices + 1:
            raise LatticeError("not graded")
    levels.reverse()
    # vertices in label order
    levels[0] = sorted(levels[0], key=lambda F: F.bit_length())
    L = FaceLattice(n_vertices, levels)
    if validate:
        L.validate()
    return L


def polygon_lattice(m: int) -> FaceLattice:
    if m < 3:
        raise LatticeError("a polygon needs at least 3 vertices")
    return lattice_from_incidence(m, [(i, (i + 1) % m) for i in range(m)])


def segment_lattice() -> FaceLattice:
    return FaceLattice(2, [[1, 2]])


def simplex_lattice(d: int) -> FaceLattice:
    """d-simplex on labels 0..d; facet i omits vertex i."""
    if d == 1:
        return segment_lattice()
    return lattice_from_incidence(d + 1, [[v for v in range(d + 1) if v != i] for i in range(d + 1)])


def cube_lattice(d: int) -> FaceLattice:
    """±1 cube; vertex label = bits of the sign pattern (bit k set = coordinate k is +1).

    Facets ordered as (x_0 = -1, x_0 = +1, x_1 = -1, ...).
    """
    if d == 1:
        return segment_lattice()
    facets = []
    for k in range(d):
        for sign in (0, 1):
            facets.append([v for v in range(2**d) if (v >> k) & 1 == sign])
    return lattice_from_incidence(2**d, facets)


def product_lattice(L0: FaceLattice, L1: FaceLattice) -> FaceLattice:
    """Faces are pairs of nonempty faces; vertex (v, w) gets label ``v * n1 + w``.

    Within a dimension, faces are ordered by increasing dimension of the
    first component, so the facets come as (facet x P1) then (P0 x facet).
    """
    n0, n1 = L0.n_vertices, L1.n_vertices
    d0, d1 = L0.dim, L1.dim
    faces0 = {k: [_labels(F) for F in L0.masks(k)] for k in range(d0 + 1)}
    faces1 = {k: [_labels(G) for G in L1.masks(k)] for k in range(d1 + 1)}
    levels = []
    for k in range(d0 + d1):
        lv = []
        for i in range(0, d0 + 1):
            j = k - i
            if not 0 <= j <= d1:
                continue
            for F in faces0[i]:
                for G in faces1[j]:
                    lv.append(_mask(v * n1 + w for v in F for w in G))
        levels.append(lv)
    return FaceLattice(n0 * n1, levels)


def e_lattice(L: FaceLattice) -> FaceLattice:
    """The E-construction: one bipyramid facet over each ridge.

    For dim >= 3 the vertices are the old vertices followed by one apex per
    facet (label ``n + facet index``).  For dim == 2 only the apexes remain
    (label = edge index) and the result is again a polygon.
    """
    d = L.dim
    if d < 2:
        raise LatticeError("E-construction needs dimension >= 2")
    n = L.n_vertices
    C = L.containment(d - 2, d - 1)
    owners = [[int(g) for g in np.nonzero(C[r])[0]] for r in range(C.shape[0])]
    if d == 2:
        return lattice_from_incidence(len(L.facet_masks()), [tuple(o) for o in owners])
    new_facets = []
    for R, (a, b) in zip(L.masks(d - 2), owners):
        new_facets.append(_labels(R) | {n + int(a), n + int(b)})
    return lattice_from_incidence(n + len(L.facet_masks()), new_facets)


def dual_lattice(L: FaceLattice) -> FaceLattice:
    """Order-reversed lattice; atom ``i`` is the i-th facet of ``L``."""
    d = L.dim
    facets = L.facet_masks()
    levels = []
    for k in range(d - 1, -1, -1):
        lv = []
        for F in L.masks(k):
            lv.append(_mask(i for i, G in enumerate(facets) if G & F == F))
        levels.append(lv)
    return FaceLattice(len(facets), levels)


# --------------------------------------------------------------------------
# flag vector formulas


def _flag_lookup(flag: FlagVector, t: Sequence[int]) -> int:
    if any(a > b for a, b in zip(t, t[1:])):
        return 0
    S = tuple(sorted({x for x in t if x != flag.dim}))
    return flag.entries[S]


def product_flag_formula(flag0: FlagVector, flag1: FlagVector, S: Sequence[int]) -> int:
    """f_S of a product from the factors' flag vectors (convolution over splits of S)."""
    S = list(S)
    if S != sorted(S):
        raise ValueError("S must be sorted ascending")
    d0, d1 = flag0.dim, flag1.dim
    total = 0

    def rec(i, us, vs):
        nonlocal total
        if i == len(S):
            total += _flag_lookup(flag0, us) * _flag_lookup(flag1, vs)
            return
        for u in range(0, d0 + 1):
            v = S[i] - u
            if 0 <= v <= d1:
                rec(i + 1, us + [u], vs + [v])

    rec(0, [], [])
    return total


def e_fvector_formula(f: Sequence[int], flags: FlagVector) -> tuple:
    """f-vector of E(P) from the flag vector of P (with f_{-1,j} := f_j)."""
    d = flags.dim
    out = []
    for k in range(d):
        if k == d - 1:
            out.append(flags[(d - 2,)])
        elif k == d - 2:
            if d - 3 == -1:
                out.append(flags[(d - 1,)])
            else:
                out.append(flags[(d - 3, d - 1)])
        else:
            lower = flags[(d - 1,)] if k - 1 == -1 else flags[(k - 1, d - 1)]
            out.append(f[k] + lower)
    return tuple(out)


def check_2s2s(L: FaceLattice) -> bool:
    """2-simplicial and 2-simple: triangular 2-faces, every edge in 3 facets."""
    if L.dim != 4:
        raise LatticeError("2-simple/2-simplicial check is for 4-dimensional lattices")
    if any(_popcount(F) != 3 for F in L.masks(2)):
        return False
    return bool(np.all(L.containment(1, 3).sum(axis=1) == 3))


# --------------------------------------------------------------------------
# isomorphism and automorphisms


@dataclass(frozen=True)
class FacePermutation:
    """Incidence-preserving (or reversing) bijection between two lattices.

    ``vertex_map[v]`` is the image vertex for an automorphism/isomorphism and
    the image facet index for an antiautomorphism (then ``facet_map[g]`` is
    the image vertex of facet g).
    """

    source: FaceLattice
    target: FaceLattice
    vertex_map: tuple
    kind: str = "automorphism"
    facet_map: tuple | None = None

    def face_map(self, face: Iterable[int]) -> frozenset:
        face = frozenset(face)
        if self.kind == "automorphism":
            return frozenset(self.vertex_map[v] for v in face)
        facets = self.source.facets()
        return frozenset(self.facet_map[g] for g, G in enumerate(facets) if face <= G)

    def _mask_map(self):
        """Function sending a source face mask to its image mask."""
        if self.kind == "automorphism":
            bits = [1 << w for w in self.vertex_map]

            def image(F: int) -> int:
                out, v = 0, 0
                while F:
                    if F & 1:
                        out |= bits[v]
                    F >>= 1
                    v += 1
                return out
        else:
            facets = self.source.facet_masks()
            bits = [1 << w for w in self.facet_map]

            def image(F: int) -> int:
                out = 0
                for g, G in enumerate(facets):
                    if G & F == F:
                        out |= bits[g]
                return out
        return image

    def verify(self) -> bool:
        src, tgt = self.source, self.target
        d = src.dim
        if d != tgt.dim:
            return False
        image = self._mask_map()
        for k in range(d):
            images = {image(F) for F in src.masks(k)}
            k_img = k if self.kind == "automorphism" else d - 1 - k
            if images != set(tgt.masks(k_img)):
                return False
        return True


def _vertex_facet_matrix(L: FaceLattice) -> np.ndarray:
    return L.vertex_matrix(L.dim - 1).T  # vertices x facets


def _search(L0: FaceLattice, L1: FaceLattice, find_all: bool, limit: int | None = None) -> list[tuple]:
    n = L0.n_vertices
    if n != L1.n_vertices or L0.f_vector() != L1.f_vector():
        return []
    I0, I1 = _vertex_facet_matrix(L0), _vertex_facet_matrix(L1)
    C0, C1 = I0 @ I0.T, I1 @ I1.T

    def signature(I, C, v):
        sizes = I.sum(axis=0)
        return (int(C[v, v]), tuple(sorted(int(sizes[g]) for g in np.nonzero(I[v])[0])),
                tuple(sorted(C[v])))

    sig0 = [signature(I0, C0, v) for v in range(n)]
    sig1 = [signature(I1, C1, v) for v in range(n)]
    if sorted(sig0) != sorted(sig1):
        return []
    by_sig: dict = {}
    for w in range(n):
        by_sig.setdefault(sig1[w], []).append(w)

    # order: rarest signature first, then grow through shared facets
    start = min(range(n), key=lambda v: (len(by_sig[sig0[v]]), v))
    order = [start]
    seen = {start}
    while len(order) < n:
        best = None
        for v in range(n):
            if v in seen:
                continue
            key = (-sum(1 for u in order if C0[v, u] > 0), len(by_sig[sig0[v]]), v)
            if best is None or key < best[0]:
                best = (key, v)
        order.append(best[1])
        seen.add(best[1])

    facets0 = [_labels(F) for F in L0.facet_masks()]
    target_facets = set(L1.facet_masks())
    position = {v: k for k, v in enumerate(order)}
    complete_at = [[] for _ in range(n)]
    for g, F in enumerate(facets0):
        complete_at[max(position[v] for v in F)].append(g)

    sigma = [-1] * n
    used = [False] * n
    results: list[tuple] = []

    def rec(k: int) -> bool:
        if k == n:
            results.append(tuple(sigma))
            return not find_all or (limit is not None and len(results) >= limit)
        v = order[k]
        prev = order[:k]
        prev_img = [sigma[u] for u in prev]
        row0 = C0[v, prev]
        for w in by_sig[sig0[v]]:
            if used[w]:
                continue
            if k and not np.array_equal(C1[w, prev_img], row0):
                continue
            sigma[v] = w
            ok = True
            for g in complete_at[k]:
                if _mask(sigma[u] for u in facets0[g]) not in target_facets:
                    ok = False
                    break
            if ok:
                used[w] = True
                if rec(k + 1):
                    return True
                used[w] = False
            sigma[v] = -1
        return False

    rec(0)
    return results


def lattice_isomorphism(L0: FaceLattice, L1: FaceLattice) -> FacePermutation | None:
    """A vertex bijection inducing a lattice isomorphism, or None."""
    if L0.dim != L1.dim:
        return None
    found = _search(L0, L1, find_all=False)
    if not found:
        return None
    return FacePermutation(L0, L1, found[0])


def lattice_automorphisms(L: FaceLattice) -> list[FacePermutation]:
    """All automorphisms as vertex permutations (exhaustive backtracking)."""
    return [FacePermutation(L, L, s) for s in _search(L, L, find_all=True)]


@lru_cache(maxsize=None)
def emn_lattice(m: int, n: int) -> FaceLattice:
    """e_lattice of the product of an m-gon and an n-gon (cached)."""
    return e_lattice(product_lattice(polygon_lattice(m), polygon_lattice(n)))
