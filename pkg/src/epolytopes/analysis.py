"""Fatness, self-duality, rotation symmetries, and geometric realizability of symmetries."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import (
    EPS,
    RATIONAL,
    HullCertificate,
    PointConfiguration,
    certify_realization,
    discover_facets,
    exact_nullspace,
    matrix_rank,
    solve_linear_system,
    _float_nullspace,
)
from .lattice import (
    FaceLattice,
    FacePermutation,
    dual_lattice,
    emn_lattice,
    lattice_automorphisms,
    lattice_from_incidence,
    lattice_isomorphism,
)


class VerificationError(RuntimeError):
    """A map that should be a (anti)automorphism by construction is not."""


def fatness(f: Sequence[int]) -> Fraction:
    """(f1 + f2 - 20) / (f0 + f3 - 10) for a 4-polytope f-vector."""
    if len(f) != 4:
        raise ValueError("fatness is defined for 4-polytopes")
    den = f[0] + f[3] - 10
    if den == 0:
        raise ZeroDivisionError("f0 + f3 = 10 (simplex)")
    return Fraction(f[1] + f[2] - 20, den)


def emn_fatness_formula(m: int, n: int) -> Fraction:
    return Fraction(12 * m * n - 20, 2 * m * n + 2 * m + 2 * n - 10)


# --------------------------------------------------------------------------
# labels of E_mn


def _emn_facet_sets(m: int, n: int) -> dict:
    """Facet vertex sets of E_mn keyed by ('G', i, j), ('G1', i), ('G2', j)."""
    N = m * n
    v = lambda i, j: n * (i % m) + (j % n)
    out = {}
    for i in range(m):
        for j in range(n):
            out[("G", i, j)] = frozenset(
                {v(i, j), v(i + 1, j), v(i, j + 1), v(i + 1, j + 1), N + i, N + m + j}
            )
        out[("G1", i)] = frozenset({v(i, j) for j in range(n)} | {N + (i - 1) % m, N + i})
    for j in range(n):
        out[("G2", j)] = frozenset({v(i, j) for i in range(m)} | {N + m + (j - 1) % n, N + m + j})
    return out


def self_duality_map(m: int, n: int) -> FacePermutation:
    """Vertex-facet exchange v_ij <-> G_{-i,-j}, v'_i <-> G'_{-i}, v''_j <-> G''_{-j}.

    Verified to reverse incidences and to have order 2; raises
    :class:`VerificationError` otherwise.
    """
    L = emn_lattice(m, n)
    N = m * n
    sets = _emn_facet_sets(m, n)
    index = {F: k for k, F in enumerate(L.facets())}
    key_index = {key: index[F] for key, F in sets.items()}
    vertex_map = [None] * (N + m + n)
    facet_map = [None] * len(index)
    for i in range(m):
        for j in range(n):
            g = key_index[("G", (-i) % m, (-j) % n)]
            vertex_map[n * i + j] = g
            facet_map[key_index[("G", i, j)]] = n * ((-i) % m) + (-j) % n
        vertex_map[N + i] = key_index[("G1", (-i) % m)]
        facet_map[key_index[("G1", i)]] = N + (-i) % m
    for j in range(n):
        vertex_map[N + m + j] = key_index[("G2", (-j) % n)]
        facet_map[key_index[("G2", j)]] = N + m + (-j) % n
    phi = FacePermutation(L, L, tuple(vertex_map), "antiautomorphism", tuple(facet_map))
    if not phi.verify():
        raise VerificationError(f"self-duality map of E_{m},{n} does not reverse incidences")
    if any(facet_map[vertex_map[v]] != v for v in range(len(vertex_map))):
        raise VerificationError("self-duality map is not an involution")
    return phi


def duality_isomorphism(m: int, n: int) -> FacePermutation:
    """The same assignment read as an isomorphism dual_lattice(E_mn) -> E_mn."""
    phi = self_duality_map(m, n)
    L = emn_lattice(m, n)
    iso = FacePermutation(dual_lattice(L), L, phi.facet_map)
    if not iso.verify():
        raise VerificationError("dual lattice is not identified with E_mn by the duality map")
    return iso


def rotation_symmetries(m: int, n: int) -> dict[str, tuple]:
    """Vertex permutations S_m (rotate the m-gon), S_n, and T = S_n o S_m.

    Each is verified to be an automorphism of E_mn.
    """
    N = m * n
    sm = [0] * (N + m + n)
    sn = [0] * (N + m + n)
    for i in range(m):
        for j in range(n):
            sm[n * i + j] = n * ((i + 1) % m) + j
            sn[n * i + j] = n * i + (j + 1) % n
    for i in range(m):
        sm[N + i] = N + (i + 1) % m
        sn[N + i] = N + i
    for j in range(n):
        sm[N + m + j] = N + m + j
        sn[N + m + j] = N + m + (j + 1) % n
    t = [sn[sm[v]] for v in range(N + m + n)]
    out = {"S_m": tuple(sm), "S_n": tuple(sn), "T": tuple(t)}
    L = emn_lattice(m, n)
    for name, p in out.items():
        if not FacePermutation(L, L, p).verify():
            raise VerificationError(f"{name} is not an automorphism of E_{m},{n}")
    return out


def cycles(perm: Sequence[int]) -> list[tuple]:
    """Cycle decomposition, fixed points omitted, each cycle starting at its smallest label."""
    seen = set()
    out = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        v = perm[start]
        while v != start:
            cyc.append(v)
            seen.add(v)
            v = perm[v]
        if len(cyc) > 1:
            out.append(tuple(cyc))
    return out


def perm_from_cycles(text: str, size: int) -> tuple:
    """Parse "(0,4,8)(1,5,9)" into a permutation of range(size)."""
    perm = list(range(size))
    body = text.replace(" ", "")
    if body in ("", "()"):
        return tuple(perm)
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"bad cycle notation {text!r}")
    for chunk in body[1:-1].split(")("):
        labels = [int(x) for x in chunk.split(",")]
        for a, b in zip(labels, labels[1:] + labels[:1]):
            perm[a] = b
    if sorted(perm) != list(range(size)):
        raise ValueError(f"cycles {text!r} do not form a permutation")
    return tuple(perm)


# --------------------------------------------------------------------------
# combinatorial type of a configuration


@dataclass
class TypeCheck:
    """Certificate that a configuration realizes (a relabelling of) a target lattice."""

    certificate: HullCertificate
    lattice: FaceLattice
    isomorphism: FacePermutation | None

    @property
    def certified(self) -> bool:
        return self.certificate.certified and self.isomorphism is not None

    @property
    def to_target(self) -> tuple | None:
        """``to_target[v]`` is the target label of configuration point v."""
        return None if self.isomorphism is None else self.isomorphism.vertex_map


def certify_type(config: PointConfiguration, target: FaceLattice | None = None, eps: float = EPS) -> TypeCheck:
    """Discover facets, certify them, and match the resulting lattice to ``target``."""
    facets = discover_facets(config)
    L = lattice_from_incidence(len(config), facets)
    cert = certify_realization(config, L, eps)
    iso = None
    if target is not None and cert.certified:
        iso = lattice_isomorphism(L, target)
    return TypeCheck(cert, L, iso)


def conjugate(perm: Sequence[int], to_target: Sequence[int]) -> tuple:
    """Transport a permutation of target labels to configuration labels."""
    inv = [0] * len(to_target)
    for v, w in enumerate(to_target):
        inv[w] = v
    return tuple(inv[perm[to_target[v]]] for v in range(len(to_target)))


# --------------------------------------------------------------------------
# geometric realizability


@dataclass
class AffineMap:
    """x -> matrix @ x + translation."""

    matrix: tuple
    translation: tuple

    def apply(self, x):
        return tuple(sum(a * b for a, b in zip(row, x)) + t for row, t in zip(self.matrix, self.translation))


@dataclass
class ProjectiveMap:
    """Acts on homogeneous points (1, x); ``scales[i]`` is lambda_i for point i."""

    matrix: tuple
    scales: tuple = field(default=())

    @property
    def admissible(self) -> bool:
        """No point of the configuration is sent across the hyperplane at infinity."""
        return all(s > 0 for s in self.scales) or all(s < 0 for s in self.scales)

    def apply(self, x):
        h = (1,) + tuple(x)
        y = [sum(a * b for a, b in zip(row, h)) for row in self.matrix]
        return tuple(c / y[0] for c in y[1:])


def _is_zero(x, exact: bool, scale: float = 1.0, eps: float = EPS) -> bool:
    return x == 0 if exact else abs(float(x)) <= eps * scale


def find_affine_symmetry(config: PointConfiguration, perm: Sequence[int], eps: float = EPS) -> AffineMap | None:
    """Affine map sending point i to point perm[i] for all i, if one exists and is invertible."""
    N, d = len(config), config.ambient_dim
    if sorted(perm) != list(range(N)):
        raise ValueError("not a permutation of the labels")
    one = 1 if config.exact else 1.0
    A = [list(config[i]) + [one] for i in range(N)]
    cols = []
    for k in range(d):
        b = [config[perm[i]][k] for i in range(N)]
        sol = solve_linear_system(A, b, config.backend, eps)
        if sol is None:
            return None
        cols.append(sol)
    matrix = tuple(tuple(col[:d]) for col in cols)
    translation = tuple(col[d] for col in cols)
    if matrix_rank([list(r) for r in matrix], config.backend, eps) < d:
        return None
    return AffineMap(matrix, translation)


def _homogeneous(config: PointConfiguration) -> list[list]:
    one = Fraction(1) if config.exact else 1.0
    return [[one] + list(p) for p in config.points]


def _frame(H: list[list], backend: str, eps: float):
    """Indices of d+1 independent rows plus one row with all-nonzero coefficients in them."""
    D = len(H[0])
    basis: list[int] = []
    for i in range(len(H)):
        if matrix_rank([H[j] for j in basis + [i]], backend, eps) == len(basis) + 1:
            basis.append(i)
            if len(basis) == D:
                break
    if len(basis) < D:
        return None
    cols = [[H[b][r] for b in basis] for r in range(D)]  # columns are basis points
    exact = backend == RATIONAL
    for i in range(len(H)):
        if i in basis:
            continue
        c = solve_linear_system(cols, H[i], backend, eps)
        if c is not None and all(not _is_zero(x, exact, 1.0, eps) for x in c):
            return basis, i, c
    return None


def _normalize(M: list[list], exact: bool, eps: float) -> list[list]:
    flat = [x for row in M for x in row]
    pivot = flat[-1]
    if _is_zero(pivot, exact, max(abs(float(x)) for x in flat), eps):
        pivot = next(x for x in flat if not _is_zero(x, exact, 1.0, eps))
    return [[x / pivot for x in row] for row in M]


def _check_projective(M, H, T, exact: bool, eps: float):
    """Scales lambda_i with M h_i = lambda_i t_i, or None if some point is not matched."""
    scales = []
    for h, t in zip(H, T):
        y = [sum(a * b for a, b in zip(row, h)) for row in M]
        lam = y[0]  # t[0] == 1
        scale = max(1.0, max(abs(float(c)) for c in y))
        if _is_zero(lam, exact, scale, eps):
            return None
        if any(not _is_zero(yk - lam * tk, exact, scale, eps) for yk, tk in zip(y, t)):
            return None
        scales.append(lam)
    return scales


def find_projective_symmetry(config: PointConfiguration, perm: Sequence[int], eps: float = EPS) -> ProjectiveMap | None:
    """Projective map with M (1, v_i) = lambda_i (1, v_perm(i)), lambda_i != 0, M invertible.

    Fast path: a projective frame of the source (d+2 points in general
    position) and its image pin M up to scale; every other point is then a
    check.  Without such a frame the full homogeneous system is solved.
    """
    N = len(config)
    if sorted(perm) != list(range(N)):
        raise ValueError("not a permutation of the labels")
    exact, backend = config.exact, config.backend
    H = _homogeneous(config)
    T = [H[perm[i]] for i in range(N)]
    D = len(H[0])
    frame = _frame(H, backend, eps)
    if frame is not None:
        basis, extra, c = frame
        tcols = [[T[b][r] for b in basis] for r in range(D)]
        e = solve_linear_system(tcols, T[extra], backend, eps)
        if e is None or any(_is_zero(x, exact, 1.0, eps) for x in e):
            return None
        mu = [ek / ck for ek, ck in zip(e, c)]
        # M = Q diag(mu) P^{-1}: solve M P = Q diag(mu) row by row
        P = [[H[b][r] for b in basis] for r in range(D)]
        Pt = [list(col) for col in zip(*P)]  # rows = basis points
        M = []
        for r in range(D):
            rhs = [T[b][r] * mu[k] for k, b in enumerate(basis)]
            row = solve_linear_system(Pt, rhs, backend, eps)
            if row is None:
                return None
            M.append(row)
    else:
        M = _nullspace_projective(H, T, backend, eps)
        if M is None:
            return None
    if matrix_rank(M, backend, eps) < D:
        return None
    M = _normalize(M, exact, eps)
    scales = _check_projective(M, H, T, exact, eps)
    if scales is None:
        return None
    return ProjectiveMap(tuple(tuple(r) for r in M), tuple(scales))


def _nullspace_projective(H, T, backend, eps):
    """Solve M h_i - lambda_i t_i = 0 for all i; unknowns are M and the lambdas."""
    N, D = len(H), len(H[0])
    n_unk = D * D + N
    rows = []
    zero = Fraction(0) if backend == RATIONAL else 0.0
    for i in range(N):
        for r in range(D):
            row = [zero] * n_unk
            for c in range(D):
                row[r * D + c] = H[i][c]
            row[D * D + i] = -T[i][r]
            rows.append(row)
    if backend == RATIONAL:
        basis = exact_nullspace(rows, n_unk)
    else:
        basis = [list(v) for v in _float_nullspace(np.array(rows, dtype=float), eps).T]
    if not basis:
        return None
    # a generic member of the solution space; a single vector when the map is pinned
    vec = [sum(b[k] for b in basis) for k in range(n_unk)]
    return [vec[r * D:(r + 1) * D] for r in range(D)]


# --------------------------------------------------------------------------
# reports


@dataclass
class SymmetryEntry:
    name: str
    perm: tuple
    automorphism: bool
    affine: bool | None
    projective: bool | None
    note: str = ""


@dataclass
class SymmetryReport:
    entries: list
    alignment: tuple | None = None

    def lines(self) -> list[str]:
        out = []
        if self.alignment is not None:
            out.append("alignment " + " ".join(str(x) for x in self.alignment))
        for e in self.entries:
            fmt = lambda b: "n/a" if b is None else ("yes" if b else "no")
            out.append(
                f"{e.name}: automorphism={fmt(e.automorphism)} affine={fmt(e.affine)} "
                f"projective={fmt(e.projective)}" + (f" ({e.note})" if e.note else "")
            )
        return out


def symmetry_report(config: PointConfiguration, lattice: FaceLattice, subgroup: dict | None = None,
                    mn: tuple[int, int] | None = None, eps: float = EPS) -> SymmetryReport:
    """Affine/projective realizability of combinatorial symmetries on a concrete realization.

    Default subgroup: the rotations S_m, S_n, T of E_mn (``mn`` given or
    inferred from the vertex count), transported to the configuration's
    labels through a lattice isomorphism when the labels do not already
    follow the E_mn convention.  The self-duality map is reported as a
    combinatorial check only.
    """
    entries = []
    alignment = None
    if subgroup is None:
        if mn is None:
            raise ValueError("give a subgroup or the (m, n) of an E_mn")
        m, n = mn
        target = emn_lattice(m, n)
        rots = rotation_symmetries(m, n)
        if lattice == target:
            to_target = tuple(range(len(config)))
        else:
            iso = lattice_isomorphism(lattice, target)
            if iso is None:
                raise ValueError(f"lattice is not isomorphic to E_{m},{n}")
            to_target = iso.vertex_map
            alignment = to_target
        subgroup = {name: conjugate(p, to_target) for name, p in rots.items()}
        try:
            self_duality_map(m, n)
            entries.append(SymmetryEntry("self-duality", (), True, None, None, "combinatorial only"))
        except VerificationError as exc:
            entries.append(SymmetryEntry("self-duality", (), False, None, None, str(exc)))
    for name, p in subgroup.items():
        p = tuple(p)
        auto = FacePermutation(lattice, lattice, p).verify()
        aff = find_affine_symmetry(config, p, eps) is not None
        proj = aff or find_projective_symmetry(config, p, eps) is not None
        entries.append(SymmetryEntry(name, p, auto, aff, proj))
    return SymmetryReport(entries, alignment)


def projective_automorphism_scan(config: PointConfiguration, lattice: FaceLattice, eps: float = EPS):
    """(group order, number of nontrivial automorphisms realized projectively)."""
    autos = lattice_automorphisms(lattice)
    ident = tuple(range(len(config)))
    found = 0
    for a in autos:
        if a.vertex_map == ident:
            continue
        if find_projective_symmetry(config, a.vertex_map, eps) is not None:
            found += 1
    return len(autos), found
