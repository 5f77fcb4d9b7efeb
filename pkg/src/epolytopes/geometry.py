"""Scalar backends, small linear algebra, and hull certification.

Two backends are supported.  ``"rational"`` configurations hold
:class:`fractions.Fraction` coordinates and every decision is exact.
``"float"`` configurations hold Python floats and every "is zero" decision
is made against a tolerance (``EPS`` by default).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

EPS = 1e-9

RATIONAL = "rational"
FLOAT = "float"


class GeometryError(ValueError):
    """Raised on precondition violations (rank deficiency, bad ranges...)."""


class BackendMismatch(GeometryError):
    pass


def _is_exact(x) -> bool:
    return isinstance(x, (int, Rational)) and not isinstance(x, bool)


def to_scalar(x, backend: str):
    if backend == RATIONAL:
        if isinstance(x, float):
            raise BackendMismatch(f"float value {x!r} in rational backend")
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(x)
    if backend == FLOAT:
        return float(x)
    raise GeometryError(f"unknown backend {backend!r}")


def infer_backend(values: Iterable) -> str:
    return RATIONAL if all(_is_exact(v) for v in values) else FLOAT


@dataclass(frozen=True)
class Hyperplane:
    """Points with ``<normal, x> == offset`` lie on it; ``< offset`` is beneath."""

    normal: tuple
    offset: object

    def __post_init__(self):
        if all(c == 0 for c in self.normal):
            raise GeometryError("zero normal")

    def value(self, x: Sequence) -> object:
        return sum(a * b for a, b in zip(self.normal, x)) - self.offset


@dataclass(frozen=True)
class PointConfiguration:
    """Labelled points ``0..N-1`` sharing one ambient dimension and backend."""

    points: tuple
    backend: str = RATIONAL
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        pts = tuple(tuple(to_scalar(c, self.backend) for c in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        dim = self.ambient_dim
        if dim < 0:
            if not pts:
                raise GeometryError("empty configuration needs an explicit ambient_dim")
            dim = len(pts[0])
            object.__setattr__(self, "ambient_dim", dim)
        if any(len(p) != dim for p in pts):
            raise GeometryError("points of unequal length")

    @classmethod
    def from_points(cls, points: Iterable[Sequence], backend: str | None = None):
        points = [tuple(p) for p in points]
        if backend is None:
            backend = infer_backend(c for p in points for c in p)
        return cls(tuple(points), backend)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def exact(self) -> bool:
        return self.backend == RATIONAL

    def array(self) -> np.ndarray:
        return np.array([[float(c) for c in p] for p in self.points], dtype=float).reshape(
            len(self.points), self.ambient_dim
        )

    def as_float(self) -> "PointConfiguration":
        return PointConfiguration(tuple(tuple(float(c) for c in p) for p in self.points), FLOAT)

    def subset(self, labels: Iterable[int]) -> "PointConfiguration":
        return PointConfiguration(tuple(self.points[i] for i in labels), self.backend, self.ambient_dim)

    def permuted(self, order: Sequence[int]) -> "PointConfiguration":
        """New configuration whose point ``k`` is the old point ``order[k]``."""
        return PointConfiguration(tuple(self.points[i] for i in order), self.backend, self.ambient_dim)

    def concat(self, other: "PointConfiguration") -> "PointConfiguration":
        check_same_backend(self, other)
        return PointConfiguration(self.points + other.points, self.backend, self.ambient_dim)


def check_same_backend(*configs: PointConfiguration) -> str:
    backends = {c.backend for c in configs}
    if len(backends) != 1:
        raise BackendMismatch(f"mixed backends {sorted(backends)}")
    return backends.pop()


# --------------------------------------------------------------------------
# exact linear algebra over Fractions


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    M = [list(map(Fraction, r)) for r in rows]
    if not M:
        return M, []
    n_cols = len(M[0])
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        piv = next((i for i in range(row, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = 1 / M[row][col]
        M[row] = [v * inv for v in M[row]]
        for i in range(len(M)):
            if i != row and M[i][col] != 0:
                f = M[i][col]
                Mi, Mr = M[i], M[row]
                M[i] = [a - f * b for a, b in zip(Mi, Mr)]
        pivots.append(col)
        row += 1
        if row == len(M):
            break
    return M, pivots


def exact_nullspace(rows: Sequence[Sequence[Fraction]], n_cols: int) -> list[list[Fraction]]:
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    R, pivots = rref(rows)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n_cols
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -R[r][f]
        basis.append(v)
    return basis


def _float_nullspace(A: np.ndarray, tol: float) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, s, vt = np.linalg.svd(A)
    scale = max(1.0, s[0] if len(s) else 1.0)
    rank = int(np.sum(s > tol * scale))
    return vt[rank:]


def solve_linear_system(A: Sequence[Sequence], b: Sequence, backend: str | None = None, eps: float = EPS):
    """One solution of ``A x = b`` or ``None`` if the system is inconsistent.

    Exact backend: the pivot-based particular solution (free variables = 0).
    Float backend: the minimum-norm least-squares solution, accepted when the
    residual is at most ``eps`` (scaled by the magnitude of ``b``).
    """
    if backend is None:
        backend = infer_backend([x for row in A for x in row] + list(b))
    if backend == RATIONAL:
        for x in list(b) + [x for row in A for x in row]:
            if not _is_exact(x):
                raise BackendMismatch("inexact entry in rational system")
        if not A:
            return [] if all(v == 0 for v in b) else None
        n = len(A[0])
        aug = [list(map(Fraction, row)) + [Fraction(v)] for row, v in zip(A, b)]
        R, pivots = rref(aug)
        if n in pivots:
            return None
        x = [Fraction(0)] * n
        for r, p in enumerate(pivots):
            x[p] = R[r][n]
        return x
    Af = np.asarray(A, dtype=float)
    bf = np.asarray(b, dtype=float)
    x, *_ = np.linalg.lstsq(Af, bf, rcond=None)
    resid = np.max(np.abs(Af @ x - bf)) if len(bf) else 0.0
    if resid > eps * max(1.0, np.max(np.abs(bf)) if len(bf) else 1.0):
        return None
    return [float(v) for v in x]


def matrix_rank(rows: Sequence[Sequence], backend: str, eps: float = EPS) -> int:
    if not rows:
        return 0
    if backend == RATIONAL:
        return len(rref(rows)[1])
    A = np.asarray(rows, dtype=float)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > eps * max(1.0, s[0])))


def affine_rank(config: PointConfiguration, eps: float = EPS) -> int:
    """Dimension of the affine hull (0 for a single point)."""
    if len(config) == 0:
        raise GeometryError("affine rank of an empty point set")
    p0 = config[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in config.points[1:]]
    return matrix_rank(diffs, config.backend, eps)


def project(config: PointConfiguration, coords: Sequence[int] | range) -> PointConfiguration:
    coords = list(coords)
    if not coords:
        raise GeometryError("empty coordinate range")
    if min(coords) < 0 or max(coords) >= config.ambient_dim:
        raise GeometryError(f"coordinates {coords} outside ambient dimension {config.ambient_dim}")
    return PointConfiguration(tuple(tuple(p[c] for c in coords) for p in config.points), config.backend)


def embed(config: PointConfiguration, ambient_dim: int, coords: Sequence[int], fill=0) -> PointConfiguration:
    """Inverse of :func:`project` on the selected coordinates (others = ``fill``)."""
    pts = []
    for p in config.points:
        q = [fill] * ambient_dim
        for c, v in zip(coords, p):
            q[c] = v
        pts.append(tuple(q))
    return PointConfiguration(tuple(pts), config.backend)


# --------------------------------------------------------------------------
# hyperplanes


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def hyperplane_through(points: Sequence[Sequence], backend: str, eps: float = EPS) -> Hyperplane:
    """Hyperplane through points whose affine hull has codimension one.

    The normal is scaled to ``max |n_i| == 1``.
    """
    d = len(points[0])
    p0 = points[0]
    diffs = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    if backend == RATIONAL:
        null = exact_nullspace(diffs, d)
        if len(null) != 1:
            raise GeometryError(f"points span affine rank {d - len(null)}, need {d - 1}")
        n = null[0]
        scale = max(abs(c) for c in n)
        n = tuple(c / scale for c in n)
        return Hyperplane(n, _dot(n, p0))
    P = np.asarray(points, dtype=float)
    centre = P.mean(axis=0)
    C = P - centre
    if len(P) < d:
        raise GeometryError(f"points span affine rank < {d - 1}")
    _, s, vt = np.linalg.svd(C, full_matrices=True)
    scale = max(1.0, s[0])
    rank = int(np.sum(s > eps * scale))
    if rank != d - 1:
        raise GeometryError(f"points span affine rank {rank}, need {d - 1}")
    n = vt[-1]
    n = n / np.max(np.abs(n))
    return Hyperplane(tuple(float(c) for c in n), float(n @ centre))


def supporting_hyperplane(config: PointConfiguration, face_labels: Iterable[int], eps: float = EPS):
    """Hyperplane through the face, oriented with the remaining points beneath.

    Returns ``None`` when the remaining points lie strictly on both sides.
    Raises :class:`GeometryError` if the face does not span a hyperplane.
    """
    labels = sorted(set(face_labels))
    if not labels:
        raise GeometryError("empty face")
    tol = 0 if config.exact else eps
    H = hyperplane_through([config[i] for i in labels], config.backend, eps)
    inside = set(labels)
    vals = [H.value(config[i]) for i in range(len(config)) if i not in inside]
    if not vals:
        return H
    if max(vals) <= tol:
        return H
    if min(vals) >= -tol:
        return Hyperplane(tuple(-c for c in H.normal), -H.offset)
    return None


def segment_exit(s: Sequence, v: Sequence, facets: Sequence[Hyperplane], eps: float = EPS):
    """(inside fraction, index of the crossed facet) for the segment ``s -> v``.

    The inside fraction ``r`` satisfies ``r |s, v| == |s, q|`` where ``q``
    is the first boundary crossing.  Exact when all inputs are exact.
    """
    exact = all(_is_exact(c) for c in list(s) + list(v)) and all(
        _is_exact(c) for H in facets for c in (*H.normal, H.offset)
    )
    tol = 0 if exact else eps
    best = None
    for k, H in enumerate(facets):
        hs = H.value(s)
        if hs >= -tol:
            raise GeometryError("s is not strictly interior")
        hv = H.value(v)
        if hv > tol:
            t = (-hs) / (hv - hs)
            if best is None or t < best[0]:
                best = (t, k)
    if best is None:
        raise GeometryError("v is not outside the polytope")
    return best


def segment_boundary_ratio(s: Sequence, v: Sequence, facets: Sequence[Hyperplane], eps: float = EPS):
    """Inside fraction of the segment ``s -> v`` for the polytope cut out by ``facets``."""
    return segment_exit(s, v, facets, eps)[0]


# --------------------------------------------------------------------------
# certification


@dataclass
class FacetEvidence:
    labels: tuple
    hyperplane: Hyperplane | None
    margin: object
    residual: object
    problem: str | None = None


@dataclass
class HullCertificate:
    facet_evidence: list
    global_min_margin: object
    status: str
    reason: str | None = None
    exact: bool = False

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def summary(self) -> str:
        kind = "exact" if self.exact else "numerical"
        if self.certified:
            margin = "n/a" if self.global_min_margin is None else f"{float(self.global_min_margin):.6g}"
            return f"certified, facets={len(self.facet_evidence)}, min_margin={margin}, {kind}"
        return f"failed, {kind}: {self.reason}"


def _facet_evidence(config: PointConfiguration, labels: tuple, eps: float) -> FacetEvidence:
    pts = [config[i] for i in labels]
    try:
        H = hyperplane_through(pts, config.backend, eps)
    except GeometryError as exc:
        return FacetEvidence(labels, None, None, None, f"degenerate facet: {exc}")
    inside = set(labels)
    others = [i for i in range(len(config)) if i not in inside]
    residual = max(abs(H.value(p)) for p in pts)
    if others:
        vals = [H.value(config[i]) for i in others]
        lo = min(range(len(others)), key=lambda k: vals[k])
        hi = max(range(len(others)), key=lambda k: vals[k])
        if vals[hi] > 0 and vals[lo] < 0:
            return FacetEvidence(
                labels, H, -min(-vals[lo], vals[hi]), residual,
                f"points {others[lo]} and {others[hi]} on opposite sides (gap {float(min(-vals[lo], vals[hi])):.3g})",
            )
        if max(vals) > 0:
            H = Hyperplane(tuple(-c for c in H.normal), -H.offset)
            vals = [-v for v in vals]
        margin = -max(vals)
    else:
        margin = None
    return FacetEvidence(labels, H, margin, residual)


def certify_realization(config: PointConfiguration, claimed, eps: float = EPS) -> HullCertificate:
    """Check that ``config`` realizes the face lattice ``claimed``.

    Certified means: each claimed facet spans a hyperplane containing its
    points (residual <= eps) with every other point strictly beneath
    (margin > eps), each claimed ridge lies in exactly two claimed facets, the
    facet-ridge graph is connected, and every point is a vertex (the
    normals of its facets span the ambient space).  With exact coordinates
    ``eps`` is replaced by zero and the certificate is a proof.
    """
    d = config.ambient_dim
    if claimed.n_vertices != len(config):
        raise GeometryError(f"lattice has {claimed.n_vertices} vertices, configuration has {len(config)} points")
    if claimed.dim != d:
        raise GeometryError(f"lattice dimension {claimed.dim} != ambient dimension {d}")
    tol = 0 if config.exact else eps
    facets = [tuple(sorted(F)) for F in claimed.facets()]
    evidence = [_facet_evidence(config, F, eps) for F in facets]

    def fail(reason):
        margins = [e.margin for e in evidence if e.margin is not None]
        return HullCertificate(evidence, min(margins) if margins else None, "failed", reason, config.exact)

    for e in evidence:
        if e.problem:
            return fail(f"facet {list(e.labels)}: {e.problem}")
        if e.residual > tol:
            return fail(f"facet {list(e.labels)}: on-plane residual {float(e.residual):.3g}")
        if e.margin is not None and e.margin <= tol:
            return fail(f"facet {list(e.labels)}: margin {float(e.margin):.3g} not positive")

    ridges = claimed.faces(d - 2) if d >= 2 else []
    fsets = [frozenset(F) for F in facets]
    adjacency: dict[int, set] = {i: set() for i in range(len(fsets))}
    for R in ridges:
        owners = [i for i, F in enumerate(fsets) if R <= F]
        if len(owners) != 2:
            return fail(f"ridge {sorted(R)} lies in {len(owners)} facets")
        a, b = owners
        adjacency[a].add(b)
        adjacency[b].add(a)
    seen = {0} if fsets else set()
    stack = list(seen)
    while stack:
        i = stack.pop()
        for j in adjacency[i] - seen:
            seen.add(j)
            stack.append(j)
    if len(seen) != len(fsets):
        return fail("facet-ridge graph is disconnected")

    for v in range(len(config)):
        normals = [evidence[i].hyperplane.normal for i, F in enumerate(fsets) if v in F]
        if not normals:
            return fail(f"point {v} is not on any claimed facet")
        if matrix_rank(normals, config.backend, eps) != d:
            return fail(f"point {v} is not a vertex (facet normals do not span)")

    margins = [e.margin for e in evidence if e.margin is not None]
    return HullCertificate(evidence, min(margins) if margins else None, "certified", None, config.exact)


def discover_facets(config: PointConfiguration, eps: float = 1e-7) -> list[frozenset]:
    """Candidate facet vertex sets of the convex hull (qhull, float).

    Only a proposal: feed the result through :func:`certify_realization`.
    """
    from scipy.spatial import ConvexHull

    X = config.array()
    hull = ConvexHull(X)
    scale = max(1.0, float(np.max(np.abs(X))))
    found: dict[frozenset, None] = {}
    for eq in hull.equations:
        n, b = eq[:-1], eq[-1]
        on = frozenset(int(i) for i in np.nonzero(np.abs(X @ n + b) <= eps * scale)[0])
        found.setdefault(on, None)
    return list(found)
