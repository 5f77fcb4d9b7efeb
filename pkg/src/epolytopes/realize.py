"""Geometric realizations of E-polytopes of products.

A factor (:class:`EFactor`) is a realized polytope P together with one apex
beyond each facet (a vertex-preserving realization of E(P)) and the data
pairing each apex with a point inside the *other* factor.  Two compatible
factors are assembled into a realization of E(P0 x P1) by
:func:`assemble_e_product`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import (
    EPS,
    FLOAT,
    RATIONAL,
    GeometryError,
    HullCertificate,
    Hyperplane,
    PointConfiguration,
    certify_realization,
    solve_linear_system,
    matrix_rank,
    segment_exit,
    supporting_hyperplane,
)
from .lattice import (
    FaceLattice,
    cube_lattice,
    e_lattice,
    polygon_lattice,
    product_lattice,
    segment_lattice,
    simplex_lattice,
)


class InfeasibleConstruction(ValueError):
    """The requested parameters admit no realization of this construction."""


class CertificationError(ValueError):
    def __init__(self, message: str, certificate: HullCertificate | None = None):
        super().__init__(message)
        self.certificate = certificate


# --------------------------------------------------------------------------
# factors


@dataclass
class EFactor:
    """Polytope P, one apex per facet of P, and the pairing data for Condition (B).

    Constant pairing: ``s`` is an interior point of P and ``ratio`` the
    common inside fraction of the segments from ``s`` to the apexes; the
    partner factor maps all its apexes to ``s``.  General pairing: ``beta[i]``
    is the point inside the partner polytope paired with apex ``i``.
    """

    dim: int
    body: PointConfiguration
    lattice: FaceLattice
    apexes: PointConfiguration
    s: tuple | None = None
    ratio: object = None
    beta: tuple | None = None
    name: str = ""

    @property
    def constant_beta(self) -> bool:
        return self.beta is None

    @property
    def exact(self) -> bool:
        return self.body.exact and self.apexes.exact

    def facet_hyperplanes(self) -> list[Hyperplane]:
        out = []
        for F in self.lattice.facets():
            H = supporting_hyperplane(self.body, F)
            if H is None:
                raise GeometryError(f"facet {sorted(F)} of {self.name or 'factor'} is not supporting")
            out.append(H)
        return out

    def measured_ratios(self) -> list:
        """Inside fraction of each segment s -> apex (constant pairing only)."""
        if self.s is None:
            raise GeometryError("factor has no distinguished interior point")
        Hs = self.facet_hyperplanes()
        return [segment_exit(self.s, a, Hs)[0] for a in self.apexes.points]

    def e_realization(self) -> tuple[PointConfiguration, FaceLattice]:
        """Vertex-preserving E(P) as a configuration plus lattice.

        In dimension >= 3 the vertices are body then apexes; for polygons the
        old vertices sit on the new edges, so only the apexes are vertices.
        """
        if self.dim >= 3:
            return self.body.concat(self.apexes), e_lattice(self.lattice)
        if self.dim == 2:
            return self.apexes, e_lattice(self.lattice)
        return self.apexes, segment_lattice()


def check_vertex_preserving(factor: EFactor, eps: float = EPS) -> tuple[bool, str]:
    """Each apex is beyond its own facet only, and E(P) is realized as claimed."""
    tol = 0 if factor.exact else eps
    Hs = factor.facet_hyperplanes()
    for i, a in enumerate(factor.apexes.points):
        for k, H in enumerate(Hs):
            val = H.value(a)
            if k == i and val <= tol:
                return False, f"apex {i} is not beyond its facet"
            if k != i and val >= -tol:
                return False, f"apex {i} is not beneath facet {k}"
    if factor.dim == 2:
        # each polygon vertex lies on the E-edge joining the apexes of its two edges
        facets = factor.lattice.facets()
        for v in range(len(factor.body)):
            owners = [k for k, F in enumerate(facets) if v in F]
            p = factor.body[v]
            a, b = factor.apexes[owners[0]], factor.apexes[owners[1]]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            scale = 1 if factor.exact else max(1.0, *(abs(float(c)) for c in (*a, *b, *p)))
            if abs(cross) > tol * scale:
                return False, f"polygon vertex {v} is off the E-edge ({float(cross):.3g})"
            t = [(p[k] - a[k]) for k in range(2)]
            u = [(b[k] - a[k]) for k in range(2)]
            dot = t[0] * u[0] + t[1] * u[1]
            if not (dot > 0 and dot < u[0] * u[0] + u[1] * u[1]):
                return False, f"polygon vertex {v} is not between its apexes"
    if factor.dim >= 2:
        cfg, L = factor.e_realization()
        cert = certify_realization(cfg, L, eps)
        if not cert.certified:
            return False, f"E-realization not certified: {cert.reason}"
    return True, "ok"


# --------------------------------------------------------------------------
# polygons on the parabola


def next_vertex_x(a: float, r: float) -> float:
    """x-coordinate of the next polygon vertex on y = x**2 after the one at x = a."""
    return (a + math.sqrt((1 - r) * (2 * r + r * a * a + a * a))) / r


def _top_root(a: float, r: float) -> float:
    disc = a * a + 2 * r * r * a * a - 2 * r * a * a - 2 * r + 2 * r * r
    if disc < 0:
        raise GeometryError(f"negative discriminant {disc} at a={a}, r={r}")
    return math.sqrt(disc)


def top_vertex_height(a: float, r: float) -> float:
    """Height of the closing vertex on the y-axis, given the last vertex at x = a."""
    return a * (a + _top_root(a, r) - r * a) / r


def top_apex_x(a: float, r: float) -> float:
    """x-coordinate where the horizontal top edge meets the tangent at (a, a**2)."""
    return (a + _top_root(a, r)) / (2 * r)


@dataclass
class DPolygonRealization:
    """An m-gon, its vertex-preserving E-polygon and an interior point s.

    Every segment from ``s`` to an apex crosses the polygon boundary at
    inside fraction ``r``.  Apex ``i`` lies beyond edge ``(i, i + 1)``.
    """

    m: int
    r: float
    polygon: PointConfiguration
    e_polygon: PointConfiguration
    s: tuple
    method: str = "parabola"

    def as_factor(self) -> EFactor:
        return EFactor(2, self.polygon, polygon_lattice(self.m), self.e_polygon, s=self.s, ratio=self.r,
                       name=f"D({self.m},{self.r})")


def build_polygon_d(m: int, r: float) -> DPolygonRealization:
    """D(m, r) with all but one vertex on the parabola y = x**2 and s = (0, 1).

    The E-polygon edges are the tangents at the parabola vertices plus the
    horizontal line through the top vertex.  Triangles are delegated to the
    regular construction.
    """
    if m == 3:
        return build_regular_d(3, r)
    if m < 3:
        raise ValueError("need m >= 3")
    if not 0 < r < 2 / 3:
        raise ValueError(f"ratio {r} outside (0, 2/3)")
    r = float(r)
    if m % 2 == 0:
        xs = [0.0]
    else:
        xs = [math.sqrt((1 - r) / (1 + r))]
    while 2 * len(xs) - (m % 2 == 0) < m - 1:
        xs.append(next_vertex_x(xs[-1], r))
    a = xs[-1]
    top = top_vertex_height(a, r)

    # counter-clockwise from the bottom: right branch up, top, left branch down
    right = [(x, x * x) for x in xs if x > 0 or m % 2]
    verts = []
    if m % 2 == 0:
        verts.append((0.0, 0.0))
    verts += right
    verts.append((0.0, top))
    verts += [(-x, y) for (x, y) in reversed(right)]
    assert len(verts) == m

    # apex i beyond edge (i, i+1): tangent intersections, or the top-edge corners
    apexes = []
    top_index = verts.index((0.0, top))
    ex = top_apex_x(a, r)
    for i in range(m):
        p, q = verts[i], verts[(i + 1) % m]
        if (i + 1) % m == top_index:
            apexes.append((ex, top))
        elif i == top_index:
            apexes.append((-ex, top))
        else:
            u, w = p[0], q[0]
            apexes.append(((u + w) / 2, u * w))
    return DPolygonRealization(
        m, r, PointConfiguration(tuple(verts), FLOAT), PointConfiguration(tuple(apexes), FLOAT), (0.0, 1.0)
    )


def min_inside_fraction(m: int) -> float:
    """Smallest inside fraction of a regular E-polygon construction (vertices at edge midpoints)."""
    return math.cos(math.pi / m) ** 2


def _regular_config(m: int, t: float):
    ang = [2 * math.pi * i / m for i in range(m)]
    A = [(math.cos(x), math.sin(x)) for x in ang]
    V = [tuple((1 - t) * A[(i - 1) % m][k] + t * A[i][k] for k in range(2)) for i in range(m)]
    return V, A


def _regular_fraction(m: int, t: float) -> float:
    V, A = _regular_config(m, t)
    H = _line_hyperplane(V[0], V[1], (0.0, 0.0))
    return segment_exit((0.0, 0.0), A[0], [H])[0]


def _line_hyperplane(p, q, inside) -> Hyperplane:
    n = (q[1] - p[1], p[0] - q[0])
    off = n[0] * p[0] + n[1] * p[1]
    if n[0] * inside[0] + n[1] * inside[1] > off:
        n, off = (-n[0], -n[1]), -off
    return Hyperplane(n, off)


def build_regular_d(m: int, inside_fraction: float, eps: float = EPS) -> DPolygonRealization:
    """Regular E-polygon of circumradius 1 with polygon vertices at equal edge parameter t.

    t in (0, 1/2] is found by bisection so that every apex segment from the
    centre has the requested inside fraction.
    """
    if m < 3:
        raise ValueError("need m >= 3")
    f = float(inside_fraction)
    lo_f = min_inside_fraction(m)
    if f < lo_f - eps or f >= 1:
        raise InfeasibleConstruction(
            f"inside fraction {f} outside [{lo_f:.6g}, 1) for a regular {m}-gon"
        )
    if f <= lo_f:
        t = 0.5
    else:
        lo, hi = 1e-15, 0.5  # fraction decreases from ~1 to lo_f on this interval
        for _ in range(200):
            mid = (lo + hi) / 2
            if _regular_fraction(m, mid) > f:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-16:
                break
        t = (lo + hi) / 2
    V, A = _regular_config(m, t)
    return DPolygonRealization(
        m, f, PointConfiguration(tuple(V), FLOAT), PointConfiguration(tuple(A), FLOAT), (0.0, 0.0), "regular"
    )


def regular_pair_interval(m: int, n: int) -> tuple[float, float]:
    """Feasible inside fractions for the m-gon factor: [cos^2(pi/m), sin^2(pi/n)]."""
    return min_inside_fraction(m), math.sin(math.pi / n) ** 2


def regular_pair_feasible(m: int, n: int, eps: float = EPS) -> bool:
    lo, hi = regular_pair_interval(m, n)
    return lo <= hi + eps


def regular_pair(m: int, n: int, inside_fraction_m: float | None = None, eps: float = EPS):
    """Regular factors with complementary inside fractions f and 1 - f."""
    if m < 3 or n < 3:
        raise ValueError("need m, n >= 3")
    lo, hi = regular_pair_interval(m, n)
    if lo > hi + eps:
        raise InfeasibleConstruction(f"no regular realization for (m, n) = ({m}, {n})")
    hi = max(hi, lo)
    if inside_fraction_m is None:
        f = (lo + hi) / 2
    else:
        f = float(inside_fraction_m)
        if not lo - eps <= f <= hi + eps:
            raise InfeasibleConstruction(f"fraction {f} outside the feasible interval [{lo:.6g}, {hi:.6g}]")
    return build_regular_d(m, f, eps), build_regular_d(n, 1 - f, eps)


# --------------------------------------------------------------------------
# cubes and simplices


def build_cube_factor(d: int) -> EFactor:
    """±1-cube with apexes ±2 e_i; constant pairing at the origin with ratio 1/2."""
    if d < 1:
        raise ValueError("need d >= 1")
    if d == 1:
        body = PointConfiguration(((Fraction(-1),), (Fraction(1),)), RATIONAL)
        apexes = PointConfiguration(((Fraction(-2),), (Fraction(2),)), RATIONAL)
        return EFactor(1, body, segment_lattice(), apexes, s=(Fraction(0),), ratio=Fraction(1, 2), name="cube(1)")
    body = tuple(tuple(Fraction(1 if (v >> k) & 1 else -1) for k in range(d)) for v in range(2**d))
    apexes = []
    for k in range(d):
        for sign in (-2, 2):
            apexes.append(tuple(Fraction(sign if j == k else 0) for j in range(d)))
    return EFactor(
        d,
        PointConfiguration(body, RATIONAL),
        cube_lattice(d),
        PointConfiguration(tuple(apexes), RATIONAL),
        s=tuple(Fraction(0) for _ in range(d)),
        ratio=Fraction(1, 2),
        name=f"cube({d})",
    )


def regular_simplex(d: int) -> np.ndarray:
    """Vertices of a regular d-simplex centred at the origin, circumradius 1."""
    E = np.eye(d + 1) - 1.0 / (d + 1)
    # orthonormal basis of the hyperplane sum(x) = 0
    q, _ = np.linalg.qr(E[:, :d])
    V = E @ q
    return V / np.linalg.norm(V[0])


def _triangle_apexes(V: np.ndarray, r: float) -> np.ndarray:
    """Apexes for a triangle (rows of V, any ambient dimension); apex j is opposite vertex j."""
    D = build_regular_d(3, r)
    P = np.array(D.polygon.points)
    A = np.array(D.e_polygon.points)
    B = np.column_stack([P[1] - P[0], P[2] - P[0]])
    T = np.column_stack([V[1] - V[0], V[2] - V[0]])
    M = T @ np.linalg.inv(B)
    img = (A - P[0]) @ M.T + V[0]
    # regular apex i is beyond edge (i, i+1), i.e. opposite vertex i+2
    return np.array([img[(j + 1) % 3] for j in range(3)])


def _simplex_apexes(V: np.ndarray, c: np.ndarray, r: float) -> np.ndarray:
    k = V.shape[0] - 1
    if k == 2:
        return _triangle_apexes(V, r)
    bF = V[1:].mean(axis=0)
    h = np.linalg.norm(bF - c)
    u = (bF - c) / h
    first = c + (bF - c) / r
    level = h * (1 - k * (1 - r) ** 2 / (r * (1 + r * k)))
    lam = (level + k * h) / ((k + 1) * h)
    Q = V[0] + lam * (V[1:] - V[0])
    r_sub = (level + k * h) / (level + k * h / r)
    sub = _simplex_apexes(Q, c + level * u, r_sub)
    return np.vstack([first[None, :], sub])


def build_simplex_factor(d: int, r: float) -> EFactor:
    """Regular simplex with apexes built dimension by dimension.

    The apex over facet 0 sits at the barycentre of the facet of the scaled
    simplex (1/r) * Delta; the other apexes lie in a hyperplane parallel to
    facet 0 and are obtained recursively for the cross-section there.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    if not 0.5 <= r < 1:
        raise ValueError(f"ratio {r} outside [1/2, 1)")
    V = regular_simplex(d)
    A = _simplex_apexes(V, np.zeros(d), float(r))
    return EFactor(
        d,
        PointConfiguration(tuple(map(tuple, V.tolist())), FLOAT),
        simplex_lattice(d),
        PointConfiguration(tuple(map(tuple, A.tolist())), FLOAT),
        s=tuple(0.0 for _ in range(d)),
        ratio=float(r),
        name=f"simplex({d},{r})",
    )


def polygon_factor(m: int, r: float, method: str = "d") -> EFactor:
    if method == "regular":
        return build_regular_d(m, r).as_factor()
    return build_polygon_d(m, r).as_factor()


# --------------------------------------------------------------------------
# condition (B) and assembly


@dataclass
class ConditionReport:
    passed: bool
    max_gap: float
    gaps: list
    problem: str | None = None


def _beta0(f0: EFactor, f1: EFactor, i: int):
    """Point inside P1 paired with apex i of factor 0."""
    return f1.s if f0.constant_beta else f0.beta[i]


def _beta1(f0: EFactor, f1: EFactor, j: int):
    """Point inside P0 paired with apex j of factor 1."""
    return f0.s if f1.constant_beta else f1.beta[j]


def check_condition_b(f0: EFactor, f1: EFactor, eps: float = EPS) -> ConditionReport:
    """Outside fraction in P0 of |v0, beta1(v1)| vs inside fraction in P1 of |v1, beta0(v0)|."""
    H0, H1 = f0.facet_hyperplanes(), f1.facet_hyperplanes()
    exact = f0.exact and f1.exact
    gaps = []
    worst = 0
    for i, v0 in enumerate(f0.apexes.points):
        row = []
        for j, v1 in enumerate(f1.apexes.points):
            try:
                in0, k0 = segment_exit(_beta1(f0, f1, j), v0, H0, eps)
                in1, k1 = segment_exit(_beta0(f0, f1, i), v1, H1, eps)
            except GeometryError as exc:
                return ConditionReport(False, float("inf"), gaps, f"apex pair ({i}, {j}): {exc}")
            if k0 != i or k1 != j:
                return ConditionReport(False, float("inf"), gaps, f"apex pair ({i}, {j}) crosses a foreign facet")
            gap = abs((1 - in0) - in1)
            row.append(gap)
            worst = max(worst, gap)
        gaps.append(row)
    passed = worst == 0 if exact else worst <= eps
    return ConditionReport(passed, float(worst), gaps)


class EProduct(NamedTuple):
    config: PointConfiguration
    lattice: FaceLattice
    certificate: HullCertificate | None


def _as_backend(points, exact: bool):
    if exact:
        return points
    return tuple(tuple(float(c) for c in p) for p in points)


def assemble_e_product(f0: EFactor, f1: EFactor, certify: bool = True, check: bool = True, eps: float = EPS) -> EProduct:
    """Point set S: body pairs, (apex0, beta0(apex0)), (beta1(apex1), apex1).

    Labels follow the lattice convention: body pair (p, q) is
    ``p * n1 + q``, then the apexes of factor 0, then those of factor 1.
    """
    if f0.dim + f1.dim < 3:
        raise ValueError("the product must have dimension >= 3")
    if check:
        rep = check_condition_b(f0, f1, eps)
        if not rep.passed:
            raise InfeasibleConstruction(
                f"condition (B) fails: {rep.problem or f'max gap {rep.max_gap:.3g}'}"
            )
    exact = f0.exact and f1.exact and all(
        isinstance(c, (int, Fraction)) for i in range(len(f0.apexes)) for c in _beta0(f0, f1, i)
    ) and all(isinstance(c, (int, Fraction)) for j in range(len(f1.apexes)) for c in _beta1(f0, f1, j))
    pts = []
    for p in f0.body.points:
        for q in f1.body.points:
            pts.append(tuple(p) + tuple(q))
    for i, v in enumerate(f0.apexes.points):
        pts.append(tuple(v) + tuple(_beta0(f0, f1, i)))
    for j, v in enumerate(f1.apexes.points):
        pts.append(tuple(_beta1(f0, f1, j)) + tuple(v))
    config = PointConfiguration(_as_backend(pts, exact), RATIONAL if exact else FLOAT)
    lattice = e_lattice(product_lattice(f0.lattice, f1.lattice))
    cert = None
    if certify:
        cert = certify_realization(config, lattice, eps)
        if not cert.certified:
            raise CertificationError(f"assembly of {f0.name} x {f1.name} not certified: {cert.reason}", cert)
    return EProduct(config, lattice, cert)


def build_emn(m: int, n: int, ratio: float | None = None, method: str = "d", certify: bool = True) -> EProduct:
    """E_mn from polygon factors with inside fractions ``ratio`` and ``1 - ratio``.

    Default ratio: 1/2 for the parabola polygons, the midpoint of the
    feasible interval for the regular ones.
    """
    if method == "regular":
        D0, D1 = regular_pair(m, n, ratio)
    elif method == "d":
        ratio = 0.5 if ratio is None else ratio
        try:
            D0, D1 = build_polygon_d(m, ratio), build_polygon_d(n, 1 - ratio)
        except ValueError as exc:
            raise InfeasibleConstruction(str(exc)) from exc
    else:
        raise ValueError(f"unknown method {method!r}")
    return assemble_e_product(D0.as_factor(), D1.as_factor(), certify=certify)


# --------------------------------------------------------------------------
# the triangle system for E_33


@dataclass
class TriangleSystemSolution:
    """Solution of the 18 ratio equations.

    ``w[x]`` lies in the plane of the second triangle and is paired with the
    apex over side x of the first; ``w_prime[y]`` lies in the first
    triangle's plane and is paired with the apex over side y of the second.
    ``delta[x]`` is the offset of the apex line over side x, measured in
    units of the (unnormalised) side normal.
    """

    status: str
    w: tuple = ()
    w_prime: tuple = ()
    delta: tuple = ()
    delta_prime: tuple = ()
    witness: str | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _triangle_sides(tri: PointConfiguration):
    """Outward (unnormalised) normal n_x and level lambda_x of side x = (t_x, t_{x+1})."""
    P = tri.points
    sides = []
    for x in range(3):
        p, q, o = P[x], P[(x + 1) % 3], P[(x + 2) % 3]
        n = (q[1] - p[1], p[0] - q[0])
        lam = n[0] * p[0] + n[1] * p[1]
        if n[0] * o[0] + n[1] * o[1] > lam:
            n, lam = (-n[0], -n[1]), -lam
        sides.append((n, lam))
    return sides


def _check_triangle(tri: PointConfiguration):
    if len(tri) != 3 or tri.ambient_dim != 2:
        raise GeometryError("need three points in the plane")
    P = tri.points
    area = (P[1][0] - P[0][0]) * (P[2][1] - P[0][1]) - (P[1][1] - P[0][1]) * (P[2][0] - P[0][0])
    if area == 0 or (not tri.exact and abs(area) < EPS):
        raise GeometryError("degenerate triangle")


def solve_triangle_ratio_system(tri: PointConfiguration, tri2: PointConfiguration, ratios, eps: float = EPS) -> TriangleSystemSolution:
    """Solve for the paired interior points and apex-line offsets given nine ratios.

    ``ratios[x][y]`` is the inside fraction, within the first triangle, of the
    segment from ``w_prime[y]`` to the apex over side x.
    """
    _check_triangle(tri)
    _check_triangle(tri2)
    flat = [ratios[x][y] for x in range(3) for y in range(3)]
    if any(not 0 < r < 1 for r in flat):
        raise ValueError("ratios must lie strictly between 0 and 1")
    exact = tri.exact and tri2.exact and all(isinstance(r, (int, Fraction)) for r in flat)
    backend = RATIONAL if exact else FLOAT
    conv = Fraction if exact else float
    S0, S1 = _triangle_sides(tri), _triangle_sides(tri2)
    # unknowns: w_0..w_2 (6), w'_0..w'_2 (6), delta_0..2, delta'_0..2
    A, b = [], []
    for x in range(3):
        for y in range(3):
            r = conv(ratios[x][y])
            R = r / (1 - r)
            n, lam = S0[x]
            row = [conv(0)] * 18
            row[6 + 2 * y], row[7 + 2 * y] = conv(n[0]), conv(n[1])
            row[12 + x] = R
            A.append(row)
            b.append(conv(lam))
            n2, lam2 = S1[y]
            row = [conv(0)] * 18
            row[2 * x], row[2 * x + 1] = conv(n2[0]), conv(n2[1])
            row[15 + y] = 1 / R
            A.append(row)
            b.append(conv(lam2))
    if matrix_rank(A, backend, eps) < 18:
        return TriangleSystemSolution("degenerate", witness="the 18x18 system is singular")
    sol = solve_linear_system(A, b, backend, eps)
    if sol is None:
        return TriangleSystemSolution("degenerate", witness="the 18x18 system is inconsistent")
    w = tuple((sol[2 * x], sol[2 * x + 1]) for x in range(3))
    wp = tuple((sol[6 + 2 * y], sol[7 + 2 * y]) for y in range(3))
    delta, delta_p = tuple(sol[12:15]), tuple(sol[15:18])
    out = TriangleSystemSolution("feasible", w, wp, delta, delta_p)
    tol = 0 if exact else eps
    for k, dl in enumerate(delta + delta_p):
        if dl <= tol:
            out.status, out.witness = "infeasible", f"offset {k} = {float(dl):.4g} is not positive"
            return out
    for name, pts, sides in (("w", w, S1), ("w'", wp, S0)):
        for k, p in enumerate(pts):
            for n, lam in sides:
                if n[0] * p[0] + n[1] * p[1] - lam >= -tol:
                    out.status, out.witness = "infeasible", f"{name}[{k}] is not interior"
                    return out
    return out


def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    a, b = math.isqrt(num), math.isqrt(den)
    if a * a == num and b * b == den:
        return Fraction(a, b)
    return None


def circumscribe_e_triangle(tri: PointConfiguration, deltas: Sequence, branch: str = "plus") -> PointConfiguration:
    """Apex triangle with apex x on the offset line over side x and edges through the vertices.

    Vertex t_x is shared by sides x-1 and x, so the E-edge from apex x-1 to
    apex x must pass through it.  Writing each apex by its position along its
    line, the three incidences chain into a Moebius map whose fixed points
    (a quadratic) give the two solutions.
    """
    _check_triangle(tri)
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    exact = tri.exact and all(isinstance(d, (int, Fraction)) for d in deltas)
    conv = Fraction if exact else float
    P = [tuple(conv(c) for c in p) for p in tri.points]
    sides = _triangle_sides(PointConfiguration(tuple(P), RATIONAL if exact else FLOAT))
    base, direc = [], []
    for x in range(3):
        n, _ = sides[x]
        dl = conv(deltas[x])
        if dl <= 0:
            raise ValueError("offsets must be positive")
        nn = n[0] * n[0] + n[1] * n[1]
        base.append((P[x][0] + dl * n[0] / nn, P[x][1] + dl * n[1] / nn))
        nxt = P[(x + 1) % 3]
        direc.append((nxt[0] - P[x][0], nxt[1] - P[x][1]))

    def cross(u, v):
        return u[0] * v[1] - u[1] * v[0]

    def mobius(x):
        # tau_x as a function of tau_{x-1}
        t = P[x]
        a = (base[x - 1][0] - t[0], base[x - 1][1] - t[1])
        bb = direc[x - 1]
        c = (base[x][0] - t[0], base[x][1] - t[1])
        e = direc[x]
        return ((-cross(bb, c), -cross(a, c)), (cross(bb, e), cross(a, e)))

    def mul(M, N):
        return tuple(tuple(sum(M[i][k] * N[k][j] for k in range(2)) for j in range(2)) for i in range(2))

    def apply(M, t):
        return (M[0][0] * t + M[0][1]) / (M[1][0] * t + M[1][1])

    M0, M1, M2 = mobius(0), mobius(1), mobius(2)
    M = mul(M0, mul(M2, M1))
    (p, q), (rr, ss) = M
    qa, qb, qc = rr, ss - p, -q
    if qa == 0:
        if qb == 0:
            raise GeometryError("degenerate circumscription")
        roots = [-qc / qb] * 2
    else:
        disc = qb * qb - 4 * qa * qc
        if disc < 0:
            raise GeometryError("no real solution: deltas too large")
        root = _exact_sqrt(disc) if exact else None
        if root is None:
            root = math.sqrt(float(disc))
            qa, qb = float(qa), float(qb)
            exact = False
        roots = [(-qb + root) / (2 * qa), (-qb - root) / (2 * qa)]
    tau0 = roots[0] if branch == "plus" else roots[1]
    try:
        tau1 = apply(M1, tau0)
        tau2 = apply(M2, tau1)
    except ZeroDivisionError as exc:
        raise GeometryError("degenerate circumscription") from exc
    taus = [tau0, tau1, tau2]
    apexes = []
    for x in range(3):
        pt = (base[x][0] + taus[x] * direc[x][0], base[x][1] + taus[x] * direc[x][1])
        apexes.append(pt if exact else tuple(float(c) for c in pt))
    return PointConfiguration(tuple(apexes), RATIONAL if exact else FLOAT)


def _triangle_factor(tri: PointConfiguration, apexes: PointConfiguration, beta, name: str) -> EFactor:
    exact = tri.exact and apexes.exact
    body = tri if exact else tri.as_float()
    return EFactor(2, body, polygon_lattice(3), apexes if exact else apexes.as_float(), beta=tuple(beta), name=name)


def e33_from_ratios(tri: PointConfiguration, tri2: PointConfiguration, ratios, branches=("plus", "plus"),
                    certify: bool = True, eps: float = EPS) -> EProduct:
    """Realization of E_33 with the nine prescribed ratios (general pairing)."""
    sol = solve_triangle_ratio_system(tri, tri2, ratios, eps)
    if not sol.feasible:
        raise InfeasibleConstruction(f"ratio system {sol.status}: {sol.witness}")
    try:
        E0 = circumscribe_e_triangle(tri, sol.delta, branches[0])
        E1 = circumscribe_e_triangle(tri2, sol.delta_prime, branches[1])
    except GeometryError as exc:
        raise InfeasibleConstruction(str(exc)) from exc
    exact = E0.exact and E1.exact and tri.exact and tri2.exact
    w = sol.w if exact else tuple(tuple(float(c) for c in p) for p in sol.w)
    wp = sol.w_prime if exact else tuple(tuple(float(c) for c in p) for p in sol.w_prime)
    if not exact:
        E0, E1 = E0.as_float(), E1.as_float()
    f0 = _triangle_factor(tri, E0, w, "E(tri)")
    f1 = _triangle_factor(tri2, E1, wp, "E(tri2)")
    for f in (f0, f1):
        ok, why = check_vertex_preserving(f, eps)
        if not ok:
            raise InfeasibleConstruction(f"circumscribed triangle not vertex-preserving: {why}")
    return assemble_e_product(f0, f1, certify=certify, eps=eps)


def ratio_matrix(f0: EFactor, f1: EFactor):
    """r[x][y]: inside fraction in P0 of the segment from beta1(apex1_y) to apex0_x."""
    H0 = f0.facet_hyperplanes()
    return [[segment_exit(_beta1(f0, f1, y), f0.apexes[x], H0)[0] for y in range(len(f1.apexes))]
            for x in range(len(f0.apexes))]


def split_e_product(config: PointConfiguration, d0: int, n0_body: int, n1_body: int,
                    L0: FaceLattice, L1: FaceLattice) -> tuple[EFactor, EFactor]:
    """Recover the two factors (with general pairing) from an assembled configuration.

    Apex rows may come in any order; each is matched to the unique facet it
    lies beyond.
    """
    pts = config.points
    body0 = tuple(pts[i * n1_body][:d0] for i in range(n0_body))
    body1 = tuple(pts[j][d0:] for j in range(n1_body))
    B0 = PointConfiguration(body0, config.backend)
    B1 = PointConfiguration(body1, config.backend)
    rest = pts[n0_body * n1_body:]
    nf0, nf1 = len(L0.facets()), len(L1.facets())
    f0 = EFactor(d0, B0, L0, B0, name="factor0")
    f1 = EFactor(config.ambient_dim - d0, B1, L1, B1, name="factor1")
    H0, H1 = f0.facet_hyperplanes(), f1.facet_hyperplanes()
    tol = 0 if config.exact else EPS
    ap0: list = [None] * nf0
    ap1: list = [None] * nf1
    for p in rest:
        a, b = p[:d0], p[d0:]
        beyond0 = [k for k, H in enumerate(H0) if H.value(a) > tol]
        beyond1 = [k for k, H in enumerate(H1) if H.value(b) > tol]
        if len(beyond0) == 1 and not beyond1:
            ap0[beyond0[0]] = (a, b)
        elif len(beyond1) == 1 and not beyond0:
            ap1[beyond1[0]] = (b, a)
        else:
            raise GeometryError(f"point {p} is not an apex over exactly one facet")
    if any(x is None for x in ap0 + ap1):
        raise GeometryError("some facet has no apex")
    f0 = EFactor(d0, B0, L0, PointConfiguration(tuple(a for a, _ in ap0), config.backend),
                 beta=tuple(b for _, b in ap0), name="factor0")
    f1 = EFactor(f1.dim, B1, L1, PointConfiguration(tuple(a for a, _ in ap1), config.backend),
                 beta=tuple(b for _, b in ap1), name="factor1")
    return f0, f1
