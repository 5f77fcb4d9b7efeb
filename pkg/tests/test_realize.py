import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epolytopes.geometry import FLOAT, PointConfiguration, certify_realization, project
from epolytopes.lattice import e_fvector_formula, polygon_lattice, product_lattice
from epolytopes.realize import (
    InfeasibleConstruction,
    assemble_e_product,
    build_cube_factor,
    build_emn,
    build_polygon_d,
    build_regular_d,
    build_simplex_factor,
    check_condition_b,
    check_vertex_preserving,
    circumscribe_e_triangle,
    e33_from_ratios,
    next_vertex_x,
    ratio_matrix,
    regular_pair,
    regular_pair_feasible,
    solve_triangle_ratio_system,
    split_e_product,
    top_apex_x,
    top_vertex_height,
)
from epolytopes.gallery import fixed_gallery


def line_hit(s, p, a, b):
    """Parameter t with s + t (p - s) on the line through a and b (independent oracle)."""
    s, p, a, b = map(np.asarray, (s, p, a, b))
    M = np.column_stack([p - s, a - b])
    t, _ = np.linalg.solve(M, a - s)
    return t


ratios = st.floats(0.01, 0.66)


@given(st.floats(0, 20), ratios)
def test_secant_ratio(a, r):
    c = next_vertex_x(a, r)
    p = ((a + c) / 2, a * c)  # tangent intersection
    t = line_hit((0, 1), p, (a, a * a), (c, c * c))
    assert abs(t - r) < 1e-9


# at a = 1, r = 1/2 the top vertex is (0, 1) = s itself, so start just above 1
@given(st.floats(1.001, 20), ratios)
def test_top_edge_ratio(a, r):
    top = top_vertex_height(a, r)
    pbar = (top_apex_x(a, r), top)
    t = line_hit((0, 1), pbar, (a, a * a), (0, top))
    assert abs(t - r) < 1e-9


@given(st.floats(0, 20), ratios)
def test_next_vertex_leaves_unit_interval(a, r):
    assert next_vertex_x(a, r) > 1


@given(st.floats(1.0001, 20), ratios)
def test_top_above_parabola(a, r):
    assert top_vertex_height(a, r) > a * a


@given(st.floats(1.0001, 20), ratios)
def test_top_apex_on_tangent(a, r):
    assert abs(top_vertex_height(a, r) - (2 * a * top_apex_x(a, r) - a * a)) < 1e-9 * max(1, a * a)


def test_d_4_half_coordinates():
    D = build_polygon_d(4, 0.5)
    want = [(0, 0), (math.sqrt(2), 2), (0, 4), (-math.sqrt(2), 2)]
    assert np.allclose(D.polygon.points, want)
    assert math.isclose(top_apex_x(math.sqrt(2), 0.5), 2.1213203435596424)
    assert D.s == (0.0, 1.0)


@pytest.mark.parametrize("m", range(4, 11))
@pytest.mark.parametrize("r", [0.1, 0.35, 0.5, 0.6, 0.66])
def test_d_polygon_invariants(m, r):
    f = build_polygon_d(m, r).as_factor()
    ok, why = check_vertex_preserving(f)
    assert ok, why
    assert max(abs(x - r) for x in f.measured_ratios()) < 1e-9


def test_d_polygon_range_errors():
    with pytest.raises(ValueError):
        build_polygon_d(5, 0.7)
    with pytest.raises(ValueError):
        build_polygon_d(2, 0.5)


def test_regular_d_examples():
    D = build_regular_d(4, 0.5)
    # vertices at edge midpoints of the E-square
    A = np.array(D.e_polygon.points)
    mids = (A + np.roll(A, 1, axis=0)) / 2
    assert np.allclose(D.polygon.points, mids)
    build_regular_d(3, 0.26)
    with pytest.raises(InfeasibleConstruction):
        build_regular_d(5, 0.5)


@pytest.mark.parametrize("m", [3, 5, 8])
@pytest.mark.parametrize("f", [0.9, 0.95])
def test_regular_d_ratio(m, f):
    fac = build_regular_d(m, f).as_factor()
    assert check_vertex_preserving(fac)[0]
    assert max(abs(x - f) for x in fac.measured_ratios()) < 1e-9


def test_regular_pairs():
    D0, D1 = regular_pair(3, 6)
    assert math.isclose(D0.r, 0.25) and math.isclose(D1.r, 0.75)
    D0, D1 = regular_pair(4, 4)
    assert math.isclose(D0.r, 0.5)
    assert not regular_pair_feasible(5, 5)
    with pytest.raises(InfeasibleConstruction):
        regular_pair(5, 5)
    with pytest.raises(InfeasibleConstruction):
        regular_pair(3, 4, 0.9)


def test_cube_factors():
    c3 = build_cube_factor(3)
    assert len(c3.body) == 8 and len(c3.apexes) == 6
    assert set(c3.measured_ratios()) == {Fraction(1, 2)}
    c1 = build_cube_factor(1)
    assert c1.apexes.points == ((-2,), (2,))
    c4 = build_cube_factor(4)
    cfg, L = c4.e_realization()
    assert certify_realization(cfg, L).certified


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("r", [0.5, 0.6, 0.9])
def test_simplex_factor(d, r):
    f = build_simplex_factor(d, r)
    ok, why = check_vertex_preserving(f)
    assert ok, why
    assert max(abs(x - r) for x in f.measured_ratios()) < 1e-9


def test_simplex_base_case_is_regular_triangle():
    f = build_simplex_factor(2, 0.5)
    P, A = np.array(f.body.points), np.array(f.apexes.points)
    sides = {round(float(np.linalg.norm(P[i] - P[j])), 9) for i in range(3) for j in range(i)}
    assert len(sides) == 1
    apex_sides = {round(float(np.linalg.norm(A[i] - A[j])), 9) for i in range(3) for j in range(i)}
    assert len(apex_sides) == 1
    with pytest.raises(ValueError):
        build_simplex_factor(3, 0.4)


def test_condition_b_examples():
    assert check_condition_b(build_cube_factor(3), build_cube_factor(3)).passed
    a = build_polygon_d(4, 0.6).as_factor()
    assert check_condition_b(a, build_polygon_d(5, 0.4).as_factor()).passed
    rep = check_condition_b(a, build_polygon_d(5, 0.5).as_factor())
    assert not rep.passed and abs(rep.max_gap - 0.1) < 1e-9
    with pytest.raises(InfeasibleConstruction):
        assemble_e_product(a, build_polygon_d(5, 0.5).as_factor())


def test_assembly_examples():
    E = build_emn(4, 4, method="regular")
    assert E.certificate.certified and E.lattice.f_vector() == (24, 96, 96, 24)
    E = assemble_e_product(build_polygon_d(5, 0.5).as_factor(), build_polygon_d(7, 0.5).as_factor())
    assert E.certificate.certified and E.lattice.f_vector() == (47, 210, 210, 47)
    s2, c3 = build_simplex_factor(2, 0.5), build_cube_factor(3)
    E = assemble_e_product(s2, c3)
    P = product_lattice(s2.lattice, c3.lattice)
    assert E.certificate.certified
    assert E.lattice.f_vector() == e_fvector_formula(P.f_vector(), P.flag_vector())


@pytest.mark.parametrize("m, n", [(3, 5), (4, 6), (6, 6)])
def test_projection_is_e_polygon(m, n):
    from scipy.spatial import ConvexHull

    D0, D1 = build_polygon_d(m, 0.5), build_polygon_d(n, 0.5)
    E = build_emn(m, n)
    for coords, D in ((range(0, 2), D0), (range(2, 4), D1)):
        X = project(E.config, coords).array()
        A = np.array(D.e_polygon.points)
        # every projected point is inside the factor's E-polygon, and its apexes are all hit
        H = ConvexHull(A)
        assert len(H.vertices) == D.m
        assert (X @ H.equations[:, :2].T + H.equations[:, 2]).max() < 1e-9
        assert all(np.min(np.linalg.norm(X - a, axis=1)) < 1e-12 for a in A)


def test_vertex_and_facet_counts_of_assembly():
    E = build_emn(3, 7)
    assert len(E.config) == 3 * 7 + 3 + 7
    # one facet per ridge of the product: mn edge x edge, m + n vertex x polygon
    assert len(E.lattice.facets()) == 3 * 7 + 3 + 7


# --------------------------------------------------------------------------
# the triangle system


def table_factors():
    return split_e_product(fixed_gallery("feasible_e33"), 2, 3, 3, polygon_lattice(3), polygon_lattice(3))


def test_table_ratios_reproduce_points(unit_triangle):
    f0, f1 = table_factors()
    R = ratio_matrix(f0, f1)
    sol = solve_triangle_ratio_system(f0.body, f1.body, R)
    assert sol.feasible
    assert sol.w == f0.beta and sol.w_prime == f1.beta
    assert (Fraction(819, 1387), Fraction(364, 1387)) in sol.w
    E0 = circumscribe_e_triangle(f0.body, sol.delta, "plus")
    E1 = circumscribe_e_triangle(f1.body, sol.delta_prime, "plus")
    assert E0.points == f0.apexes.points and E1.points == f1.apexes.points


def test_equal_ratios_are_degenerate(unit_triangle):
    R = [[Fraction(1, 2)] * 3 for _ in range(3)]
    assert solve_triangle_ratio_system(unit_triangle, unit_triangle, R).status == "degenerate"


def test_extreme_ratio_status_is_consistent(unit_triangle):
    R = [[0.5] * 3 for _ in range(3)]
    R[1][2] = 0.999
    tri = unit_triangle.as_float()
    sol = solve_triangle_ratio_system(tri, tri, R)
    if sol.status == "degenerate":
        return
    positive = all(d > 0 for d in sol.delta + sol.delta_prime)
    assert sol.feasible == (positive and sol.witness is None)
    if sol.status == "infeasible":
        assert sol.witness


def test_circumscribe_equilateral_branches_are_mirror_images():
    h = math.sqrt(3) / 2
    tri = PointConfiguration(((1.0, 0.0), (-0.5, h), (-0.5, -h)), FLOAT)
    a = np.array(circumscribe_e_triangle(tri, (0.3, 0.3, 0.3), "plus").points)
    b = np.array(circumscribe_e_triangle(tri, (0.3, 0.3, 0.3), "minus").points)
    ra = sorted(np.round(np.linalg.norm(a, axis=1), 9))
    rb = sorted(np.round(np.linalg.norm(b, axis=1), 9))
    assert ra == rb and not np.allclose(a, b)
    # mirror in the x-axis maps one solution set onto the other
    mirrored = {tuple(np.round(p * [1, -1], 9)) for p in a}
    assert mirrored == {tuple(np.round(p, 9)) for p in b}
    with pytest.raises(Exception, match="too large"):
        circumscribe_e_triangle(tri, (100, 100, 100))


def perturbed_table_ratios(noise):
    f0, f1 = table_factors()
    R = ratio_matrix(f0, f1)
    return [[float(R[x][y]) + noise[3 * x + y] for y in range(3)] for x in range(3)]


@given(st.lists(st.floats(-0.02, 0.02), min_size=9, max_size=9))
@settings(max_examples=25)
def test_e33_reproduces_ratios(noise):
    R = perturbed_table_ratios(noise)
    tri = PointConfiguration(((1.0, 0.0), (0.0, 0.0), (0.0, 1.0)), FLOAT)
    E = e33_from_ratios(tri, tri, R)
    assert E.certificate.certified
    f0, f1 = split_e_product(E.config, 2, 3, 3, polygon_lattice(3), polygon_lattice(3))
    got = ratio_matrix(f0, f1)
    assert max(abs(got[x][y] - R[x][y]) for x in range(3) for y in range(3)) < 1e-9
    assert check_condition_b(f0, f1).passed


def test_identical_triangles_symmetric_ratios(unit_triangle):
    f0, f1 = table_factors()
    R = ratio_matrix(f0, f1)
    E = e33_from_ratios(unit_triangle, unit_triangle, R)
    assert E.config.exact and E.certificate.certified
