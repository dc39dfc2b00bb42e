"""Exact Gromov-Hausdorff distances and quotient spaces."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from covercraft.errors import ModelInvalidError, ResourceBudgetError
from covercraft.ghspace import (
    FiniteMetricSpace,
    gh_distance_exact,
    quotient_space,
    spaces_isometric,
)
from covercraft.models import cylinder, grid, honeycomb, swap_line


def circle_space(m, circumference=4, basepoint=None):
    rows = [[Fraction(circumference * min(abs(i - j), m - abs(i - j)), m)
             for j in range(m)] for i in range(m)]
    return FiniteMetricSpace.from_rows(rows, basepoint=basepoint)


def two_point(a):
    return FiniteMetricSpace.from_rows([[0, a], [a, 0]])


def oracle_gh(A, B):
    """Brute force: minimal distortion over unions of two function
    graphs, which realize the optimal correspondence."""
    ka, kb = len(A), len(B)
    best = None
    for f in itertools.product(range(kb), repeat=ka):
        for g in itertools.product(range(ka), repeat=kb):
            pairs = [(i, f[i]) for i in range(ka)] + [(g[j], j) for j in range(kb)]
            if A.basepoint is not None and B.basepoint is not None:
                pairs.append((A.basepoint, B.basepoint))
            dis = max(abs(A.d(p[0], q[0]) - B.d(p[1], q[1]))
                      for p in pairs for q in pairs)
            if best is None or dis < best:
                best = dis
    return best / 2


def test_matrix_validation():
    with pytest.raises(ModelInvalidError):
        FiniteMetricSpace.from_rows([[0, 1], [2, 0]])
    with pytest.raises(ModelInvalidError):
        FiniteMetricSpace.from_rows([[0, 5], [5, 0], [5, 5]])
    with pytest.raises(ModelInvalidError):
        FiniteMetricSpace.from_rows([[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_two_point_formula():
    assert gh_distance_exact(two_point(3), two_point(1)) == 1
    assert gh_distance_exact(two_point(Fraction(7, 2)), two_point(2)) == Fraction(3, 4)


def test_identity_and_points():
    A = circle_space(4)
    assert gh_distance_exact(A, A) == 0
    P = FiniteMetricSpace.from_rows([[0]])
    assert gh_distance_exact(P, FiniteMetricSpace.from_rows([[0]])) == 0


def test_point_against_space_is_half_diameter():
    P = FiniteMetricSpace.from_rows([[0]])
    A = circle_space(4)
    assert gh_distance_exact(P, A) == 1    # diameter 2, halved


def test_matches_brute_force_oracle():
    spaces = [
        two_point(1),
        two_point(3),
        FiniteMetricSpace.from_rows([[0, 1, 1], [1, 0, 1], [1, 1, 0]]),
        FiniteMetricSpace.from_rows([[0, 1, 2], [1, 0, 1], [2, 1, 0]]),
        circle_space(3),
    ]
    for A in spaces:
        for B in spaces:
            assert gh_distance_exact(A, B) == oracle_gh(A, B)


def test_pseudometric_properties():
    spaces = [two_point(1), two_point(2), circle_space(3), circle_space(4)]
    for A in spaces:
        for B in spaces:
            d1 = gh_distance_exact(A, B)
            assert d1 == gh_distance_exact(B, A)
            assert d1 >= 0
    for A in spaces:
        for B in spaces:
            for C in spaces:
                assert gh_distance_exact(A, C) <= \
                    gh_distance_exact(A, B) + gh_distance_exact(B, C)


def test_zero_iff_isometric_on_corpus():
    # all spaces here have <= 5 points
    spaces = [
        two_point(1),
        two_point(2),
        circle_space(3),
        circle_space(4),
        circle_space(5),
        FiniteMetricSpace.from_rows([[0, 1, 1], [1, 0, 1], [1, 1, 0]]),
    ]
    for A in spaces:
        for B in spaces:
            d = gh_distance_exact(A, B)
            iso = spaces_isometric(A, B)
            assert (d == 0) == iso


def test_pointed_variant_constrains_basepoints():
    # a 3-chain based at the end versus based in the middle
    chain = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    A = FiniteMetricSpace.from_rows(chain, basepoint=0)
    B = FiniteMetricSpace.from_rows(chain, basepoint=1)
    assert gh_distance_exact(A, B) > 0
    A2 = FiniteMetricSpace.from_rows(chain, basepoint=2)
    assert gh_distance_exact(A, A2) == 0    # end-to-end symmetry


def test_size_limit():
    big = circle_space(8)
    with pytest.raises(ResourceBudgetError):
        gh_distance_exact(big, big)
    assert gh_distance_exact(big, big, size_limit=16) == 0


@given(st.integers(1, 5), st.integers(1, 5))
def test_two_point_hypothesis(a, b):
    assert gh_distance_exact(two_point(a), two_point(b)) == Fraction(abs(a - b), 2)


# -- quotient spaces -----------------------------------------------------------


def test_quotient_grid_full_is_point():
    pg, act = grid()
    Q = quotient_space(pg, act, [(1, 0), (0, 1)])
    assert len(Q) == 1 and Q.basepoint == 0


def test_quotient_grid_two_by_two():
    pg, act = grid()
    Q = quotient_space(pg, act, [(2, 0), (0, 2)])
    assert len(Q) == 4
    assert max(max(row) for row in Q.matrix) == 2
    assert spaces_isometric(Q, circle_space(4, circumference=4, basepoint=0))


def test_quotient_cylinder_circle():
    pg, act = cylinder(4)
    Q = quotient_space(pg, act, [(0, 1)])
    assert len(Q) == 4
    assert spaces_isometric(Q, circle_space(4, basepoint=0))


def test_quotient_window_restriction():
    pg, act = grid()
    Q = quotient_space(pg, act, [(4, 0), (0, 4)], window_radius=1)
    # basepoint class plus its four neighbor classes
    assert len(Q) == 5
    assert Q.basepoint is not None


def test_quotient_unbounded_raises():
    pg, act = grid()
    with pytest.raises(ModelInvalidError):
        quotient_space(pg, act, [(1, 0)])


def test_quotient_swap_line():
    pg, act = swap_line()
    Q = quotient_space(pg, act, [(2,)])
    assert len(Q) == 2 and Q.d(0, 1) == Fraction(1, 2)


def test_refinement_family_nonincreasing():
    # circles of fixed circumference sampled at 2, 4, 8 points converge:
    # successive distances must not increase
    family = [circle_space(2), circle_space(4), circle_space(8)]
    gaps = [gh_distance_exact(family[i], family[i + 1], size_limit=16)
            for i in range(len(family) - 1)]
    assert all(g1 >= g2 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[0] == Fraction(1, 2) and gaps[1] == Fraction(1, 4)


def test_refinement_from_models():
    # quotient circles straight from cylinder models of growing size
    spaces = []
    for m in (2, 4, 8):
        pg, act = cylinder(m, circle_len=Fraction(4, m))
        spaces.append(quotient_space(pg, act, [(0, 1)]))
    gaps = [gh_distance_exact(spaces[i], spaces[i + 1], size_limit=16)
            for i in range(2)]
    assert gaps[0] >= gaps[1]
