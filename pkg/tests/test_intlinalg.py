"""Exact integer linear algebra: reconstruction and structure checks."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from covercraft.intlinalg import (
    LatticeReducer,
    complement_basis,
    eye,
    kernel_basis,
    lattice_basis,
    mat_mul,
    mat_vec,
    saturation_basis,
    smith_with_transforms,
    solve_integer,
)

small_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-9, 9), min_size=n, max_size=n),
            min_size=m, max_size=m)))


def frac_det(A):
    n = len(A)
    M = [[Fraction(x) for x in row] for row in A]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] / M[col][col]
            M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return det


@given(small_matrices)
def test_smith_reconstruction(A):
    sf = smith_with_transforms(A)
    assert mat_mul(mat_mul(sf.U, A), sf.V) == sf.D
    assert is_diagonal(sf.D)
    assert abs(frac_det(sf.U)) == 1
    assert abs(frac_det(sf.V)) == 1
    assert is_identity(mat_mul(sf.U, sf.Uinv))
    assert is_identity(mat_mul(sf.V, sf.Vinv))
    diag = [abs(d) for d in sf.diagonal() if d]
    for a, b in zip(diag, diag[1:]):
        assert b % a == 0


def is_diagonal(D):
    return all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)


def is_identity(A):
    return all(A[i][j] == (1 if i == j else 0)
               for i in range(len(A)) for j in range(len(A)))


def test_smith_deterministic():
    A = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
    first = smith_with_transforms(A)
    second = smith_with_transforms(A)
    assert first.D == second.D and first.U == second.U and first.V == second.V


def test_smith_known_values():
    sf = smith_with_transforms([[2, 4], [6, 8]])
    assert [sf.D[0][0], sf.D[1][1]] == [2, 4]
    sf = smith_with_transforms(eye(2))
    assert sf.D == eye(2)
    sf = smith_with_transforms([[0, 0], [0, 0]])
    assert sf.D == [[0, 0], [0, 0]]


def test_smith_det_product():
    A = [[3, 1, 0], [1, -2, 7], [0, 5, 4]]
    sf = smith_with_transforms(A)
    prod = 1
    for d in sf.diagonal():
        prod *= d
    assert abs(prod) == abs(frac_det(A))


@given(small_matrices)
def test_kernel_members_annihilate(A):
    for k in kernel_basis(A):
        assert all(x == 0 for x in mat_vec(A, k))


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3),
                min_size=1, max_size=3),
       st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_solve_roundtrip(rows, coeffs):
    # build a solvable right-hand side, then verify the solution
    A = [[rows[j][i] for j in range(len(rows))] for i in range(3)]
    b = [sum(rows[j][i] * coeffs[j] for j in range(len(rows))) for i in range(3)]
    x = solve_integer(A, b)
    assert x is not None
    assert list(mat_vec(A, x)) == b


def test_solve_unsolvable():
    assert solve_integer([[2]], [1]) is None
    assert solve_integer([[2, 0], [0, 2]], [1, 2]) is None


def test_lattice_basis_membership():
    basis = lattice_basis([(2, 0), (0, 3), (2, 3)], 2)
    red = LatticeReducer(basis, 2)
    assert red.contains((2, 0)) and red.contains((0, 3)) and red.contains((2, 3))
    assert not red.contains((1, 0))
    assert red.index() == 6


def test_reducer_canon_is_class_invariant():
    red = LatticeReducer([(2, 0), (0, 4)], 2)
    assert red.canon((5, 7)) == red.canon((1, 3)) == red.canon((3, -1))
    assert red.canon((0, 0)) == (0, 0)
    assert len(list(red.residues())) == 8


def test_reducer_infinite_quotient():
    red = LatticeReducer([(2, 4)], 2)
    assert not red.is_finite()
    assert red.index() is None
    with pytest.raises(ValueError):
        list(red.residues())
    # still canonicalizes consistently
    assert red.canon((3, 6)) == red.canon((1, 2))


def test_saturation_and_complement():
    sat = saturation_basis([(2, 4)], 2)
    assert LatticeReducer(sat, 2).contains((1, 2))
    comp = complement_basis([(2, 4)], 2)
    assert len(comp) == 1
    full = lattice_basis(list(sat) + list(comp), 2)
    assert LatticeReducer(full, 2).index() == 1
