"""Exact integer linear algebra: Smith normal form with unimodular
transforms, integer linear solving, kernels, and canonical reduction
modulo a sublattice.

Conventions
-----------
Matrices are lists of rows of Python ints.  Lattices are row lattices:
the set of integer combinations of a list of row vectors.  All
arithmetic is exact big-integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product


def eye(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    if not A:
        return []
    rows, inner, cols = len(A), len(B), len(B[0]) if B else 0
    Bt = list(zip(*B)) if B else []
    return [[sum(A[i][k] * Bt[j][k] for k in range(inner)) for j in range(cols)]
            for i in range(rows)]


def mat_vec(A, x):
    return tuple(sum(row[k] * x[k] for k in range(len(x))) for row in A)


def vec_mat(x, A):
    if not A:
        return ()
    cols = len(A[0])
    return tuple(sum(x[k] * A[k][j] for k in range(len(x))) for j in range(cols))


def is_identity(A):
    n = len(A)
    return all(A[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))


@dataclass
class SmithForm:
    """U @ A @ V == D with U, V unimodular and D diagonal, d1 | d2 | ...

    Uinv and Vinv are the exact inverses of U and V.
    """

    U: list
    D: list
    V: list
    Uinv: list
    Vinv: list

    def diagonal(self):
        m = len(self.D)
        n = len(self.D[0]) if m else 0
        return [self.D[i][i] for i in range(min(m, n))]


def smith_with_transforms(A):
    """Smith normal form of an integer matrix.

    Pivots are chosen by minimal nonzero absolute value, ties broken in
    row-major scan order, so the output is deterministic for a fixed
    input.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [[int(x) for x in row] for row in A]
    U, Ui = eye(m), eye(m)
    V, Vi = eye(n), eye(n)

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def col_swap(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def row_neg(i):
        D[i] = [-x for x in D[i]]
        U[i] = [-x for x in U[i]]
        for r in Ui:
            r[i] = -r[i]

    def row_add(i, j, c):
        # row i += c * row j
        D[i] = [a + c * b for a, b in zip(D[i], D[j])]
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
        for r in Ui:
            r[j] -= c * r[i]

    def col_add(j, i, c):
        # col j += c * col i
        for r in D:
            r[j] += c * r[i]
        for r in V:
            r[j] += c * r[i]
        Vi[i] = [a - c * b for a, b in zip(Vi[i], Vi[j])]

    k = 0
    limit = min(m, n)
    while k < limit:
        # minimal |entry| pivot in the trailing block, row-major ties
        pivot = None
        best = None
        for i in range(k, m):
            for j in range(k, n):
                v = D[i][j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != k:
            row_swap(k, pi)
        if pj != k:
            col_swap(k, pj)
        if D[k][k] < 0:
            row_neg(k)

        dirty = False
        for i in range(k + 1, m):
            if D[i][k]:
                q = D[i][k] // D[k][k]
                if q:
                    row_add(i, k, -q)
                if D[i][k]:
                    dirty = True
        for j in range(k + 1, n):
            if D[k][j]:
                q = D[k][j] // D[k][k]
                if q:
                    col_add(j, k, -q)
                if D[k][j]:
                    dirty = True
        if dirty:
            continue

        # enforce divisibility of the trailing block by the pivot
        offender = None
        d = D[k][k]
        for i in range(k + 1, m):
            for j in range(k + 1, n):
                if D[i][j] % d:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(k, offender, 1)
            continue
        k += 1

    return SmithForm(U=U, D=D, V=V, Uinv=Ui, Vinv=Vi)


def solve_from_smith(sf, b, n):
    """One solution x of A x = b given the precomputed Smith form of A."""
    m = len(sf.U)
    ub = mat_vec(sf.U, b)
    y = [0] * n
    diag = sf.diagonal()
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d:
            if ub[i] % d:
                return None
            y[i] = ub[i] // d
        elif ub[i]:
            return None
    return mat_vec(sf.V, y)


def solve_integer(A, b):
    """One integer solution x of A x = b (x a column vector), or None."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return tuple([0] * n)
    return solve_from_smith(smith_with_transforms(A), b, n)


def kernel_basis(A):
    """Basis of the integer kernel {x in Z^n : A x = 0}, as row vectors."""
    m = len(A)
    n = len(A[0]) if m else 0
    if m == 0:
        return [tuple(r) for r in eye(n)]
    sf = smith_with_transforms(A)
    diag = sf.diagonal()
    out = []
    for j in range(n):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            out.append(tuple(sf.V[i][j] for i in range(n)))
    return out


def lattice_basis(rows, n):
    """A canonical basis of the row lattice spanned by `rows` in Z^n."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return []
    sf = smith_with_transforms(rows)
    diag = sf.diagonal()
    return [tuple(d * x for x in sf.Vinv[i]) for i, d in enumerate(diag) if d]


def saturation_basis(rows, n):
    """Basis of the saturation {v : k v in L for some k > 0} of the row
    lattice L."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return []
    sf = smith_with_transforms(rows)
    diag = sf.diagonal()
    return [tuple(sf.Vinv[i]) for i, d in enumerate(diag) if d]


def complement_basis(rows, n):
    """Rows completing a basis of the saturation of L to a basis of Z^n."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return [tuple(r) for r in eye(n)]
    sf = smith_with_transforms(rows)
    diag = sf.diagonal()
    rank = sum(1 for d in diag if d)
    return [tuple(sf.Vinv[i]) for i in range(rank, n)]


class LatticeReducer:
    """Canonical representatives of Z^n modulo a row lattice.

    Built once from a generating set; `canon` then reduces any vector to
    the unique representative of its class, and `residues` enumerates
    all classes when the quotient is finite.
    """

    def __init__(self, rows, n):
        self.n = n
        rows = [list(r) for r in rows if any(r)]
        self._trivial = not rows
        if self._trivial:
            self.diag = [0] * n
            self.rank = 0
            return
        sf = smith_with_transforms(rows)
        self.V = sf.V
        self.Vi = sf.Vinv
        diag = [abs(d) for d in sf.diagonal()]
        self.diag = diag + [0] * (n - len(diag))
        self.rank = sum(1 for d in self.diag if d)

    def canon(self, v):
        if self._trivial:
            return tuple(v)
        w = list(vec_mat(v, self.V))
        for i, d in enumerate(self.diag):
            if d:
                w[i] %= d
        return vec_mat(w, self.Vi)

    def contains(self, v):
        return all(x == 0 for x in self.canon(v))

    def is_finite(self):
        return self.rank == self.n

    def index(self):
        if not self.is_finite():
            return None
        out = 1
        for d in self.diag:
            out *= d
        return out

    def residues(self):
        """All canonical class representatives (finite quotients only)."""
        if not self.is_finite():
            raise ValueError("quotient is infinite")
        if self._trivial and self.n > 0:
            raise ValueError("quotient is infinite")
        if self.n == 0:
            yield ()
            return
        for w in product(*[range(d) for d in self.diag]):
            yield vec_mat(w, self.Vi)


def solve_mod_lattice(A, b, mod_rows):
    """Solutions x of A x = b modulo the column span of `mod_rows`.

    Equations are A x + M u = b with M the matrix whose columns are the
    vectors in mod_rows.  Returns (particular x, basis of the x-part of
    the homogeneous solution lattice) or None when unsolvable.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    q = len(mod_rows)
    B = [list(A[i]) + [mod_rows[k][i] for k in range(q)] for i in range(m)]
    sol = solve_integer(B, b)
    if sol is None:
        return None
    hom = kernel_basis(B)
    return tuple(sol[:n]), [tuple(h[:n]) for h in hom]
