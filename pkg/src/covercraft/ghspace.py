"""Exact Gromov-Hausdorff distance between tiny finite metric spaces,
and quotient-space extraction from periodic models.

The distance is half the minimal distortion over correspondences.  The
search is exact: candidate distortions form the finite set of pairwise
differences, and feasibility of a threshold is a covering-clique search
over the compatibility graph of vertex pairs.  Intended for spaces of at
most about seven points each.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ModelInvalidError, ResourceBudgetError
from .periodic import quotient_diameter


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Exact finite metric space: rational distance matrix, optional
    basepoint index."""

    matrix: tuple
    basepoint: int | None = None

    def __post_init__(self):
        m = self.matrix
        k = len(m)
        for i in range(k):
            if len(m[i]) != k:
                raise ModelInvalidError("distance matrix is not square")
            if m[i][i] != 0:
                raise ModelInvalidError("nonzero diagonal entry")
            for j in range(k):
                if m[i][j] != m[j][i]:
                    raise ModelInvalidError("distance matrix is not symmetric")
                if i != j and m[i][j] <= 0:
                    raise ModelInvalidError("off-diagonal distances must be positive")
        for i in range(k):
            for j in range(k):
                for l in range(k):
                    if m[i][j] > m[i][l] + m[l][j]:
                        raise ModelInvalidError("triangle inequality fails")
        if self.basepoint is not None and not (0 <= self.basepoint < k):
            raise ModelInvalidError("basepoint index out of range")

    @staticmethod
    def from_rows(rows, basepoint=None):
        return FiniteMetricSpace(
            tuple(tuple(Fraction(x) for x in row) for row in rows), basepoint)

    def __len__(self):
        return len(self.matrix)

    def d(self, i, j):
        return self.matrix[i][j]


def _feasible(A, B, delta, forced_pair):
    """Is there a correspondence covering both spaces whose pairs are
    pairwise delta-compatible (and containing forced_pair, if given)?"""
    ka, kb = len(A), len(B)
    pairs = [(i, j) for i in range(ka) for j in range(kb)]

    def compatible(p, q):
        return abs(A.d(p[0], q[0]) - B.d(p[1], q[1])) <= delta

    chosen = []

    def covered():
        return (len({p[0] for p in chosen}) == ka
                and len({p[1] for p in chosen}) == kb)

    def extend(start):
        if covered():
            return True
        # next uncovered left vertex, else next uncovered right vertex
        la = {p[0] for p in chosen}
        lb = {p[1] for p in chosen}
        if len(la) < ka:
            i = min(set(range(ka)) - la)
            cands = [(i, j) for j in range(kb)]
        else:
            j = min(set(range(kb)) - lb)
            cands = [(i, j) for i in range(ka)]
        for pq in cands:
            if all(compatible(pq, c) for c in chosen):
                chosen.append(pq)
                if extend(start):
                    return True
                chosen.pop()
        return False

    if forced_pair is not None:
        if not compatible(forced_pair, forced_pair):
            return False
        chosen.append(forced_pair)
    return extend(0)


def gh_distance_exact(A, B, size_limit=14):
    """Exact (pointed, when both carry basepoints) Gromov-Hausdorff
    distance: half the minimal correspondence distortion."""
    if len(A) + len(B) > size_limit:
        raise ResourceBudgetError(
            f"spaces too large for exact search: {len(A)} + {len(B)} > {size_limit}")
    forced = None
    if A.basepoint is not None and B.basepoint is not None:
        forced = (A.basepoint, B.basepoint)
    diffs = {Fraction(0)}
    for i in range(len(A)):
        for j in range(len(A)):
            for k in range(len(B)):
                for l in range(len(B)):
                    diffs.add(abs(A.d(i, j) - B.d(k, l)))
    candidates = sorted(diffs)
    lo, hi = 0, len(candidates) - 1
    if not _feasible(A, B, candidates[hi], forced):
        raise ModelInvalidError("no correspondence exists even at maximal distortion")
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(A, B, candidates[mid], forced):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo] / 2


def spaces_isometric(A, B):
    """Exact isometry test by permutation search (tiny spaces)."""
    if len(A) != len(B):
        return False
    from itertools import permutations
    k = len(A)
    for perm in permutations(range(k)):
        if A.basepoint is not None and B.basepoint is not None \
                and perm[A.basepoint] != B.basepoint:
            continue
        if all(A.d(i, j) == B.d(perm[i], perm[j])
               for i in range(k) for j in range(i + 1, k)):
            return True
    return False


def quotient_space(pg, action, subgroup_basis, window_radius=None, basepoint=None):
    """Vertex-level quotient metric space of the derived graph by the
    subgroup generated by `subgroup_basis`, based at the class of the
    basepoint.

    With `window_radius`, only classes within that distance of the
    basepoint class are kept (distances are still measured in the full
    quotient).  An unbounded quotient raises ModelInvalidError.
    """
    from .periodic import QuotientView

    view = QuotientView(pg, action, subgroup_basis)
    if not view.finite:
        raise ModelInvalidError("quotient has infinite diameter")
    p = basepoint if basepoint is not None else pg.basepoint()
    base_idx = view.locate(p)
    keep = list(range(view.class_count))
    if window_radius is not None:
        wr = Fraction(window_radius)
        from_base = view.distances_from(base_idx)
        keep = [i for i in keep if from_base[i] <= wr]
    rows = [[view.distances_from(i)[j] for j in keep] for i in keep]
    bp = keep.index(base_idx)
    return FiniteMetricSpace.from_rows(rows, basepoint=bp)
