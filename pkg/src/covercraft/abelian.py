"""Exact integer-lattice algebra: word sets, sumsets, Smith normal form,
and abelian groups presented by partial multiplication tables.

A presented group is built from a finite generator set (integer vectors
labeling group elements) and the relation a + b = c whenever the
supplied multiplication oracle says so.  The group is computed as the
cokernel of the relation matrix: generators with a unit coefficient are
eliminated Tietze-style, and the small residual matrix goes through
Smith normal form.  Elements are represented in the resulting normal
coordinates, where equality, addition and torsion are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .errors import ModelInvalidError
from .intlinalg import (
    LatticeReducer,
    kernel_basis,
    lattice_basis,
    mat_mul,
    smith_with_transforms,
    solve_integer,
    vec_mat,
)


def _sort_key(t):
    return (sum(abs(x) for x in t), t)


@dataclass(frozen=True)
class WordSet:
    """A finite set of integer vectors in Z^rank."""

    rank: int
    elements: frozenset

    def __post_init__(self):
        for t in self.elements:
            if len(t) != self.rank:
                raise ModelInvalidError(f"element {t} has wrong rank")

    @staticmethod
    def from_iter(rank, elems):
        return WordSet(rank, frozenset(tuple(int(x) for x in t) for t in elems))

    @staticmethod
    def l1_ball(rank, radius):
        """All integer vectors with l1 norm <= radius."""
        out = []

        def rec(prefix, left):
            if len(prefix) == rank - 1:
                for x in range(-left, left + 1):
                    out.append(tuple(prefix) + (x,))
                return
            for x in range(-left, left + 1):
                rec(prefix + [x], left - abs(x))

        if rank == 0:
            return WordSet(0, frozenset({()}))
        rec([], int(radius))
        return WordSet(rank, frozenset(out))

    def is_symmetric(self):
        zero = (0,) * self.rank
        if zero not in self.elements:
            return False
        return all(tuple(-x for x in t) in self.elements for t in self.elements)

    def sorted_elements(self):
        return sorted(self.elements, key=_sort_key)

    def __contains__(self, t):
        return tuple(t) in self.elements

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.sorted_elements())


def sumset_power(S, M):
    """The M-fold sumset S + S + ... + S (M >= 1)."""
    if M < 1:
        raise ValueError("sumset power needs M >= 1")
    cur = set(S.elements)
    base = S.elements
    for _ in range(M - 1):
        cur = {tuple(a + b for a, b in zip(s, t)) for s in cur for t in base}
    return WordSet(S.rank, frozenset(cur))


def defining_exponent(length):
    """floor((length + 2) / 3) for a maximal relator length >= 1."""
    length = int(length)
    if length < 1:
        raise ValueError("relator length must be >= 1")
    return (length + 2) // 3


def smith_normal_form(A):
    """(U, D, V) with U A V = D diagonal, d1 | d2 | ..., U and V unimodular.

    Deterministic: pivots by minimal nonzero absolute value with
    row-major tie-breaking.
    """
    sf = smith_with_transforms(A)
    return sf.U, sf.D, sf.V


class PresentedAbelianGroup:
    """Abelian group generated by labeled vectors with table relations.

    Attributes of interest:

    - ``generator_index``: the generators in canonical order
    - ``relation_rows``: the table relations as (ia, ib, ic) index triples
    - ``free_rank`` / ``torsion``: the isomorphism type
    - ``project(elem)``: the induced labeling map into Z^rank (defined up
      to the labeling kernel when the table wraps)
    """

    def __init__(self, generator_index, relation_rows, labeling_kernel_rows=()):
        self.generator_index = list(generator_index)
        self.rank = len(self.generator_index[0]) if self.generator_index else 0
        self.relation_rows = list(relation_rows)
        self.labeling_kernel = [tuple(r) for r in labeling_kernel_rows]
        self._label_reducer = LatticeReducer(self.labeling_kernel, self.rank)
        self._build()

    # -- construction ----------------------------------------------------

    def _build(self):
        m = len(self.generator_index)
        solved = {}          # gen index -> dict {gen index: coeff}
        hard = []

        def resolve(row):
            row = dict(row)
            while True:
                hit = [g for g in row if g in solved]
                if not hit:
                    break
                for g in hit:
                    c = row.pop(g)
                    for h, ch in solved[g].items():
                        row[h] = row.get(h, 0) + c * ch
                row = {g: c for g, c in row.items() if c}
            return row

        sparse_rows = []
        for ia, ib, ic in self.relation_rows:
            row = {}
            for g, s in ((ia, 1), (ib, 1), (ic, -1)):
                row[g] = row.get(g, 0) + s
            row = {g: c for g, c in row.items() if c}
            if row:
                sparse_rows.append(row)

        for row in sparse_rows:
            row = resolve(row)
            if not row:
                continue
            units = [g for g, c in row.items() if abs(c) == 1]
            if not units:
                hard.append(row)
                continue
            pivot = max(units, key=lambda g: _sort_key(self.generator_index[g]))
            eps = row[pivot]
            solved[pivot] = {g: -eps * c for g, c in row.items() if g != pivot}

        base = [g for g in range(m) if g not in solved]
        self.base = base
        self._base_pos = {g: i for i, g in enumerate(base)}
        residual = []
        seen = set()
        for row in hard:
            row = resolve(row)
            if not row:
                continue
            vec = tuple(row.get(g, 0) for g in base)
            if vec not in seen and any(vec):
                seen.add(vec)
                residual.append(list(vec))
        self._n_solved = len(solved)

        b = len(base)
        if residual:
            sf = smith_with_transforms(residual)
            diag = [abs(d) for d in sf.diagonal()]
            self._V = sf.V
            self._Vi = sf.Vinv
            self._diag = diag + [0] * (b - len(diag))
        else:
            self._V = [[1 if i == j else 0 for j in range(b)] for i in range(b)]
            self._Vi = [r[:] for r in self._V]
            self._diag = [0] * b
        self.residual_rank = sum(1 for d in self._diag if d)
        self.relation_rank = self._n_solved + self.residual_rank
        self.free_rank = b - self.residual_rank
        self.torsion = tuple(d for d in self._diag if d > 1)

        # full resolution of every generator over the base
        self._expr = {}
        for g in range(m):
            self._expr[g] = resolve({g: 1})
        # labeling map on base generators
        self._phi_base = [list(self.generator_index[g]) for g in base]
        self._phi_normal = mat_mul(self._Vi, self._phi_base) if base else []

        # consistency: each relation must map into the labeling kernel
        for ia, ib, ic in self.relation_rows:
            a, bb, c = (self.generator_index[k] for k in (ia, ib, ic))
            img = tuple(x + y - z for x, y, z in zip(a, bb, c))
            if any(self._label_reducer.canon(img)):
                raise ModelInvalidError(
                    f"table relation {a} + {bb} = {c} does not hold in the target group")

    @property
    def iso_type(self):
        return (self.free_rank, self.torsion)

    # -- elements ---------------------------------------------------------

    def _reduce_w(self, w):
        w = list(w)
        for i, d in enumerate(self._diag):
            if d:
                w[i] %= d
        return tuple(w)

    def zero(self):
        return (0,) * len(self.base)

    def from_base_vector(self, x):
        return self._reduce_w(vec_mat(x, self._V))

    def element_from_word(self, word):
        """Normal form of sum of coeff * generator over {gen index: coeff}."""
        x = [0] * len(self.base)
        acc = {}
        for g, c in word.items():
            for h, ch in self._expr[g].items():
                acc[h] = acc.get(h, 0) + c * ch
        for h, c in acc.items():
            x[self._base_pos[h]] += c
        return self.from_base_vector(x)

    def generator_element(self, t):
        t = tuple(int(x) for x in t)
        try:
            g = self.generator_index.index(t)
        except ValueError:
            raise ModelInvalidError(f"{t} is not a generator") from None
        return self.element_from_word({g: 1})

    def add(self, u, v):
        return self._reduce_w(tuple(a + b for a, b in zip(u, v)))

    def neg(self, u):
        return self._reduce_w(tuple(-a for a in u))

    def scale(self, u, k):
        return self._reduce_w(tuple(k * a for a in u))

    def project(self, u):
        """Labeling image in Z^rank of a normal-form element.

        Exact when the labeling kernel is trivial; otherwise defined up
        to that kernel and returned as the canonical coset representative.
        """
        x = vec_mat(u, self._Vi) if self.base else ()
        raw = vec_mat(x, self._phi_base) if self.base else (0,) * self.rank
        return self._label_reducer.canon(raw)

    # -- kernel of the labeling map ----------------------------------------

    def projection_kernel(self):
        """(basis elements, free rank, torsion) of ker(project).

        The kernel of the map onto the labeled subgroup of
        Z^rank / labeling_kernel.
        """
        b = len(self.base)
        if b == 0:
            return [], 0, ()
        # x-part lattice of { x : x . phi_base in labeling kernel lattice }
        stacked = []
        q = len(self.labeling_kernel)
        for r in range(self.rank):
            stacked.append([self._phi_base[i][r] for i in range(b)]
                           + [self.labeling_kernel[k][r] for k in range(q)])
        kerxs = [k[:b] for k in kernel_basis(stacked)]
        K = lattice_basis(kerxs, b)
        # residual relation lattice in base coordinates
        rel = [[d * self._Vi[i][j] for j in range(b)]
               for i, d in enumerate(self._diag) if d]
        if not K:
            return [], 0, ()
        # iso type of K / rel: solve rel rows in K coordinates, then SNF
        Kt = [[K[j][i] for j in range(len(K))] for i in range(b)]
        coords = []
        for row in rel:
            sol = solve_integer(Kt, row)
            if sol is None:
                raise ModelInvalidError("relation lattice escapes the labeling kernel")
            coords.append(list(sol))
        if coords:
            sf = smith_with_transforms(coords)
            diag = [abs(d) for d in sf.diagonal()]
        else:
            diag = []
        diag = diag + [0] * (len(K) - len(diag))
        free = sum(1 for d in diag if d == 0)
        torsion = tuple(d for d in diag if d > 1)
        basis_elems = [self.from_base_vector(k) for k in K]
        basis_elems = [e for e in basis_elems if any(e)]
        return basis_elems, free, torsion

    def kernel_elements(self):
        """All elements of ker(project) when that kernel is finite."""
        b = len(self.base)
        if b == 0:
            return [self.zero()]
        stacked = []
        q = len(self.labeling_kernel)
        for r in range(self.rank):
            stacked.append([self._phi_base[i][r] for i in range(b)]
                           + [self.labeling_kernel[k][r] for k in range(q)])
        kerxs = [k[:b] for k in kernel_basis(stacked)]
        K = lattice_basis(kerxs, b)
        _, free, _ = self.projection_kernel()
        if free:
            raise ModelInvalidError("projection kernel is infinite")
        out = set()
        frontier = {self.zero()}
        gens = [self.from_base_vector(k) for k in K]
        while frontier:
            cur = frontier.pop()
            if cur in out:
                continue
            out.add(cur)
            for gel in gens:
                for nxt in (self.add(cur, gel), self.add(cur, self.neg(gel))):
                    if nxt not in out:
                        frontier.add(nxt)
            if len(out) > 100_000:
                raise ModelInvalidError("projection kernel enumeration exploded")
        return sorted(out)


def presented_group_from_table(T3, gamma_mult, labeling_kernel_rows=()):
    """Group generated by the elements of T3 with the relations
    a + b = c exactly when gamma_mult(a, b) == c.

    `gamma_mult` must be symmetric; asymmetric answers mean the table is
    inconsistent and raise ModelInvalidError.  `labeling_kernel_rows`
    describes the kernel of the labeling of generators by Z^rank vectors
    (empty when labels are exact).
    """
    gens = T3.sorted_elements()
    index = {t: i for i, t in enumerate(gens)}
    rows = []
    for a, b in combinations_with_replacement(gens, 2):
        c = gamma_mult(a, b)
        if c is None:
            if gamma_mult(b, a) is not None:
                raise ModelInvalidError(f"table inconsistent at {a}, {b}")
            continue
        c = tuple(int(x) for x in c)
        if a != b and gamma_mult(b, a) != c:
            raise ModelInvalidError(f"table inconsistent at {a}, {b}")
        if c not in index:
            raise ModelInvalidError(f"table product {c} is not a generator")
        rows.append((index[a], index[b], index[c]))
    group = PresentedAbelianGroup(gens, rows, labeling_kernel_rows)
    # the labeling must reproduce each generator
    for t in gens:
        img = group.project(group.generator_element(t))
        if img != group._label_reducer.canon(t):
            raise ModelInvalidError(f"labeling map does not fix generator {t}")
    return group


def lattice_addition_oracle(T3):
    """Multiplication table of Z^rank restricted to T3."""
    elems = T3.elements

    def mult(a, b):
        c = tuple(x + y for x, y in zip(a, b))
        return c if c in elems else None

    return mult
