"""Discrete models of pointed proper geodesic spaces.

A space is the derived graph of a finite voltage graph: a finite quotient
graph whose edges carry lengths and voltages in an abelian group
Lambda = Z^k x Z_{m_1} x ... x Z_{m_f}.  The derived graph has vertex set
(quotient vertices) x Lambda and one edge (u, w) -- (v, w + voltage) per
quotient edge; it is proper (balls are finite) because the quotient is
finite and all lengths are positive.

Isometries commuting with the deck translations are pairs (vertex
permutation, per-vertex translation).  A LatticeAction is a homomorphism
from Z^N into such isometries; it need not be faithful.

All distances are exact: lengths are Fractions, and internally every
length is scaled by a common denominator so Dijkstra runs on integers.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .errors import ModelInvalidError, PerturbRadiusError, ResourceBudgetError
from .intlinalg import (
    LatticeReducer,
    kernel_basis,
    lattice_basis,
    smith_with_transforms,
    solve_from_smith,
    solve_integer,
)

DEFAULT_NODE_BUDGET = 2_000_000


class VoltageGroup:
    """Lambda = Z^free_rank x prod Z_m for the listed moduli."""

    def __init__(self, free_rank, moduli=()):
        if free_rank < 0 or any(m < 1 for m in moduli):
            raise ModelInvalidError("voltage group needs free_rank >= 0 and moduli >= 1")
        self.free_rank = free_rank
        self.moduli = tuple(int(m) for m in moduli)
        self.dim = free_rank + len(self.moduli)

    def zero(self):
        return (0,) * self.dim

    def canon(self, v):
        if len(v) != self.dim:
            raise ModelInvalidError(f"voltage has length {len(v)}, expected {self.dim}")
        head = tuple(int(x) for x in v[: self.free_rank])
        tail = tuple(int(x) % m for x, m in zip(v[self.free_rank:], self.moduli))
        return head + tail

    def add(self, a, b):
        return self.canon(tuple(x + y for x, y in zip(a, b)))

    def sub(self, a, b):
        return self.canon(tuple(x - y for x, y in zip(a, b)))

    def neg(self, a):
        return self.canon(tuple(-x for x in a))

    def moduli_rows(self):
        rows = []
        for i, m in enumerate(self.moduli):
            row = [0] * self.dim
            row[self.free_rank + i] = m
            rows.append(tuple(row))
        return rows

    def __eq__(self, other):
        return (isinstance(other, VoltageGroup)
                and self.free_rank == other.free_rank
                and self.moduli == other.moduli)

    def __repr__(self):
        return f"VoltageGroup(free_rank={self.free_rank}, moduli={self.moduli})"


@dataclass(frozen=True)
class Edge:
    tail: str
    head: str
    length: Fraction
    voltage: tuple


class PeriodicGraph:
    """Finite voltage graph whose derived graph is the modeled space."""

    def __init__(self, voltage_group, vertices, edges):
        self.group = voltage_group
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ModelInvalidError("duplicate vertex ids")
        if not self.vertices:
            raise ModelInvalidError("empty vertex set")
        vset = set(self.vertices)
        norm = []
        for tail, head, length, voltage in edges:
            length = Fraction(length)
            if length <= 0:
                raise ModelInvalidError(f"edge {tail}->{head} has non-positive length")
            if tail not in vset or head not in vset:
                raise ModelInvalidError(f"edge {tail}->{head} uses unknown vertex")
            norm.append(Edge(tail, head, length, voltage_group.canon(voltage)))
        if not norm:
            raise ModelInvalidError("no edges: quotient graph is disconnected")
        self.edges = tuple(norm)

        self.scale = lcm(*[e.length.denominator for e in self.edges])
        self.max_length = max(e.length for e in self.edges)
        # adjacency over derived vertices: (neighbor id, voltage delta, scaled length)
        adj = {v: [] for v in self.vertices}
        for e in self.edges:
            w = int(e.length * self.scale)
            adj[e.tail].append((e.head, e.voltage, w))
            if not (e.head == e.tail and all(x == 0 for x in e.voltage)):
                adj[e.head].append((e.tail, self.group.neg(e.voltage), w))
        self.adj = {v: tuple(sorted(lst)) for v, lst in adj.items()}

        self._check_quotient_connected()
        self._check_derived_connected()

    # -- validation ----------------------------------------------------

    def _check_quotient_connected(self):
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w, _, _ in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertices):
            raise ModelInvalidError("quotient graph is disconnected")

    def _check_derived_connected(self):
        # potentials along a spanning tree; fundamental cycle voltages
        # must generate the whole voltage group
        g = self.group
        pot = {self.vertices[0]: g.zero()}
        order = [self.vertices[0]]
        cycles = []
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w, dvol, _ in self.adj[v]:
                target = g.add(pot[v], dvol)
                if w not in pot:
                    pot[w] = target
                    order.append(w)
                    stack.append(w)
                else:
                    cycles.append(g.sub(target, pot[w]))
        red = LatticeReducer(cycles + g.moduli_rows(), g.dim)
        if red.index() != 1:
            raise ModelInvalidError(
                "derived graph is disconnected: cycle voltages do not generate the voltage group")

    # -- basic geometry ------------------------------------------------

    def basepoint(self, vertex=None):
        v = vertex if vertex is not None else self.vertices[0]
        return (v, self.group.zero())

    def neighbors(self, dv):
        v, off = dv
        g = self.group
        for w, dvol, wlen in self.adj[v]:
            yield (w, g.add(off, dvol)), wlen

    def _dijkstra(self, source, stop_scaled=None, target=None, budget=None):
        """Exact shortest paths from `source` over the derived graph.

        Expands while popped distance <= stop_scaled (when given) or
        until `target` is settled.  Returns dict of settled scaled
        distances.
        """
        budget = budget or DEFAULT_NODE_BUDGET
        dist = {}
        heap = [(0, source)]
        best = {source: 0}
        popped = 0
        while heap:
            d, dv = heapq.heappop(heap)
            if dv in dist:
                continue
            if stop_scaled is not None and d > stop_scaled:
                break
            dist[dv] = d
            popped += 1
            if popped > budget:
                raise ResourceBudgetError(
                    f"ball expansion exceeded node budget {budget}", partial=dist)
            if target is not None and dv == target:
                return dist
            for nd, wlen in self.neighbors(dv):
                nd2 = d + wlen
                old = best.get(nd)
                if nd not in dist and (old is None or nd2 < old):
                    best[nd] = nd2
                    heapq.heappush(heap, (nd2, nd))
        return dist

    def distance(self, x, y, budget=None):
        """d(x, y) as an exact Fraction."""
        dist = self._dijkstra(x, target=y, budget=budget)
        if y not in dist:
            raise ModelInvalidError("target not reached: derived graph disconnected?")
        return Fraction(dist[y], self.scale)

    def distance_spectrum(self, center, up_to, budget=None):
        """Sorted distinct distances d(center, .) with d <= up_to."""
        stop = Fraction(up_to) * self.scale
        dist = self._dijkstra(center, stop_scaled=stop, budget=budget)
        vals = sorted({d for d in dist.values() if d <= stop})
        return [Fraction(d, self.scale) for d in vals]


@dataclass
class Ball:
    """Open metric ball at vertex level: all derived vertices with
    d(. , center) < radius, with exact distances."""

    center: tuple
    radius: Fraction
    dist: dict
    boundary: tuple = ()      # vertices at distance exactly radius
    cut_edges: int = 0        # edges from the ball to its complement
    vertices: tuple = field(init=False)

    def __post_init__(self):
        self.vertices = tuple(sorted(self.dist))

    def __contains__(self, dv):
        return dv in self.dist

    def __len__(self):
        return len(self.dist)


def derived_ball(pg, center, r, budget=None):
    """The open ball {x : d(x, center) < r}, deterministic vertex order.

    Also records the vertices at distance exactly r, so callers that are
    sensitive to boundary ties can detect and perturb.
    """
    r = Fraction(r)
    if r <= 0:
        raise ModelInvalidError("ball radius must be positive")
    stop = r * pg.scale
    raw = pg._dijkstra(center, stop_scaled=stop, budget=budget)
    inside = {}
    boundary = []
    for dv, d in raw.items():
        if d < stop:
            inside[dv] = Fraction(d, pg.scale)
        elif d == stop:
            boundary.append(dv)
    ball = Ball(center=center, radius=r, dist=inside, boundary=tuple(sorted(boundary)))

    # induced-subgraph connectivity and cut edges
    cut = 0
    seen = {center}
    stack = [center]
    adj_in = {dv: [] for dv in inside}
    for dv in inside:
        for nd, _ in pg.neighbors(dv):
            if nd in inside:
                adj_in[dv].append(nd)
            else:
                cut += 1
    while stack:
        dv = stack.pop()
        for nd in adj_in[dv]:
            if nd not in seen:
                seen.add(nd)
                stack.append(nd)
    if len(seen) != len(inside):
        raise ModelInvalidError("ball induced subgraph is disconnected")
    ball.cut_edges = cut
    return ball


class Isometry:
    """Derived-graph isometry commuting with deck translations:
    (v, off) -> (perm[v], off + tau[v])."""

    __slots__ = ("perm", "tau", "_key")

    def __init__(self, perm, tau):
        self.perm = dict(perm)
        self.tau = dict(tau)
        self._key = (tuple(sorted(self.perm.items())),
                     tuple(sorted(self.tau.items())))

    def apply(self, pg, dv):
        v, off = dv
        return (self.perm[v], pg.group.add(off, self.tau[v]))

    def key(self):
        return self._key

    def __eq__(self, other):
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)


def _identity_isometry(pg):
    return Isometry({v: v for v in pg.vertices},
                    {v: pg.group.zero() for v in pg.vertices})


def _compose(pg, g, h):
    """g after h."""
    perm = {v: g.perm[h.perm[v]] for v in pg.vertices}
    tau = {v: pg.group.add(h.tau[v], g.tau[h.perm[v]]) for v in pg.vertices}
    return Isometry(perm, tau)


def _invert(pg, g):
    inv = {w: v for v, w in g.perm.items()}
    tau = {v: pg.group.neg(g.tau[inv[v]]) for v in pg.vertices}
    return Isometry(inv, tau)


class LatticeAction:
    """Homomorphism Z^N -> Iso(derived graph), given by generator images.

    Generator images must be genuine isometries (checked against the edge
    multiset) and must commute pairwise.  Faithfulness is not required.
    """

    def __init__(self, pg, generators):
        self.pg = pg
        self.rank = len(generators)
        if self.rank < 1:
            raise ModelInvalidError("action needs at least one generator")
        self.generators = []
        for perm, tau in generators:
            iso = Isometry({v: perm.get(v, v) for v in pg.vertices},
                           {v: pg.group.canon(tau.get(v, pg.group.zero()))
                            for v in pg.vertices})
            self._check_isometry(iso)
            self.generators.append(iso)
        self._check_commuting()
        self._inverses = [_invert(pg, g) for g in self.generators]
        self._cache = {}
        self._kernel = None
        self._sigma_trivial = None

    def _check_isometry(self, iso):
        pg = self.pg
        g = pg.group

        def norm_edge(t, h, length, vol):
            a = (t, h, length, vol)
            b = (h, t, length, g.neg(vol))
            return min(a, b)

        from collections import Counter
        original = Counter(norm_edge(e.tail, e.head, e.length, e.voltage)
                           for e in pg.edges)
        mapped = Counter()
        for e in pg.edges:
            vol = g.canon(tuple(x + y - z for x, y, z in
                                zip(e.voltage, iso.tau[e.head], iso.tau[e.tail])))
            mapped[norm_edge(iso.perm[e.tail], iso.perm[e.head], e.length, vol)] += 1
        if original != mapped:
            raise ModelInvalidError("generator image is not an isometry of the derived graph")

    def _check_commuting(self):
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                ab = _compose(self.pg, self.generators[i], self.generators[j])
                ba = _compose(self.pg, self.generators[j], self.generators[i])
                if ab != ba:
                    raise ModelInvalidError(f"generators {i} and {j} do not commute")

    # -- group elements as isometries ----------------------------------

    def isometry(self, gvec):
        gvec = tuple(int(x) for x in gvec)
        if len(gvec) != self.rank:
            raise ModelInvalidError(f"vector has length {len(gvec)}, expected {self.rank}")
        if gvec in self._cache:
            return self._cache[gvec]
        out = _identity_isometry(self.pg)
        for i, c in enumerate(gvec):
            base = self.generators[i] if c > 0 else self._inverses[i]
            k = abs(c)
            sq = base
            while k:
                if k & 1:
                    out = _compose(self.pg, out, sq)
                k >>= 1
                if k:
                    sq = _compose(self.pg, sq, sq)
        if len(self._cache) < 200_000:
            self._cache[gvec] = out
        return out

    def apply(self, gvec, dv):
        return self.isometry(gvec).apply(self.pg, dv)

    # -- structure of the homomorphism ---------------------------------

    def sigma_trivial_sublattice(self):
        """Basis of {g in Z^N : the permutation part of g is trivial}."""
        if self._sigma_trivial is not None:
            return self._sigma_trivial
        verts = self.pg.vertices
        orders = []
        for gen in self.generators:
            p = gen.perm
            o = 1
            cur = p
            while any(cur[v] != v for v in verts):
                cur = {v: p[cur[v]] for v in verts}
                o += 1
            orders.append(o)
        total = 1
        for o in orders:
            total *= o
        if total > 100_000:
            raise ResourceBudgetError("permutation residue enumeration too large")
        from itertools import product as iproduct
        rows = []
        for i, o in enumerate(orders):
            row = [0] * self.rank
            row[i] = o
            rows.append(tuple(row))
        for combo in iproduct(*[range(o) for o in orders]):
            if not any(combo):
                continue
            iso = self.isometry(combo)
            if all(iso.perm[v] == v for v in verts):
                rows.append(combo)
        self._sigma_trivial = lattice_basis(rows, self.rank)
        return self._sigma_trivial

    def _tau_matrix(self, basis, vertex):
        """Columns: voltage translation at `vertex` of each basis element."""
        cols = []
        for b in basis:
            iso = self.isometry(b)
            cols.append(iso.tau[vertex])
        dim = self.pg.group.dim
        return [[cols[j][i] for j in range(len(basis))] for i in range(dim)]

    def kernel(self):
        """Basis of {g in Z^N : g acts as the identity isometry}."""
        if self._kernel is not None:
            return self._kernel
        z0 = self.sigma_trivial_sublattice()
        if not z0:
            self._kernel = []
            return self._kernel
        g = self.pg.group
        # translations of all vertices, stacked; torsion coords taken mod m
        rows = []
        for v in self.pg.vertices:
            tm = self._tau_matrix(z0, v)
            rows.extend(tm)
        nrows = len(rows)
        mod_cols = []
        ri = 0
        for _ in self.pg.vertices:
            for i in range(g.dim):
                if i >= g.free_rank:
                    col = [0] * nrows
                    col[ri] = g.moduli[i - g.free_rank]
                    mod_cols.append(col)
                ri += 1
        stacked = [rows[i] + [c[i] for c in mod_cols] for i in range(nrows)]
        ker = kernel_basis(stacked)
        s = len(z0)
        vecs = []
        for k in ker:
            coeffs = k[:s]
            if not any(coeffs):
                continue
            vec = tuple(sum(c * z0[j][i] for j, c in enumerate(coeffs))
                        for i in range(self.rank))
            if any(vec):
                vecs.append(vec)
        self._kernel = lattice_basis(vecs, self.rank)
        return self._kernel

    def is_faithful(self):
        return not self.kernel()

    def kernel_reducer(self):
        return LatticeReducer(self.kernel(), self.rank)


def displacement(action, gvec, p, budget=None):
    """d(g . p, p), exact."""
    q = action.apply(gvec, p)
    if q == p:
        return Fraction(0)
    return action.pg.distance(p, q, budget=budget)


class OrbitSolver:
    """Answers 'which group elements move p to z' exactly.

    Elements are returned as canonical representatives modulo the kernel
    of the action, so each isometry in the image appears exactly once.
    Raises ModelInvalidError when the basepoint stabilizer is infinite
    (the action would not be discrete).
    """

    def __init__(self, action, p):
        self.action = action
        self.p = p
        pg = action.pg
        g = pg.group
        self.kred = action.kernel_reducer()
        z0 = action.sigma_trivial_sublattice()
        self.z0 = z0
        self.A_p = action._tau_matrix(z0, p[0]) if z0 else [[] for _ in range(g.dim)]
        self.mod_rows = []
        for i, m in enumerate(g.moduli):
            row = [0] * g.dim
            row[g.free_rank + i] = m
            self.mod_rows.append(tuple(row))
        # precompute the solve machinery once: the stacked system, its
        # Smith form, the homogeneous solutions and the stabilizer cosets
        s = len(z0)
        q = len(self.mod_rows)
        self._s = s
        self._stacked_cols = s + q
        stacked = [list(self.A_p[i]) + [self.mod_rows[k][i] for k in range(q)]
                   for i in range(g.dim)]
        self._sf = smith_with_transforms(stacked)
        hom = [k[:s] for k in kernel_basis(stacked)]
        self._stab = self._stab_residues(hom)
        # coset representatives of Z^N modulo the sigma-trivial sublattice
        red0 = LatticeReducer(z0, action.rank)
        if not red0.is_finite():
            raise ModelInvalidError("sigma-trivial sublattice is degenerate")
        self.cosets = []
        for rep in red0.residues():
            iso = action.isometry(rep)
            self.cosets.append((rep, iso))

    def _solve_in_z0(self, delta):
        """One h in the sigma-trivial sublattice with tau_h(p) = delta,
        as a coefficient vector, or None."""
        sol = solve_from_smith(self._sf, list(delta), self._stacked_cols)
        if sol is None:
            return None
        return sol[:self._s]

    def _coeff_to_vec(self, coeffs):
        return tuple(sum(c * self.z0[j][i] for j, c in enumerate(coeffs))
                     for i in range(self.action.rank))

    def _stab_residues(self, hom):
        """Residues of the p-fixing sublattice modulo the action kernel."""
        hom_vecs = [self._coeff_to_vec(h) for h in hom]
        hom_lat = lattice_basis(hom_vecs, self.action.rank)
        ker = self.action.kernel()
        if len(hom_lat) > len(ker):
            raise ModelInvalidError(
                "action has an infinite basepoint stabilizer (not discrete)")
        if not hom_lat:
            return [tuple([0] * self.action.rank)]
        # enumerate hom_lat / ker inside hom_lat coordinates
        coords = []
        for kv in ker:
            sol = solve_integer([[hom_lat[j][i] for j in range(len(hom_lat))]
                                 for i in range(self.action.rank)], list(kv))
            if sol is None:
                raise ModelInvalidError(
                    "action kernel escapes the basepoint stabilizer lattice")
            coords.append(sol)
        red = LatticeReducer(coords, len(hom_lat))
        if not red.is_finite():
            raise ModelInvalidError(
                "action has an infinite basepoint stabilizer (not discrete)")
        out = []
        for res in red.residues():
            out.append(tuple(sum(res[j] * hom_lat[j][i] for j in range(len(hom_lat)))
                             for i in range(self.action.rank)))
        return out

    def solve(self, z):
        """Canonical reps (mod action kernel) of {g : g . p = z}."""
        pg = self.action.pg
        g = pg.group
        found = set()
        for rep, iso in self.cosets:
            if iso.perm[self.p[0]] != z[0]:
                continue
            delta = g.sub(g.sub(z[1], self.p[1]), iso.tau[self.p[0]])
            part = self._solve_in_z0(delta)
            if part is None:
                continue
            base = self._coeff_to_vec(part)
            for sv in self._stab:
                vec = tuple(r + b + s for r, b, s in zip(rep, base, sv))
                found.add(self.kred.canon(vec))
        return sorted(found)

    def elements_moving_into(self, ball, strict_radius=None):
        """Canonical reps of all image isometries h with h . p inside the
        given ball; with strict_radius set, raises on an exact tie."""
        out = set()
        for dv in ball.vertices:
            for gvec in self.solve(dv):
                out.add(gvec)
        if strict_radius is not None and ball.boundary:
            for dv in ball.boundary:
                if self.solve(dv):
                    raise PerturbRadiusError(
                        f"orbit point at distance exactly {strict_radius}: perturb the radius",
                        attained=Fraction(strict_radius))
        return sorted(out)


class QuotientView:
    """Orbit structure of the derived graph under the subgroup generated
    by the given basis vectors: canonical orbit cells, the quotient
    multigraph and exact shortest-path distances on it.

    `finite` is False when the subgroup rank is too small for a bounded
    quotient; everything else is then unavailable.
    """

    def __init__(self, pg, action, subgroup_basis, budget=None):
        budget = budget or 200_000
        self.pg = pg
        self.action = action
        g = pg.group
        basis = [tuple(int(x) for x in b) for b in subgroup_basis]
        self.basis = basis
        m = len(basis)

        # sigma-trivial part of the subgroup, in coefficient space Z^m
        if m:
            orders = []
            for b in basis:
                iso = action.isometry(b)
                o = 1
                cur = iso
                while any(cur.perm[v] != v for v in pg.vertices):
                    cur = _compose(pg, cur, iso)
                    o += 1
                orders.append(o)
            total = 1
            for o in orders:
                total *= o
            if total > 50_000:
                raise ResourceBudgetError("subgroup permutation enumeration too large")
            from itertools import product as iproduct
            rows = []
            for i, o in enumerate(orders):
                row = [0] * m
                row[i] = o
                rows.append(tuple(row))
            for combo in iproduct(*[range(o) for o in orders]):
                if not any(combo):
                    continue
                vec = tuple(sum(c * basis[j][i] for j, c in enumerate(combo))
                            for i in range(action.rank))
                iso = action.isometry(vec)
                if all(iso.perm[v] == v for v in pg.vertices):
                    rows.append(combo)
            gamma0 = lattice_basis(rows, m)
            coset_red = LatticeReducer(gamma0, m)
            coset_reps = list(coset_red.residues()) if coset_red.is_finite() else [(0,) * m]
        else:
            gamma0 = []
            coset_reps = [()]

        gamma0_vecs = [tuple(sum(c * basis[j][i] for j, c in enumerate(cb))
                             for i in range(action.rank)) for cb in gamma0]

        # per-vertex translation subgroup of the sigma-trivial part
        self.reducers = {}
        self.finite = True
        n_classes = 0
        for v in pg.vertices:
            rows = [action.isometry(vec).tau[v] for vec in gamma0_vecs]
            rows += g.moduli_rows()
            red = LatticeReducer(rows, g.dim)
            if not red.is_finite():
                self.finite = False
                return
            self.reducers[v] = red
            n_classes += red.index()
        if n_classes > budget:
            raise ResourceBudgetError(f"quotient has {n_classes} classes, over budget")

        parent = {}

        def find(x):
            root = x
            while parent[root] != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        cells = []
        for v in pg.vertices:
            for off in self.reducers[v].residues():
                cells.append((v, g.canon(off)))
        for c in cells:
            parent[c] = c
        self._rep_isos = []
        for cb in coset_reps:
            if not any(cb):
                continue
            vec = tuple(sum(c * basis[j][i] for j, c in enumerate(cb))
                        for i in range(action.rank))
            self._rep_isos.append(action.isometry(vec))
            self._rep_isos.append(action.isometry(tuple(-x for x in vec)))
        for cell in cells:
            for iso in self._rep_isos:
                img = self._cell(iso.apply(pg, cell))
                ra, rb = find(cell), find(img)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

        self._find = find
        self.roots = sorted({find(c) for c in cells})
        self._root_index = {r: i for i, r in enumerate(self.roots)}
        self.class_count = len(self.roots)

        qadj = [[] for _ in self.roots]
        for cell in cells:
            i = self._root_index[find(cell)]
            for nd, wlen in pg.neighbors(cell):
                j = self._root_index[find(self._cell(nd))]
                qadj[i].append((j, wlen))
        self._qadj = qadj
        self._dist_cache = {}

    def _cell(self, dv):
        v, off = dv
        return (v, self.reducers[v].canon(off))

    def locate(self, dv):
        """Class index of a derived vertex."""
        return self._root_index[self._find(self._cell(dv))]

    def distances_from(self, src):
        if src in self._dist_cache:
            return self._dist_cache[src]
        n = self.class_count
        dist = [None] * n
        dist[src] = 0
        heap = [(0, src)]
        while heap:
            d, i = heapq.heappop(heap)
            if d > dist[i]:
                continue
            for j, w in self._qadj[i]:
                nd2 = d + w
                if dist[j] is None or nd2 < dist[j]:
                    dist[j] = nd2
                    heapq.heappush(heap, (nd2, j))
        if any(d is None for d in dist):
            raise ModelInvalidError("quotient graph disconnected; model invalid")
        out = [Fraction(d, self.pg.scale) for d in dist]
        self._dist_cache[src] = out
        return out

    def distance_matrix(self):
        return [self.distances_from(i) for i in range(self.class_count)]

    def diameter(self):
        return max(max(self.distances_from(i)) for i in range(self.class_count))


@dataclass
class QuotientMetricResult:
    """Vertex-level diameter of (derived graph)/(subgroup action)."""

    finite: bool
    diameter: Fraction | None
    continuous_gap: Fraction
    class_count: int
    view: QuotientView | None = None


def quotient_diameter(pg, action, subgroup_basis, budget=None, keep_view=False):
    """Exact vertex-level diameter of the quotient by <subgroup_basis>.

    `finite` is False (diameter None) when the subgroup rank is too small
    to act co-compactly.  The continuous quotient diameter exceeds the
    vertex-level value by at most (max edge length)/2 per endpoint;
    `continuous_gap` reports the max edge length as that total bound.
    """
    view = QuotientView(pg, action, subgroup_basis, budget=budget)
    if not view.finite:
        return QuotientMetricResult(
            finite=False, diameter=None, continuous_gap=pg.max_length,
            class_count=0)
    return QuotientMetricResult(
        finite=True,
        diameter=view.diameter(),
        continuous_gap=pg.max_length,
        class_count=view.class_count,
        view=view if keep_view else None,
    )
