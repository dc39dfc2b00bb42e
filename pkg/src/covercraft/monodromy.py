"""Covering spaces from group actions on periodic graphs.

Given a ball B around the basepoint, a symmetric generating set S of the
acting group Z^N and a power M, set T = S^M.  The three overlap
hypotheses are decided exactly at vertex level:

  (i)   every s in S moves B so that it still meets B,
  (ii)  every t in T^6 whose action moves B onto something meeting B
        already lies in T,
  (iii) every image isometry moving B onto something meeting B maps B
        into the union of the T-translates of B.

The cover group is generated by T^3 with one relation a + b = c per
table entry of the acting group (products taken in Z^N, the abstract
acting group, so unfaithful actions produce a projection with kernel).
Finite windows of the cover (word balls glued along single relation
steps with union-find) witness sheets concretely, and the projection
criterion is decided exactly by reducing the infinite inclusion test to
kernel cosets of finitely many words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from .abelian import (
    PresentedAbelianGroup,
    WordSet,
    lattice_addition_oracle,
    presented_group_from_table,
    sumset_power,
)
from .errors import ModelInvalidError, PerturbRadiusError
from .intlinalg import LatticeReducer, solve_mod_lattice
from .periodic import OrbitSolver, derived_ball


class MonodromyInput:
    """A model, an action, a ball and a word-set scale for the cover
    construction."""

    def __init__(self, pg, action, basepoint, radius, gens, power):
        self.pg = pg
        self.action = action
        self.basepoint = basepoint
        self.radius = Fraction(radius)
        self.gens = gens
        self.power = int(power)
        if gens.rank != action.rank:
            raise ModelInvalidError("generating set rank differs from action rank")
        if not gens.is_symmetric():
            raise ModelInvalidError("generating set is not symmetric")
        if self.power < 1:
            raise ModelInvalidError("power must be >= 1")
        if LatticeReducer([list(t) for t in gens.elements], gens.rank).index() != 1:
            raise ModelInvalidError("generating set does not generate Z^N")
        self._ball = None
        self._solver = None
        self._tiles = {}

    @property
    def ball(self):
        if self._ball is None:
            self._ball = derived_ball(self.pg, self.basepoint, self.radius)
            if self._ball.boundary:
                raise PerturbRadiusError(
                    f"vertex at distance exactly {self.radius} from the basepoint; "
                    "perturb r", attained=self.radius)
        return self._ball

    @property
    def solver(self):
        if self._solver is None:
            self._solver = OrbitSolver(self.action, self.basepoint)
        return self._solver

    def tiles(self, k=1):
        """S^(power * k): the tile set T for k = 1, and its powers T^k."""
        if k not in self._tiles:
            self._tiles[k] = sumset_power(self.gens, self.power * k)
        return self._tiles[k]

    def labeling_injective_on(self, ws):
        kred = self.action.kernel_reducer()
        seen = {kred.canon(t) for t in ws.elements}
        return len(seen) == len(ws.elements)

    # -- overlap sets ---------------------------------------------------

    def image_overlap_set(self):
        """Canonical reps (mod action kernel) of every image isometry h
        with hB meeting B at vertex level, plus the ball-vertex maps."""
        return _overlap_pairs(self.pg, self.action, self.ball, self.solver)


def _overlap_pairs(pg, action, ball, solver):
    # any overlapping h has d(h p, p) < 2r strictly, so the candidate set
    # is the 2r displacement ball; points at exactly 2r cannot matter
    ball2 = derived_ball(pg, ball.center, 2 * ball.radius)
    candidates = solver.elements_moving_into(ball2)
    bverts = set(ball.vertices)
    out = []
    for rep in candidates:
        iso = action.isometry(rep)
        moved = [iso.apply(pg, x) for x in ball.vertices]
        if any(z in bverts for z in moved):
            out.append((rep, tuple(moved)))
    return out


def overlap_word_set(pg, action, basepoint, radius):
    """The canonical tile choice: S = T = all image isometries whose
    ball translate meets the ball, as canonical word representatives.

    With a ball radius above the quotient diameter this set makes every
    overlap hypothesis hold by construction.
    """
    ball = derived_ball(pg, basepoint, Fraction(radius))
    if ball.boundary:
        raise PerturbRadiusError(
            f"vertex at distance exactly {radius} from the basepoint; perturb r",
            attained=Fraction(radius))
    solver = OrbitSolver(action, basepoint)
    reps = [rep for rep, _ in _overlap_pairs(pg, action, ball, solver)]
    return WordSet.from_iter(action.rank, reps)


@dataclass
class ConditionReport:
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    witnesses: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def all_hold(self):
        return self.cond_i and self.cond_ii and self.cond_iii


def check_conditions(inp):
    """Decide the three overlap hypotheses exactly; failures carry
    re-checkable witnesses."""
    ball = inp.ball
    action = inp.action
    kred = action.kernel_reducer()
    overlap = inp.image_overlap_set()
    overlap_reps = {rep for rep, _ in overlap}

    witnesses = {}

    cond_i = True
    for s in inp.gens:
        if kred.canon(s) not in overlap_reps:
            cond_i = False
            witnesses["cond_i"] = {"element": s}
            break

    tiles = inp.tiles(1)
    cond_ii = True
    for t in inp.tiles(6):
        if kred.canon(t) in overlap_reps and t not in tiles:
            cond_ii = False
            witnesses["cond_ii"] = {"element": t}
            break

    tile_cover = set()
    for t in tiles:
        iso = action.isometry(t)
        for x in ball.vertices:
            tile_cover.add(iso.apply(inp.pg, x))
    cond_iii = True
    for rep, moved in overlap:
        outside = [z for z in moved if z not in tile_cover]
        if outside:
            cond_iii = False
            witnesses["cond_iii"] = {"element": rep, "vertex": min(outside)}
            break

    diag = {
        "overlap_count": len(overlap),
        "ball_size": len(ball),
        "ball_cut_edges": ball.cut_edges,
        "labeling_injective_T3": inp.labeling_injective_on(inp.tiles(3)),
        "labeling_injective_T6": inp.labeling_injective_on(inp.tiles(6)),
    }
    return ConditionReport(cond_i, cond_ii, cond_iii, witnesses, diag)


def recheck_condition_witness(inp, name, witness):
    """Re-run a single failed condition instance from its witness."""
    action = inp.action
    ball = inp.ball
    bverts = set(ball.vertices)
    if name == "cond_i":
        iso = action.isometry(witness["element"])
        return not any(iso.apply(inp.pg, x) in bverts for x in ball.vertices)
    if name == "cond_ii":
        t = witness["element"]
        iso = action.isometry(t)
        overlaps = any(iso.apply(inp.pg, x) in bverts for x in ball.vertices)
        return overlaps and t in inp.tiles(6) and t not in inp.tiles(1)
    if name == "cond_iii":
        rep = witness["element"]
        vertex = witness["vertex"]
        iso = action.isometry(rep)
        moved = {iso.apply(inp.pg, x) for x in ball.vertices}
        if vertex not in moved or not (moved & bverts):
            return False
        tile_cover = set()
        for t in inp.tiles(1):
            tiso = action.isometry(t)
            tile_cover.update(tiso.apply(inp.pg, x) for x in ball.vertices)
        return vertex not in tile_cover
    raise ValueError(f"unknown condition {name}")


def build_cover_group(inp):
    """The group generated by T^3 with the acting group's own partial
    addition table, labeled over Z^N with the action kernel."""
    t3 = inp.tiles(3)
    return presented_group_from_table(
        t3, lattice_addition_oracle(t3),
        labeling_kernel_rows=inp.action.kernel())


# spec surface name for the same operation
build_gamma_tilde = build_cover_group


@dataclass
class CoveringVerdict:
    is_homeomorphism: bool
    sheet_class: str                 # "one", "finite(n)", "infinite"
    ker_free_rank: int
    ker_torsion: tuple
    ker_basis: list                  # normal-form elements
    criterion_evidence: dict
    sheet_count: int | None = None   # None when infinite


def _tsharp_set(inp, group):
    return {group.generator_element(t) for t in inp.tiles(1)}


def _phi_preimage(inp, group, target):
    """One group element whose label equals `target` mod the action kernel."""
    b = len(group.base)
    rows = [[group._phi_base[i][r] for i in range(b)] for r in range(group.rank)]
    sol = solve_mod_lattice(rows, list(target), inp.action.kernel())
    if sol is None:
        raise ModelInvalidError("projection is not onto the image group")
    part, _ = sol
    return group.from_base_vector(part)


def covering_verdict(inp, group):
    """Decide the projection criterion exactly and classify the sheets.

    The infinite inclusion test reduces to kernel cosets of one preimage
    word per overlapping image isometry; each coset is compared against
    the embedded tile set.
    """
    tsharp = _tsharp_set(inp, group)
    overlap = inp.image_overlap_set()
    ker_basis, kfree, ktors = group.projection_kernel()

    violator = None
    evidence = []
    if kfree > 0:
        # infinite kernel: cosets cannot embed in the finite tile set
        kgen = ker_basis[0]
        base = group.zero()
        k = 0
        while violator is None:
            cand = base
            if k:
                cand = group.scale(kgen, k)
            if cand not in tsharp:
                violator = cand
            k += 1
        evidence.append({"reason": "infinite_kernel", "violator_word": group_word(group, violator)})
    else:
        kelems = group.kernel_elements()
        for rep, _ in overlap:
            pre = _phi_preimage(inp, group, rep)
            coset_ok = True
            for ke in kelems:
                cand = group.add(pre, ke)
                if cand not in tsharp:
                    violator = cand
                    coset_ok = False
                    break
            evidence.append({"image": rep, "included": coset_ok})
            if violator is not None:
                break

    is_homeo = violator is None
    if is_homeo:
        sheet_class, sheets = "one", 1
    elif kfree > 0:
        sheet_class, sheets = "infinite", None
    else:
        sheets = _sheet_count(inp, group)
        sheet_class, sheets = f"finite({sheets})", sheets

    return CoveringVerdict(
        is_homeomorphism=is_homeo,
        sheet_class=sheet_class,
        ker_free_rank=kfree,
        ker_torsion=ktors,
        ker_basis=ker_basis,
        criterion_evidence={
            "cosets": evidence,
            "violator_word": group_word(group, violator) if violator is not None else None,
        },
        sheet_count=sheets,
    )


def group_word(group, elem):
    """A representative word for a normal-form element, over base
    generators: list of (generator vector, coefficient)."""
    if elem is None:
        return None
    from .intlinalg import vec_mat
    x = vec_mat(elem, group._Vi) if group.base else ()
    return [(group.generator_index[g], int(c))
            for g, c in zip(group.base, x) if c]


def _sheet_count(inp, group):
    """|K|: tile-separated representatives of words whose label moves the
    basepoint into B (finite kernels only)."""
    tsharp = _tsharp_set(inp, group)
    kelems = group.kernel_elements()
    p = inp.basepoint
    bverts = set(inp.ball.vertices)
    sigma = set()
    for rep, _ in inp.image_overlap_set():
        inv = tuple(-x for x in rep)
        iso = inp.action.isometry(inv)
        if iso.apply(inp.pg, p) in bverts:
            pre = _phi_preimage(inp, group, rep)
            for ke in kelems:
                sigma.add(group.add(pre, ke))
    reps = []
    for g in sorted(sigma):
        if all(group.add(g, group.neg(a)) not in tsharp for a in reps):
            reps.append(g)
    return len(reps)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        p = self.parent
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class CoverWindow:
    """A finite word-ball window of the cover.

    Classes are keyed by their minimal (word, ball vertex) member; each
    carries the projection label and an interior flag (all gluing
    partners materialized inside the window).
    """

    word_radius: int
    classes: list
    members: dict          # class -> tuple of (word element, vertex)
    labels: dict           # class -> derived vertex of the base graph
    edges: set             # frozensets {class, class}
    interior: set          # classes with every gluing partner present
    words: list            # the word ball, sorted


def build_cover_window(inp, group, word_radius):
    """Materialize the classes of (word ball) x (ball vertices) under the
    single-step gluing relation, with projection labels and the induced
    graph."""
    if word_radius < 0:
        raise ModelInvalidError("word radius must be >= 0")
    tiles = list(inp.tiles(1))
    sharp = {}
    for t in tiles:
        sharp[t] = group.generator_element(t)

    zero = group.zero()
    depth = {zero: 0}
    frontier = [zero]
    for d in range(word_radius):
        nxt = []
        for w in frontier:
            for t in tiles:
                nw = group.add(w, sharp[t])
                if nw not in depth:
                    depth[nw] = d + 1
                    nxt.append(nw)
        frontier = nxt
    words = sorted(depth)
    wset = set(words)

    ball = inp.ball
    bverts = list(ball.vertices)
    bset = set(bverts)

    # per-tile vertex maps within the ball
    tmaps = {}
    for t in tiles:
        iso = inp.action.isometry(t)
        tm = {}
        for x in bverts:
            y = iso.apply(inp.pg, x)
            if y in bset:
                tm[x] = y
        if tm:
            tmaps[t] = tm

    pairs = [(w, x) for w in words for x in bverts]
    uf = _UnionFind(pairs)
    for t, tm in tmaps.items():
        ts = sharp[t]
        for w in words:
            wt = group.add(w, ts)
            if wt not in wset:
                continue
            for x, y in tm.items():
                # (w + t_sharp, x) ~ (w, t x)
                uf.union((wt, x), (w, y))

    members = {}
    for pr in pairs:
        members.setdefault(uf.find(pr), []).append(pr)
    classes = sorted(members)
    members = {c: tuple(sorted(members[c])) for c in classes}

    # projection labels, asserted equal across members
    labels = {}
    for c in classes:
        vals = set()
        for w, x in members[c]:
            rep = group.project(w)
            vals.add(inp.action.apply(rep, x))
        if len(vals) != 1:
            raise ModelInvalidError("projection label differs within a glued class")
        labels[c] = vals.pop()

    # edges induced from ball copies
    ball_edges = set()
    for x in bverts:
        for y, _ in inp.pg.neighbors(x):
            if y in bset and y != x:
                ball_edges.add((x, y))
    edges = set()
    for w in words:
        for x, y in ball_edges:
            a, b = uf.find((w, x)), uf.find((w, y))
            if a != b:
                edges.add(frozenset((a, b)))

    # interior classes: every gluing partner of every member materialized;
    # the partner of (w, x) along t is (w + t_sharp, t^{-1} x)
    inv_tmaps = {t: {y: x for x, y in tm.items()} for t, tm in tmaps.items()}
    interior = set()
    for c in classes:
        ok = True
        for w, x in members[c]:
            for t, tm in tmaps.items():
                if x in inv_tmaps[t]:
                    if group.add(w, sharp[t]) not in wset:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            interior.add(c)

    return CoverWindow(
        word_radius=word_radius,
        classes=classes,
        members=members,
        labels=labels,
        edges=edges,
        interior=interior,
        words=words,
    )


def window_closure_is_stable(inp, group, window):
    """True when re-applying every single gluing step merges nothing new."""
    tiles = list(inp.tiles(1))
    bset = set(inp.ball.vertices)
    wset = set(window.words)
    root = {}
    for c, mem in window.members.items():
        for pr in mem:
            root[pr] = c
    for t in tiles:
        ts = group.generator_element(t)
        iso = inp.action.isometry(t)
        for w in window.words:
            wt = group.add(w, ts)
            if wt not in wset:
                continue
            for x in inp.ball.vertices:
                y = iso.apply(inp.pg, x)
                if y in bset and root[(wt, x)] != root[(w, y)]:
                    return False
    return True


def label_collisions(window):
    """Pairs of distinct classes with equal projection label."""
    by_label = {}
    for c in window.classes:
        by_label.setdefault(window.labels[c], []).append(c)
    return {lab: cs for lab, cs in by_label.items() if len(cs) > 1}


@dataclass
class LocalHomeoReport:
    status: str                  # "ok", "fail", "inconclusive"
    component_count: int
    complete_components: int
    witness: tuple | None = None

    def __bool__(self):
        return self.status == "ok"


def verify_local_homeomorphism(window, inp):
    """Check that over U = B the complete preimage components are
    disjoint and each projects bijectively onto the vertex set of U."""
    uverts = set(inp.ball.vertices)
    in_u = [c for c in window.classes if window.labels[c] in uverts]
    if not in_u:
        return LocalHomeoReport("inconclusive", 0, 0)
    adj = {c: set() for c in in_u}
    inset = set(in_u)
    for e in window.edges:
        a, b = tuple(e)
        if a in inset and b in inset:
            adj[a].add(b)
            adj[b].add(a)
    comps = []
    seen = set()
    for c in in_u:
        if c in seen:
            continue
        comp = {c}
        stack = [c]
        seen.add(c)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)

    complete = [comp for comp in comps if all(c in window.interior for c in comp)]
    if not complete:
        return LocalHomeoReport("inconclusive", len(comps), 0)
    for comp in complete:
        labs = [window.labels[c] for c in comp]
        if len(set(labs)) != len(labs):
            dup = next(l for l in labs if labs.count(l) > 1)
            return LocalHomeoReport("fail", len(comps), len(complete), witness=dup)
        if set(labs) != uverts:
            missing = min(uverts - set(labs))
            return LocalHomeoReport("fail", len(comps), len(complete), witness=missing)
    return LocalHomeoReport("ok", len(comps), len(complete))
