"""Short bases of displacement-separated sublattices.

Given a co-compact action and a separation target D, extract a basis of
a finite-index sublattice whose nonzero elements all move the basepoint
by at least D while each basis element moves it by at most 2D.  The
algorithm repeatedly enumerates the finitely many too-close sublattice
elements, completes the worst one to a basis and doubles it out of the
D-ball; the certificate at the end is an exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .abelian import WordSet
from .errors import CertificateError, ModelInvalidError, PerturbRadiusError
from .intlinalg import (
    LatticeReducer,
    complement_basis,
    kernel_basis,
    lattice_basis,
    saturation_basis,
    smith_with_transforms,
    solve_integer,
    solve_mod_lattice,
)
from .periodic import OrbitSolver, derived_ball, displacement, quotient_diameter


def _full_action_basis(rank):
    return [tuple(1 if i == j else 0 for j in range(rank)) for i in range(rank)]


def milnor_svarc_generators(action, p, R):
    """The displacement ball {g image : d(g p, p) < R} as canonical reps.

    Requires R > 2 * vertex-level diam(X/G) and that the result generates
    the image group; violations raise ModelInvalidError.  A point of the
    orbit at distance exactly R raises PerturbRadiusError.
    """
    R = Fraction(R)
    qd = quotient_diameter(action.pg, action, _full_action_basis(action.rank))
    if not qd.finite:
        raise ModelInvalidError("action is not co-compact: quotient diameter infinite")
    if R <= 2 * qd.diameter:
        raise ModelInvalidError(
            f"R = {R} must exceed twice the quotient diameter {qd.diameter}")
    solver = OrbitSolver(action, p)
    ball = derived_ball(action.pg, p, R)
    reps = solver.elements_moving_into(ball, strict_radius=R)
    # symmetric by construction; verify generation of the image group
    rows = [list(r) for r in reps] + [list(k) for k in action.kernel()]
    if LatticeReducer(rows, action.rank).index() != 1:
        raise ModelInvalidError(
            f"displacement ball at R = {R} does not generate the group")
    return WordSet.from_iter(action.rank, reps)


@dataclass
class ShortBasisResult:
    separation: Fraction
    basis: list
    displacements: list
    separation_certificate: list       # all sublattice elements with d < D
    iteration_log: list = field(default_factory=list)
    boundary_ties: list = field(default_factory=list)

    @property
    def rank(self):
        return len(self.basis)


class _StabilizerData:
    """Basepoint stabilizer lattice and a complement to work in."""

    def __init__(self, action, p):
        self.action = action
        self.p = p
        solver = OrbitSolver(action, p)
        self.solver = solver
        stab_reps = solver.solve(p)
        rows = [list(r) for r in stab_reps] + [list(k) for k in action.kernel()]
        self.stab = lattice_basis(rows, action.rank)
        sat = saturation_basis([list(r) for r in self.stab], action.rank)
        if len(sat) != len(self.stab) or any(
                not LatticeReducer([list(s) for s in self.stab], action.rank).contains(v)
                for v in sat):
            raise ModelInvalidError(
                "basepoint stabilizer lattice is not saturated; unsupported model")
        self.complement = complement_basis([list(r) for r in self.stab], action.rank)
        self.free_rank = len(self.complement)

    def lift(self, qvec):
        n = self.action.rank
        return tuple(sum(q * self.complement[j][i] for j, q in enumerate(qvec))
                     for i in range(n))

    def project(self, gvec):
        """Complement coordinates of gvec (exact: complement + stabilizer
        saturation form a basis of Z^N)."""
        n = self.action.rank
        cols = list(self.complement) + list(self.stab)
        A = [[cols[j][i] for j in range(len(cols))] for i in range(n)]
        sol = solve_integer(A, list(gvec))
        if sol is None:
            raise ModelInvalidError("complement decomposition failed")
        return tuple(sol[: self.free_rank])


def _close_elements(sd, lattice_rows, D, include_ties=False):
    """Sublattice elements (in complement coords) with 0 < d(g p, p) < D,
    together with their exact displacements; optionally also the exact
    ties at D."""
    pg = sd.action.pg
    ball = derived_ball(pg, sd.p, D)
    red = LatticeReducer([list(r) for r in lattice_rows], sd.free_rank) \
        if lattice_rows else None
    out = {}
    ties = []
    zs = [(z, ball.dist[z]) for z in ball.vertices]
    if include_ties:
        zs += [(z, Fraction(D)) for z in ball.boundary]
    for z, dz in zs:
        if z == sd.p:
            continue
        for rep in sd.solver.solve(z):
            q = sd.project(rep)
            lifted = sd.lift(q)
            # the lift moves p to z exactly when rep - lift stabilizes p
            diff = tuple(a - b for a, b in zip(rep, lifted))
            if not LatticeReducer([list(r) for r in sd.stab], sd.action.rank).contains(diff):
                continue
            if red is not None and not red.contains(q):
                continue
            if not any(q):
                continue
            if dz < D:
                out[q] = dz
            else:
                ties.append((lifted, dz))
    return out, ties


def gromov_short_basis(action, p, D, budget=None):
    """Short basis with displacement-D separation, certified exhaustively.

    Loop invariant: the finite set {g : 0 < d(g p, p) < D} strictly loses
    sublattice members every iteration, which is asserted.
    """
    D = Fraction(D)
    if D <= 0:
        raise ModelInvalidError("separation target must be positive")
    qd = quotient_diameter(action.pg, action, _full_action_basis(action.rank))
    if not qd.finite:
        raise ModelInvalidError("action is not co-compact")
    sd = _StabilizerData(action, p)
    if sd.free_rank == 0:
        raise ModelInvalidError("action image has free rank 0")

    # initial generators: displacement ball just above twice the
    # continuous quotient diameter bound
    R0 = 2 * (qd.diameter + qd.continuous_gap / 2)
    bump = min(Fraction(1, 2), D / 2)
    attempts = 0
    while True:
        try:
            gens = milnor_svarc_generators(action, p, R0 + bump)
            break
        except PerturbRadiusError:
            bump = bump / 3 * 2
            attempts += 1
            if attempts > 10:
                raise

    qrows = []
    for g in gens:
        try:
            qrows.append(sd.project(g))
        except ModelInvalidError:
            continue
    basis_q = lattice_basis([list(r) for r in qrows], sd.free_rank)
    if len(basis_q) != sd.free_rank:
        raise ModelInvalidError("initial generators do not span the free part")

    log = []
    close, ties = _close_elements(sd, basis_q, D, include_ties=True)
    while close:
        # minimal-displacement element, lexicographic tie-break
        w = min(close, key=lambda q: (close[q], q))
        # primitive in the current sublattice: divide out coefficient content
        Bt = [[basis_q[j][i] for j in range(len(basis_q))]
              for i in range(sd.free_rank)]
        coeff = solve_integer(Bt, list(w))
        if coeff is None:
            raise ModelInvalidError("close element escaped the sublattice")
        from math import gcd
        content = 0
        for c in coeff:
            content = gcd(content, abs(c))
        if content > 1:
            coeff = tuple(c // content for c in coeff)
        # complete the primitive coefficient row to a unimodular matrix
        sf = smith_with_transforms([list(coeff)])
        if abs(sf.D[0][0]) != 1:
            raise ModelInvalidError("primitivization failed")
        rows = [list(coeff)] + [list(sf.Vinv[i]) for i in range(1, len(basis_q))]
        new_basis = []
        for r in rows:
            new_basis.append(tuple(sum(r[j] * basis_q[j][i] for j in range(len(basis_q)))
                                   for i in range(sd.free_rank)))
        wvec = new_basis[0]
        d_w = displacement(action, sd.lift(wvec), p)
        k = 0
        v = wvec
        d_v = d_w
        while d_v < D:
            v = tuple(2 * x for x in v)
            d_v = displacement(action, sd.lift(v), p)
            k += 1
        new_basis[0] = v
        new_basis = lattice_basis([list(r) for r in new_basis], sd.free_rank)
        new_close, new_ties = _close_elements(sd, new_basis, D, include_ties=True)
        if len(new_close) >= len(close):
            raise ModelInvalidError(
                "doubling loop failed to shrink the close-element set")
        log.append({
            "witness": sd.lift(wvec),
            "witness_displacement": d_w,
            "doublings": k,
            "close_before": len(close),
            "close_after": len(new_close),
        })
        basis_q = new_basis
        close, ties = new_close, new_ties

    basis = [sd.lift(q) for q in basis_q]
    disps = [displacement(action, b, p) for b in basis]
    for b, d in zip(basis, disps):
        if d > 2 * D:
            raise CertificateError(
                f"basis displacement {d} exceeds 2D = {2 * D}; "
                "separation target is below the quotient diameter scale",
                witness=b)
    ok, witness, cert = verify_separation(action, p, basis, D)
    if not ok:
        raise CertificateError("separation verification failed", witness=witness)
    return ShortBasisResult(
        separation=D,
        basis=basis,
        displacements=disps,
        separation_certificate=cert,
        iteration_log=log,
        boundary_ties=ties,
    )


def verify_separation(action, p, basis, D, budget=None):
    """Exhaustively enumerate {g in <basis> : d(g p, p) < D}.

    Returns (ok, witness, certificate): ok is True iff only the identity
    is found; the certificate lists every element found.
    """
    D = Fraction(D)
    n = action.rank
    basis = [tuple(int(x) for x in b) for b in basis]
    if not basis:
        return True, None, [tuple([0] * n)]
    solver = OrbitSolver(action, p)
    stab_reps = solver.solve(p)
    stab = lattice_basis([list(r) for r in stab_reps]
                         + [list(k) for k in action.kernel()], n)
    # <basis> meeting the stabilizer lattice means a nonzero element with
    # displacement zero
    if stab:
        q = len(stab)
        m = len(basis)
        stacked = [[basis[j][i] for j in range(m)] + [stab[k][i] for k in range(q)]
                   for i in range(n)]
        for kv in kernel_basis(stacked):
            coeffs = kv[:m]
            if any(coeffs):
                g = tuple(sum(c * basis[j][i] for j, c in enumerate(coeffs))
                          for i in range(n))
                if any(g):
                    cert = [tuple([0] * n), g]
                    return False, g, cert
    ball = derived_ball(action.pg, p, D)
    cert = {tuple([0] * n)}
    witness = None
    for z in ball.vertices:
        if z == p:
            continue
        for rep in solver.solve(z):
            # is rep congruent mod stabilizer to a <basis> element?
            sol = solve_mod_lattice(
                [[basis[j][i] for j in range(len(basis))] for i in range(n)],
                list(rep), stab)
            if sol is None:
                continue
            part, _ = sol
            g = tuple(sum(part[j] * basis[j][i] for j in range(len(basis)))
                      for i in range(n))
            cert.add(g)
            if witness is None and any(g):
                witness = g
    cert = sorted(cert)
    return witness is None, witness, cert
