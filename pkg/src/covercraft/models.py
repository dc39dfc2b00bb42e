"""Shipped example models: builders returning (PeriodicGraph, LatticeAction).

These are the desk-scale spaces exercised by the test suite and the
bundled scenarios.  Voltage tuples list free coordinates first, then
torsion coordinates.
"""

from __future__ import annotations

from fractions import Fraction

from .periodic import LatticeAction, PeriodicGraph, VoltageGroup


def grid(n=2, lengths=None):
    """Rose with n loops, voltages the standard basis of Z^n.

    The derived graph is the Z^n grid (a tree when n = 1); the action is
    by coordinate translations.
    """
    lengths = lengths or [1] * n
    g = VoltageGroup(n)
    edges = []
    for i, ln in enumerate(lengths):
        vol = tuple(1 if j == i else 0 for j in range(n))
        edges.append(("v", "v", Fraction(ln), vol))
    pg = PeriodicGraph(g, ["v"], edges)
    gens = []
    for i in range(n):
        vol = tuple(1 if j == i else 0 for j in range(n))
        gens.append(({}, {"v": vol}))
    return pg, LatticeAction(pg, gens)


def weighted_grid():
    """Grid with loop lengths 1 and 3/2."""
    return grid(2, [1, Fraction(3, 2)])


def grid3():
    return grid(3)


def line():
    """The integer line: rose with one unit loop over Z (a tree)."""
    return grid(1)


def weighted_line():
    return grid(1, [Fraction(3, 2)])


def cylinder(m, circle_len=1, vert_len=1, full_rank=True):
    """Circle-of-size-m times the line: voltage group Z x Z_m.

    With full_rank the action is Z^2 mapping onto rotation and vertical
    translation; the rotation direction wraps, so the action is not
    faithful (kernel generated by (m, 0)).  Otherwise the action is the
    faithful rank-1 vertical translation.
    """
    g = VoltageGroup(1, (m,))
    pg = PeriodicGraph(g, ["v"], [
        ("v", "v", Fraction(circle_len), (0, 1)),
        ("v", "v", Fraction(vert_len), (1, 0)),
    ])
    if full_rank:
        act = LatticeAction(pg, [({}, {"v": (0, 1)}), ({}, {"v": (1, 0)})])
    else:
        act = LatticeAction(pg, [({}, {"v": (1, 0)})])
    return pg, act


def cylinder_completion(m=4):
    """The faithful vertical-translation action on the cylinder."""
    return cylinder(m, full_rank=False)


def honeycomb():
    """Hexagonal lattice: two vertex classes, three unit edges between
    them with voltages 0, e1, e2; the action is by translations."""
    g = VoltageGroup(2)
    pg = PeriodicGraph(g, ["a", "b"], [
        ("a", "b", 1, (0, 0)),
        ("a", "b", 1, (1, 0)),
        ("a", "b", 1, (0, 1)),
    ])
    act = LatticeAction(pg, [
        ({}, {"a": (1, 0), "b": (1, 0)}),
        ({}, {"a": (0, 1), "b": (0, 1)}),
    ])
    return pg, act


def swap_line():
    """Two vertex classes alternating along a line with spacing 1/2; the
    rank-1 action swaps the classes (a glide along the line)."""
    g = VoltageGroup(1)
    pg = PeriodicGraph(g, ["a", "b"], [
        ("a", "b", Fraction(1, 2), (0,)),
        ("b", "a", Fraction(1, 2), (1,)),
    ])
    act = LatticeAction(pg, [({"a": "b", "b": "a"}, {"a": (0,), "b": (1,)})])
    return pg, act


def caterpillar_line():
    """Line with a pendant vertex hanging off every spine vertex (a
    tree), pendant edges of length 3/4; translation action."""
    g = VoltageGroup(1)
    pg = PeriodicGraph(g, ["v", "u"], [
        ("v", "v", 1, (1,)),
        ("v", "u", Fraction(3, 4), (0,)),
    ])
    act = LatticeAction(pg, [({}, {"v": (1,), "u": (1,)})])
    return pg, act


def shrinking_band(m=100, circle_len=Fraction(1, 5), vert_len=1):
    """Cylinder with short circle edges and unit vertical edges, rotated
    by a rank-1 action.

    Metric balls here are diamonds whose circle width decays along the
    free axis, which is what breaks the tile-coverage hypothesis for
    small tile sets.
    """
    g = VoltageGroup(1, (m,))
    pg = PeriodicGraph(g, ["v"], [
        ("v", "v", Fraction(circle_len), (0, 1)),
        ("v", "v", Fraction(vert_len), (1, 0)),
    ])
    act = LatticeAction(pg, [({}, {"v": (0, 1)})])
    return pg, act


def chord_circle(m=12, chord=4):
    """Finite circle with unit steps plus unit chords jumping `chord`
    positions, rotated by a rank-1 action.

    Balls are non-convex along the circle (the chord punches a shortcut),
    so glued ball copies overlap badly: the canonical local-injectivity
    failure example.
    """
    g = VoltageGroup(0, (m,))
    pg = PeriodicGraph(g, ["v"], [
        ("v", "v", 1, (1,)),
        ("v", "v", 1, (chord,)),
    ])
    act = LatticeAction(pg, [({}, {"v": (1,)})])
    return pg, act


REGISTRY = {
    "grid": grid,
    "grid3": grid3,
    "weighted_grid": weighted_grid,
    "line": line,
    "weighted_line": weighted_line,
    "honeycomb": honeycomb,
    "swap_line": swap_line,
    "caterpillar_line": caterpillar_line,
    "cylinder4": lambda: cylinder(4),
    "cylinder30": lambda: cylinder(30),
    "cylinder_completion": cylinder_completion,
    "shrinking_band": shrinking_band,
    "chord_circle": chord_circle,
}


def build(name):
    if name not in REGISTRY:
        raise KeyError(f"unknown model {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name]()
