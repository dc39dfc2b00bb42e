"""The cover construction: hypotheses, groups, verdicts, windows."""

from fractions import Fraction

import pytest

from covercraft.abelian import WordSet
from covercraft.errors import ModelInvalidError, PerturbRadiusError
from covercraft.models import (
    caterpillar_line,
    chord_circle,
    cylinder,
    grid,
    line,
    shrinking_band,
    swap_line,
    weighted_line,
)
from covercraft.monodromy import (
    MonodromyInput,
    build_cover_group,
    build_cover_window,
    build_gamma_tilde,
    check_conditions,
    covering_verdict,
    label_collisions,
    recheck_condition_witness,
    verify_local_homeomorphism,
    window_closure_is_stable,
)


def grid_input():
    pg, act = grid()
    return MonodromyInput(pg, act, pg.basepoint(), Fraction(3, 2),
                          WordSet.l1_ball(2, 2), 2)


def cylinder_input(m=30):
    pg, act = cylinder(m)
    return MonodromyInput(pg, act, pg.basepoint(), Fraction(3, 2),
                          WordSet.l1_ball(2, 2), 2)


def test_input_validation():
    pg, act = grid()
    asym = WordSet.from_iter(2, [(0, 0), (1, 0)])
    with pytest.raises(ModelInvalidError):
        MonodromyInput(pg, act, pg.basepoint(), 1, asym, 1)
    nongen = WordSet.from_iter(2, [(0, 0), (2, 0), (-2, 0), (0, 2), (0, -2)])
    with pytest.raises(ModelInvalidError):
        MonodromyInput(pg, act, pg.basepoint(), 1, nongen, 1)


def test_radius_tie_raises():
    pg, act = grid()
    inp = MonodromyInput(pg, act, pg.basepoint(), 1, WordSet.l1_ball(2, 2), 2)
    with pytest.raises(PerturbRadiusError):
        check_conditions(inp)


def test_grid_conditions_all_hold():
    rep = check_conditions(grid_input())
    assert rep.all_hold()
    assert rep.diagnostics["overlap_count"] == 13
    assert rep.diagnostics["labeling_injective_T6"]


def test_cylinder_conditions_all_hold():
    rep = check_conditions(cylinder_input())
    assert rep.all_hold()
    # the wrap breaks injectivity of the labeling on the sixth power
    assert rep.diagnostics["labeling_injective_T3"]
    assert not rep.diagnostics["labeling_injective_T6"]


def test_shrinking_band_condition_iii_fails_with_witness():
    pg, act = shrinking_band()
    inp = MonodromyInput(pg, act, pg.basepoint(), Fraction(19, 10),
                         WordSet.l1_ball(1, 1), 1)
    rep = check_conditions(inp)
    assert rep.cond_i
    assert not rep.cond_iii
    assert recheck_condition_witness(inp, "cond_iii", rep.witnesses["cond_iii"])
    if not rep.cond_ii:
        assert recheck_condition_witness(inp, "cond_ii", rep.witnesses["cond_ii"])


def test_shrinking_band_ball_width_decays():
    pg, _ = shrinking_band()
    from covercraft.periodic import derived_ball
    ball = derived_ball(pg, pg.basepoint(), Fraction(19, 10))
    widths = {}
    for (v, off) in ball.vertices:
        h, c = off[0], off[1]
        widths.setdefault(h, 0)
        widths[h] += 1
    assert widths[0] > widths[1] > 0


def test_cover_group_grid():
    inp = grid_input()
    gp = build_cover_group(inp)
    assert gp.iso_type == (2, ())
    _, kfree, ktors = gp.projection_kernel()
    assert kfree == 0 and ktors == ()
    assert build_gamma_tilde is build_cover_group


def test_cover_group_cylinder():
    inp = cylinder_input()
    gp = build_cover_group(inp)
    assert gp.iso_type == (2, ())
    kb, kfree, ktors = gp.projection_kernel()
    assert kfree == 1 and ktors == ()
    assert all(x == 0 for x in gp.project(kb[0]))


def test_verdict_grid_self_cover():
    inp = grid_input()
    gp = build_cover_group(inp)
    v = covering_verdict(inp, gp)
    assert v.is_homeomorphism
    assert v.sheet_class == "one"
    assert v.sheet_count == 1
    assert v.ker_free_rank == 0


def test_verdict_cylinder_unwraps():
    inp = cylinder_input()
    gp = build_cover_group(inp)
    v = covering_verdict(inp, gp)
    assert not v.is_homeomorphism
    assert v.sheet_class == "infinite"
    assert v.ker_free_rank == 1
    assert v.criterion_evidence["violator_word"] is not None


def test_general_good_s_grid_regular_cover():
    # ball larger than the quotient diameter with S = T = the overlap
    # set itself: the trivial-kernel regular cover of the grid by itself
    pg, act = grid()
    from covercraft.monodromy import overlap_word_set
    S = overlap_word_set(pg, act, pg.basepoint(), Fraction(3, 2))
    assert S.is_symmetric() and len(S) == 13
    inp = MonodromyInput(pg, act, pg.basepoint(), Fraction(3, 2), S, 1)
    rep = check_conditions(inp)
    assert rep.all_hold()
    gp = build_cover_group(inp)
    v = covering_verdict(inp, gp)
    assert v.is_homeomorphism
    _, kfree, ktors = gp.projection_kernel()
    assert kfree == 0 and ktors == ()


# -- windows ------------------------------------------------------------------


def test_window_radius_zero_is_the_ball():
    inp = grid_input()
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 0)
    assert len(w.classes) == len(inp.ball)
    assert sorted(w.labels.values()) == sorted(inp.ball.vertices)


def test_grid_window_isomorphic_to_patch():
    inp = grid_input()
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 2)
    labels = w.labels
    assert len(set(labels.values())) == len(w.classes)
    image = set(labels.values())
    patch_edges = set()
    for x in image:
        for y, _ in inp.pg.neighbors(x):
            if y in image and y != x:
                patch_edges.add(frozenset((x, y)))
    mapped = {frozenset((labels[a], labels[b])) for e in w.edges for a, b in [tuple(e)]}
    assert mapped == patch_edges


def test_window_closure_idempotent():
    inp = grid_input()
    gp = build_cover_group(inp)
    for radius in (0, 1, 2):
        w = build_cover_window(inp, gp, radius)
        assert window_closure_is_stable(inp, gp, w)


def test_window_equivariance_is_enforced():
    # labels agree across all members of every class by construction;
    # build_cover_window raises if not, so reaching here means it held
    inp = cylinder_input(m=7)
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 3)
    for c, mem in w.members.items():
        for word, x in mem:
            rep = gp.project(word)
            assert inp.action.apply(rep, x) == w.labels[c]


def test_cylinder_window_exhibits_two_sheets():
    inp = cylinder_input()
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 8)
    col = label_collisions(w)
    assert col
    # a pair of distinct classes over the same base vertex
    lab, classes = next(iter(sorted(col.items())))
    assert len(classes) >= 2
    lh = verify_local_homeomorphism(w, inp)
    assert lh.status == "ok"
    assert lh.complete_components >= 2


def test_sheet_separation_over_basepoint():
    # representatives of distinct sheets never differ by an embedded tile
    inp = cylinder_input()
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 8)
    p = inp.basepoint
    over_p = [c for c in w.classes if w.labels[c] == p]
    tsharp = {gp.generator_element(t) for t in inp.tiles(1)}
    reps = [min(w.members[c])[0] for c in over_p]
    for i, a in enumerate(reps):
        for b in reps[i + 1:]:
            assert gp.add(a, gp.neg(b)) not in tsharp


def test_grid_windows_injective_when_homeo():
    inp = grid_input()
    gp = build_cover_group(inp)
    for radius in (0, 1, 2, 3):
        w = build_cover_window(inp, gp, radius)
        assert not label_collisions(w)


def test_local_homeo_grid():
    inp = grid_input()
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 2)
    lh = verify_local_homeomorphism(w, inp)
    assert lh.status == "ok"
    assert lh.component_count == 1


def test_local_homeo_inconclusive_on_tiny_window():
    inp = cylinder_input(m=7)
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 0)
    lh = verify_local_homeomorphism(w, inp)
    assert lh.status == "inconclusive"


def test_chord_circle_gluing_obstruction():
    pg, act = chord_circle()
    inp = MonodromyInput(pg, act, pg.basepoint(), Fraction(3, 2),
                         WordSet.l1_ball(1, 1), 1)
    rep = check_conditions(inp)
    assert not rep.cond_iii
    gp = build_cover_group(inp)
    w = build_cover_window(inp, gp, 6)
    lh = verify_local_homeomorphism(w, inp)
    assert lh.status == "fail"
    assert lh.witness is not None


# -- tree sanity --------------------------------------------------------------


TREE_CASES = [
    (line, Fraction(3, 2), 2, 2),
    (line, Fraction(5, 2), 3, 2),
    (weighted_line, Fraction(7, 4), 2, 2),
    (caterpillar_line, Fraction(3, 2), 2, 2),
    (swap_line, Fraction(5, 4), 3, 2),
]


@pytest.mark.parametrize("builder,r,s_radius,power", TREE_CASES)
def test_tree_models_always_self_cover(builder, r, s_radius, power):
    pg, act = builder()
    inp = MonodromyInput(pg, act, pg.basepoint(), r,
                         WordSet.l1_ball(act.rank, s_radius), power)
    rep = check_conditions(inp)
    assert rep.all_hold()
    gp = build_cover_group(inp)
    v = covering_verdict(inp, gp)
    assert v.is_homeomorphism, "nontrivial cover verdict on a tree model"
