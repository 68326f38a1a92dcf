"""Single minimization steps and the fixed-eps evolution loop."""
from fractions import Fraction as F

import pytest

from mushy.closed_forms import RectExtents, Regime
from mushy.flow import (candidate_weak_dissolve, candidate_weak_retain,
                        core_rect, evolve, step_minimize)
from mushy.lattice import CoordRect, DiscreteSet, Params, RectState, interior_depth_map

P0 = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 200))


def square_state(n):
    return RectState(CoordRect(0, n, 0, n), DiscreteSet())


def test_step_first_move():
    out = step_minimize(square_state(80), P0, lengths=(F(2, 5), F(2, 5)))
    assert out.hk == (1, 1) and out.ties == ((1, 1),)
    assert out.predicted == (1, 1) and out.agrees and out.guard_ok
    assert out.regime is Regime.WEAK_RETAIN and not out.pinned


def test_step_pinned_above_threshold():
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 100))
    out = step_minimize(square_state(100), p, lengths=(F(1), F(1)))
    assert out.hk == (0, 0) and out.pinned and out.agrees


def test_closed_equals_direct():
    for p in (Params.from_gamma(F(1, 8), F(1), F(1), F(1, 20)),
              Params.from_gamma(F(1), F(1), F(1), F(1, 20))):
        st = square_state(8)
        a = step_minimize(st, p, mode="closed")
        b = step_minimize(st, p, mode="direct")
        assert (a.hk, a.value, a.ties) == (b.hk, b.value, b.ties)


def test_mode_validation():
    with pytest.raises(ValueError):
        step_minimize(square_state(8), P0, mode="fuzzy")
    with pytest.raises(ValueError):
        step_minimize(RectState(None, DiscreteSet([(0, 0)])), P0)
    with pytest.raises(ValueError):
        step_minimize(square_state(8), P0, lengths=(F(1), F(1)))


def test_tie_at_lambda_plus():
    pt = Params.from_gamma(F(1, 2), F(1), F(1), F(1, 96))
    st = RectState(CoordRect(0, 96, 0, 64), DiscreteSet())
    out = step_minimize(st, pt, mode="closed", lengths=(F(2, 3), F(1)))
    assert out.ties == ((0, 0), (1, 0))
    assert out.predicted_ties == ((0, 0), (1, 0)) and out.agrees


def test_candidate_builders():
    ext = RectExtents(4, 4, F(0), F(0), True)
    I0 = CoordRect(0, 4, 0, 4).sites()
    cand = candidate_weak_retain(1, 1, I0, ext, (0, 0))
    # inner rectangle plus the doubly even sites of the shed frame
    assert CoordRect(0, 4, 0, 4).sites().sites >= cand.sites
    assert (2, 2) in cand
    evens = {s for s in cand if s[0] % 2 == 0 and s[1] % 2 == 0}
    assert (0, 0) in evens and (4, 4) in evens
    # dissolve candidate at full depth keeps only the core site
    cd = candidate_weak_dissolve(1, 1, ext, 1, (0, 0))
    assert cd == DiscreteSet([(2, 2)])
    assert core_rect(1, 1, ext, (0, 0)) == CoordRect(2, 2, 2, 2)


def test_evolve_retain_islands():
    res = evolve(F(2, 5), F(2, 5), P0, max_steps=3)
    assert res.extents()[0] == (80, 80) and res.extents()[1] == (76, 76)
    isl = res.states[1].islands
    assert len(isl) > 0
    assert all(a % 2 == 0 and b % 2 == 0 for a, b in isl)
    old = res.states[0].materialize()
    new_rect = res.states[1].rect
    assert all(s in old and not new_rect.contains(s) for s in isl)


def test_evolve_finite_eps_corner_flip_and_extinction():
    # at eps = 1/100 the first step flips one cell past the prediction and
    # the second is a whole-rectangle extinction jump
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 100))
    res = evolve(F(2, 5), F(2, 5), p)
    o1, o2 = res.outcomes[0], res.outcomes[1]
    assert o1.hk == (2, 2) and o1.agrees is False and o1.guard_ok
    assert o2.hk == (8, 8) and not o2.guard_ok and o2.vanished
    assert res.vanished and not res.pinned


def test_evolve_dissolve_island_lifecycle():
    # N = 1 plateau: one moving step sheds core islands, the next removes them
    p = Params.from_gamma(F(1, 2), F(1), F(1), F(1, 20))
    res = evolve(F(1, 2), F(1, 2), p)
    counts = [len(s.islands) for s in res.states]
    assert counts[0] == 0 and counts[1] > 0 and counts[2] == 0
    depth = interior_depth_map(res.states[0].materialize())
    assert min(depth[s] for s in res.states[1].islands) >= 3  # 2N+1
    assert res.pinned


def test_evolve_boundary_warning():
    p = Params.from_gamma(F(1, 4), F(1), F(1), F(1, 40))  # 4ag = 1
    res = evolve(F(1, 2), F(1, 2), p, max_steps=1)
    assert res.boundary_warning


def test_guard_window_localizes():
    out = step_minimize(square_state(80), P0, lengths=(F(2, 5), F(2, 5)))
    assert out.guard_ok and max(out.hk) <= 4
