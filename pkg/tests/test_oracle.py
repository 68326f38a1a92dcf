"""Exhaustive single-step oracle against the structured candidates."""
import random
from fractions import Fraction as F

import pytest

from mushy.lattice import CoordRect, DiscreteSet, Params
from mushy.oracle import SearchSpaceError, exhaustive_minimize, verify_structure


def test_single_site_island_rule():
    # a lone doubly even site persists iff 4*alpha*gamma < 1, ties at 1
    one = DiscreteSet([(0, 0)])
    r = exhaustive_minimize(one, Params.from_gamma(F(1, 8), F(1), F(1), F(1, 4)),
                            collar=0)
    assert r.minimizers == (one,) and r.min_value == F(1, 32)
    r = exhaustive_minimize(one, Params.from_gamma(F(1, 2), F(1), F(1), F(1, 4)),
                            collar=0)
    assert r.minimizers == (DiscreteSet(),)
    r = exhaustive_minimize(one, Params.from_gamma(F(1, 4), F(1), F(1), F(1, 4)),
                            collar=0)
    assert len(r.minimizers) == 2 and r.min_value == F(1, 16)
    assert r.matches_structured is None          # no rectangle to compare


def test_small_square_enumeration_count():
    p = Params.from_gamma(F(1, 8), F(1), F(1, 4), F(1, 4))
    r = exhaustive_minimize(CoordRect(0, 2, 0, 2).sites(), p, collar=0)
    assert r.enumerated == 512
    # dissipation-dominant design pins the square in place
    assert r.min_value == F(17, 16) and len(r.minimizers) == 1
    assert r.structure_ok and r.subset_ok and r.matches_structured
    assert verify_structure(r, CoordRect(0, 2, 0, 2).sites())


def test_coarse_eps_corner_shatter():
    # at eps = 1/2 the 3x3 square prefers its four doubly even corners,
    # a structured island state that beats every rectangle candidate
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 2))
    r = exhaustive_minimize(CoordRect(0, 2, 0, 2).sites(), p, collar=1)
    assert r.enumerated == 2 ** 25
    assert r.min_value == F(2)
    assert r.minimizers == (DiscreteSet([(0, 0), (0, 2), (2, 0), (2, 2)]),)
    assert r.structure_ok and r.subset_ok
    assert r.matches_structured is False


def test_collar_excludes_exterior_minimum():
    # collar sites are enumerable but never join a minimizer here
    p = Params.from_gamma(F(1, 8), F(1), F(1, 4), F(1, 4))
    r = exhaustive_minimize(CoordRect(0, 2, 0, 2).sites(), p, collar=1)
    assert r.enumerated == 2 ** 25
    assert r.subset_ok and r.matches_structured


def test_pruned_matches_dense():
    rng = random.Random(7)
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 6))
    for _ in range(5):
        sites = {(rng.randrange(-3, 4), rng.randrange(-3, 4))
                 for _ in range(rng.randrange(4, 13))}
        I = DiscreteSet(sites)
        dense = exhaustive_minimize(I, p, collar=0)
        pruned = exhaustive_minimize(I, p, collar=0, prune=True)
        assert dense.min_value == pruned.min_value
        assert set(m.sites for m in dense.minimizers) == \
            set(m.sites for m in pruned.minimizers)


def test_search_space_bound():
    with pytest.raises(SearchSpaceError):
        exhaustive_minimize(CoordRect(0, 4, 0, 4).sites(),
                            Params.from_gamma(F(1), F(1), F(1), F(1, 40)),
                            collar=1)         # 49 sites


def test_structured_match_frozen_anchor():
    # [0,4]^2 with collar 0: moving retain step lands on the family candidate
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(2, 17))
    r = exhaustive_minimize(CoordRect(0, 4, 0, 4).sites(), p, collar=0)
    assert r.min_value == F(114, 289)
    assert len(r.minimizers) == 1
    assert r.matches_structured and r.structure_ok and r.subset_ok
