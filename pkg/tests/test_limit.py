"""Limit ODE right-hand side and the event-driven integrator."""
from fractions import Fraction as F

import pytest

from mushy.lattice import Params
from mushy.limit import (LimitTrace, SideLengths, crystalline_reference,
                         curvature_velocity, integrate, pinning_threshold,
                         rhs, rhs_infinite_gamma)

PR = Params.for_limit(F(1, 8), F(1), F(1))     # retain regime
PD = Params.for_limit(F(1), F(1), F(1))        # dissolve regime, 4ag = 4


def test_rhs_frozen_values():
    assert rhs(0.4, PR) == -4.0
    assert rhs(1.0, PR) == 0.0
    # just below the retain pinning threshold 8/11 the side still moves
    assert rhs(8 / 11 - 1e-9, PR) == -4.0


def test_pinning_threshold():
    assert pinning_threshold(PR) == F(8, 11)
    assert pinning_threshold(PD) == F(2, 3)


def test_rhs_slower_floor_semantics():
    # argument just below 1 floors to zero velocity
    assert rhs(0.73, PR) == 0.0
    # deep in the moving zone velocity steps by 4/gamma
    assert rhs(0.25, PR) == -8.0


def test_curvature_identity_exact():
    for p in (PR, PD, Params.for_limit(F(1), F(1), F(10000))):
        for k in range(5, 101):
            L = k / 100.0
            assert 2.0 * curvature_velocity(2.0 / L, p) == abs(rhs(L, p))


def test_infinite_gamma_envelope_and_crossover():
    p = Params.for_limit(F(1), F(1), F(10000))
    # branch crossover at L = 1/4 for alpha = beta = 1
    assert rhs_infinite_gamma(0.25, p) == -8.0
    assert rhs_infinite_gamma(0.2, p) == pytest.approx(-32 / 3)
    assert rhs_infinite_gamma(0.3, p) == pytest.approx(-2 / 0.3)
    assert crystalline_reference(0.2, p) == pytest.approx(-10.0)


def test_side_lengths_validation():
    with pytest.raises(ValueError):
        SideLengths(-0.1, 0.5)
    assert SideLengths(0.0, 0.0).vanished()
    assert not SideLengths(0.4, 0.4).vanished()


def test_integrate_pinned():
    tr = integrate(SideLengths(1.0, 1.0), PR, 0.5, 0.01)
    assert tr.events == [] or all(k != "FloorJump" for _, k in tr.events)
    assert tr.value_at(0.5) == (1.0, 1.0)
    assert tr.times[0] == 0.0 and tr.times[-1] == 0.5


def test_integrate_square_zeno_extinction():
    # square data hits the floor-jump accumulation point; the run must
    # terminate, vanish, and persist the dead state to the horizon
    tr = integrate(SideLengths(0.6, 0.6), PR, 0.1, 0.001)
    kinds = [k for _, k in tr.events]
    assert "Vanished" in kinds
    t_ext = [t for t, k in tr.events if k == "Vanished"][0]
    assert 0.0 < t_ext < 0.1
    assert tr.times[-1] == 0.1 and tr.value_at(0.1) == (0.0, 0.0)
    assert tr.value_at(t_ext / 2) > (0.0, 0.0)


def test_integrate_event_times_monotone():
    tr = integrate(SideLengths(0.6, 0.6), PR, 0.1, 0.001)
    ts = [t for t, _ in tr.events]
    assert ts == sorted(ts)
    assert all(t0 < t1 for t0, t1 in zip(tr.times, tr.times[1:]))


def test_integrate_dt_refinement_consistent():
    a = integrate(SideLengths(0.6, 0.6), PR, 0.05, 0.002)
    b = integrate(SideLengths(0.6, 0.6), PR, 0.05, 0.001)
    assert a.events == b.events
    for t in (0.01, 0.02, 0.04):
        xa, xb = a.value_at(t), b.value_at(t)
        assert xa[0] == pytest.approx(xb[0], abs=1e-12)
        assert xa[1] == pytest.approx(xb[1], abs=1e-12)


def test_value_at_outside_trace():
    tr = integrate(SideLengths(1.0, 1.0), PR, 0.1, 0.01)
    with pytest.raises(ValueError):
        tr.value_at(0.2)
    with pytest.raises(ValueError):
        tr.value_at(-0.01)


def test_anisotropic_vanish_linear():
    # strongly anisotropic data vanishes through the linear horizon check
    tr = integrate(SideLengths(0.05, 0.9), PD, 0.05, 0.0005)
    assert any(k == "Vanished" for _, k in tr.events)
    assert tr.value_at(tr.times[-1]) == (0.0, 0.0)
