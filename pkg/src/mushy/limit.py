"""Continuum limit of the discrete flow: coupled ODEs for the side lengths.

Each pair of opposite edges moves inward with a velocity set by the length
of the orthogonal sides: L1' = rhs(L2), L2' = rhs(L1).  The right-hand side
is -(4/gamma) times a floored, clamped expression, so it is piecewise
constant along trajectories and the flow is piecewise linear; `integrate`
advances segment by segment, solving for the exact floor-jump times.  At a
value where the floor argument is an exact integer the slower velocity (the
one from the larger-length side of the discontinuity) applies, which is
what makes pinning at the critical length persistent.

This module works in floating point; everything upstream of it is exact.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .lattice import Params
from .closed_forms import Regime, thresholds

_EVENT_KINDS = ("FloorJump", "Pinned", "Vanished")


def _branches(p: Params, regime: Regime) -> list[tuple[float, float]]:
    """(c, d) pairs so the floor argument is max over branches of c/L + d."""
    b, a, g = float(p.beta), float(p.alpha), float(p.gamma)
    retain = (2.0 * b * g / 3.0, -2.0 * a * g / 3.0 + 1.0 / 6.0)
    if regime is Regime.WEAK_RETAIN:
        return [retain]
    return [retain, (b * g / 2.0, 0.25)]


def _argument(L_other: float, p: Params, regime: Regime) -> float:
    return max(c / L_other + d for c, d in _branches(p, regime))


def _slower_floor(a: float) -> int:
    """Floor taken from the larger-L side: exact integers drop by one."""
    return max(0, math.ceil(a) - 1)


def _regime_of(p: Params, regime: Optional[Regime]) -> Regime:
    return regime if regime is not None else thresholds(p).regime


def rhs(L_other: float, p: Params, regime: Optional[Regime] = None) -> float:
    """dL/dt for one edge pair, driven by the orthogonal side length."""
    if L_other <= 0:
        raise ValueError("side length must be positive")
    regime = _regime_of(p, regime)
    a = _argument(float(L_other), p, regime)
    return -4.0 / float(p.gamma) * _slower_floor(a)


def pinning_threshold(p: Params) -> Fraction:
    """Critical side length: longer sides do not move at all."""
    th = thresholds(p)
    if th.four_ag <= 1:
        return th.lambda_c
    return th.lambda_plus


def curvature_velocity(kappa: float, p: Params,
                       regime: Optional[Regime] = None) -> float:
    """Inward edge velocity as a function of crystalline curvature 2/L."""
    if kappa < 0:
        raise ValueError("curvature must be nonnegative")
    if kappa == 0:
        return 0.0
    return -rhs(2.0 / kappa, p, regime) / 2.0


def rhs_infinite_gamma(L_other: float, p: Params) -> float:
    """Floor-free velocity law in the tau << eps limit."""
    if L_other <= 0:
        raise ValueError("side length must be positive")
    b, a = float(p.beta), float(p.alpha)
    return -max(8.0 / 3.0 * (b / L_other - a), 2.0 * b / L_other)


def crystalline_reference(L_other: float, p: Params) -> float:
    """Curvature-only motion the perimeter limit alone would give."""
    if L_other <= 0:
        raise ValueError("side length must be positive")
    return -2.0 * float(p.beta) / L_other


@dataclass(frozen=True)
class SideLengths:
    L1: float
    L2: float

    def __post_init__(self):
        if self.L1 < 0 or self.L2 < 0:
            raise ValueError("side lengths must be nonnegative")

    def vanished(self) -> bool:
        return self.L1 <= 0 or self.L2 <= 0


@dataclass
class LimitTrace:
    """Sampled piecewise-linear trajectory with its discontinuity events."""

    times: list[float]
    states: list[tuple[float, float]]
    events: list[tuple[float, str]] = field(default_factory=list)

    def value_at(self, t: float) -> tuple[float, float]:
        """Exact state at time t (linear between recorded samples)."""
        if not self.times or t < self.times[0] or t > self.times[-1]:
            raise ValueError("time outside the trace")
        i = bisect_right(self.times, t) - 1
        if i == len(self.times) - 1:
            return self.states[-1]
        t0, t1 = self.times[i], self.times[i + 1]
        if t1 == t0:
            return self.states[i + 1]
        w = (t - t0) / (t1 - t0)
        a, b = self.states[i], self.states[i + 1]
        return (a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1]))


def _invert_argument(target: float, p: Params, regime: Regime) -> Optional[float]:
    """Largest L with argument(L) = target; None if unreachable."""
    sols = [c / (target - d) for c, d in _branches(p, regime) if target > d and c > 0]
    return max(sols) if sols else None


def integrate(L0: SideLengths, p: Params, T: float, dt: float,
              regime: Optional[Regime] = None) -> LimitTrace:
    """Integrate the coupled system up to time T.

    The flow is linear between floor jumps; each segment's end is found by
    inverting the floor argument, so events are located exactly (well within
    the dt reporting grid).  dt only controls the sampling density of the
    returned trace.
    """
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    if L0.L1 <= 0 or L0.L2 <= 0:
        raise ValueError("initial lengths must be positive")
    regime = _regime_of(p, regime)
    g = float(p.gamma)

    t, x1, x2 = 0.0, float(L0.L1), float(L0.L2)
    m1 = _slower_floor(_argument(x2, p, regime))  # drives L1
    m2 = _slower_floor(_argument(x1, p, regime))
    times, states = [t], [(x1, x2)]
    events: list[tuple[float, str]] = []

    def emit(tt: float, s1: float, s2: float) -> None:
        times.append(tt)
        states.append((s1, s2))

    def sample_linear(t0: float, t1: float, v1: float, v2: float) -> None:
        # grid points strictly inside (t0, t1]
        k = math.floor(t0 / dt) + 1
        while k * dt < t1 - 1e-15:
            tt = k * dt
            emit(tt, x1 + v1 * (tt - t0), x2 + v2 * (tt - t0))
            k += 1
        emit(t1, x1 + v1 * (t1 - t0), x2 + v2 * (t1 - t0))

    if m1 == 0 and m2 == 0:
        events.append((0.0, "Pinned"))
        emit(T, x1, x2)
        return LimitTrace(times, states, events)

    # below this length the floor jumps accumulate faster than float steps
    tiny = 1e-9 * max(x1, x2)
    # Zeno guard: near extinction of square-like data the jump times
    # accumulate, so segments shorter than the horizon's float resolution
    # three times in a row mean the remaining life is below time_eps
    time_eps = 1e-10 * max(T, 1.0)
    burst = 0

    while t < T:
        if min(x1, x2) < tiny:
            events.append((t, "Vanished"))
            x1, x2 = (x1 if x1 >= tiny else 0.0), (x2 if x2 >= tiny else 0.0)
            states[-1] = (x1, x2)
            break
        v1 = -4.0 / g * m1
        v2 = -4.0 / g * m2
        horizon = T - t
        s_end, kind = horizon, None
        if v1 < 0 and x1 / -v1 < s_end:
            s_end, kind = x1 / -v1, "Vanished"
        if v2 < 0 and x2 / -v2 < s_end:
            s_end, kind = x2 / -v2, "Vanished"
        # next floor jump of the argument driving each side
        if v2 < 0:
            Lstar = _invert_argument(m1 + 1.0, p, regime)
            if Lstar is not None and Lstar < x2:
                s = (x2 - Lstar) / -v2
                if s < s_end:
                    s_end, kind = s, "FloorJump"
        if v1 < 0:
            Lstar = _invert_argument(m2 + 1.0, p, regime)
            if Lstar is not None and Lstar < x1:
                s = (x1 - Lstar) / -v1
                if s < s_end:
                    s_end, kind = s, "FloorJump"
        t1 = t + s_end
        sample_linear(t, t1, v1, v2)
        x1, x2 = max(0.0, x1 + v1 * s_end), max(0.0, x2 + v2 * s_end)
        times[-1], states[-1] = t1, (x1, x2)
        t = t1
        if kind == "Vanished":
            events.append((t, "Vanished"))
            break
        if kind == "FloorJump":
            events.append((t, "FloorJump"))
            burst = burst + 1 if s_end < time_eps else 0
            if burst >= 3:
                events.append((t, "Vanished"))
                x1 = x2 = 0.0
                states[-1] = (0.0, 0.0)
                break
            # both arguments may cross at once (square data); bump each
            # side whose driving argument reached its next integer
            a1 = _argument(x2, p, regime) if x2 > 0 else math.inf
            a2 = _argument(x1, p, regime) if x1 > 0 else math.inf
            if a1 >= m1 + 1 - 1e-9 * max(1.0, m1 + 1.0):
                m1 += 1
            if a2 >= m2 + 1 - 1e-9 * max(1.0, m2 + 1.0):
                m2 += 1
    if times[-1] < T:
        # vanished before the horizon; persist the dead state to T
        emit(T, x1, x2)
    return LimitTrace(times, states, events)
