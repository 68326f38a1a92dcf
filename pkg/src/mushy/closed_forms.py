"""Closed-form step energies and thresholds for rectangle-driven motion.

For a previous set built on the rectangle [0,n1] x [0,n2] the candidates of
one minimizing-movement step are indexed by inward displacements (h, k) of
the vertical and horizontal edge pairs.  The normalized step energy

    (E(candidate, previous) - F(previous)) / eps

is a polynomial in (h, k) on the index region 4*max(h, k) <= min(n1, n2)+2;
`f_eps` (weak sites retained) and `g_eps` (weak sites dissolved beyond depth
2N) evaluate those polynomials exactly.  Outside that region the same value
is produced by `step_value_exact`, which sums the Chebyshev transport over
the removed frame directly, so the full index box can always be scanned.

Orientation: L is the vertical side length (index extent n2) and Lp the
horizontal one (n1).  The displacement h moves the vertical edges, whose
length is L, so h pairs with L throughout; k pairs with Lp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np

from .lattice import Params

Frac = Fraction


class RegimeError(ValueError):
    """Operation needs the other weak-site regime."""


class NonUniqueRegimeError(ValueError):
    """4*alpha*gamma is an odd integer: minimizers are not unique."""


class Regime(Enum):
    WEAK_RETAIN = "weak_retain"      # 4*alpha*gamma < 1
    BOUNDARY = "boundary"            # 4*alpha*gamma = 1
    WEAK_DISSOLVE = "weak_dissolve"  # 4*alpha*gamma > 1


def i_floor_even(x: Fraction, eps: Fraction) -> int:
    """Largest even integer not above x/eps."""
    if x < 0:
        raise ValueError("length must be nonnegative")
    return 2 * (math.floor(Fraction(x) / eps) // 2)


@dataclass(frozen=True)
class RectExtents:
    """Even index extents of a length pair, with the fractional remainders."""

    n1: int          # horizontal extent, i_eps(Lp)
    n2: int          # vertical extent, i_eps(L)
    rho1: Fraction   # Lp/eps - n1, in [0, 2)
    rho2: Fraction   # L/eps - n2, in [0, 2)
    condo: bool      # the shorter side divides evenly, so its rho vanishes

    @classmethod
    def from_lengths(cls, L: Fraction, Lp: Fraction, eps: Fraction,
                     strict_condo: bool = False) -> "RectExtents":
        L, Lp, eps = Fraction(L), Fraction(Lp), Fraction(eps)
        n1 = i_floor_even(Lp, eps)
        n2 = i_floor_even(L, eps)
        rho1 = Lp / eps - n1
        rho2 = L / eps - n2
        condo = (rho2 == 0) if L <= Lp else (rho1 == 0)
        if strict_condo and not condo:
            raise ValueError("eps does not divide the shorter side into an even count")
        return cls(n1, n2, rho1, rho2, condo)


def n_alpha_gamma(alpha: Fraction, gamma: Fraction) -> int:
    """Half the least odd integer exceeding 4*alpha*gamma; needs 4ag >= 1."""
    four_ag = 4 * Fraction(alpha) * Fraction(gamma)
    if four_ag < 1:
        raise RegimeError("island depth index only defined for 4*alpha*gamma >= 1")
    return (math.floor(four_ag) + 1) // 2


@dataclass(frozen=True)
class Thresholds:
    """Pinning/displacement thresholds; fields outside the regime are None."""

    regime: Regime
    four_ag: Fraction
    odd_four_ag: bool
    n_ag: Optional[int]
    lambda_c: Optional[Fraction]       # retain-side pinning threshold
    lambda_c_star: Optional[Fraction]  # dissolve-side deep-displacement threshold
    lambda_minus: Optional[Fraction]
    lambda_plus: Optional[Fraction]    # dissolve-side pinning threshold


def thresholds(p: Params) -> Thresholds:
    four_ag = p.four_ag
    bg = p.beta * p.gamma
    odd = four_ag.denominator == 1 and four_ag.numerator % 2 == 1
    if four_ag < 1:
        regime = Regime.WEAK_RETAIN
    elif four_ag == 1:
        regime = Regime.BOUNDARY
    else:
        regime = Regime.WEAK_DISSOLVE

    lam_c = 4 * bg / (four_ag + 5) if four_ag <= 1 else None
    n_ag = lam_star = lam_minus = lam_plus = None
    if four_ag >= 1:
        n_ag = n_alpha_gamma(p.alpha, p.gamma)
        lam_star = 4 * bg / (four_ag + 5 + 6 * n_ag)
        lam_minus = 2 * bg / (4 * n_ag - 1)
        lam_plus = 2 * bg / 3
    return Thresholds(regime, four_ag, odd, n_ag, lam_c, lam_star, lam_minus, lam_plus)


def closed_form_centers(l: Fraction, p: Params) -> tuple[Fraction, Fraction]:
    """Real minimizer locations (m, mu) of the two displacement parabolas."""
    l = Fraction(l)
    if l <= 0:
        raise ValueError("side length must be positive")
    bg = p.beta * p.gamma
    ag = p.alpha * p.gamma
    m = (2 * bg - (2 * ag + 1) * l) / (3 * l)
    mu = (2 * bg - l) / (4 * l)
    return m, mu


def predict_displacement(l: Fraction, p: Params) -> int:
    """Edge displacement along one direction as a function of the edge length.

    Weak-retain side: 0 above lambda_c, else floor(m(l) + 1/2).  Dissolve
    side: the four-branch staircase through lambda_plus, lambda_minus and
    lambda_c_star.  Odd-integer 4*alpha*gamma has no unique answer.
    """
    l = Fraction(l)
    if l <= 0:
        raise ValueError("side length must be positive")
    th = thresholds(p)
    bg = p.beta * p.gamma
    ag = p.alpha * p.gamma
    if th.four_ag <= 1:
        if l > th.lambda_c:
            return 0
        return math.floor(2 * bg / (3 * l) - 2 * ag / 3 + Fraction(1, 6))
    if th.odd_four_ag:
        raise NonUniqueRegimeError("4*alpha*gamma is an odd integer")
    if l > th.lambda_plus:
        return 0
    if l > th.lambda_minus:
        return math.floor(bg / (2 * l) + Fraction(1, 4))
    if l > th.lambda_c_star:
        return th.n_ag
    return math.floor(2 * bg / (3 * l) - 2 * ag / 3 + Fraction(1, 6))


def predict_pair(L: Fraction, Lp: Fraction, p: Params
                 ) -> tuple[tuple[int, int], tuple[tuple[int, int], ...]]:
    """Joint prediction (h, k) for vertical length L and horizontal length Lp.

    Returns (pair, ties); ties lists every predicted co-minimizer (the pair
    is the lexicographically smallest).  Raises NonUniqueRegimeError when
    4*alpha*gamma is an odd integer.
    """
    L, Lp = Fraction(L), Fraction(Lp)
    th = thresholds(p)
    lo, hi = min(L, Lp), max(L, Lp)
    if th.four_ag <= 1:
        if lo == th.lambda_c and lo < hi:
            return (0, 0), ((0, 0),)
        pair = (predict_displacement(L, p), predict_displacement(Lp, p))
        return pair, (pair,)
    if th.odd_four_ag:
        raise NonUniqueRegimeError("4*alpha*gamma is an odd integer")
    if lo == th.lambda_plus and lo < hi:
        if th.four_ag < 2:
            return (0, 0), ((0, 0),)
        if th.four_ag == 2:
            other = (1, 0) if L < Lp else (0, 1)
            return (0, 0), ((0, 0), other)
    pair = (predict_displacement(L, p), predict_displacement(Lp, p))
    return pair, (pair,)


# ---------------------------------------------------------------------------
# step-energy polynomials


def poly_pi(x: Fraction, p: Params) -> Fraction:
    ag = p.alpha * p.gamma
    return 3 * x * x + 2 * (2 * ag + 1) * x


def poly_P(l: Fraction, x: Fraction, p: Params) -> Fraction:
    return (Fraction(l) / p.gamma) * poly_pi(x, p) - 4 * p.beta * x


def poly_R(h: Fraction, k: Fraction, p: Params) -> Fraction:
    """Symmetric transport correction of the retain family."""
    ag = p.alpha * p.gamma
    M, m = (h, k) if h >= k else (k, h)
    return (2 * h * h + 2 * (2 * ag + 1) * h + 2 * k * k + 2 * (2 * ag + 1) * k
            - 8 * (2 * ag + 1) * h * k - 12 * M * m * m - 4 * M ** 3)


def poly_p(x: Fraction) -> Fraction:
    return 2 * x * (2 * x + 1)


def poly_Q(l: Fraction, x: Fraction, p: Params) -> Fraction:
    return (Fraction(l) / p.gamma) * poly_p(x) - 4 * p.beta * x


def poly_r(s: Fraction, t: Fraction, p: Params) -> Fraction:
    """Symmetric transport correction of the dissolve family (shallow part)."""
    ag = p.alpha * p.gamma
    M = max(s, t)
    return (Fraction(2, 3) * (1 + 4 * M) * poly_p(M)
            + (1 - 4 * M) * (poly_p(s) + poly_p(t)) - 4 * ag * (s + t))


def poly_R_ag(h: Fraction, k: Fraction, p: Params, n_ag: int) -> Fraction:
    ag = p.alpha * p.gamma
    N = n_ag
    return (poly_R(h, k, p) + 4 * N * (1 - 6 * N) * (h + k) - 24 * N * h * k
            - 12 * N * (h * h + k * k) - 8 * N * (2 * ag + 1) * (h + k))


def poly_pi_ag(k: Fraction, p: Params, n_ag: int) -> Fraction:
    ag = p.alpha * p.gamma
    return 3 * k * k + 2 * (3 * n_ag + 2 * ag + 1) * k + poly_p(n_ag)


def poly_r_ag(h: Fraction, t: Fraction, p: Params, n_ag: int) -> Fraction:
    N = n_ag
    return (poly_r(N, t, p) + 8 * h * (N - t) * (2 * N + 2 * t + 1)
            + poly_R_ag(h, 0, p, N))


_POLY_ARITY = {"pi": 1, "P": 2, "R": 2, "p": 1, "Q": 2, "r": 2,
               "R_ag": 2, "pi_ag": 1, "r_ag": 2}

# accepted spellings; case matters (P vs p, R vs r)
_POLY_ALIASES = {"π": "pi", "P_l": "P", "P_L": "P", "Q_l": "Q",
                 "Q_L": "Q", "R_αγ": "R_ag",
                 "π_αγ": "pi_ag", "pi_alpha_gamma": "pi_ag",
                 "r_αγ": "r_ag", "R_alpha_gamma": "R_ag",
                 "r_alpha_gamma": "r_ag"}


def poly_eval(name: str, args: tuple, p: Params, n_ag: Optional[int] = None) -> Fraction:
    """Evaluate a step-energy polynomial by name (exact)."""
    name = _POLY_ALIASES.get(name, name)
    if name not in _POLY_ARITY:
        raise ValueError(f"unknown polynomial {name!r}")
    if len(args) != _POLY_ARITY[name]:
        raise ValueError(f"{name} takes {_POLY_ARITY[name]} argument(s)")
    args = tuple(Fraction(a) for a in args)
    if name in ("R_ag", "pi_ag", "r_ag"):
        if n_ag is None:
            n_ag = n_alpha_gamma(p.alpha, p.gamma)
        fn = {"R_ag": poly_R_ag, "pi_ag": poly_pi_ag, "r_ag": poly_r_ag}[name]
        return fn(*args, p, n_ag)
    if name == "p":
        return poly_p(args[0])
    fn = {"pi": poly_pi, "P": poly_P, "R": poly_R, "Q": poly_Q, "r": poly_r}[name]
    return fn(*args, p)


# ---------------------------------------------------------------------------
# closed forms


def formula_domain_ok(h: int, k: int, n1: int, n2: int) -> bool:
    """Index region where the polynomial step energies are exact."""
    return 4 * max(h, k) <= min(n1, n2) + 2


def f_eps(h: int, k: int, L: Fraction, Lp: Fraction, ext: RectExtents,
          p: Params) -> Fraction:
    """Normalized step energy of the retain candidate at (h, k).

    Exact on formula_domain_ok; includes both fractional-remainder
    corrections (the rho2 one vanishes under the even-division convention).
    """
    e_g = p.eps / p.gamma
    return (poly_P(L, h, p) + poly_P(Lp, k, p) + e_g * poly_R(h, k, p)
            - e_g * (ext.rho1 * poly_pi(k, p) + ext.rho2 * poly_pi(h, p)))


def g_eps(s: int, t: int, L: Fraction, Lp: Fraction, ext: RectExtents,
          p: Params) -> Fraction:
    """Normalized step energy of the dissolve candidate at (s, t).

    Piecewise over the shallow, deep and mixed index regions split at the
    island depth index N; exact on formula_domain_ok.
    """
    N = n_alpha_gamma(p.alpha, p.gamma)
    L, Lp = Fraction(L), Fraction(Lp)
    e_g = p.eps / p.gamma
    rho1, rho2 = ext.rho1, ext.rho2
    if s <= N and t <= N:
        return (poly_Q(L, s, p) + poly_Q(Lp, t, p) + e_g * poly_r(s, t, p)
                - e_g * (rho1 * poly_p(t) + rho2 * poly_p(s)))
    if s >= N and t >= N:
        h, k = s - N, t - N
        return (poly_P(L, h, p) + 6 * L * N / p.gamma * h + poly_Q(L, N, p)
                + poly_P(Lp, k, p) + 6 * Lp * N / p.gamma * k + poly_Q(Lp, N, p)
                + e_g * (poly_r(N, N, p) + poly_R_ag(h, k, p, N))
                - e_g * (rho1 * poly_pi_ag(k, p, N) + rho2 * poly_pi_ag(h, p, N)))
    if s > N:  # t < N
        h = s - N
        return (poly_P(L, h, p) + 6 * L * N / p.gamma * h + poly_Q(L, N, p)
                + poly_Q(Lp, t, p) + e_g * poly_r_ag(h, t, p, N)
                - e_g * (rho1 * poly_p(t) + rho2 * poly_pi_ag(h, p, N)))
    k = t - N  # s < N
    return (poly_Q(L, s, p) + poly_P(Lp, k, p) + 6 * Lp * N / p.gamma * k
            + poly_Q(Lp, N, p) + e_g * poly_r_ag(k, s, p, N)
            - e_g * (rho1 * poly_pi_ag(k, p, N) + rho2 * poly_p(s)))


# ---------------------------------------------------------------------------
# exact frame evaluation (valid on the whole index box)


def _dist_box_sum(n1: int, n2: int, x_lo: int, x_hi: int, y_lo: int, y_hi: int,
                  even_only: bool = False) -> int:
    """Sum of Chebyshev depths min(x+1, n1-x+1, y+1, n2-y+1) over a box."""
    if x_hi < x_lo or y_hi < y_lo:
        return 0
    xs = np.arange(x_lo, x_hi + 1, dtype=np.int64)
    ys = np.arange(y_lo, y_hi + 1, dtype=np.int64)
    if even_only:
        xs = xs[xs % 2 == 0]
        ys = ys[ys % 2 == 0]
        if xs.size == 0 or ys.size == 0:
            return 0
    dx = np.minimum(xs + 1, n1 - xs + 1)
    dy = np.minimum(ys + 1, n2 - ys + 1)
    return int(np.minimum(dx[:, None], dy[None, :]).sum())


def _frame_sums(n1: int, n2: int, h: int, k: int, even_only: bool = False) -> int:
    """Depth sum over [0,n1]x[0,n2] minus the core [2h,n1-2h]x[2k,n2-2k]."""
    total = _dist_box_sum(n1, n2, 0, 2 * h - 1, 0, n2, even_only)
    total += _dist_box_sum(n1, n2, n1 - 2 * h + 1, n1, 0, n2, even_only)
    total += _dist_box_sum(n1, n2, 2 * h, n1 - 2 * h, 0, 2 * k - 1, even_only)
    total += _dist_box_sum(n1, n2, 2 * h, n1 - 2 * h, n2 - 2 * k + 1, n2, even_only)
    return total


def _even_count(lo: int, hi: int) -> int:
    if hi < lo:
        return 0
    return hi // 2 - (lo + 1) // 2 + 1


def retain_value_exact(h: int, k: int, n1: int, n2: int, p: Params) -> Fraction:
    """Normalized retain-candidate energy from exact frame sums."""
    transport = _frame_sums(n1, n2, h, k) - _frame_sums(n1, n2, h, k, even_only=True)
    weak_delta = 4 * k * (n1 + 1) + 4 * h * (n2 + 1) - 16 * h * k
    return (-4 * p.beta * (h + k) + p.eps * p.alpha * weak_delta
            + (p.eps / p.gamma) * transport)


def dissolve_value_exact(s: int, t: int, n1: int, n2: int, p: Params) -> Fraction:
    """Normalized dissolve-candidate energy from exact frame sums."""
    N = n_alpha_gamma(p.alpha, p.gamma)
    transport = _frame_sums(n1, n2, s, t)
    # retained islands: even sites of the depth-2N core outside the new core
    island_all = _dist_box_sum(n1, n2, 2 * N, n1 - 2 * N, 2 * N, n2 - 2 * N, True)
    S, T = max(s, N), max(t, N)
    island_inner = _dist_box_sum(n1, n2, 2 * S, n1 - 2 * S, 2 * T, n2 - 2 * T, True)
    transport -= island_all - island_inner
    count_all = (_even_count(2 * N, n1 - 2 * N) * _even_count(2 * N, n2 - 2 * N))
    count_inner = (_even_count(2 * S, n1 - 2 * S) * _even_count(2 * T, n2 - 2 * T))
    islands = count_all - count_inner
    weak_delta = 4 * islands - 4 * s - 4 * t
    return (-4 * p.beta * (s + t) + p.eps * p.alpha * weak_delta
            + (p.eps / p.gamma) * transport)


def step_value_exact(family: str, h: int, k: int, n1: int, n2: int,
                     p: Params) -> Fraction:
    """Exact normalized step energy for either candidate family."""
    if family == "retain":
        return retain_value_exact(h, k, n1, n2, p)
    if family == "dissolve":
        return dissolve_value_exact(h, k, n1, n2, p)
    raise ValueError(f"unknown family {family!r}")
