"""Per-step minimization and discrete evolution of rectangular states.

A step from a rectangle with even extents (n1, n2) scans the index box
[0, n1//4] x [0, n2//4].  In the retain regime (4*alpha*gamma <= 1) the
candidate at (h, k) keeps every even site of the previous set; in the
dissolve regime (> 1) it keeps only the even sites at depth at least 2N
and drops islands left by earlier steps.  Values come either from the
closed forms (exact on their index region, frame sums elsewhere) or from
materialized sets and the lattice energies; the two modes must agree
exactly and are kept as independent routes on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .lattice import CoordRect, DiscreteSet, Params, RectState, perimeter_energy, step_energy
from .closed_forms import (
    Regime,
    RectExtents,
    Thresholds,
    NonUniqueRegimeError,
    closed_form_centers,
    dissolve_value_exact,
    f_eps,
    formula_domain_ok,
    g_eps,
    n_alpha_gamma,
    predict_pair,
    retain_value_exact,
    thresholds,
)

Frac = Fraction
Pair = tuple[int, int]


def core_rect(h: int, k: int, ext: RectExtents,
              origin: Pair = (0, 0)) -> CoordRect:
    """Inner rectangle after displacing the edge pairs inward by (2h, 2k)."""
    if h < 0 or k < 0 or 4 * h > ext.n1 or 4 * k > ext.n2:
        raise ValueError(f"({h}, {k}) outside the index box "
                         f"[0,{ext.n1 // 4}]x[0,{ext.n2 // 4}]")
    x0, y0 = origin
    return CoordRect(x0 + 2 * h, x0 + ext.n1 - 2 * h,
                     y0 + 2 * k, y0 + ext.n2 - 2 * k)


def candidate_weak_retain(h: int, k: int, I0: DiscreteSet, ext: RectExtents,
                          origin: Pair = (0, 0)) -> DiscreteSet:
    """Core at (h, k) plus every doubly-even site of the previous set."""
    sites = set(core_rect(h, k, ext, origin).sites())
    sites.update(s for s in I0 if s[0] % 2 == 0 and s[1] % 2 == 0)
    return DiscreteSet(sites)


def candidate_weak_dissolve(s: int, t: int, ext: RectExtents, n_ag: int,
                            origin: Pair = (0, 0)) -> DiscreteSet:
    """Core at (s, t) plus the doubly-even sites at depth 2*n_ag.

    The depth-2N box can be empty on small rectangles, leaving a bare core.
    """
    sites = set(core_rect(s, t, ext, origin).sites())
    if 4 * n_ag <= ext.n1 and 4 * n_ag <= ext.n2:
        ring = core_rect(n_ag, n_ag, ext, origin)
        sites.update(q for q in ring.sites() if q[0] % 2 == 0 and q[1] % 2 == 0)
    return DiscreteSet(sites)


@dataclass(frozen=True)
class StepOutcome:
    """Result of one minimization step over the full index box."""

    hk: Pair
    value: Fraction                 # normalized step energy of the minimizer
    ties: tuple[Pair, ...]          # every index pair achieving the minimum
    pinned: bool                    # step leaves the state unchanged
    vanished: bool                  # an extent shrank to zero
    regime: Regime
    boundary: bool                  # 4*alpha*gamma == 1, retained by convention
    predicted: Optional[Pair]       # closed-form prediction, None if non-unique
    predicted_ties: Optional[tuple[Pair, ...]]
    agrees: Optional[bool]
    guard_ok: bool                  # minimizer within the localization window
    mode: str


def _localization_window(L: Fraction, Lp: Fraction, p: Params) -> int:
    """Scan window bound: the parabola center of the shorter side plus slack."""
    m, _ = closed_form_centers(min(L, Lp), p)
    return max(0, math.ceil(m) + 2)


_MODE_ALIASES = {"closed": "closed", "closedform": "closed",
                 "direct": "direct"}


def step_minimize(state: RectState, p: Params, mode: str = "closed",
                  lengths: Optional[tuple[Fraction, Fraction]] = None,
                  strict_condo: bool = False) -> StepOutcome:
    """Minimize one step of the scheme from a rectangle-plus-islands state.

    lengths, when given, is (L, Lp) = (vertical, horizontal) side lengths of
    the initial datum; they must reduce to the extents of state.rect.  The
    step values themselves depend only on the integer extents, so lengths
    only feed the closed-form prediction.  mode is "closed"/"ClosedForm"
    (polynomials and frame sums) or "direct" (materialized sets and lattice
    energies).
    """
    mode_key = str(mode).lower().replace("-", "").replace("_", "")
    if mode_key not in _MODE_ALIASES:
        raise ValueError(f"unknown mode {mode!r}")
    mode = _MODE_ALIASES[mode_key]
    if state.rect is None:
        raise ValueError("state has no rectangle left")
    rect = state.rect
    n1, n2 = rect.extent1, rect.extent2

    if lengths is not None:
        L, Lp = Fraction(lengths[0]), Fraction(lengths[1])
        ext = RectExtents.from_lengths(L, Lp, p.eps, strict_condo=strict_condo)
        if ext.n1 != n1 or ext.n2 != n2:
            raise ValueError("lengths are inconsistent with the state extents")
    else:
        L, Lp = p.eps * n2, p.eps * n1
        ext = RectExtents(n1, n2, Fraction(0), Fraction(0), True)

    th = thresholds(p)
    dissolve = th.four_ag > 1
    n_ag = th.n_ag if dissolve else None
    island_shift = Fraction(0)
    if dissolve and len(state.islands) > 0:
        island_shift = (p.eps / p.gamma) * (1 - th.four_ag) * len(state.islands)

    if mode == "direct":
        I_prev = state.materialize()
        base = perimeter_energy(I_prev, p)
        origin = (rect.x0, rect.y0)

    best: Optional[Fraction] = None
    winners: list[Pair] = []
    for h in range(n1 // 4 + 1):
        for k in range(n2 // 4 + 1):
            if mode == "closed":
                if formula_domain_ok(h, k, n1, n2):
                    if dissolve:
                        v = g_eps(h, k, L, Lp, ext, p)
                    else:
                        v = f_eps(h, k, L, Lp, ext, p)
                elif dissolve:
                    v = dissolve_value_exact(h, k, n1, n2, p)
                else:
                    v = retain_value_exact(h, k, n1, n2, p)
                if dissolve:
                    v += island_shift
            else:
                if dissolve:
                    cand = candidate_weak_dissolve(h, k, ext, n_ag, origin)
                else:
                    cand = candidate_weak_retain(h, k, I_prev, ext, origin)
                v = (step_energy(cand, I_prev, p) - base) / p.eps
            if best is None or v < best:
                best, winners = v, [(h, k)]
            elif v == best:
                winners.append((h, k))

    winners.sort()
    hk = winners[0]
    pinned = hk == (0, 0) and not (dissolve and len(state.islands) > 0)
    vanished = (n1 - 4 * hk[0] == 0) or (n2 - 4 * hk[1] == 0)

    predicted = predicted_ties = agrees = None
    try:
        predicted, predicted_ties = predict_pair(L, Lp, p)
        agrees = hk == predicted or hk in predicted_ties
    except NonUniqueRegimeError:
        pass

    x_bar = _localization_window(L, Lp, p)
    guard_ok = hk[0] <= x_bar and hk[1] <= x_bar

    return StepOutcome(hk=hk, value=best, ties=tuple(winners), pinned=pinned,
                       vanished=vanished, regime=th.regime,
                       boundary=th.regime is Regime.BOUNDARY,
                       predicted=predicted, predicted_ties=predicted_ties,
                       agrees=agrees, guard_ok=guard_ok, mode=mode)


@dataclass(frozen=True)
class EvolveResult:
    """Discrete trajectory: states[i] steps to states[i+1] via outcomes[i]."""

    states: tuple[RectState, ...]
    outcomes: tuple[StepOutcome, ...]
    thresholds: Thresholds
    params: Params
    mode: str
    pinned: bool
    vanished: bool
    boundary_warning: bool

    def extents(self) -> list[Pair]:
        return [(s.rect.extent1, s.rect.extent2) for s in self.states]


def _advance(state: RectState, hk: Pair, dissolve: bool,
             n_ag: Optional[int]) -> RectState:
    h, k = hk
    rect = state.rect
    new_rect = CoordRect(rect.x0 + 2 * h, rect.x1 - 2 * h,
                         rect.y0 + 2 * k, rect.y1 - 2 * k)
    if dissolve:
        islands = set()
        if 4 * n_ag <= rect.extent1 and 4 * n_ag <= rect.extent2:
            ext = RectExtents(rect.extent1, rect.extent2,
                              Fraction(0), Fraction(0), True)
            ring = core_rect(n_ag, n_ag, ext, (rect.x0, rect.y0))
            islands = {s for s in ring.sites()
                       if s[0] % 2 == 0 and s[1] % 2 == 0
                       and not new_rect.contains(s)}
        return RectState(new_rect, DiscreteSet(islands))
    kept = {s for s in rect.sites()
            if s[0] % 2 == 0 and s[1] % 2 == 0 and not new_rect.contains(s)}
    kept.update(state.islands)
    return RectState(new_rect, DiscreteSet(kept))


def evolve(L0: Fraction, Lp0: Fraction, p: Params, max_steps: int = 10000,
           mode: str = "closed", strict_condo: bool = False) -> EvolveResult:
    """Run the scheme from a coordinate rectangle of side lengths (L0, Lp0).

    L0 is the vertical side (extent n2) and Lp0 the horizontal one (n1).
    Stops at pinning, vanishing, or max_steps.  In the dissolve regime each
    step absorbs the islands left by the one before; in the retain regime
    they accumulate.
    """
    L0, Lp0 = Fraction(L0), Fraction(Lp0)
    ext = RectExtents.from_lengths(L0, Lp0, p.eps, strict_condo=strict_condo)
    if ext.n1 == 0 or ext.n2 == 0:
        raise ValueError("initial lengths below one even lattice cell")
    th = thresholds(p)
    dissolve = th.four_ag > 1
    n_ag = th.n_ag if dissolve else None

    state = RectState(CoordRect(0, ext.n1, 0, ext.n2), DiscreteSet())
    states = [state]
    outcomes: list[StepOutcome] = []
    pinned = vanished = False
    for step in range(max_steps):
        lengths = (L0, Lp0) if step == 0 else None
        out = step_minimize(state, p, mode=mode, lengths=lengths,
                            strict_condo=strict_condo and step == 0)
        outcomes.append(out)
        if out.pinned:
            states.append(state)
            pinned = True
            break
        state = _advance(state, out.hk, dissolve, n_ag)
        states.append(state)
        if out.vanished:
            vanished = True
            break
    return EvolveResult(states=tuple(states), outcomes=tuple(outcomes),
                        thresholds=th, params=p, mode=mode, pinned=pinned,
                        vanished=vanished,
                        boundary_warning=th.regime is Regime.BOUNDARY)
