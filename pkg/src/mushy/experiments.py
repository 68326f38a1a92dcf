"""Reproducibility harness: convergence studies, algebra checks, regime sweeps.

Everything here is a thin, deterministic driver over the flow and limit
modules.  Numbers that can be exact stay exact (Fractions); only the
time axis of the continuum comparison lives in floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .lattice import CoordRect, DiscreteSet, Params, RectState, perimeter_energy, step_energy
from .closed_forms import (
    NonUniqueRegimeError,
    Regime,
    RectExtents,
    dissolve_value_exact,
    f_eps,
    formula_domain_ok,
    g_eps,
    predict_displacement,
    retain_value_exact,
    thresholds,
)
from .flow import candidate_weak_dissolve, candidate_weak_retain, evolve, step_minimize
from .limit import LimitTrace, SideLengths, integrate


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ConvergenceRow:
    """One (mesh, probe-time) comparison between discrete and limit flows."""

    eps: Fraction
    tau: Fraction
    t_probe: float
    L1_discrete: float
    L1_limit: float
    err: float


@dataclass(frozen=True)
class ConvergenceStudy:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    T: float
    dt: float
    probes: tuple[float, ...]
    rows: tuple[ConvergenceRow, ...]
    sup_errors: tuple[tuple[Fraction, float], ...]   # (eps, sup over probes)
    ratios: tuple[float, ...]                        # consecutive sup-error ratios
    events: tuple[tuple[float, str], ...]            # limit-flow events


def _pick_probes(T: float, dt: float, n_probes: int,
                 events: Sequence[tuple[float, str]]) -> list[float]:
    # uniform grid on (0, T), minus a dt-neighborhood of every limit event
    raw = [T * i / (n_probes + 1) for i in range(1, n_probes + 1)]
    return [t for t in raw
            if all(abs(t - te) > dt for te, _ in events)]


def _discrete_L1_at(t: float, tau: Fraction, eps: Fraction, states) -> float:
    j = int(Fraction(t) / tau)
    j = min(j, len(states) - 1)
    rect = states[j].rect
    return float(eps * rect.extent1) if rect is not None else 0.0


def convergence_run(L0: SideLengths, gamma: Fraction,
                    eps_list: Sequence[Fraction], T: float, *,
                    alpha: Fraction, beta: Fraction,
                    dt: Optional[float] = None, n_probes: int = 12,
                    probe_times: Optional[Sequence[float]] = None,
                    mode: str = "closed",
                    max_steps: int = 100000) -> ConvergenceStudy:
    """Compare the scaled discrete flow against the limit ODE at probe times.

    L0.L1 is the horizontal side (extent n1), L0.L2 the vertical one.  For
    each eps the time step is tau = gamma*eps, so gamma is held fixed along
    the whole list.  Probe times are chosen uniformly in (0, T) and any that
    fall within dt of a limit-flow event are dropped; explicitly supplied
    probe_times that collide with an event raise instead, since a pointwise
    comparison at a velocity discontinuity is ill-posed.

    Per row, err = |eps*n1(t) - L1(t)|, except that it is 0 by convention
    once both flows have vanished.
    """
    gamma = Fraction(gamma)
    alpha, beta = Fraction(alpha), Fraction(beta)
    eps_list = [Fraction(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list is empty")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if dt is None:
        dt = T / 256.0

    p_lim = Params.for_limit(alpha, beta, gamma)
    trace = integrate(L0, p_lim, T, dt)
    events = tuple(trace.events)

    if probe_times is not None:
        probes = [float(t) for t in probe_times]
        for t in probes:
            if not 0.0 < t <= T:
                raise ValueError(f"probe time {t} outside (0, T]")
            if any(abs(t - te) <= dt for te, _ in events):
                raise ValueError(f"probe time {t} is within dt of a limit event")
    else:
        probes = _pick_probes(T, dt, n_probes, events)

    L1_0, L2_0 = Fraction(L0.L1), Fraction(L0.L2)
    rows: list[ConvergenceRow] = []
    sups: list[tuple[Fraction, float]] = []
    for eps in eps_list:
        p = Params.from_gamma(alpha, beta, gamma, eps)
        ev = evolve(L2_0, L1_0, p, max_steps=max_steps, mode=mode)
        worst = 0.0
        for t in probes:
            ld = _discrete_L1_at(t, p.tau, eps, ev.states)
            ll, _ = trace.value_at(t)
            err = 0.0 if (ld == 0.0 and ll <= 0.0) else abs(ld - ll)
            rows.append(ConvergenceRow(eps=eps, tau=p.tau, t_probe=t,
                                       L1_discrete=ld, L1_limit=ll, err=err))
            worst = max(worst, err)
        sups.append((eps, worst))

    ratios = []
    for (_, a), (_, b) in zip(sups, sups[1:]):
        if b > 0.0:
            ratios.append(a / b)
        else:
            ratios.append(float("inf") if a > 0.0 else float("nan"))

    return ConvergenceStudy(alpha=alpha, beta=beta, gamma=gamma, T=T, dt=dt,
                            probes=tuple(probes), rows=tuple(rows),
                            sup_errors=tuple(sups), ratios=tuple(ratios),
                            events=events)


# ---------------------------------------------------------------------------
# closed-form vs direct algebra check


@dataclass(frozen=True)
class AlgebraReport:
    """Exact max |closed - direct| over an index box; both maxima must be 0."""

    family: str                      # "retain" or "dissolve"
    condo: bool
    n1: int
    n2: int
    checked: int                     # indices compared against the polynomials
    skipped: int                     # indices outside the polynomial domain
    max_abs_formula: Fraction
    worst_formula: Optional[tuple[int, int]]
    max_abs_engine: Fraction
    worst_engine: Optional[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return self.max_abs_formula == 0 and self.max_abs_engine == 0


def algebra_check(p: Params, L: Fraction, Lp: Fraction,
                  hmax: Optional[int] = None,
                  kmax: Optional[int] = None) -> AlgebraReport:
    """Exact discrepancy of the closed forms against materialized energies.

    L is the vertical side length and Lp the horizontal one; non-multiples
    of 2*eps exercise the rho correction terms.  The polynomial formulas are
    compared on their validity region 4*max(h,k) <= min(n1,n2)+2 and counted
    as skipped outside it; the frame-sum engine is compared on the whole box.
    """
    L, Lp = Fraction(L), Fraction(Lp)
    ext = RectExtents.from_lengths(L, Lp, p.eps)
    n1, n2 = ext.n1, ext.n2
    if n1 == 0 or n2 == 0:
        raise ValueError("lengths below one even lattice cell")
    th = thresholds(p)
    dissolve = th.four_ag > 1
    family = "dissolve" if dissolve else "retain"

    st = RectState(CoordRect(0, n1, 0, n2), DiscreteSet())
    I0 = st.materialize()
    base = perimeter_energy(I0, p)

    h_hi = n1 // 4 if hmax is None else min(hmax, n1 // 4)
    k_hi = n2 // 4 if kmax is None else min(kmax, n2 // 4)

    checked = skipped = 0
    max_f = max_e = Fraction(0)
    worst_f: Optional[tuple[int, int]] = None
    worst_e: Optional[tuple[int, int]] = None
    for h in range(h_hi + 1):
        for k in range(k_hi + 1):
            if dissolve:
                cand = candidate_weak_dissolve(h, k, ext, th.n_ag)
                v_eng = dissolve_value_exact(h, k, n1, n2, p)
            else:
                cand = candidate_weak_retain(h, k, I0, ext)
                v_eng = retain_value_exact(h, k, n1, n2, p)
            v_dir = (step_energy(cand, I0, p) - base) / p.eps
            d = abs(v_eng - v_dir)
            if d > max_e:
                max_e, worst_e = d, (h, k)
            if formula_domain_ok(h, k, n1, n2):
                checked += 1
                if dissolve:
                    v_pol = g_eps(h, k, L, Lp, ext, p)
                else:
                    v_pol = f_eps(h, k, L, Lp, ext, p)
                d = abs(v_pol - v_dir)
                if d > max_f:
                    max_f, worst_f = d, (h, k)
            else:
                skipped += 1
    return AlgebraReport(family=family, condo=ext.condo, n1=n1, n2=n2,
                         checked=checked, skipped=skipped,
                         max_abs_formula=max_f, worst_formula=worst_f,
                         max_abs_engine=max_e, worst_engine=worst_e)


# ---------------------------------------------------------------------------
# regime sweep


@dataclass(frozen=True)
class SweepRow:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    l: Fraction
    four_ag: Fraction
    regime: str
    n_ag: Optional[int]
    predicted: Optional[int]         # None when 4*alpha*gamma is an odd integer
    searched: Optional[int]
    searched_pair: Optional[tuple[int, int]]
    n_used: int
    stable: bool                     # searched agreed on two consecutive meshes
    pinned: bool
    bracket: str
    island_retention: bool           # doubly-even islands survive a step
    agrees: Optional[bool]


def _bracket_label(l: Fraction, th) -> str:
    def rel(x, name):
        if l < x:
            return f"below {name}"
        if l == x:
            return f"at {name}"
        return f"above {name}"

    if th.lambda_c is not None:
        return rel(th.lambda_c, "lambda_c")
    if l < th.lambda_minus:
        return "below lambda_minus"
    if l == th.lambda_minus:
        return "at lambda_minus"
    if l < th.lambda_plus:
        return "plateau (lambda_minus, lambda_plus)"
    if l == th.lambda_plus:
        return "at lambda_plus"
    return "above lambda_plus"


def _searched_displacement(l: Fraction, p_point: tuple[Fraction, Fraction, Fraction],
                           n_base: int, n_cap: int, mode: str
                           ) -> tuple[Optional[int], Optional[tuple[int, int]], int, bool]:
    """Square-datum scan displacement, refined until mesh-stable."""
    alpha, beta, gamma = p_point
    prev: Optional[int] = None
    prev_pair: Optional[tuple[int, int]] = None
    n = n_base
    while n <= n_cap:
        eps = l / n
        p = Params.from_gamma(alpha, beta, gamma, eps)
        st = RectState(CoordRect(0, n, 0, n), DiscreteSet())
        out = step_minimize(st, p, mode=mode, lengths=(l, l))
        cur = max(out.hk)
        if prev is not None and cur == prev:
            return cur, out.hk, n, True
        prev, prev_pair = cur, out.hk
        n *= 2
    return prev, prev_pair, n // 2, False


def regime_sweep(points: Iterable[tuple], *, allow_odd: bool = False,
                 n_base: int = 16, n_cap: int = 512,
                 mode: str = "closed") -> list[SweepRow]:
    """Predicted vs searched per-side displacement over a parameter grid.

    Each point is (alpha, beta, gamma, l).  The searched displacement runs
    step_minimize on square data with eps = l/n, doubling n until two
    consecutive meshes pick the same value (mesh-stability, capped at n_cap),
    which keeps the finite-eps corner corrections from polluting the table.
    Odd integer 4*alpha*gamma makes the closed-form prediction decline;
    such points are rejected unless allow_odd is set.
    """
    rows: list[SweepRow] = []
    for alpha, beta, gamma, l in points:
        alpha, beta, gamma, l = (Fraction(alpha), Fraction(beta),
                                 Fraction(gamma), Fraction(l))
        p_lim = Params.for_limit(alpha, beta, gamma)
        four_ag = p_lim.four_ag
        if four_ag.denominator == 1 and four_ag.numerator % 2 == 1 \
                and not allow_odd:
            raise ValueError(f"4*alpha*gamma = {four_ag} is an odd integer "
                             f"at point {(alpha, beta, gamma, l)}")
        th = thresholds(p_lim)
        try:
            predicted = predict_displacement(l, p_lim)
        except NonUniqueRegimeError:
            predicted = None
        base = max(n_base, 4 * (predicted or 0) + 8)
        base += base % 2
        searched, pair, n_used, stable = _searched_displacement(
            l, (alpha, beta, gamma), base, n_cap, mode)
        agrees = (predicted == searched) if (predicted is not None and stable) \
            else None
        rows.append(SweepRow(
            alpha=alpha, beta=beta, gamma=gamma, l=l, four_ag=four_ag,
            regime=th.regime.name, n_ag=th.n_ag, predicted=predicted,
            searched=searched, searched_pair=pair, n_used=n_used,
            stable=stable, pinned=(searched == 0),
            bracket=_bracket_label(l, th),
            island_retention=four_ag <= 1, agrees=agrees))
    return rows


def sweep_summaries(rows: Sequence[SweepRow]) -> dict:
    """Monotonicity posts over the sweep: in l at fixed params, in beta*gamma."""
    def disp(r: SweepRow) -> Optional[int]:
        return r.predicted if r.predicted is not None else r.searched

    by_params: dict[tuple, list[SweepRow]] = {}
    by_l: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        by_params.setdefault((r.alpha, r.beta, r.gamma), []).append(r)
        by_l.setdefault((r.alpha, r.l), []).append(r)

    viol_l = []
    for key, grp in by_params.items():
        grp = sorted(grp, key=lambda r: r.l)
        for a, b in zip(grp, grp[1:]):
            da, db = disp(a), disp(b)
            if da is not None and db is not None and db > da:
                viol_l.append((key, a.l, b.l))

    viol_bg = []
    for key, grp in by_l.items():
        grp = sorted(grp, key=lambda r: r.beta * r.gamma)
        for a, b in zip(grp, grp[1:]):
            da, db = disp(a), disp(b)
            if a.beta * a.gamma == b.beta * b.gamma:
                continue
            if da is not None and db is not None and db < da:
                viol_bg.append((key, a.beta * a.gamma, b.beta * b.gamma))

    return {"nonincreasing_in_l": not viol_l,
            "nondecreasing_in_beta_gamma": not viol_bg,
            "violations_in_l": viol_l,
            "violations_in_beta_gamma": viol_bg}


# ---------------------------------------------------------------------------
# markdown summary


def _md_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    out = ["| " + " | ".join(header) + " |",
           "| " + " | ".join("---" for _ in header) + " |"]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(out)


def markdown_summary(*, threshold_params: Optional[Sequence[Params]] = None,
                     sweep_rows: Optional[Sequence[SweepRow]] = None,
                     study: Optional[ConvergenceStudy] = None) -> str:
    """Markdown report with threshold, displacement and convergence tables."""
    from .io import rational_str

    parts: list[str] = ["# Double-porosity flow report"]
    if threshold_params:
        rows = []
        for p in threshold_params:
            th = thresholds(p)
            rows.append([rational_str(p.alpha), rational_str(p.beta),
                         rational_str(p.gamma), rational_str(th.four_ag),
                         th.regime.name,
                         rational_str(th.lambda_c) if th.lambda_c is not None else "-",
                         rational_str(th.lambda_minus) if th.lambda_minus is not None else "-",
                         rational_str(th.lambda_plus) if th.lambda_plus is not None else "-",
                         str(th.n_ag) if th.n_ag is not None else "-"])
        parts.append("## Critical thresholds\n" + _md_table(
            ["alpha", "beta", "gamma", "4ag", "regime",
             "lambda_c", "lambda_minus", "lambda_plus", "N"], rows))
    if sweep_rows:
        rows = [[rational_str(r.alpha), rational_str(r.beta),
                 rational_str(r.gamma), rational_str(r.l),
                 str(r.predicted) if r.predicted is not None else "-",
                 str(r.searched) if r.searched is not None else "-",
                 "yes" if r.pinned else "no", r.bracket,
                 "yes" if r.island_retention else "no"]
                for r in sweep_rows]
        parts.append("## Per-side displacements\n" + _md_table(
            ["alpha", "beta", "gamma", "l", "predicted", "searched",
             "pinned", "bracket", "islands"], rows))
        s = sweep_summaries(sweep_rows)
        parts.append(f"Monotone in l: {s['nonincreasing_in_l']}; "
                     f"monotone in beta*gamma: {s['nondecreasing_in_beta_gamma']}.")
    if study is not None:
        rows = [[rational_str(e), f"{v:.3e}"] for e, v in study.sup_errors]
        parts.append("## Convergence sup-errors\n" + _md_table(["eps", "sup err"], rows))
        if study.ratios:
            parts.append("Consecutive error ratios: "
                         + ", ".join(f"{r:.2f}" for r in study.ratios))
    return "\n\n".join(parts) + "\n"
