"""Figure rendering for the report path.

Plots are confined to this module so every other entry point stays
data-only; the report command writes PNGs next to its markdown and CSV.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .lattice import Params
from .flow import EvolveResult
from .limit import LimitTrace, crystalline_reference, rhs, rhs_infinite_gamma
from .experiments import ConvergenceStudy


def save_trajectory_figure(res: EvolveResult, trace: Optional[LimitTrace],
                           path: str) -> str:
    """Discrete staircase of eps*n1 against the limit trajectory."""
    eps = float(res.params.eps)
    tau = float(res.params.tau)
    times, vals = [], []
    for j, st in enumerate(res.states):
        n1 = st.rect.extent1 if st.rect is not None else 0
        times.append(j * tau)
        vals.append(eps * n1)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(times, vals, where="post", label="discrete eps*n1")
    if trace is not None:
        ax.plot(trace.times, [s[0] for s in trace.states],
                "k--", label="limit L1")
    ax.set_xlabel("t")
    ax.set_ylabel("side length")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def save_convergence_figure(study: ConvergenceStudy, path: str) -> str:
    """Sup-error against eps on log-log axes."""
    xs = [float(e) for e, _ in study.sup_errors]
    ys = [v for _, v in study.sup_errors]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(xs, ys, "o-", label="sup error")
    if xs and ys and ys[0] > 0:
        ax.loglog(xs, [ys[0] * x / xs[0] for x in xs], "k:",
                  label="first order")
    ax.set_xlabel("eps")
    ax.set_ylabel("sup |discrete - limit|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def save_velocity_figure(alpha: Fraction, beta: Fraction,
                         gammas: Sequence[Fraction], path: str,
                         L_min: float = 0.05, L_max: float = 1.0,
                         samples: int = 400) -> str:
    """Finite-gamma velocity staircases against their infinite-gamma envelope."""
    Ls = [L_min + (L_max - L_min) * i / (samples - 1) for i in range(samples)]
    fig, ax = plt.subplots(figsize=(6, 4))
    for g in gammas:
        p = Params.for_limit(alpha, beta, g)
        ax.plot(Ls, [rhs(L, p) for L in Ls], label=f"gamma={g}")
    p0 = Params.for_limit(alpha, beta, Fraction(1))
    ax.plot(Ls, [rhs_infinite_gamma(L, p0) for L in Ls], "k-",
            lw=2, label="gamma=inf")
    ax.plot(Ls, [crystalline_reference(L, p0) for L in Ls], "k:",
            label="crystalline -2b/L")
    ax.set_xlabel("L (other side)")
    ax.set_ylabel("dL/dt")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
