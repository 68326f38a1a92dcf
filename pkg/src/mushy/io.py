"""Deterministic text forms: exact-rational CSV and JSON writers.

Rationals travel as "p/q" strings (or bare integers) in CSV and as
{"num": p, "den": q} objects in JSON so the exact values round-trip.
All writers emit fully deterministic bytes for identical inputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Optional

from .lattice import Params, RectState
from .closed_forms import Thresholds
from .flow import EvolveResult
from .limit import LimitTrace


def parse_rational(text: str) -> Fraction:
    """Exact parse of 'p/q', integer, or decimal-literal strings."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rational_json(x: Fraction) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def params_json(p: Params) -> dict:
    return {"alpha": rational_str(p.alpha), "beta": rational_str(p.beta),
            "eps": rational_str(p.eps), "tau": rational_str(p.tau),
            "gamma": rational_str(p.gamma)}


def thresholds_json(th: Thresholds) -> dict:
    def opt(x):
        return None if x is None else rational_str(x)
    return {
        "regime": th.regime.value,
        "four_alpha_gamma": rational_str(th.four_ag),
        "odd_four_alpha_gamma": th.odd_four_ag,
        "n_alpha_gamma": th.n_ag,
        "lambda_c": opt(th.lambda_c),
        "lambda_c_star": opt(th.lambda_c_star),
        "lambda_minus": opt(th.lambda_minus),
        "lambda_plus": opt(th.lambda_plus),
    }


# ---------------------------------------------------------------------------
# discrete trace


_TRACE_HEADER = ("step,h,k,L1_cells,L2_cells,islands_count,"
                 "energy_num,energy_den,pinned,tie_count")


def evolve_trace_rows(res: EvolveResult) -> list[dict]:
    """Row 0 is the initial state; row i the state after step i."""
    first = res.states[0]
    rows = [{
        "step": 0, "h": 0, "k": 0,
        "L1_cells": first.rect.extent1, "L2_cells": first.rect.extent2,
        "islands_count": len(first.islands),
        "energy": Fraction(0), "pinned": False, "tie_count": 0,
    }]
    for i, out in enumerate(res.outcomes):
        state = res.states[i + 1]
        rows.append({
            "step": i + 1, "h": out.hk[0], "k": out.hk[1],
            "L1_cells": state.rect.extent1, "L2_cells": state.rect.extent2,
            "islands_count": len(state.islands),
            "energy": out.value, "pinned": out.pinned,
            "tie_count": len(out.ties),
        })
    return rows


def evolve_trace_csv(res: EvolveResult) -> str:
    lines = [_TRACE_HEADER]
    for r in evolve_trace_rows(res):
        e = Fraction(r["energy"])
        lines.append(f'{r["step"]},{r["h"]},{r["k"]},{r["L1_cells"]},'
                     f'{r["L2_cells"]},{r["islands_count"]},'
                     f'{e.numerator},{e.denominator},'
                     f'{str(r["pinned"]).lower()},{r["tie_count"]}')
    return "\n".join(lines) + "\n"


def evolve_trace_json(res: EvolveResult) -> dict:
    steps = []
    for r in evolve_trace_rows(res):
        r = dict(r)
        r["energy"] = rational_json(r["energy"])
        steps.append(r)
    return {
        "params": params_json(res.params),
        "mode": res.mode,
        "regime": res.thresholds.regime.value,
        "boundary_warning": res.boundary_warning,
        "pinned": res.pinned,
        "vanished": res.vanished,
        "steps": steps,
    }


# ---------------------------------------------------------------------------
# limit trace


def limit_trace_csv(trace: LimitTrace) -> str:
    events = {t: kind for t, kind in trace.events}
    lines = ["t,L1,L2,event"]
    for t, (l1, l2) in zip(trace.times, trace.states):
        lines.append(f"{t!r},{l1!r},{l2!r},{events.get(t, '')}")
    return "\n".join(lines) + "\n"


def limit_trace_json(trace: LimitTrace) -> dict:
    return {
        "times": list(trace.times),
        "states": [[a, b] for a, b in trace.states],
        "events": [[t, kind] for t, kind in trace.events],
    }


# ---------------------------------------------------------------------------
# convergence study


def _float_or_str(x: float):
    # inf/nan are not strict JSON; ship them as strings
    import math
    return x if math.isfinite(x) else repr(x)


def convergence_csv(study) -> str:
    lines = ["eps,tau,t_probe,L1_discrete,L1_limit,err"]
    for r in study.rows:
        lines.append(f"{rational_str(r.eps)},{rational_str(r.tau)},"
                     f"{r.t_probe!r},{r.L1_discrete!r},{r.L1_limit!r},{r.err!r}")
    return "\n".join(lines) + "\n"


def convergence_json(study) -> dict:
    return {
        "alpha": rational_str(study.alpha),
        "beta": rational_str(study.beta),
        "gamma": rational_str(study.gamma),
        "T": study.T,
        "dt": study.dt,
        "probes": list(study.probes),
        "events": [[t, kind] for t, kind in study.events],
        "rows": [{
            "eps": rational_str(r.eps), "tau": rational_str(r.tau),
            "t_probe": r.t_probe, "L1_discrete": r.L1_discrete,
            "L1_limit": r.L1_limit, "err": r.err,
        } for r in study.rows],
        "sup_errors": [[rational_str(e), v] for e, v in study.sup_errors],
        "ratios": [_float_or_str(x) for x in study.ratios],
    }


# ---------------------------------------------------------------------------
# generic output plumbing


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(path: Optional[str], text: str) -> None:
    if path is None:
        print(text, end="" if text.endswith("\n") else "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)
