"""Verification experiments: algebra identity, convergence, parameter sweep."""
from fractions import Fraction as F

import pytest

from mushy.experiments import (algebra_check, convergence_run, markdown_summary,
                               regime_sweep, sweep_summaries)
from mushy.lattice import Params
from mushy.limit import SideLengths, integrate


def test_algebra_check_exact():
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 60))
    rep = algebra_check(p, F(2, 5), F(2, 5), hmax=6, kmax=6)
    assert rep.ok and rep.family == "retain"
    assert rep.max_abs_formula == 0 and rep.max_abs_engine == 0
    assert rep.checked > 0 and rep.skipped >= 0
    assert (rep.n1, rep.n2) == (24, 24)


def test_algebra_check_rho_and_dissolve():
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 60))
    rep = algebra_check(p, F(9, 20), F(2, 5))  # rho2 = 1 exercises corrections
    assert rep.ok
    pd = Params.from_gamma(F(1), F(1), F(1), F(1, 60))
    repd = algebra_check(pd, F(2, 5), F(2, 5), hmax=4, kmax=4)
    assert repd.ok and repd.family == "dissolve"


def test_algebra_check_degenerate():
    p = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 2))
    with pytest.raises(ValueError):
        algebra_check(p, F(1, 2), F(1, 2))     # zero extent box


def test_convergence_first_order():
    study = convergence_run(SideLengths(0.6, 0.6), F(1),
                            [F(1, 50), F(1, 100)], 0.05,
                            alpha=F(1, 8), beta=F(1), n_probes=8)
    sups = [v for _, v in study.sup_errors]
    assert len(sups) == 2 and sups[1] < sups[0]
    assert len(study.rows) == 2 * len(study.probes)
    assert all(r.err >= 0 for r in study.rows)


def test_convergence_rejects_bad_eps_list():
    with pytest.raises(ValueError):
        convergence_run(SideLengths(0.6, 0.6), F(1), [], 0.05,
                        alpha=F(1, 8), beta=F(1))
    with pytest.raises(ValueError):
        convergence_run(SideLengths(0.6, 0.6), F(1),
                        [F(1, 100), F(1, 50)], 0.05,
                        alpha=F(1, 8), beta=F(1))


def test_convergence_probe_on_event_raises():
    p = Params.for_limit(F(1, 8), F(1), F(1))
    tr = integrate(SideLengths(0.6, 0.6), p, 0.1, 0.001)
    t_event = tr.events[0][0]
    with pytest.raises(ValueError):
        convergence_run(SideLengths(0.6, 0.6), F(1), [F(1, 50)], 0.1,
                        alpha=F(1, 8), beta=F(1), probe_times=[t_event])


def test_regime_sweep_rows():
    rows = regime_sweep([
        (F(1, 8), F(1), F(1), F(2, 5)),
        (F(1, 8), F(1), F(1), F(9, 10)),
        (F(1), F(1), F(1), F(1, 4)),
    ])
    by_l = {r.l: r for r in rows}
    assert by_l[F(2, 5)].regime == "WEAK_RETAIN"
    assert by_l[F(2, 5)].predicted == 1 and by_l[F(2, 5)].agrees
    assert by_l[F(9, 10)].pinned and by_l[F(9, 10)].predicted == 0
    assert by_l[F(1, 4)].regime == "WEAK_DISSOLVE"
    assert by_l[F(1, 4)].predicted == 2 and not by_l[F(1, 4)].island_retention
    summ = sweep_summaries(rows)
    assert isinstance(summ, dict) and summ


def test_regime_sweep_odd_four_ag():
    pt = (F(3, 4), F(1), F(1), F(1, 2))      # 4ag = 3
    with pytest.raises(ValueError):
        regime_sweep([pt])
    rows = regime_sweep([pt], allow_odd=True)
    assert rows[0].predicted is None


def test_markdown_summary_sections():
    p = Params.for_limit(F(1, 8), F(1), F(1))
    rows = regime_sweep([(F(1, 8), F(1), F(1), F(2, 5))])
    study = convergence_run(SideLengths(0.6, 0.6), F(1),
                            [F(1, 50), F(1, 100)], 0.05,
                            alpha=F(1, 8), beta=F(1), n_probes=6)
    text = markdown_summary(threshold_params=[p], sweep_rows=rows, study=study)
    assert text.startswith("# Double-porosity flow report")
    assert "WEAK_RETAIN" in text and "|" in text
