"""Serialization round trips and delimited output formats."""
import json
from fractions import Fraction as F

import pytest

from mushy.experiments import convergence_run
from mushy.flow import evolve
from mushy.io import (convergence_csv, convergence_json, dump_json,
                      evolve_trace_csv, evolve_trace_json, limit_trace_csv,
                      limit_trace_json, params_json, parse_rational,
                      rational_json, rational_str, thresholds_json, write_text)
from mushy.closed_forms import thresholds
from mushy.lattice import Params
from mushy.limit import SideLengths, integrate

P0 = Params.from_gamma(F(1, 8), F(1), F(1), F(1, 200))


def test_parse_rational_forms():
    assert parse_rational("1/8") == F(1, 8)
    assert parse_rational("0.125") == F(1, 8)
    assert parse_rational(" 3 ") == F(3)
    for bad in ("1/0", "x", "", "1/2/3"):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_rational_str_round_trip():
    for x in (F(1, 8), F(-3, 7), F(5), F(0)):
        assert parse_rational(rational_str(x)) == x
    assert rational_json(F(2, 3)) == {"num": 2, "den": 3}


def test_params_and_thresholds_json():
    obj = params_json(P0)
    assert obj["alpha"] == "1/8" and obj["gamma"] == "1"
    tj = thresholds_json(thresholds(P0))
    assert tj["regime"] == "weak_retain" and tj["lambda_c"] == "8/11"
    pd = Params.from_gamma(F(1), F(1), F(1), F(1, 100))
    td = thresholds_json(thresholds(pd))
    assert td["regime"] == "weak_dissolve" and td["lambda_plus"] == "2/3"
    assert td["lambda_c"] is None


def test_evolve_trace_formats():
    res = evolve(F(2, 5), F(2, 5), P0, max_steps=3)
    csv_text = evolve_trace_csv(res)
    lines = csv_text.strip().splitlines()
    assert lines[0] == ("step,h,k,L1_cells,L2_cells,islands_count,"
                        "energy_num,energy_den,pinned,tie_count")
    # header, initial row 0, then one row per step
    assert len(lines) == 2 + len(res.outcomes)
    assert lines[1].startswith("0,0,0,80,80,0,")
    obj = evolve_trace_json(res)
    assert obj["pinned"] == res.pinned
    assert len(obj["steps"]) == 1 + len(res.outcomes)


def test_limit_trace_formats():
    tr = integrate(SideLengths(0.6, 0.6), Params.for_limit(F(1, 8), F(1), F(1)),
                   0.05, 0.001)
    text = limit_trace_csv(tr)
    assert text.splitlines()[0] == "t,L1,L2,event"
    obj = limit_trace_json(tr)
    assert obj["times"][0] == 0.0 and len(obj["times"]) == len(obj["states"])


def test_convergence_formats():
    study = convergence_run(SideLengths(0.6, 0.6), F(1),
                            [F(1, 50), F(1, 100)], 0.05,
                            alpha=F(1, 8), beta=F(1), n_probes=6)
    text = convergence_csv(study)
    assert text.splitlines()[0] == "eps,tau,t_probe,L1_discrete,L1_limit,err"
    obj = convergence_json(study)
    assert [e for e, _ in obj["sup_errors"]] == ["1/50", "1/100"]


def test_dump_json_deterministic():
    a = dump_json({"b": 1, "a": [F(1, 2).numerator]})
    b = dump_json({"a": [1], "b": 1})
    assert a == b and a.endswith("\n")
    assert json.loads(a) == {"a": [1], "b": 1}


def test_write_text(tmp_path, capsys):
    path = tmp_path / "out.txt"
    write_text(str(path), "payload\n")
    assert path.read_text() == "payload\n"
    write_text(None, "to-stdout\n")
    assert capsys.readouterr().out == "to-stdout\n"
