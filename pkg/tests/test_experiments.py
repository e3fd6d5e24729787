import json

import numpy as np
import pytest

from adiaspin.errors import InvalidInputError, MisuseError
from adiaspin.experiments import (
    DEFAULT_CASE_II,
    ROW_FIELDS,
    SweepSpec,
    case_ii_nu,
    claims_json,
    claims_report,
    default_case_i_fields,
    run_case_i,
    run_case_ii,
    run_rosen_zener,
    rz_flip_closed_form,
    thread_count,
)
from adiaspin.fields import Rotating

SMALL = SweepSpec(beta0_values=(2.0, 5.0), zeta_values=(1.0, 2.0))


@pytest.mark.parametrize("name, m, t0, t1", default_case_i_fields())
def test_case_i(name, m, t0, t1):
    assert run_case_i(m, t0, t1, label=name).passed


def test_case_i_rejects_transverse():
    with pytest.raises(MisuseError):
        run_case_i(Rotating(1, 1, 2), 0, 1)


@pytest.mark.parametrize("params", DEFAULT_CASE_II)
def test_case_ii(params):
    nu = case_ii_nu(*params)
    for dur in (1 / nu, 1e3 / nu):
        row = run_case_ii(*params, dur)
        assert row.passed, row


def test_case_ii_validation():
    with pytest.raises(InvalidInputError):
        run_case_ii(1, 0, 2, 1.0)


class TestSpec:
    def test_round_trip(self):
        assert SweepSpec.from_dict(SMALL.as_dict()) == SMALL

    @pytest.mark.parametrize("kw", [
        {"horizon_multiple": 5}, {"beta0_values": (-1.0,)}, {"zeta_values": ()},
        {"conventions": ("bogus",)}, {"axis_map": "x->q"}, {"oracle_tol": 0.0}, {"t_cap": 0.0},
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            SweepSpec(**kw)

    def test_unknown_key(self):
        with pytest.raises(InvalidInputError):
            SweepSpec.from_dict({"beta": [1]})


@pytest.fixture(scope="module")
def small_report():
    return run_rosen_zener(SMALL)


def test_sweep_shape(small_report):
    assert len(small_report.rows) == 2 * 2 * 3
    header = small_report.to_csv().splitlines()[0].split(",")
    assert tuple(header) == ROW_FIELDS
    for r in small_report.rows:
        assert 0 <= r.w_exact <= 1 and 0 <= r.w_adiabatic <= 1
        assert r.horizon_converged


def test_sweep_deterministic(small_report, monkeypatch):
    monkeypatch.setenv("ADIASPIN_THREADS", "1")
    assert run_rosen_zener(SMALL).to_csv() == small_report.to_csv()


def test_thread_count(monkeypatch):
    monkeypatch.setenv("ADIASPIN_THREADS", "3")
    assert thread_count() == 3


def test_claims_structure(small_report):
    rep = claims_report(SMALL, small_report)
    assert rep["case_i_exactness"]["status"] == "PASS"
    assert rep["case_ii_exactness"]["status"] == "PASS"
    for conv in SMALL.conventions:
        block = rep["rosen_zener"][conv]
        assert block["one_percent"]["status"] in ("PASS", "NOT-REPRODUCED")
        assert block["scaling"]["status"] in ("PASS", "NOT-REPRODUCED")
        assert len(block["scaling"]["w_exact"]) == len(block["scaling"]["beta0"])
    assert rep["fidelity_trend"]["status"] == "PASS"
    assert rep["closed_form"]["status"] == "PASS"
    doc = json.loads(claims_json(rep))
    assert doc["horizon"]["non_converged_rows"] == 0


def test_closed_form_values():
    assert rz_flip_closed_form(1.5, 1.0) < 1e-30
    assert rz_flip_closed_form(1.5, 0.5) == pytest.approx(1 / np.cosh(1.5 * np.pi) ** 2)


def test_closed_form_matches_oracle_at_non_integer_zeta():
    spec = SweepSpec(beta0_values=(1.5,), zeta_values=(0.5,), conventions=("lab-x",))
    row = run_rosen_zener(spec).rows[0]
    assert row.w_exact_2k == pytest.approx(row.w_closed_form, rel=1e-6)
