"""Acceptance criteria at their stated tolerances.

Each criterion is evaluated once per session; its one-line verdict is
printed by the test and repeated in the terminal summary.  Criteria whose
literal tolerance cannot be met are strict xfails, with separate tests for
the parts that do hold.
"""

import functools

import pytest

from photon_gauge_kit import acceptance as acc
from photon_gauge_kit import gauge as gb
from photon_gauge_kit.config import load_config
from photon_gauge_kit.synthesis import TruncationWarning

LINES = {}
BY_KEY = {fn.__name__: fn for fn in acc.CRITERIA}


@functools.lru_cache(maxsize=None)
def result(name):
    res = BY_KEY[name]()
    LINES[res.key] = res.line()
    print(res.line())
    return res


@pytest.mark.parametrize("name", [
    "criterion_2", "criterion_3", "criterion_4", "criterion_6", "criterion_8", "criterion_9",
    "criterion_10", "criterion_11", "criterion_12", "criterion_13", "criterion_truncation",
])
def test_criterion(name):
    res = result(name)
    assert res.passed, res.line()


@pytest.mark.xfail(strict=True, reason="lam=-1 vectors have <S_z> = -cos(theta), not cos(theta)")
def test_c1_literal_expectations():
    res = result("criterion_1")
    assert res.passed, res.line()


def test_c1_helicity_signed_expectations():
    res = result("criterion_1")
    assert res.measured["lam+1 err"] < 1e-12
    assert res.measured["lam-1 signed err"] < 1e-12
    assert res.measured["prob err"] < 1e-13


@pytest.mark.xfail(strict=True, reason="dimensionful residual; size set by the state scale")
@pytest.mark.slow
def test_c5_commutator_magnitude():
    res = result("criterion_5")
    assert res.passed, res.line()


@pytest.mark.slow
def test_c5_commutator_order():
    res = result("criterion_5")
    assert 1.7 <= res.measured["min order"] and res.measured["max order"] <= 2.3
    assert all(r["fine"] < r["coarse"] for r in res.details["rows"])


@pytest.mark.xfail(strict=True, reason="dimensionful residual; size set by the state scale")
@pytest.mark.slow
def test_c7_covariance_magnitude():
    res = result("criterion_7")
    assert res.passed, res.line()


@pytest.mark.slow
def test_c7_covariance_order():
    res = result("criterion_7")
    assert 1.7 <= res.measured["min order"] and res.measured["max order"] <= 2.3
    assert max(res.details["linear_family"]) < 1e-12


# -- negative controls: the checks must be able to fail -------------------------------------
def test_flux_criterion_detects_a_sign_error(monkeypatch):
    original = gb.gauge_potential_cartesian
    monkeypatch.setattr(gb, "gauge_potential_cartesian",
                        lambda *args, **kw: -original(*args, **kw))
    assert not acc.criterion_3().passed


def test_truncation_criterion_detects_a_short_expansion():
    cfg = load_config(overrides=["field.l_max=3", "field.angular='one'"])
    with pytest.warns(TruncationWarning):
        res = acc.criterion_truncation(cfg)
    assert not res.passed
    assert res.measured["max tail estimate"] > acc.TAIL_TOLERANCE


def test_radial_oracle_detects_a_wrong_scale(monkeypatch):
    original = acc.radial_transform
    monkeypatch.setattr(acc, "radial_transform", lambda *a, **kw: 1.001 * original(*a, **kw))
    assert not acc.criterion_10().passed


def test_result_lines_are_single_lines():
    res = result("criterion_2")
    line = res.line()
    assert "\n" not in line
    assert line.startswith("[PASS] C2 ")
    assert res.as_dict()["key"] == "C2"


@pytest.mark.slow
def test_verify_twice_is_byte_identical(tmp_path):
    from photon_gauge_kit.commands import run_command

    cfg = load_config()
    for name in ("a", "b"):
        run_command("verify", cfg, tmp_path / name, quiet=True)
    for name in ("acceptance.csv", "acceptance.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
