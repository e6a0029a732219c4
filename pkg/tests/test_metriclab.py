import json
import math

import pytest

from tmk import metriclab as ML
from tmk.errors import ConfigError

SMALL = dict(M=16, L_max=512, seed=3)


@pytest.fixture(scope="module")
def reports():
    return {name: fn(**SMALL) for name, fn in ML.PROBES.items()}


def test_windows_file():
    w = ML.load_windows()
    assert w["schema_version"] == ML.SCHEMA_VERSION
    assert set(ML.PROBES) <= set(w)


@pytest.mark.parametrize("name", sorted(ML.PROBES))
def test_json_round_trip(reports, name):
    r = reports[name]
    back = ML.ExperimentReport.from_json(r.to_json())
    assert back.to_dict() == json.loads(r.to_json())
    assert back.digest() == r.digest()


def test_schema_mismatch_rejected(reports):
    d = reports["lil"].to_dict()
    d["schema_version"] = 99
    with pytest.raises(Exception):
        ML.ExperimentReport.from_dict(d)


@pytest.mark.parametrize("name", sorted(ML.PROBES))
def test_small_probes_pass(reports, name):
    r = reports[name]
    assert r.samples == 16
    assert not r.failed
    assert r.statistical_ok()


def test_same_seed_same_report(reports):
    again = ML.probe_thm1_sums(**SMALL)
    assert again.digest() == reports["thm1"].digest()
    other = ML.probe_thm1_sums(M=16, L_max=512, seed=4)
    assert other.digest() != reports["thm1"].digest()


def test_threads_do_not_change_results(reports):
    r = ML.probe_lil_products(threads=4, **SMALL)
    assert r.digest() == reports["lil"].digest()


def test_checkpoints(reports):
    assert reports["lil"].checkpoints == [256, 512]
    assert ML._checkpoints(1000, 256) == [256, 512, 1000]


def test_parse_fspec():
    assert ML.parse_fspec("f1") == "f1"
    assert ML.parse_fspec("zero") == (0.0,)
    assert ML.parse_fspec("cos") == (1.0,)
    assert ML.parse_fspec("1,0.5,-0.3") == (1.0, 0.5, -0.3)
    for bad in ("1,0.6", "x", "", "nan"):
        with pytest.raises(ConfigError):
            ML.parse_fspec(bad)


def test_c_q():
    assert ML.c_q((0.0,)) == pytest.approx(170.0)
    norm = math.pi / math.sqrt(12)
    expect = max(170.0, 122 * norm**0.25 * math.sqrt(2) / (math.sqrt(2) - 1))
    assert ML.c_q("f1") == pytest.approx(expect, rel=1e-12)
    assert ML.c_q("f1") == pytest.approx(406.481, abs=1e-3)


def test_zero_function_statistic_is_zero():
    r = ML.probe_thm5_general(M=8, L_max=256, seed=1, fspec="zero")
    assert r.summary["statistic"]["256"]["max"] == 0.0
    assert r.summary["statistic"]["256"]["min"] == 0.0


def test_cos_single_harmonic():
    r = ML.probe_thm5_general(M=16, L_max=512, seed=2, fspec="cos")
    assert r.properties["single_harmonic"]["passed"]
    assert r.properties["trivial_bound"]["passed"]
