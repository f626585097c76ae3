import dataclasses
import json

import pytest

from twistrenorm.config import TOL, RunConfig, Tolerances
from twistrenorm.errors import InputError, MalformedInput, TwistRenormError
from twistrenorm.io import load_fixed_point, read_csv, read_json, save_fixed_point, write_csv


def test_fixed_point_round_trip(tmp_path, solved):
    gen, rep, path = solved
    f = tmp_path / "fp.json"
    save_fixed_point(f, gen, rep, path)
    g, report = load_fixed_point(f)
    assert g.lam == gen.lam and g.mu == gen.mu
    assert (g.s.coeffs == gen.s.coeffs).all() and (g.z.coeffs == gen.z.coeffs).all()
    assert report["lambda"] == rep.lam


def test_not_a_fixed_point_file(tmp_path):
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"hello": 1}))
    with pytest.raises(MalformedInput):
        load_fixed_point(f)


def test_missing_and_malformed(tmp_path):
    with pytest.raises(InputError) as info:
        read_json(tmp_path / "nope.json")
    assert info.value.code == "MISSING_INPUT"
    bad = tmp_path / "bad.json"
    bad.write_text("[1,")
    with pytest.raises(MalformedInput) as info:
        read_json(bad)
    assert info.value.code == "MALFORMED_JSON"


def test_csv_round_trip(tmp_path):
    f = tmp_path / "a.csv"
    write_csv(f, ["word", "x"], [["01", 0.1 + 0.2]])
    (row,) = read_csv(f)
    assert row["word"] == "01" and float(row["x"]) == 0.1 + 0.2


def test_config_round_trip(tmp_path):
    cfg = RunConfig(degree_schedule=(6, 12), curve_iters=4)
    f = tmp_path / "c.json"
    f.write_text(json.dumps(cfg.to_dict()))
    assert RunConfig.load(f) == cfg


def test_config_validation():
    assert TOL.positive()
    with pytest.raises(ValueError):
        RunConfig(degree_schedule=(6, 6))
    with pytest.raises(ValueError):
        RunConfig(tolerances=dataclasses.replace(Tolerances(), residual=0.0))
    with pytest.raises(ValueError):
        RunConfig(trusted_domain=(1.0, -1.0))


def test_error_codes_and_context():
    e = TwistRenormError("boom", degree=3)
    assert e.code == "ERROR" and e.context == {"degree": 3}
    assert "degree=3" in str(e)
