"""Command line behavior: exit codes, formats, config files, determinism."""

import json

import pytest

from katolab.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# happy paths per subcommand


def test_projections_verify_json(capsys):
    code, out, err = _run(capsys, "projections", "verify", "--max-n", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["command"] == "projections verify"
    assert all(r["residual"] <= 1e-12 for r in payload["rows"])


def test_projections_verify_minimal_table_shape(capsys):
    code, out, _ = _run(capsys, "projections", "verify", "--max-n", "2")
    assert code == 0
    payload = json.loads(out)
    families = [r["family"] for r in payload["rows"]]
    # two exterior, two interior, one each of the rest, plus the
    # pointwise twistor symbol row
    assert families.count("exterior") == 2
    assert families.count("interior") == 2
    assert families.count("symmetrization") == 1
    assert families.count("contraction") == 1
    assert families.count("clifford") == 1
    assert families.count("twistor") == 1
    assert families.count("twistor-symbol") == 1


def test_projections_verify_csv(capsys):
    code, out, _ = _run(capsys, "projections", "verify", "--max-n", "2",
                        "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "family,n,k,declared,measured,residual,ok"
    assert len(lines) == 10  # 8 table rows + twistor symbol row + header


def test_projections_verify_impossible_tolerance(capsys):
    code, out, err = _run(capsys, "projections", "verify", "--max-n", "2",
                          "--tolerance", "1e-20")
    assert code == 1
    assert "first failing entry" in err


def test_ellipticity_known_value(capsys):
    code, out, _ = _run(capsys, "ellipticity", "--op", "twistor:3")
    assert code == 0
    payload = json.loads(out)
    assert payload["matches_declared"] is True
    assert payload["epsilon"] == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert payload["declared_epsilon"] == "2/3"


def test_ellipticity_unknown_op(capsys):
    code, _, err = _run(capsys, "ellipticity", "--op", "nonsense:3")
    assert code == 2
    assert "error" in err


def test_kato_fuzz_foldo(capsys):
    code, out, _ = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--samples", "2000", "--seed", "1")
    assert code == 0
    payload = json.loads(out)
    assert payload["violations"] == 0
    assert payload["samples"] == 2000


def test_kato_fuzz_hodge_with_op_string(capsys):
    code, out, _ = _run(capsys, "kato", "fuzz", "--theorem", "hodge",
                        "--op", "hodge:3:1", "--samples", "2000")
    assert code == 0
    payload = json.loads(out)
    assert payload["operator"].startswith("hodge:3:1")


def test_kato_fuzz_rejects_zero_samples(capsys):
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--samples", "0")
    assert code == 2
    assert "samples >= 1" in err


def test_kato_fuzz_foldo_needs_op(capsys):
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--samples", "10")
    assert code == 2
    assert "--op" in err


def test_kato_fuzz_hodge_needs_degrees(capsys):
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "hodge",
                        "--samples", "10")
    assert code == 2


def test_field_run_smoke(capsys):
    code, out, _ = _run(capsys, "field", "run", "--scenario", "monopole-omega",
                        "--n", "3", "--grid", "500", "--seed", "4")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    assert payload["branch"] == "vanishing"


def test_field_run_unknown_scenario(capsys):
    code, _, err = _run(capsys, "field", "run", "--scenario", "bogus", "--n", "3")
    assert code == 2
    assert "scenario" in err


def test_field_run_dump_points(tmp_path, capsys):
    dump = tmp_path / "points.csv"
    code, _, _ = _run(capsys, "field", "run", "--scenario", "generic-form",
                      "--n", "2", "--grid", "200", "--dump-points", str(dump))
    assert code == 0
    lines = dump.read_text().strip().split("\n")
    assert lines[0] == "x1,x2,margin,scale,ok"
    assert len(lines) >= 190  # kept points, a few may be skipped


def test_suite_all(capsys):
    code, out, _ = _run(capsys, "suite", "all", "--seed", "2")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] is True
    components = {c["component"] for c in payload["components"]}
    assert components == {"projections", "ellipticity", "kato-fuzz", "field"}


# ---------------------------------------------------------------------------
# output targets and determinism


def test_out_writes_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = _run(capsys, "ellipticity", "--op", "dirac:2",
                        "--out", str(target))
    assert code == 0
    assert out == ""
    payload = json.loads(target.read_text())
    assert payload["op"] == "dirac:2"


def test_json_reports_byte_identical(capsys):
    args = ("kato", "fuzz", "--theorem", "hodge", "--n", "3", "--k", "1",
            "--samples", "3000", "--seed", "9")
    _, first, _ = _run(capsys, *args)
    _, second, _ = _run(capsys, *args)
    assert first == second


def test_version_flag(capsys):
    code, out, _ = _run(capsys, "--version")
    assert code == 0
    from katolab import __version__
    assert out.strip() == __version__


def test_bad_subcommand_is_usage_error(capsys):
    code, _, _ = _run(capsys, "projections", "explode")
    assert code == 2


# ---------------------------------------------------------------------------
# config files


def test_config_file_sets_defaults(tmp_path, capsys):
    cfg = tmp_path / "fuzz.cfg"
    cfg.write_text("samples = 1500\nseed = 11\n# a comment\ntheorem = foldo\n"
                   "op = dirac:2\n")
    code, out, _ = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--config", str(cfg))
    assert code == 0
    payload = json.loads(out)
    assert payload["samples"] == 1500
    assert payload["seed"] == 11


def test_config_flags_beat_file(tmp_path, capsys):
    cfg = tmp_path / "fuzz.cfg"
    cfg.write_text("samples = 1500\nseed = 11\n")
    code, out, _ = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--config", str(cfg),
                        "--seed", "99")
    assert code == 0
    payload = json.loads(out)
    assert payload["samples"] == 1500   # from the file
    assert payload["seed"] == 99        # flag wins


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("warp_factor = 9\n")
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--config", str(cfg))
    assert code == 2
    assert "warp_factor" in err


def test_config_dash_keys_normalize(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("c-star = 7.5\ngrid = 300\n")
    code, out, _ = _run(capsys, "field", "run", "--scenario", "coclosed-form",
                        "--n", "3", "--config", str(cfg))
    assert code == 0
    payload = json.loads(out)
    assert payload["c_star"] == 7.5
    assert payload["sample_points"] == 300


def test_config_missing_file(capsys):
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--config", "/nonexistent.cfg")
    assert code == 2
    assert "config" in err.lower()


def test_config_malformed_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this line has no equals sign\n")
    code, _, err = _run(capsys, "kato", "fuzz", "--theorem", "foldo",
                        "--op", "dirac:2", "--config", str(cfg))
    assert code == 2
    assert "key = value" in err
