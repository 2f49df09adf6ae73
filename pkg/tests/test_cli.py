import filecmp
from pathlib import Path

import pytest

from sparsedom.cli import main


def test_list_scenarios(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("whitney_1d", "sparse_linear_hilbert", "parabola_decay",
                 "weights_power", "sharpness_parabola"):
        assert name in out


def test_describe(capsys):
    assert main(["describe", "decay"]) == 0
    out = capsys.readouterr().out
    assert "decay" in out


def test_run_success(tmp_path, capsys):
    rc = main(["run", "decay_point_mass", "--out", str(tmp_path / "o")])
    out = capsys.readouterr().out
    assert rc == 0, out
    assert (tmp_path / "o" / "summary.csv").exists()
    assert (tmp_path / "o" / "decay.csv").exists()
    assert "PASS" in out


def test_run_check_failure_exits_2(tmp_path, capsys):
    rc = main(["run", "decay_point_mass", "--out", str(tmp_path / "o"),
               "--override", "checks.beta_max=-1.0"])
    out = capsys.readouterr().out
    assert rc == 2, out
    assert "FAIL" in out


def test_unknown_key_rejected(tmp_path, capsys):
    rc = main(["run", "decay_point_mass", "--out", str(tmp_path / "o"),
               "--override", "checks.bogus_knob=1"])
    assert rc == 1
    assert "bogus_knob" in capsys.readouterr().err


def test_unknown_scenario(tmp_path, capsys):
    rc = main(["run", "no_such_scenario", "--out", str(tmp_path / "o")])
    assert rc == 1


def test_bad_exponents_rejected(tmp_path, capsys):
    # p1 must not exceed the dual of p2
    rc = main(["run", "improving_parabola", "--out", str(tmp_path / "o"),
               "--override", "exponents.p1=10.0"])
    assert rc == 1
    assert "p1" in capsys.readouterr().err


def test_unknown_section_rejected(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(
        '[scenario]\nkind = "decay"\nname = "x"\n'
        '[operator]\nkind = "measure"\nmeasure = "point"\n'
        '[surprise]\nknob = 1\n')
    rc = main(["run", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_budget_guard(tmp_path, capsys):
    rc = main(["run", "whitney_2d", "--out", str(tmp_path / "o"),
               "--override", "space.log2_step=-14"])
    assert rc == 1
    assert "site" in capsys.readouterr().err.lower()


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "weights_power", "--out", str(a)]) == 0
    assert main(["run", "weights_power", "--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert filecmp.cmp(a / name, b / name, shallow=False), name


def test_seed_override_changes_rows(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "ladder_1d", "--out", str(a), "--seed", "1"]) == 0
    assert main(["run", "ladder_1d", "--out", str(b), "--seed", "2"]) == 0
    ra = (a / "ladder.csv").read_bytes()
    rb = (b / "ladder.csv").read_bytes()
    assert ra != rb
