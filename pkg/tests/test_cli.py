import filecmp
import subprocess
import sys
from pathlib import Path

import pytest

from priorlab.cli import dispatch, main, parse_config


def write_config(tmp_path: Path, name: str, text: str) -> Path:
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_config_minimal_rates(tmp_path):
    p = write_config(
        tmp_path,
        "rates.cfg",
        "m = 3\nd = 2\nL = 1.0\nalpha = 1.0\nT_grid = 10,100\n# a comment\n",
    )
    cfg = parse_config(p, "rates")
    assert cfg["m"] == 3
    assert cfg["T_grid"] == (10, 100)
    assert cfg["family"] == "parity"  # documented default
    assert cfg["replicates"] == 100


def test_parse_config_unknown_key(tmp_path):
    p = write_config(tmp_path, "bad.cfg", "m = 3\nfoo = 1\n")
    with pytest.raises(ValueError, match="foo"):
        parse_config(p, "rates")


def test_parse_config_missing_required(tmp_path):
    p = write_config(tmp_path, "bad.cfg", "m = 3\n")
    with pytest.raises(ValueError, match="required"):
        parse_config(p, "rates")


def test_parse_config_type_error(tmp_path):
    p = write_config(tmp_path, "bad.cfg", "m = x\nd = 1\nL = 1\nalpha = 1\nT_grid = 10\n")
    with pytest.raises(ValueError, match="'m'"):
        parse_config(p, "rates")


def test_dispatch_rejects_nonincreasing_grid(tmp_path):
    p = write_config(
        tmp_path, "bad.cfg", "m = 3\nd = 1\nL = 1\nalpha = 1\nT_grid = 100,10\nfamily = twopoint\n"
    )
    assert dispatch("rates", p, 0, tmp_path / "out") == 1


def test_dispatch_invalid_subcommand(tmp_path):
    assert dispatch("nope", None, 0, tmp_path / "out") == 1


def test_main_invalid_subcommand_usage_text(capsys):
    rc = main(["frobnicate", "--out", "/tmp/x"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "usage" in err and "frobnicate" in err


def test_coinbound_default_grid(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, "coin.cfg", "gammas = 0.1,0.3\nn_max = 30\n")
    rc = dispatch("coinbound", cfg, 0, out)
    assert rc == 0
    lines = (out / "coinbound.csv").read_text().splitlines()
    assert lines[0] == "gamma,n,bayes_error,floor,pass"
    assert len(lines) == 1 + 2 * 31
    assert all(line.endswith("true") for line in lines[1:])
    assert "all_pass=True" in (out / "summary.txt").read_text()
    assert (out / "manifest.txt").exists()
    assert (out / "plot_coinbound.py").exists()
    compile((out / "plot_coinbound.py").read_text(), "plot.py", "exec")


def test_lemmas_small_instance_all_pass(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, "lem.cfg", "m = 2\nd = 1\nk_max = 3\npairs = 5\n")
    rc = dispatch("lemmas", cfg, 0, out)
    assert rc == 0
    text = (out / "lemmas.csv").read_text()
    assert text.splitlines()[0] == "check,instance,k,lhs,rhs,pass"
    assert "false" not in text
    assert "all_pass=True" in (out / "summary.txt").read_text()


def test_smoothness_small(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path, "s.cfg",
        "m_max = 4\nd_max = 2\nL_list = 0.5,1.0\nalpha_list = 1.0\nsigns_per_instance = 2\n",
    )
    rc = dispatch("smoothness", cfg, 0, out, exact_rational=True)
    assert rc == 0
    assert "all_pass=True" in (out / "summary.txt").read_text()


def test_cover_info(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, "c.cfg", "m = 2\nd = 1\nepsilons = 0.5,0.4\n")
    rc = dispatch("cover-info", cfg, 0, out)
    assert rc == 0
    lines = (out / "cover_info.csv").read_text().splitlines()
    assert len(lines) == 3
    assert "parity_family_size=4" in (out / "summary.txt").read_text()


def test_cover_info_budget_exit_code(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, "c.cfg", "m = 3\nd = 2\nepsilons = 0.05\nbudget = 10\n")
    assert dispatch("cover-info", cfg, 0, out) == 2


def test_rates_small_run_and_determinism_across_workers(tmp_path):
    cfg = write_config(
        tmp_path, "r.cfg",
        "m = 3\nd = 1\nL = 1.0\nalpha = 1.0\nT_grid = 10,50\nfamily = twopoint\nreplicates = 6\n",
    )
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert dispatch("rates", cfg, 7, out1, workers=1) == 0
    assert dispatch("rates", cfg, 7, out2, workers=2) == 0
    for name in ("rates.csv", "baseline.csv", "skeleton_report.csv", "summary.txt"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
    lines = (out1 / "skeleton_report.csv").read_text().splitlines()
    assert lines[0] == "replicate,T,selected,tv_to_truth,max_yatracos_dev"


def test_dispatch_without_config_uses_defaults(tmp_path):
    out = tmp_path / "out"
    assert dispatch("lemmas", None, 0, out) == 0
    assert (out / "lemmas.csv").exists()
    # rates has required keys, so no config is a validation error
    assert dispatch("rates", None, 0, tmp_path / "out2") == 1


def test_rates_rerun_byte_identical(tmp_path):
    cfg = write_config(
        tmp_path, "r.cfg",
        "m = 3\nd = 2\nL = 1.0\nalpha = 1.0\nT_grid = 20,80\nreplicates = 4\ntruth_count = 2\n",
    )
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert dispatch("rates", cfg, 3, out1) == 0
    assert dispatch("rates", cfg, 3, out2) == 0
    assert (out1 / "rates.csv").read_bytes() == (out2 / "rates.csv").read_bytes()


def test_lowerbound_small(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path, "lb.cfg",
        "m = 3\nd = 2\nL = 1.0\nalpha = 1.0\nT_grid = 30\nreplicates = 20\n",
    )
    rc = dispatch("lowerbound", cfg, 1, out)
    assert rc == 0
    summary = (out / "summary.txt").read_text()
    assert "above_floor=True" in summary
    lines = (out / "lowerbound.csv").read_text().splitlines()
    assert lines[0] == "experiment,m,d,L,alpha,k,T,replicate,truth_id,selected_id,tv_error"


def test_elicit_tiny_run(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(
        tmp_path, "e.cfg",
        "epsilon = 0.2\nT = 40\nreplicates = 2\ncalibration_T_grid = 10,20\n"
        "calibration_replicates = 8\nq_trials = 40\n",
    )
    rc = dispatch("elicit", cfg, 2, out)
    assert rc == 0
    led = (out / "ledger_000.csv").read_text().splitlines()
    assert led[0] == "t,branch,queries,regret,theta_check,R_used"
    assert len(led) == 41
    assert (out / "menu.tsv").exists()
    assert "mean_regret" in (out / "summary.txt").read_text()


def test_console_entrypoint_runs():
    rc = subprocess.run(
        [sys.executable, "-m", "priorlab.cli", "--help"], capture_output=True, text=True
    )
    assert rc.returncode == 0
    assert "priorlab" in rc.stdout
