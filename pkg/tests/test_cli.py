import re
import subprocess
import sys

import pytest

from c3geom import cli
from c3geom import homotopy as hp
from c3geom.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, RunConfig, main, run


def test_config_errors(tmp_path, capsys):
    assert main(["--samples", "0"]) == EXIT_CONFIG
    assert main(["--tolerance", "0"]) == EXIT_CONFIG
    assert main(["--tolerance", "nan"]) == EXIT_CONFIG
    assert main(["--k-budget", "-1"]) == EXIT_CONFIG
    assert main(["--suite", "algebra,nope"]) == EXIT_CONFIG
    assert main(["--case", "ho", "--suite", "covering"]) == EXIT_CONFIG
    assert main(["--case", "xx"]) == EXIT_CONFIG
    assert main(["--out", str(tmp_path / "missing" / "r.txt")]) == EXIT_CONFIG


def test_all_skips_covering_off_hh():
    assert "covering" not in RunConfig(case="oo").selected()
    assert "covering" in RunConfig(case="hh").selected()


def test_covering_report(tmp_path):
    out = tmp_path / "cov.txt"
    assert main(["--case", "hh", "--suite", "covering", "--seed", "1", "--samples", "200", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    m = re.search(r"stats\.covering\.min_abs_B = (\S+)", text)
    assert m and float(m.group(1)) > 0
    assert "summary.passed = true" in text


def test_report_format_and_side_files(tmp_path):
    out = tmp_path / "ho.txt"
    code = main(["--case", "ho", "--suite", "homotopy", "--samples", "10", "--out", str(out)])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "format = c3geom-report/1"
    assert all(" = " in ln for ln in lines)
    assert "config.tolerance = 1.0000000000000001e-09" in lines
    side = tmp_path / "ho.txt.movelogs"
    files = sorted(side.glob("*.jsonl"))
    assert files
    case, log, source = hp.MoveLog.loads(files[0].read_text())
    assert case.name == "ho" and source is not None
    hp.replay(source, log)
    assert main(["--replay", str(files[0])]) == EXIT_OK


def test_oo_homotopy_has_pl_reduce_and_fails_reduce():
    rep = run(RunConfig(case="oo", suites=("homotopy",), samples=10))
    names = {c.name: c.passed for _, c in rep.checks}
    assert names["pl_reduce_real_part"]
    assert not names["reduce_within_D"]
    assert not rep.passed


def test_failure_exit_code(tmp_path):
    out = tmp_path / "oo.txt"
    assert main(["--case", "oo", "--suite", "homotopy", "--samples", "10", "--out", str(out)]) == EXIT_FAIL


def test_determinism():
    cfg = RunConfig(case="ho", seed=7, samples=20)
    a, b = run(cfg), run(cfg)
    assert a.outcome_vector() == b.outcome_vector()
    assert a.stats == b.stats
    assert {k: len(v[1]) for k, v in a.logs.items()} == {k: len(v[1]) for k, v in b.logs.items()}
    strip = lambda r: [ln for ln in r.render().splitlines() if not ln.startswith("wall_time")]
    assert strip(a) == strip(b)


def test_sub_seeds_independent():
    # a suite's outcome does not depend on which other suites run
    alone = run(RunConfig(case="hh", seed=3, samples=20, suites=("geometry",)))
    mixed = run(RunConfig(case="hh", seed=3, samples=20, suites=("algebra", "geometry")))
    geo = [(c.name, c.max_error) for s, c in mixed.checks if s == "geometry"]
    assert geo == [(c.name, c.max_error) for _, c in alone.checks]


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "c3geom", "--case", "hh", "--suite", "algebra", "--samples", "5"],
        capture_output=True, text=True,
    )
    assert r.returncode == 0
    assert "summary.passed = true" in r.stdout


@pytest.mark.parametrize("v,text", [(0.1, "0.10000000000000001"), (True, "true"), ([1, 2.5], "[1, 2.5]")])
def test_number_format(v, text):
    assert cli._fmt(v) == text
