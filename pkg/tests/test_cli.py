import json
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from logfluct.cli import EXIT_DEGENERATE, EXIT_INPUT, EXIT_OK, EXIT_PARTIAL, OPTIONS, main, resolve
from logfluct.ingest import read_returns_csv

QUOTES = "DATE,DTB3\n" + "".join(
    f"{d},{v:.4f}\n"
    for d, v in zip(
        np.datetime64("1990-01-01") + np.arange(400),
        np.exp(np.cumsum(np.random.default_rng(0).standard_t(4, 400) * 0.01)) * 5,
    )
)

FAST = ["--shuffles", "3", "--surrogates", "5", "--max-lag", "40", "--horizons", "1,5"]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in OPTIONS:
        monkeypatch.delenv("LOGFLUCT_" + name.upper(), raising=False)
    return tmp_path


def synth(*extra, out="s.csv"):
    return main(["synth", "--output", out, *extra])


# ingest ------------------------------------------------------------------------------


def test_ingest_writes_series_and_sidecar(workdir):
    (workdir / "q.csv").write_text(QUOTES)
    assert main(["ingest", "--input", "q.csv", "--from", "1990-01-10", "--to", "1990-12-31", "-o", "r.csv"]) == EXIT_OK
    series = read_returns_csv(workdir / "r.csv")
    meta = json.loads((workdir / "r.meta.json").read_text())
    assert meta["n_quotes"] == 356 and meta["n_returns"] == 355 == len(series)
    assert meta["first_date"] == "1990-01-10" and meta["last_date"] == "1990-12-31"
    assert abs(series.values.mean()) < 1e-9 and series.values.std() == pytest.approx(1.0, abs=1e-9)


def test_ingest_missing_file(workdir, capsys):
    assert main(["ingest", "--input", "nope.csv"]) == EXIT_INPUT
    assert "not found" in capsys.readouterr().err


def test_ingest_window_too_small(workdir):
    (workdir / "q.csv").write_text(QUOTES)
    assert main(["ingest", "--input", "q.csv", "--from", "1990-01-03", "--to", "1990-01-03"]) == EXIT_DEGENERATE


def test_ingest_constant_quotes(workdir):
    (workdir / "q.csv").write_text("d,v\n2000-01-01,3\n2000-01-02,3\n2000-01-03,3\n")
    assert main(["ingest", "--input", "q.csv"]) == EXIT_DEGENERATE


def test_ingest_malformed_date(workdir, capsys):
    (workdir / "q.csv").write_text("d,v\n2000-01-01,3\n2000-01-32,4\n")
    assert main(["ingest", "--input", "q.csv"]) == EXIT_INPUT
    assert "line 3" in capsys.readouterr().err


def test_ingest_offline_without_cache(workdir, monkeypatch):
    monkeypatch.setenv("LOGFLUCT_CACHE_DIR", str(workdir / "cache"))
    assert main(["ingest", "--url", "http://127.0.0.1:9/q.csv", "--offline"]) == EXIT_INPUT


# analyze ------------------------------------------------------------------------------


def test_analyze_all_and_determinism(workdir):
    assert synth("--family", "qgaussian", "--q", "1.5", "--n", "3000", "--seed", "1") == EXIT_OK
    for out in ("a", "b"):
        assert main(["analyze", "--input", "s.csv", "--analyses", "all", "--seed", "7", "--out-dir", out,
                     *FAST]) == EXIT_OK
    a, b = workdir / "a", workdir / "b"
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    names = {"fig1_acf", "fig2_pdf", "fig2_collapse", "fig3_dfa", "fig4_leverage"}
    assert {p.stem for p in a.glob("*.csv")} == names
    for n in names:
        assert (a / f"{n}.csv").read_bytes() == (b / f"{n}.csv").read_bytes()

    report = json.loads((a / "report.json").read_text())
    assert set(report["analyses"]) == names_to_blocks()
    assert all(block["status"] == "ok" for block in report["analyses"].values())
    params = report["parameters"]
    assert params["seed"] == 7 and params["shuffles"] == 3 and params["max_lag"] == 40
    assert params["horizons"] == [1, 5]
    assert report["dataset"]["n_returns"] == 3000
    assert report["dataset"]["ingest"]["family"] == "qgaussian"
    assert report["tool"]["version"]


def names_to_blocks():
    return {"acf", "pdf", "collapse", "dfa", "leverage"}


def test_analyze_fixed_q_block(workdir):
    synth("--family", "qgaussian", "--q", "1.49", "--B", "2.23", "--n", "20000", "--seed", "2")
    assert main(["analyze", "--input", "s.csv", "--analyses", "pdf", "--fix-q", "1.49"]) == EXIT_OK
    pdf = json.loads((workdir / "report.json").read_text())["analyses"]["pdf"]
    fixed = [f for f in pdf["fixed_q_fits"] if f["fixed"] == {"q": 1.49}]
    assert len(fixed) == 1 and fixed[0]["params"]["q"] == 1.49
    assert pdf["fit"]["params"]["q"] == pytest.approx(1.49, abs=0.05)


def test_analyze_partial_failure(workdir):
    synth("--family", "gaussian", "--n", "200", "--seed", "3")
    code = main(["analyze", "--input", "s.csv", "--analyses", "acf,dfa", "--max-lag", "500"])
    assert code == EXIT_PARTIAL
    blocks = json.loads((workdir / "report.json").read_text())["analyses"]
    assert blocks["acf"]["status"] == "failed" and blocks["acf"]["error"]
    assert blocks["dfa"]["status"] == "ok"


def test_analyze_input_errors(workdir):
    assert main(["analyze", "--input", "missing.csv"]) == EXIT_INPUT
    (workdir / "nan.csv").write_text("date,r\n2000-01-01,1\n2000-01-02,nan\n2000-01-03,2\n")
    assert main(["analyze", "--input", "nan.csv"]) == EXIT_INPUT
    (workdir / "flat.csv").write_text("date,r\n2000-01-01,1\n2000-01-02,1\n2000-01-03,1\n")
    assert main(["analyze", "--input", "flat.csv"]) == EXIT_DEGENERATE
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--input", "flat.csv", "--analyses", "bogus"])
    assert info.value.code == 2


def test_analyze_stable_synth_accepted(workdir):
    assert synth("--family", "stable", "--alpha", "1.77", "--n", "13865", "--seed", "4") == EXIT_OK
    assert main(["analyze", "--input", "s.csv", "--analyses", "pdf,collapse", *FAST]) == EXIT_OK
    report = json.loads((workdir / "report.json").read_text())
    assert report["dataset"]["n_returns"] == 13865
    assert report["analyses"]["collapse"]["status"] == "ok"


# precedence and defaults ------------------------------------------------------------------


def test_precedence_flag_env_default():
    env = {"LOGFLUCT_MAX_LAG": "77"}
    assert resolve("max_lag", 12, env) == 12
    assert resolve("max_lag", None, env) == 77
    assert resolve("max_lag", None, {}) == OPTIONS["max_lag"][1]
    assert resolve("analyses", None, {"LOGFLUCT_ANALYSES": "all"}) == OPTIONS["analyses"][1]
    assert resolve("scales", None, {"LOGFLUCT_SCALES": "4,8,16"}) == (4, 8, 16)


def test_bad_environment_value(workdir, monkeypatch):
    synth("--family", "gaussian", "--n", "500", "--seed", "5")
    monkeypatch.setenv("LOGFLUCT_MAX_LAG", "many")
    assert main(["analyze", "--input", "s.csv", "--analyses", "acf"]) == EXIT_INPUT


def test_environment_reaches_report(workdir, monkeypatch):
    synth("--family", "gaussian", "--n", "1000", "--seed", "6")
    monkeypatch.setenv("LOGFLUCT_MAX_LAG", "33")
    monkeypatch.setenv("LOGFLUCT_OUT_DIR", "envout")
    assert main(["analyze", "--input", "s.csv", "--analyses", "acf"]) == EXIT_OK
    assert json.loads((workdir / "envout" / "report.json").read_text())["parameters"]["max_lag"] == 33
    assert main(["analyze", "--input", "s.csv", "--analyses", "acf", "--max-lag", "11"]) == EXIT_OK
    assert json.loads((workdir / "envout" / "report.json").read_text())["parameters"]["max_lag"] == 11


def test_defaults_subcommand(workdir, monkeypatch, capsys):
    monkeypatch.setenv("LOGFLUCT_SEED", "42")
    assert main(["defaults"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["defaults"]["seed"] == 0
    assert doc["effective"]["seed"] == 42
    assert doc["environment"]["cache_dir"] == "LOGFLUCT_CACHE_DIR"
    assert set(doc["defaults"]) == set(OPTIONS)


# synth ------------------------------------------------------------------------------------


def test_synth_fixed_seed_identical(workdir):
    synth("--family", "fgn", "--hurst", "0.7", "--n", "1000", "--seed", "9", out="a.csv")
    synth("--family", "fgn", "--hurst", "0.7", "--n", "1000", "--seed", "9", out="b.csv")
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()
    assert (workdir / "a.meta.json").read_bytes() == (workdir / "b.meta.json").read_bytes()


def test_synth_qgaussian_one_is_gaussian(workdir):
    synth("--family", "qgaussian", "--q", "1", "--B", "0.5", "--n", "20000", "--seed", "10", out="q.csv")
    synth("--family", "gaussian", "--n", "20000", "--seed", "11", out="g.csv")
    q = read_returns_csv(workdir / "q.csv").values
    g = read_returns_csv(workdir / "g.csv").values
    assert stats.ks_2samp(q, g).pvalue > 0.01


@pytest.mark.parametrize("extra", [
    ["--family", "qgaussian", "--q", "3.5"],
    ["--family", "qgaussian", "--B", "-1"],
    ["--family", "stable", "--alpha", "2.5"],
    ["--family", "fgn", "--hurst", "1.2"],
    ["--family", "gaussian", "--n", "1"],
])
def test_synth_invalid_parameters(workdir, extra):
    assert synth(*extra) == EXIT_INPUT
    assert not (workdir / "s.csv").exists()


def test_console_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "logfluct.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("logfluct ")
