"""Tests for the command-line tool."""

from __future__ import annotations

import json

import pytest

from elliptic_rmatrix import cli
from elliptic_rmatrix.report import ReportBundle


def results(path) -> list:
    return [r.to_dict() for r in ReportBundle.from_json(path.read_text()).results]


class TestParsing:
    @pytest.mark.parametrize("text,value", [("1,2", 1 + 2j), ("0+1i", 1j), ("1j", 1j),
                                            ("-0.5-2j", -0.5 - 2j), ("3", 3 + 0j),
                                            ("0.1,-1e-3", 0.1 - 1e-3j)])
    def test_complex(self, text, value):
        assert cli.parse_complex(text) == pytest.approx(value)

    def test_complex_list(self):
        assert cli.parse_complex_list("1,0;0,1") == [1, 1j]

    def test_bad_complex(self):
        with pytest.raises(Exception):
            cli.parse_complex("abc")


class TestExitCodes:
    def test_identities_pass(self, tmp_path):
        out = tmp_path / "id.json"
        assert cli.run(["identities", "--tau", "0+1i", "--samples", "100", "--out", str(out)]) == 0
        assert all(r["passed"] for r in results(out))

    def test_verify_pass(self, tmp_path):
        out = tmp_path / "v.json"
        argv = ["verify", "--family", "intermediate", "--p", "2", "--l", "2", "--samples", "20",
                "--out", str(out)]
        assert cli.run(argv) == 0
        checks = {r["check"].split("[")[0] for r in results(out)}
        assert {"qdybe", "unitarity"} <= checks

    def test_failure_writes_report(self, capsys):
        code = cli.run(["identities", "--tau", "1j", "--samples", "5", "--only", "fay",
                        "--tol", "1e-30"])
        assert code == 1
        assert "report:" in capsys.readouterr().out

    def test_unknown_subcommand(self, capsys):
        assert cli.run(["frobnicate"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_no_subcommand(self, capsys):
        assert cli.run([]) == 2

    def test_bad_flag(self):
        assert cli.run(["verify", "--bogus"]) == 2

    def test_bad_check_name(self):
        assert cli.run(["verify", "--checks", "nope"]) == 2

    def test_invalid_domain(self):
        assert cli.run(["build", "--family", "felder", "--p", "2", "--tau", "0,0"]) == 2

    def test_resource_guard(self):
        assert cli.run(["verify", "--family", "felder", "--p", "9", "--l", "1"]) == 3


class TestConfigAndOutput:
    def test_config_fills_flags(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[common]\nseed = 11\n[identities]\nsamples = 3\nonly = fay,heat\n")
        out = tmp_path / "r.json"
        assert cli.run(["identities", "--config", str(cfg), "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["config"]["samples"] == 3 and data["header"]["seed"] == 11
        assert [r["check"] for r in data["results"]] == ["fay", "heat"]

    def test_flag_beats_config(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[identities]\nsamples = 3\n")
        out = tmp_path / "r.json"
        cli.run(["identities", "--config", str(cfg), "--samples", "4", "--only", "fay",
                 "--out", str(out)])
        assert json.loads(out.read_text())["results"][0]["n_samples"] == 4

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[identities]\nfrob = 1\n")
        assert cli.run(["identities", "--config", str(cfg)]) == 2

    def test_env_outdir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path))
        assert cli.run(["identities", "--tau", "1j", "--samples", "3", "--only", "fay"]) == 0
        assert (tmp_path / "identities.json").exists()

    def test_same_seed_same_results(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for p in paths:
            cli.run(["verify", "--family", "felder", "--p", "2", "--l", "1", "--samples", "4",
                     "--seed", "9", "--out", str(p)])
        assert results(paths[0]) == results(paths[1])

    def test_build_prints_matrix(self, capsys):
        assert cli.run(["build", "--family", "felder", "--p", "2", "--l", "1", "--tau", "1j"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data

    def test_report_conversion(self, tmp_path, capsys):
        js, cs = tmp_path / "r.json", tmp_path / "r.csv"
        cli.run(["identities", "--tau", "1j", "--samples", "3", "--only", "heat", "--out", str(js)])
        assert cli.run(["report", str(js), "--out", str(cs)]) == 0
        back = tmp_path / "back.json"
        assert cli.run(["report", str(cs), "--format", "json", "--out", str(back)]) == 0
        assert back.read_text() == js.read_text()

    def test_report_missing_file(self, tmp_path):
        assert cli.run(["report", str(tmp_path / "none.json")]) == 2

    def test_irf(self, tmp_path):
        out = tmp_path / "irf.json"
        argv = ["irf", "--family", "felder", "--p", "2", "--l", "1", "--samples", "5",
                "--rows", "2", "--cols", "2", "--out", str(out)]
        assert cli.run(argv) == 0

    @pytest.mark.parametrize("family", ["vertex", "felder", "trig", "rational"])
    def test_limits(self, family, tmp_path):
        out = tmp_path / "lim.json"
        argv = ["limits", "--family", family, "--samples", "3", "--out", str(out)]
        if family == "vertex":
            argv += ["--l", "2"]
        assert cli.run(argv) == 0
