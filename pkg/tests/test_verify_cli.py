from __future__ import annotations

import csv
import json
import shutil
import subprocess
from dataclasses import replace

import pytest

from echochamber.cli import main
from echochamber.model import DEFAULT_NUMERICS, DEFAULT_PARAMS
from echochamber.verify import ALL_CHECKS, format_report, run_checks

P = DEFAULT_PARAMS
C = DEFAULT_NUMERICS


def _read_csv(path):
    lines = path.read_text().splitlines()
    header, columns = lines[0], lines[1].split(",")
    rows = list(csv.reader(lines[2:]))
    return header, columns, rows


def test_run_checks_subset_and_order() -> None:
    results = run_checks(P, C, ["prop3", "lemma1"])
    assert [r.name for r in results] == ["prop3", "lemma1"]
    assert all(r.passed for r in results)


def test_run_checks_unknown_name() -> None:
    with pytest.raises(KeyError, match="unknown check"):
        run_checks(P, C, ["lemma1", "nope"])


def test_run_checks_records_blowups_as_failures() -> None:
    # the quality belief is undefined in a single-type model; the check must
    # come back failed, not raise
    results = run_checks(replace(P, high_share=1.0), C, ["hvanish"])
    assert not results[0].passed
    assert "raised" in results[0].measured


def test_format_report_layout() -> None:
    results = run_checks(P, C, ["lemma1", "prop3"])
    text = format_report(results)
    lines = text.splitlines()
    assert lines[0].startswith("PASS lemma1")
    assert lines[2].startswith("PASS prop3")
    assert lines[-1] == "2/2 checks passed"
    for r in results:
        assert r.tolerance in text and r.detail in text


def test_console_script_is_installed() -> None:
    exe = shutil.which("echochamber")
    assert exe is not None
    proc = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "echochamber" in proc.stdout


def test_cli_verify_subset(capsys, tmp_path) -> None:
    code = main(["verify", "--check", "prop3", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS prop3" in out
    assert "1/1 checks passed" in out
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["passed"] is True
    assert [c["name"] for c in report["checks"]] == ["prop3"]
    assert report["params"]["low_var"] == P.low_var


def test_cli_verify_failure_exits_1(capsys) -> None:
    # tripling the high-type variance kills the vanishing-contribution bound
    code = main(["verify", "--check", "hvanish", "--params", "sigmaH2=3"])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL hvanish" in out


def test_cli_verify_unknown_check_exits_2(capsys) -> None:
    code = main(["verify", "--check", "nope"])
    err = capsys.readouterr().err
    assert code == 2
    assert "configuration error" in err


def test_cli_bad_parameter_exits_2(capsys) -> None:
    assert main(["verify", "--check", "lemma1", "--params", "h=2"]) == 2
    assert "configuration error" in capsys.readouterr().err
    assert main(["optimize", "radius", "--params", "bogus=1"]) == 2
    assert "unknown config key" in capsys.readouterr().err
    assert main(["figures", "--only", "fig9"]) == 2
    assert "unknown figure" in capsys.readouterr().err


def test_cli_optimize_radius_default(capsys) -> None:
    code = main(["optimize", "radius"])
    out = capsys.readouterr().out
    assert code == 0
    assert "family=radius" in out
    assert "r_star=Unbounded" in out
    assert "is_finite=False" in out


def test_cli_optimize_radius_csv(capsys, tmp_path) -> None:
    code = main(
        ["optimize", "radius", "--params", "sigmaL2=300", "--out", str(tmp_path)]
    )
    capsys.readouterr()
    assert code == 0
    text = (tmp_path / "optimum.csv").read_text()
    header, cols, row = text.splitlines()
    assert header.startswith("# optimize family=radius")
    assert "low_var=300" in header and "version=" in header
    assert cols.split(",")[:2] == ["family", "r_star"]
    fields = row.split(",")
    assert fields[4] == "True"
    assert abs(float(fields[1]) - 2.5058) < 5e-3


def test_cli_optimize_coarse_quadrature_exits_3(capsys) -> None:
    # 15 nodes leave the unrestricted benchmark visibly wrong; the
    # half-resolution recheck must abort the run rather than print it
    code = main(["optimize", "radius", "--params", "sigmaL2=300,quad_nodes=15"])
    err = capsys.readouterr().err
    assert code == 3
    assert "numeric failure" in err


def test_cli_figures_fig4_csv(capsys, tmp_path) -> None:
    code = main(
        ["figures", "--only", "fig4", "--format", "csv", "--out", str(tmp_path)]
    )
    capsys.readouterr()
    assert code == 0
    header, columns, rows = _read_csv(tmp_path / "fig4.csv")
    assert header.startswith("# figure=fig4") and "version=" in header
    assert columns == ["s", "a_uncensored", "a_censored", "aH_unc", "aL_unc", "aH_cen", "aL_cen", "pH"]
    assert len(rows) == 121
    i_cen = columns.index("a_censored")
    for row in rows:
        s = float(row[0])
        if abs(s) >= 2.35:
            assert row[i_cen] == ""
        else:
            assert row[i_cen] != ""
    center = next(row for row in rows if float(row[0]) == 0.0)
    assert abs(float(center[columns.index("pH")]) - 0.6202) < 1e-3
    assert abs(float(center[columns.index("a_uncensored")])) < 1e-12


def test_cli_figures_single_type_densities_coincide(capsys, tmp_path) -> None:
    code = main(
        [
            "figures",
            "--only",
            "fig1",
            "--format",
            "csv",
            "--params",
            "h=1",
            "--out",
            str(tmp_path),
        ]
    )
    capsys.readouterr()
    assert code == 0
    _, columns, rows = _read_csv(tmp_path / "fig1.csv")
    i_h, i_mix = columns.index("f_H"), columns.index("f_mix")
    for row in rows:
        assert row[i_h] == row[i_mix]


def test_cli_figures_rerun_is_byte_identical(capsys, tmp_path) -> None:
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["figures", "--only", "fig1,fig4", "--out", str(out)]) == 0
    capsys.readouterr()
    for name in ("fig1.csv", "fig4.csv", "fig1.svg", "fig4.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_cli_config_file_and_flag_precedence(capsys, tmp_path) -> None:
    cfg_kv = tmp_path / "cfg.txt"
    cfg_kv.write_text("sigmaL2 = 300  # noisy minority\n")
    out1 = tmp_path / "o1"
    assert main(
        ["figures", "--only", "fig1", "--format", "csv", "--config", str(cfg_kv), "--out", str(out1)]
    ) == 0
    header1, _, _ = _read_csv(out1 / "fig1.csv")
    assert "low_var=300" in header1

    cfg_json = tmp_path / "cfg.json"
    cfg_json.write_text(json.dumps({"sigmaL2": 300}))
    out2 = tmp_path / "o2"
    assert main(
        [
            "figures",
            "--only",
            "fig1",
            "--format",
            "csv",
            "--config",
            str(cfg_json),
            "--params",
            "sigmaL2=7",
            "--out",
            str(out2),
        ]
    ) == 0
    capsys.readouterr()
    header2, _, _ = _read_csv(out2 / "fig1.csv")
    assert "low_var=7" in header2


def test_cli_sweep_radius_over_low_var(capsys) -> None:
    code = main(["sweep", "--vary", "sigmaL2", "--values", "3,300", "--family", "radius"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# sweep vary=sigmaL2")
    assert lines[1] == "vary,value,family,r_star,utility_at_opt,utility_uncensored,is_finite"
    row3 = lines[2].split(",")
    row300 = lines[3].split(",")
    assert row3[3] == "Unbounded" and row3[6] == "False"
    assert row300[6] == "True"
    assert abs(float(row300[3]) - 2.5058) < 5e-3


def test_cli_sweep_needs_a_grid(capsys) -> None:
    assert main(["sweep", "--vary", "sigmaL2"]) == 2
    assert "sweep needs" in capsys.readouterr().err


def test_every_registered_check_has_a_callable() -> None:
    for name, fn in ALL_CHECKS.items():
        assert callable(fn), name
