import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from retarded_qed.cli import main
from retarded_qed.config import ConfigError, parse_quantity, parse_text
from retarded_qed.presets import PRESETS, preset
from retarded_qed.tables import Table, read_csv, to_csv, to_json

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(argv + ["--out", str(out)])
    return code, (out.read_text(encoding="utf-8") if out.exists() else None)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_run(name, tmp_path):
    code, text = _run([preset(name).mode, "--preset", name], tmp_path)
    assert code == 0
    meta, cols, rows = read_csv(text)
    assert meta["source"] == f"preset:{name}" and meta["schema"] == "1"
    assert rows and all(len(r) == len(cols) for r in rows)


def test_fig4a_map_has_ridges(tmp_path):
    code, text = _run(["driven", "--preset", "fig4a"], tmp_path)
    meta, cols, rows = read_csv(text)
    assert cols[:2] == ["eta", "p"]
    assert sum(c.startswith("pop@") for c in cols) == 601
    assert sum(c.startswith("ridge_n=") for c in cols) == 41


@pytest.mark.parametrize("config", sorted(p.name for p in CONFIGS.glob("*.ini")))
def test_shipped_configs_run(config, tmp_path):
    mode = parse_text((CONFIGS / config).read_text()).mode
    code, text = _run([mode, "--config", str(CONFIGS / config), "--jobs", "1"], tmp_path)
    assert code == 0 and text


def test_byte_identical(tmp_path):
    _, first = _run(["spectrum", "--preset", "fig3a"], tmp_path, "a.csv")
    _, second = _run(["spectrum", "--preset", "fig3a"], tmp_path, "b.csv")
    assert first == second
    _, j1 = _run(["driven", "--preset", "fig5", "--format", "json"], tmp_path, "a.json")
    _, j2 = _run(["driven", "--preset", "fig5", "--format", "json"], tmp_path, "b.json")
    assert j1 == j2


def test_json_schema(tmp_path):
    code, text = _run(["rates", "--preset", "fig2a", "--format", "json"], tmp_path, "o.json")
    payload = json.loads(text)
    assert code == 0 and list(payload) == ["metadata", "columns", "rows"]
    assert payload["metadata"]["schema"] == 1
    assert all(len(r) == len(payload["columns"]) for r in payload["rows"])


def test_sweep_parallel_matches_serial(tmp_path):
    cfg = str(CONFIGS / "sweep_fwhm_eta.ini")
    _, serial = _run(["sweep", "--config", cfg, "--jobs", "1"], tmp_path, "s.csv")
    _, parallel = _run(["sweep", "--config", cfg, "--jobs", "3"], tmp_path, "p.csv")
    assert serial == parallel


def test_sweep_fwhm_beta_trend(tmp_path):
    _, text = _run(["sweep", "--config", str(CONFIGS / "sweep_fwhm_beta.ini")], tmp_path)
    _, cols, rows = read_csv(text)
    for row in rows:
        beta, value = float(row[cols.index("beta")]), float(row[cols.index("value")])
        assert abs(value - (1 + beta)) < 1e-8


def test_sweep_comb_ladder_residuals(tmp_path):
    _, text = _run(["sweep", "--config", str(CONFIGS / "sweep_comb.ini")], tmp_path)
    _, cols, rows = read_csv(text)
    residuals = [float(r[cols.index("value")]) for r in rows if r[cols.index("observable")] == "residual"]
    assert residuals and max(residuals) <= 1e-9


def test_dispersion_subcommand(tmp_path):
    code, text = _run(["dispersion", "--config", str(CONFIGS / "table1_dispersion.ini")], tmp_path)
    meta, cols, rows = read_csv(text)
    assert code == 0
    assert abs(float(meta["eta"]) - 1) <= 0.05
    assert abs(float(meta["phase_velocity_at_omega0"]) - 1e6) <= 0.05e6
    assert math.isclose(float(meta["omega0_over_gamma"]), 500.0, rel_tol=1e-14)


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate"]) == 0
    assert "FAIL" not in capsys.readouterr().out
    assert main(["validate", "--tolerance", "1e-20"]) == 3


def _write(tmp_path, text):
    path = tmp_path / "scenario.ini"
    path.write_text(text)
    return str(path)


def test_config_error_reports_line(tmp_path, capsys):
    path = _write(tmp_path, "[scenario]\nmode = spectrum\n\n[system]\nbeta = 1.5\neta = 1\n")
    assert main(["spectrum", "--config", path]) == 1
    err = capsys.readouterr().err
    assert f"{path}:5: [system] beta" in err


@pytest.mark.parametrize("text,fragment", [
    ("[system]\nbeta = 0.9\neta = 1\nspeed = 3\n", "unknown key"),
    ("[system]\nbeta = 0.9\neta = 1\n[colour]\nx = 1\n", "unknown section"),
    ("[physical]\nomega0 = 5 Ghz\ngamma = 10 MHz\nbeta = 0.9\nd = 1 cm\nvelocity = 1e6 m/s\n", "unknown frequency unit"),
    ("[system]\nbeta = 0.9\neta = 1\nparity = even\nphi_p = 0\n", "not both"),
    ("[scenario]\nmode = driven\n[system]\nbeta = 0.9\neta = 1\n", "not spectrum"),
])
def test_config_errors(tmp_path, capsys, text, fragment):
    assert main(["spectrum", "--config", _write(tmp_path, text)]) == 1
    assert fragment in capsys.readouterr().err


def test_numeric_failure(tmp_path, capsys):
    path = _write(tmp_path, "[system]\nbeta = 0.9\neta = 0\nphi_p = 0\n[options]\nmethod = lambert\n")
    assert main(["dynamics", "--config", path]) == 2
    assert "numeric failure" in capsys.readouterr().err


def test_preset_mode_mismatch():
    assert main(["driven", "--preset", "fig3a"]) == 1


def test_bad_jobs():
    assert main(["sweep", "--config", str(CONFIGS / "sweep_fwhm_beta.ini"), "--jobs", "0"]) == 1


def test_units_case_sensitive():
    assert parse_quantity("5 GHz", "frequency") == 2 * math.pi * 5e9
    assert parse_quantity("10 um", "length") == 10e-6
    assert parse_quantity("100 fF", "capacitance") == 100e-15
    assert parse_quantity("1e6 m/s", "velocity") == 1e6
    for bad in ("5 mhz", "5 Mhz", "5 mHz", "5", "GHz"):
        with pytest.raises(ValueError):
            parse_quantity(bad, "frequency")


def test_parity_snaps_eta():
    sc = parse_text("[system]\nbeta = 0.95\neta = 0.56\nparity = even\n", mode="spectrum")
    assert abs(sc.system.eta - 2 * math.pi * 45 / 500) < 1e-15


def test_table_round_trip():
    t = Table(["a", "b", "c"], metadata={"note": "x"})
    t.add(0.1, None, float("nan"))
    t.add(1, True, "s")
    meta, cols, rows = read_csv(to_csv(t))
    assert meta["note"] == "x" and cols == ["a", "b", "c"]
    assert rows == [["0.1", "", "nan"], ["1", "1", "s"]]
    payload = json.loads(to_json(t))
    assert payload["rows"][0] == [0.1, None, None]
    with pytest.raises(ValueError):
        t.add(1, 2)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "retarded_qed", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "retarded-qed" in res.stdout
