import json

import pytest

from tailrisk.cli import (
    EXIT_NOT_FOUND,
    EXIT_OK,
    EXIT_SAMPLER,
    EXIT_SCHEMA,
    EXIT_USAGE,
    main,
)
from tailrisk.harness import TABLE_COLUMNS, parse_report_csv, parse_table_csv

BASE = {"alpha": 2, "n": 10, "levels": [0.99, 0.999], "algorithm": "dlw",
        "N": 2000, "reps": 5, "seed": 11, "mode": "VaR"}


@pytest.fixture
def write_config(tmp_path):
    def _write(**changes):
        cfg = {**BASE, **changes}
        cfg = {k: v for k, v in cfg.items() if v is not None}
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        return str(path)
    return _write


def test_estimate_writes_one_row_per_level(write_config, capsys):
    assert main(["estimate", "--config", write_config()]) == EXIT_OK
    rows = parse_report_csv(capsys.readouterr().out)
    assert [r["p"] for r in rows] == [0.99, 0.999]
    assert all(r["reps"] == 5 for r in rows)


def test_estimate_is_byte_reproducible(write_config, tmp_path):
    cfg = write_config()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["estimate", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["estimate", "--config", cfg, "--out", str(b), "--workers", "2"]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_seed_flag_overrides_config(write_config, capsys):
    cfg = write_config()
    main(["estimate", "--config", cfg])
    first = capsys.readouterr().out
    main(["estimate", "--config", cfg, "--seed", "12"])
    assert capsys.readouterr().out != first


def test_table_format_and_timing(write_config, capsys):
    assert main(["estimate", "--config", write_config(), "--format", "table"]) == EXIT_OK
    assert "Avg. est." in capsys.readouterr().out
    assert main(["estimate", "--config", write_config(), "--timing"]) == EXIT_OK
    assert "avg_time_s" in capsys.readouterr().out.splitlines()[0]


def test_level_out_of_range_is_schema_violation(write_config, capsys):
    assert main(["estimate", "--config", write_config(levels=[1.5])]) == EXIT_SCHEMA
    assert "levels[0]" in capsys.readouterr().err


@pytest.mark.parametrize("changes,field", [
    (dict(mode=None), "mode"),
    (dict(N=0), "N"),
    (dict(extra_key=1), "extra_key"),
    (dict(seed=-1), "seed"),
    (dict(algorithm="tilted"), "algorithm"),
])
def test_schema_violations(write_config, capsys, changes, field):
    assert main(["estimate", "--config", write_config(**changes)]) == EXIT_SCHEMA
    assert field in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["estimate", "--config", str(path)]) == EXIT_SCHEMA


def test_missing_file(tmp_path, capsys):
    assert main(["estimate", "--config", str(tmp_path / "nope.json")]) == EXIT_NOT_FOUND
    assert "not found" in capsys.readouterr().err


@pytest.mark.parametrize("changes", [dict(a=1.5), dict(sigma=-1.0), dict(mix_p=[0.5])])
def test_sampler_config_errors(write_config, capsys, changes):
    assert main(["estimate", "--config", write_config(**changes)]) == EXIT_SAMPLER


def test_usage_errors(write_config):
    with pytest.raises(SystemExit) as exc:
        main(["reproduce-table", "--table", "9"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["estimate"])
    assert exc.value.code == EXIT_USAGE
    assert main(["diagnose", "--config", write_config(), "--c-grid", "x"]) == EXIT_USAGE


def test_reproduce_table_emits_text_and_csv(tmp_path, capsys):
    out = tmp_path / "t1.csv"
    code = main(["reproduce-table", "--table", "1", "--N", "300", "--reps", "2", "--seed", "1",
                 "--reference-N", "300", "--reference-reps", "2", "--out", str(out)])
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "True" in text and "Approx." in text
    lines = out.read_text().splitlines()
    assert lines[0].split(",") == list(TABLE_COLUMNS)
    rows = parse_table_csv(out.read_text())
    assert [f"{r.approx:#.5g}" for r in rows] == ["30.623", "99.000", "999.00", "53.772", "172.21", "1731.1"]


def test_diagnose_zero_variance_single_step(write_config, capsys):
    cfg = write_config(n=1, levels=[0.99], N=5000)
    assert main(["diagnose", "--config", cfg, "--c-grid", "0.5,1,2,4,8", "--format", "csv"]) == EXIT_OK
    out = capsys.readouterr().out
    rows = [line.split(",") for line in out.splitlines() if line and not line.startswith(("#", "p,"))]
    ratios = [float(r[3]) for r in rows]
    assert ratios[1] == 1.0
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    assert "not applicable (α ≤ 2)" in out


def test_diagnose_reports_es_bound_for_alpha_three(write_config, capsys):
    cfg = write_config(alpha=3, n=2, levels=[0.999], N=5000)
    assert main(["diagnose", "--config", cfg]) == EXIT_OK
    out = capsys.readouterr().out
    assert "es_ratio_bound=" in out and "not applicable" not in out
    assert "var_ratio_bound=" in out
