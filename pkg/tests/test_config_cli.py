"""Config parsing and the command-line entry points."""

import csv
import json
import math

import numpy as np
import pytest

from cornerflow import ParseError, ValidationError, parse_config
from cornerflow.cli import main


def base_config(**overrides):
    cfg = {
        "domain": {"kind": "exterior", "map_id": "exterior_segment"},
        "patch": {
            "shape": "disk",
            "center": [0.0, 1.5],
            "size": 0.3,
            "omega0": -1.0,
            "h": 0.05,
        },
        "gamma0": 1.0,
        "t_final": 0.2,
        "dt": 0.1,
        "output_stride": 1,
    }
    cfg.update(overrides)
    return cfg


# ---- parsing ---------------------------------------------------------------


def test_parse_dict_and_text_and_file(tmp_path):
    cfg = base_config()
    a = parse_config(cfg)
    b = parse_config(json.dumps(cfg))
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    c = parse_config(path)
    d = parse_config(str(path))
    for rc in (a, b, c, d):
        assert rc.domain.map_id == "exterior_segment"
        assert rc.patch.center == 1.5j
        assert rc.t_final == 0.2
        assert rc.gamma0 == 1.0
    cmap, ens, circ = a.build()
    assert cmap.kind == "exterior"
    assert len(ens) > 0
    assert circ.gamma0 == 1.0


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        parse_config("{not json")
    with pytest.raises(ParseError):
        parse_config("no/such/file.json")
    listfile = tmp_path / "list.json"
    listfile.write_text("[1, 2, 3]")
    with pytest.raises(ValidationError):
        parse_config(listfile)


def test_unknown_keys_rejected_everywhere():
    with pytest.raises(ValidationError):
        parse_config(base_config(extra=1))
    cfg = base_config()
    cfg["domain"]["colour"] = "blue"
    with pytest.raises(ValidationError):
        parse_config(cfg)
    cfg = base_config()
    cfg["patch"]["radius"] = 0.3
    with pytest.raises(ValidationError):
        parse_config(cfg)
    cfg = base_config(twin={"mode": "jitter", "速度": 1})
    with pytest.raises(ValidationError):
        parse_config(cfg)


def test_missing_keys_rejected():
    cfg = base_config()
    del cfg["t_final"]
    with pytest.raises(ValidationError):
        parse_config(cfg)
    cfg = base_config()
    del cfg["patch"]["omega0"]
    with pytest.raises(ValidationError):
        parse_config(cfg)


def test_booleans_are_not_numbers():
    with pytest.raises(ValidationError):
        parse_config(base_config(t_final=True))
    cfg = base_config()
    cfg["patch"]["size"] = True
    with pytest.raises(ValidationError):
        parse_config(cfg)


def test_value_validation():
    with pytest.raises(ValidationError):
        parse_config(base_config(dt=-0.5))
    with pytest.raises(ValidationError):
        parse_config(base_config(output_stride=0))
    with pytest.raises(ValidationError):
        parse_config(base_config(tracked=[-1]))
    with pytest.raises(ValidationError):
        parse_config(base_config(twin={"mode": "chaos"}))
    cfg = base_config()
    cfg["patch"]["center"] = [0.0]
    with pytest.raises(ValidationError):
        parse_config(cfg)
    cfg = base_config()
    cfg["domain"]["kind"] = "wormhole"
    with pytest.raises(ValidationError):
        parse_config(cfg)


def test_domain_params_checked_at_parse_time():
    cfg = base_config()
    cfg["domain"] = {"kind": "exterior", "map_id": "exterior_ellipse",
                     "parameters": {"a": 1.0, "b": 2.0}}
    with pytest.raises(ValidationError):
        parse_config(cfg)
    cfg["domain"] = {"kind": "exterior", "map_id": "no_such_family"}
    from cornerflow import UnknownMapFamily

    with pytest.raises(UnknownMapFamily):
        parse_config(cfg)


def test_twin_defaults():
    rc = parse_config(base_config(twin={"mode": "identical"}))
    assert rc.twin.mode == "identical"
    assert rc.twin.epsilon == 1e-6
    assert parse_config(base_config()).twin is None


# ---- CLI -------------------------------------------------------------------


def write_config(tmp_path, **overrides):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(base_config(**overrides)))
    return str(path)


def test_cli_simulate_outputs(tmp_path):
    cfg = write_config(tmp_path, tracked=[0])
    out = tmp_path / "sim"
    rc = main(["simulate", "--config", cfg, "--out", str(out), "--quiet"])
    assert rc == 0

    summary = json.loads((out / "summary.json").read_text())
    assert summary["command"] == "simulate"
    assert summary["failed"] == []
    names = {inv["name"] for inv in summary["all_invariants"]}
    assert "total_circulation_conserved" in names
    assert "lyapunov_envelope" in names

    with open(out / "diagnostics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["t"]) for r in rows] == pytest.approx([0.0, 0.1, 0.2])
    # full precision floats round-trip through the CSV
    assert float(rows[0]["total_circ"]) == float(rows[-1]["total_circ"])

    snaps = sorted((out / "snapshots").glob("snapshot_*.json"))
    assert len(snaps) == 3
    first = json.loads(snaps[0].read_text())
    assert first["time"] == 0.0
    assert {"x", "y", "gamma", "delta"} <= set(first["particles"][0])

    with open(out / "lyapunov_trace.csv") as fh:
        trace_rows = list(csv.DictReader(fh))
    assert len(trace_rows) == 3  # every step for the tracked particle
    assert {"particle", "t", "L1", "dt_L1", "L"} <= set(trace_rows[0])


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    missing = str(tmp_path / "missing.json")
    assert main(["simulate", "--config", missing, "--out", str(tmp_path / "o")]) == 2
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--threads", "0"]) == 2


def test_cli_probe_map(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "pm"
    assert main(["probe-map", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    report = json.loads((out / "probe_map.json").read_text())
    assert report["farfield"]["beta"] == pytest.approx([2.0, 0.0], abs=1e-8)
    corners = report["corners"]
    assert len(corners) == 2
    for c in corners:
        assert c["fitted_slope"] == pytest.approx(c["expected_slope"], abs=0.05)
    assert report["roundtrip_max_error"] < 1e-9


def test_cli_kernel_test(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "kt"
    assert main(["kernel-test", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    with open(out / "kernel_checks.csv") as fh:
        rows = {r["check"]: r for r in csv.DictReader(fh)}
    assert set(rows) == {
        "green_symmetry",
        "green_negative",
        "fraction_identity",
        "kernel_vs_green_gradient",
        "harmonic_circulation",
        "harmonic_far_decay",
    }
    for r in rows.values():
        assert r["result"] == "pass"


def test_cli_validate_lyapunov(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "vl"
    assert main(["validate-lyapunov", "--config", cfg, "--out", str(out),
                 "--quiet"]) == 0
    summary = json.loads((out / "lyapunov_summary.json").read_text())
    checks = {c["name"]: c for c in summary["checks"]}
    assert checks["orthogonality"]["value"] < 1e-5
    assert checks["pinch_lower_positive"]["value"] > 0.0
    assert summary["failed"] == []


def test_cli_twin_run_identical(tmp_path):
    cfg = write_config(tmp_path, twin={"mode": "identical"})
    out = tmp_path / "tw"
    assert main(["twin-run", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "twin_summary.json").read_text())
    assert summary["identical_gap_zero"] is True
    assert summary["gap_final"] == 0.0
    with open(out / "twin_gap.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["gap_l2"]) == 0.0 for r in rows)


def test_cli_twin_run_jitter(tmp_path):
    cfg = write_config(tmp_path, twin={"mode": "jitter", "epsilon": 1e-6})
    out = tmp_path / "twj"
    assert main(["twin-run", "--config", cfg, "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "twin_summary.json").read_text())
    assert summary["gap_final"] > 0.0
    assert summary["projection"]["ratio"] <= 2.0
