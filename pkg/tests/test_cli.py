"""Command-line behavior: exit codes, output layout, determinism."""

from __future__ import annotations

import csv
import json

import pytest

from starflux.cli import main

PAIR_NET = {
    "arcs": [
        {"length": 1.0, "speed": 1.0, "orientation": "in"},
        {"length": 1.0, "speed": 1.0, "orientation": "out"},
    ],
    "K": [[0.0, 0.5], [0.5, 0.0]],
}

CROSS_NET = {
    "arcs": [
        {"length": 1.0, "speed": 1.0, "orientation": "in"},
        {"length": 1.0, "speed": 2.0, "orientation": "in"},
        {"length": 1.0, "speed": 1.0, "orientation": "out"},
        {"length": 1.0, "speed": 2.0, "orientation": "out"},
    ],
    "K": [
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
    ],
}

PAIR_DATA = {
    "arcs": [
        {"breaks": [0.35], "values": [1.0, 0.0]},
        {"breaks": [], "values": [0.0]},
    ],
    "boundary": [1.0, 0.0],
}


def write_json(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_gamma_prints_unit_weight_and_certificates(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    assert main(["gamma", "--config", net]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "outgoing_arc,incoming_0"
    assert float(lines[1].split(",")[1]) == pytest.approx(1.0, abs=1e-12)
    assert lines[2].startswith("certificates: irreducible=True")
    assert "m_matrix_ok=True" in lines[2]


def test_malformed_json_exits_2_with_diagnostic(tmp_path, capsys):
    bad = tmp_path / "net.json"
    bad.write_text('{"arcs": [{"length": }]}')
    assert main(["gamma", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "net.json:1:" in err


def test_schema_violation_exits_2_with_field_path(tmp_path, capsys):
    doc = json.loads(json.dumps(PAIR_NET))
    del doc["arcs"][1]["speed"]
    net = write_json(tmp_path, "net.json", doc)
    assert main(["gamma", "--config", net]) == 2
    assert "arcs[1].speed" in capsys.readouterr().err


def test_design_then_gamma_round_trip(tmp_path, capsys):
    net_doc = {"arcs": CROSS_NET["arcs"]}
    net = write_json(tmp_path, "net.json", net_doc)
    target = write_json(tmp_path, "target.json", {"weights": [0.3, 0.7]})
    out_dir = tmp_path / "designed"
    assert main([
        "design", "--config", net, "--target", target, "--out", str(out_dir),
    ]) == 0
    summary = capsys.readouterr().out
    assert "round_trip_error=" in summary

    rows = read_csv(out_dir / "coupling.csv")
    k = [[float(row[f"arc_{j}"]) for j in range(4)] for row in rows]
    full = dict(CROSS_NET, K=k)
    net_full = write_json(tmp_path, "net_full.json", full)
    gamma_dir = tmp_path / "gamma_out"
    assert main(["gamma", "--config", net_full, "--out", str(gamma_dir)]) == 0
    gamma_rows = read_csv(gamma_dir / "gamma.csv")
    for row in gamma_rows:
        weight = 0.3 if row["outgoing_arc"] == "2" else 0.7
        for j in (0, 1):
            assert abs(float(row[f"incoming_{j}"]) - weight) <= 1e-9


def test_design_mode_mismatch_exits_2(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", {"arcs": CROSS_NET["arcs"]})
    target = write_json(tmp_path, "target.json", {"weights": [0.3, 0.7]})
    assert main([
        "design", "--config", net, "--target", target, "--mode", "two-out",
    ]) == 2
    assert "two-out" in capsys.readouterr().err


def test_simulate_hyperbolic_stdout_csv(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    assert main([
        "simulate", "--config", net, "--data", data,
        "--mode", "hyperbolic", "--T", "0.5", "--times", "2", "--points", "3",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "arc_id,x,t,u"
    assert lines[-1].startswith("sampled 2 times")
    assert len(lines) == 1 + 2 * 2 * 3 + 1  # header + times*arcs*points + summary


def test_simulate_parabolic_requires_epsilon(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    assert main([
        "simulate", "--config", net, "--data", data,
        "--mode", "parabolic", "--T", "0.1",
    ]) == 2
    assert "--epsilon" in capsys.readouterr().err


def test_simulate_parabolic_writes_snapshot_and_diagnostics(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    out_dir = tmp_path / "run"
    assert main([
        "simulate", "--config", net, "--data", data, "--mode", "parabolic",
        "--epsilon", "0.1", "--T", "0.1", "--out", str(out_dir),
    ]) == 0
    capsys.readouterr()
    snap = read_csv(out_dir / "snapshot.csv")
    assert {row["t"] for row in snap} == {f"{0.1:.16e}"}
    diag = read_csv(out_dir / "diagnostics.csv")
    assert list(diag[0]) == ["t", "l1_norm", "min_value", "flux_residual"]
    assert float(diag[0]["t"]) == 0.0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["epsilon"] == 0.1
    assert sorted(manifest["outputs"]) == ["diagnostics.csv", "snapshot.csv"]


def test_converge_manifest_and_determinism(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    exp = write_json(tmp_path, "exp.json", {
        "network": "net.json",
        "data": "u0.json",
        "epsilons": [0.08, 0.04],
        "T": 0.3,
    })
    outs = []
    for tag in ("a", "b"):
        out_dir = tmp_path / tag
        assert main([
            "converge", "--config", exp, "--out", str(out_dir),
            "--workers", "2", "--seed", "7",
        ]) == 0
        outs.append(out_dir)
    capsys.readouterr()

    manifest = json.loads((outs[0] / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["epsilons"] == [0.08, 0.04]
    assert manifest["failures"] == []

    # identical inputs give identical bytes apart from the wall_time column
    first, second = (
        (out / "convergence.csv").read_text().splitlines() for out in outs
    )
    assert first[0] == second[0]
    for a, b in zip(first[1:], second[1:]):
        assert a.split(",")[:-1] == b.split(",")[:-1]


def test_converge_reports_failed_levels(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    exp = write_json(tmp_path, "exp.json", {
        "network": "net.json",
        "data": "u0.json",
        "epsilons": [0.7, 0.04],
        "T": 0.3,
    })
    out_dir = tmp_path / "run"
    assert main(["converge", "--config", exp, "--out", str(out_dir)]) == 0
    stdout = capsys.readouterr().out
    assert "1 failures" in stdout
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["failures"][0]["epsilon"] == 0.7
    assert "WidthOverflow" in manifest["failures"][0]["reason"]
    rows = read_csv(out_dir / "convergence.csv")
    assert len(rows) == 1


def test_approx_data_csv(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    assert main([
        "approx-data", "--config", net, "--data", data, "--n-range", "3:5",
    ]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,epsilon_n,l1_error,tv_norm,scaled_w21,membership_residual"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["3", "4", "5"]


def test_approx_data_bad_range_exits_2(tmp_path, capsys):
    net = write_json(tmp_path, "net.json", PAIR_NET)
    data = write_json(tmp_path, "u0.json", PAIR_DATA)
    assert main([
        "approx-data", "--config", net, "--data", data, "--n-range", "5-3",
    ]) == 2
    assert "--n-range" in capsys.readouterr().err


def test_numerical_failure_exits_3(tmp_path, capsys):
    # epsilon_n = 0.5 cannot clear the node zones on short arcs
    short = {
        "arcs": [
            {"length": 0.6, "speed": 1.0, "orientation": "in"},
            {"length": 0.6, "speed": 1.0, "orientation": "out"},
        ],
        "K": [[0.0, 0.5], [0.5, 0.0]],
    }
    net = write_json(tmp_path, "net.json", short)
    data = write_json(tmp_path, "u0.json", {
        "arcs": [
            {"breaks": [], "values": [0.0]},
            {"breaks": [], "values": [0.0]},
        ],
        "boundary": [0.0, 0.0],
    })
    assert main([
        "approx-data", "--config", net, "--data", data, "--n-range", "1:1",
    ]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_missing_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2
