import json
import math

import numpy as np
import pytest

from nlametro import cli
from nlametro.fisher import qfi_effective_closed_form
from nlametro.instrument import NlaParams
from nlametro.probes import ProbeSpec


def _write_probe(tmp_path, name, amps):
    path = tmp_path / name
    path.write_text(json.dumps([[float(a), 0.0] for a in amps]))
    return path


def _rows(csv_text):
    lines = csv_text.strip().split("\n")
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, rows


def test_compare_vacuum_hand_row(tmp_path, capsys):
    probe = _write_probe(tmp_path, "vacuum.json", [1.0])
    rc = cli.main([
        "compare", "--probe", "custom", "--custom-file", str(probe),
        "--p", "1", "--g", "2:2:1",
    ])
    assert rc == 0
    header, rows = _rows(capsys.readouterr().out)
    assert header == ["g", "q_eff", "ps_qs", "q_unc"]
    g, q_eff, ps_qs, q_unc = rows[0]
    assert g == 2.0
    assert q_eff == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert ps_qs == pytest.approx(0.0, abs=1e-9)
    assert q_unc == pytest.approx(0.0, abs=1e-9)


def test_compare_monotone_decreasing_columns(capsys):
    rc = cli.main([
        "compare", "--probe", "coherent", "--nbar", "1",
        "--p", "3", "--g", "1.05:6:200",
    ])
    assert rc == 0
    _, rows = _rows(capsys.readouterr().out)
    assert len(rows) == 200
    q_eff = np.array([r[1] for r in rows])
    assert np.all(np.diff(q_eff) < 0.0)
    # per-row hierarchy from the table itself
    for _, qe, psqs, qunc in rows:
        assert psqs <= qe and qunc <= qe


def test_compare_rejects_gain_at_or_below_one(capsys):
    rc = cli.main([
        "compare", "--probe", "coherent", "--nbar", "1",
        "--p", "3", "--g", "0.9:2:10",
    ])
    assert rc == 2
    err = capsys.readouterr().err
    assert "g > 1" in err


def test_contributions_two_level_hand_row(tmp_path, capsys):
    s = 1.0 / math.sqrt(2.0)
    probe = _write_probe(tmp_path, "two.json", [s, s])
    rc = cli.main([
        "contributions", "--probe", "custom", "--custom-file", str(probe),
        "--p", "1", "--g", "2:2:1",
    ])
    assert rc == 0
    header, rows = _rows(capsys.readouterr().out)
    assert header == ["g", "f_c", "ps_qs", "pf_qf"]
    _, f_c, ps_qs, pf_qf = rows[0]
    assert f_c == pytest.approx(1.0 / 15.0, abs=1e-9)
    assert ps_qs == pytest.approx(0.1, abs=1e-9)
    assert pf_qf == pytest.approx(0.0, abs=1e-9)


def test_contributions_sum_to_q_eff(capsys):
    # JSON output carries full-precision floats (CSV rounds to 9 significant
    # digits, which is coarser than the identity we are checking here).
    rc = cli.main([
        "contributions", "--probe", "squeezed-vacuum", "--nbar", "1.5",
        "--p", "2", "--g", "1.1:3:12", "--format", "json",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    probe = ProbeSpec.from_nbar("squeezed-vacuum", 1.5).build()
    for g, f_c, ps_qs, pf_qf in payload["rows"]:
        q_eff = qfi_effective_closed_form(probe, NlaParams(g=g, p=2))
        assert f_c + ps_qs + pf_qf == pytest.approx(q_eff, rel=1e-9)


def test_csv_formatting_nine_significant_digits(capsys):
    cli.main(["compare", "--probe", "coherent", "--nbar", "1", "--p", "3", "--g", "1.3:1.3:1"])
    out = capsys.readouterr().out
    lines = out.split("\n")
    assert out.endswith("\n") and "\r" not in out
    value = lines[1].split(",")[1]
    assert len(value.replace(".", "").replace("-", "").lstrip("0")) <= 9


def test_json_table_matches_csv_values(capsys):
    args = ["compare", "--probe", "coherent", "--nbar", "0.5", "--p", "2", "--g", "1.2:2:3"]
    cli.main(args)
    _, csv_rows = _rows(capsys.readouterr().out)
    cli.main(args + ["--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema_version"] == cli.TABLE_SCHEMA_VERSION
    assert payload["columns"] == ["g", "q_eff", "ps_qs", "q_unc"]
    for csv_row, json_row in zip(csv_rows, payload["rows"]):
        assert json_row == pytest.approx(csv_row, rel=1e-8)


def test_threads_do_not_change_output(capsys):
    base = ["compare", "--probe", "squeezed-vacuum", "--nbar", "1", "--p", "2", "--g", "1.1:4:40"]
    cli.main(base)
    serial = capsys.readouterr().out
    cli.main(base + ["--threads", "4"])
    threaded = capsys.readouterr().out
    assert serial == threaded


def test_sweep_nbar_squeezed_beats_coherent_at_moderate_gain(capsys):
    # p = 2, g = 1.5: squeezed vacuum dominates once the input carries at
    # least a photon on average (below nbar ~ 0.9 the coherent probe wins).
    cols = {}
    for kind in ("coherent", "squeezed-vacuum"):
        rc = cli.main([
            "sweep-nbar", "--probe", kind, "--gain", "1.5",
            "--p", "2", "--nbar-grid", "1:3:9",
        ])
        assert rc == 0
        _, rows = _rows(capsys.readouterr().out)
        cols[kind] = np.array([r[1] for r in rows])
    assert np.all(cols["squeezed-vacuum"] >= cols["coherent"])


def test_sweep_nbar_zero_energy_matches_vacuum(tmp_path, capsys):
    cli.main([
        "sweep-nbar", "--probe", "coherent", "--gain", "1.5",
        "--p", "2", "--nbar-grid", "0:0:1", "--format", "json",
    ])
    payload = json.loads(capsys.readouterr().out)
    vacuum_q = 4.0 * 4.0 * 1.5 ** -6 / (1.0 - 1.5 ** -4)
    assert payload["rows"][0][1] == pytest.approx(vacuum_q, rel=1e-12)


def test_sweep_nbar_distinct_threshold_columns(capsys):
    rc = cli.main([
        "sweep-nbar", "--probe", "coherent", "--gain", "1.5",
        "--p", "2", "3", "4", "--nbar-grid", "0:4:20",
    ])
    assert rc == 0
    header, rows = _rows(capsys.readouterr().out)
    assert header == ["nbar", "q_eff_p2", "q_eff_p3", "q_eff_p4"]
    arr = np.array(rows)
    assert np.all(np.isfinite(arr)) and np.all(arr[:, 1:] > 0.0)
    # columns must genuinely differ
    assert not np.allclose(arr[:, 1], arr[:, 2])
    assert not np.allclose(arr[:, 2], arr[:, 3])


def test_simulate_writes_reproducible_json(tmp_path):
    probe = _write_probe(tmp_path, "vacuum.json", [1.0])
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    argv = [
        "simulate", "--probe", "custom", "--custom-file", str(probe),
        "--p", "1", "--g-true", "2", "--detector", "herald-only",
        "--shots", "2000", "--replications", "40", "--seed", "123",
    ]
    assert cli.main(argv + ["--out", str(out1)]) == 0
    assert cli.main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    payload = json.loads(out1.read_text())
    assert payload["schema_version"] == 1
    assert payload["config"]["seed"] == 123
    assert payload["config"]["probe"]["kind"] == "custom"
    assert len(payload["result"]["estimates"]) == 40
    assert payload["result"]["ratio"] > 0


def test_simulate_records_jsonl(tmp_path):
    probe = _write_probe(tmp_path, "vacuum.json", [1.0])
    records = tmp_path / "records.jsonl"
    rc = cli.main([
        "simulate", "--probe", "custom", "--custom-file", str(probe),
        "--p", "1", "--g-true", "2", "--detector", "herald-only",
        "--shots", "500", "--replications", "10", "--seed", "7",
        "--out", str(tmp_path / "r.json"), "--records", str(records),
    ])
    assert rc == 0
    assert len(records.read_text().splitlines()) == 10


def test_simulate_degenerate_probe_structured_error(tmp_path, capsys):
    probe = _write_probe(tmp_path, "one.json", [0.0, 1.0])
    rc = cli.main([
        "simulate", "--probe", "custom", "--custom-file", str(probe),
        "--p", "1", "--g-true", "2", "--detector", "photon-counting",
        "--shots", "100", "--replications", "5", "--seed", "1",
    ])
    assert rc == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "DegenerateLikelihood"


def test_probe_flag_validation(capsys):
    assert cli.main(["compare", "--probe", "custom", "--p", "1", "--g", "2:2:1"]) == 2
    assert "custom-file" in capsys.readouterr().err
    assert cli.main(["compare", "--probe", "coherent", "--p", "1", "--g", "2:2:1"]) == 2
    assert "--nbar or --amplitude" in capsys.readouterr().err


def test_bad_grid_syntax_rejected(capsys):
    assert cli.main(["compare", "--probe", "coherent", "--nbar", "1", "--p", "1", "--g", "1.5:2"]) == 2
    assert "a:b:n" in capsys.readouterr().err
