import csv
import json

import numpy as np
import pytest

from fracplateau.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, main
from fracplateau.experiments import (ConfigError, PreconditionError, ROW_COLUMNS, SweepRow,
                                     emit_report, load_config, run_detachment_sweep,
                                     run_stickiness_sweep, sweep_config_from_dict)
from fracplateau.experiments.sweeps import (THREADS_ENV, _threshold, default_threads,
                                            detachment_assertions, stickiness_assertions)

FAST = {"domain": {"W": 4.0, "h": 0.0625}, "sweep": {"s_values": [0.5, 0.3]},
        "output": {"plots": False}}


def fast(**sections):
    raw = {k: dict(v) for k, v in FAST.items()}
    for k, v in sections.items():
        raw.setdefault(k, {}).update(v)
    return raw


def write_toml(path, raw):
    lines = []
    for sec, vals in raw.items():
        lines.append(f"[{sec}]")
        for k, v in vals.items():
            if isinstance(v, str):
                lines.append(f'{k} = "{v}"')
            elif isinstance(v, bool):
                lines.append(f"{k} = {str(v).lower()}")
            else:
                lines.append(f"{k} = {v!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_defaults_give_the_reference_geometry():
    cfg = sweep_config_from_dict({})
    t = cfg.template
    assert t.phi.kappa == 2.0 and t.obstacle.region == (-0.4, 0.4) and t.h == 1.0 / 64
    assert cfg.s_values == (0.5, 0.25, 0.1, 0.05, 0.02)
    # 2 + ceil(max(sup psi, sup of |phi| on the unit neighbourhood)) = 2 + ceil(4)
    assert cfg.k0 == 6 and cfg.k_levels == (6.0,)
    assert t.resolved_M() == 2.0 + 42.0 + 1.0


@pytest.mark.parametrize("raw", [
    {"domain": {"bogus": 1}},
    {"nonsense": {}},
    {"sweep": {"s_values": [0.2, 0.5]}},
    {"sweep": {"s_values": [0.5, 1.0]}},
    {"sweep": {"k_levels": [1.0]}},
    {"sweep": {"tol": -1.0}},
    {"domain": {"h": 0.3}},
    {"exterior": {"kind": "spiral"}},
    {"obstacle": {"region": [-2.0, 0.0]}},
])
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        sweep_config_from_dict(raw)


def test_overrides_and_region_keywords(tmp_path):
    cfg = sweep_config_from_dict({"obstacle": {"region": "omega"}},
                                 {"h": 0.125, "tol": 1e-6, "out_dir": str(tmp_path)})
    assert cfg.template.obstacle.region == (-1.0, 1.0)
    assert cfg.template.h == 0.125 and cfg.tol == 1e-6 and cfg.out_dir == str(tmp_path)
    assert sweep_config_from_dict({"obstacle": {"region": "none"}}).template.obstacle.empty
    with pytest.raises(ConfigError):
        sweep_config_from_dict({}, {"h": 0.3})


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[domain\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "x")
    assert default_threads() == 1


def row(s, coinc, mn, ok=True):
    return SweepRow(s, coinc, mn, 0.0, mn, 0.0, 0.0, 0.0, ok, 1, abs(mn), 1.0, True, True,
                    error="" if ok else "boom")


def test_threshold_definition():
    rows = [row(0.5, 0.2, -1), row(0.25, 1.0, -2), row(0.1, 1.0, -3)]
    assert _threshold(rows, lambda r: r.coincidence_fraction == 1.0) == 0.25
    assert _threshold(rows, lambda r: r.min_off_A < -5) is None


def test_trend_assertions():
    good = [row(0.5, 0.2, -1), row(0.25, 0.8, -2), row(0.1, 1.0, -3)]
    assert all(a.passed for a in stickiness_assertions(good))
    flat = [row(0.5, 0.2, -1), row(0.25, 1.0, -2), row(0.1, 1.0, -2)]
    assert not all(a.passed for a in stickiness_assertions(flat))
    up = [row(0.5, 0.0, 1), row(0.25, 0.0, 4), row(0.1, 0.0, 9)]
    assert all(a.passed for a in detachment_assertions(up, (6.0,)))
    assert not all(a.passed for a in detachment_assertions(up, (10.0,)))


def test_preconditions_on_the_exterior_datum():
    with pytest.raises(PreconditionError):
        run_stickiness_sweep(sweep_config_from_dict(fast(exterior={"kappa": -2.0})))
    with pytest.raises(PreconditionError):
        run_detachment_sweep(sweep_config_from_dict(fast()))


@pytest.fixture(scope="module")
def small_sweep():
    return run_stickiness_sweep(sweep_config_from_dict(fast()))


def test_small_sweep_rows(small_sweep):
    rep = small_sweep
    assert [r.s for r in rep.rows] == [0.5, 0.3]
    assert all(r.certified and r.ok for r in rep.rows)
    assert rep.kind == "stickiness" and rep.eps == 1.0


def test_emit_report(small_sweep, tmp_path):
    emit_report(small_sweep, tmp_path)
    with open(tmp_path / "rows.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == ROW_COLUMNS
    assert len(rows) == 3 and all(r[-1] == "" for r in rows[1:])
    assert float(rows[1][0]) == 0.5
    prof = list(csv.reader(open(tmp_path / "profile_0.5.csv")))
    assert prof[0] == ["x", "u", "psi"] and len(prof) == 34
    m = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("config", "resolved", "tolerances", "grid", "versions", "thresholds", "rows"):
        assert key in m
    assert m["resolved"]["k0"] == 6


def test_window_doubling_check(small_sweep):
    rows = small_sweep.rows
    assert all(r.W == 4.0 and 0.0 <= r.window_diff <= 1e-6 for r in rows)
    names = [a.name for a in small_sweep.assertions]
    assert any("window" in n for n in names)
    off = run_stickiness_sweep(sweep_config_from_dict(
        fast(sweep={"window_check": False, "s_values": [0.5]})))
    assert np.isnan(off.rows[0].window_diff)
    assert not any("window" in a.name for a in off.assertions)
    cfg = sweep_config_from_dict(fast(sweep={"window_tol": 1e-3}))
    assert cfg.window_check and cfg.window_tol == 1e-3
    with pytest.raises(ConfigError):
        sweep_config_from_dict(fast(sweep={"window_tol": 0.0}))


def test_empty_sweep_writes_header_only(tmp_path):
    rep = run_stickiness_sweep(sweep_config_from_dict(fast(sweep={"s_values": []})))
    assert rep.rows == []
    emit_report(rep, tmp_path)
    with open(tmp_path / "rows.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows == [list(ROW_COLUMNS)]


def test_threaded_sweep_matches_serial(small_sweep):
    rep = run_stickiness_sweep(sweep_config_from_dict(fast()), threads=2)
    for a, b in zip(rep.rows, small_sweep.rows):
        assert np.array_equal(a.u, b.u)


def test_cli_solve(tmp_path):
    cfg = write_toml(tmp_path / "c.toml", fast(kernel={"s": 0.5}))
    rc = main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == EXIT_OK
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["certified"] and rep["jbond_holds"]
    assert (tmp_path / "o" / "profile.csv").exists()


def test_cli_sweeps(tmp_path, capsys):
    cfg = write_toml(tmp_path / "c.toml", fast(sweep={"paired_eps": [0.0]}))
    rc = main(["sweep-stickiness", "--config", str(cfg), "--out", str(tmp_path / "st")])
    out = capsys.readouterr().out
    # two orders cannot show strict decrease over three values
    assert rc == EXIT_ASSERT and "[FAIL]" in out
    assert (tmp_path / "st" / "rows.csv").exists()
    assert (tmp_path / "st" / "eps_0" / "rows.csv").exists()
    cfg = write_toml(tmp_path / "d.toml", fast(exterior={"kappa": -2.0},
                                               obstacle={"c0": 0.0},
                                               sweep={"k_levels": [6.0, 8.0]}))
    rc = main(["sweep-detachment", "--config", str(cfg), "--out", str(tmp_path / "de")])
    assert rc in (EXIT_OK, EXIT_ASSERT)
    assert (tmp_path / "de" / "manifest.json").exists()


def test_cli_config_errors(tmp_path, capsys):
    cfg = write_toml(tmp_path / "c.toml", {"domain": {"bogus": 1}})
    assert main(["sweep-stickiness", "--config", str(cfg)]) == EXIT_CONFIG
    cfg = write_toml(tmp_path / "d.toml", fast(exterior={"kappa": -2.0}))
    assert main(["sweep-stickiness", "--config", str(cfg)]) == EXIT_CONFIG
    assert main(["check", "--threads", "0", "--config", str(cfg)]) in (EXIT_OK, EXIT_CONFIG)
    assert "configuration error" in capsys.readouterr().err


def test_cli_alpha(tmp_path, capsys):
    cfg = tmp_path / "a.toml"
    cfg.write_text('[set]\nshape = {kind = "halfplane", nx = 0.0, ny = 1.0, c = 0.0}\n')
    assert main(["alpha", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    res = json.loads((tmp_path / "alpha.json").read_text())
    assert res["alpha_bar"] == pytest.approx(np.pi) and res["exact"]
    assert main(["alpha"]) == EXIT_OK
    cfg.write_text('[set]\nshape = {kind = "blob"}\n')
    assert main(["alpha", "--config", str(cfg)]) == EXIT_CONFIG


def test_cli_check(capsys):
    assert main(["check"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and "checks passed" in out


def test_full_adhesion_when_the_obstacle_covers_omega():
    raw = fast(obstacle={"region": "omega", "psi": "quadratic", "c0": 0.3, "c2": -0.2},
               sweep={"s_values": [0.5, 0.1, 0.05], "window_check": False})
    rep = run_stickiness_sweep(sweep_config_from_dict(raw))
    assert all(r.certified for r in rep.rows)
    assert rep.rows[-1].coincidence_fraction == 1.0


def test_detachment_without_obstacle():
    raw = fast(exterior={"kappa": -2.0}, obstacle={"region": "none"},
               sweep={"s_values": [0.5, 0.3, 0.1], "window_check": False})
    rep = run_detachment_sweep(sweep_config_from_dict(raw))
    mins = [r.min_on_Omega for r in rep.rows]
    assert all(r.certified for r in rep.rows)
    assert mins[0] < mins[1] < mins[2] and mins[2] > 100.0


def test_large_s_control_row_stays_at_the_data_scale():
    raw = fast(exterior={"kappa": -2.0}, obstacle={"psi": "constant", "c0": 0.0},
               sweep={"s_values": [0.9], "window_check": False})
    row = run_detachment_sweep(sweep_config_from_dict(raw)).rows[0]
    assert row.certified and row.max_on_Omega <= row.apriori_bound
