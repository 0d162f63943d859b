import pytest

from nomacast.cli import (CSV_HEADER, PRESETS, ComparisonReport, ReportRow,
                          ScenarioError, Scenario, emit_csv, load_scenario_file,
                          main, parse_metrics, parse_snr_grid, read_csv,
                          run_scenario)
from nomacast.montecarlo import MetricKind
from nomacast.transmission import LinkConfig


def test_presets_resolvable_and_valid():
    assert set(PRESETS) == {"fig1", "fig2", "fig3", "fig4", "fig5"}
    for variants in PRESETS.values():
        for scenario in variants:
            scenario.validate()
    assert [s.scheduling for s in PRESETS["fig5"]] == [False, True]
    assert [s.r_s for s in PRESETS["fig4"]] == [1.0, 2.0, 3.0]
    assert [s.oma_beamformer for s in PRESETS["fig3"]] == ["mrt", "equal", "random"]


def test_parse_snr_grid():
    assert parse_snr_grid("0:40:10") == (0.0, 10.0, 20.0, 30.0, 40.0)
    assert parse_snr_grid("4,8,16") == (4.0, 8.0, 16.0)
    with pytest.raises(ScenarioError):
        parse_snr_grid("10:0:5")
    with pytest.raises(ScenarioError):
        parse_snr_grid("abc")


def test_parse_metrics():
    assert parse_metrics(["unicast_outage"]) == (MetricKind.UNICAST_OUTAGE,)
    with pytest.raises(ScenarioError):
        parse_metrics(["not_a_metric"])


def _tiny(name="tiny", **overrides):
    base = dict(name=name, m=2, k=3, r_m=1.0, r_u=2.0, r_s=1.0,
                snr_grid_db=(10.0, 20.0), na=32,
                metrics=(MetricKind.UNICAST_OUTAGE, MetricKind.OUTAGE_RATE_UNICAST),
                samples=5000, seed=77)
    base.update(overrides)
    return Scenario(**base)


def test_run_scenario_writes_expected_csvs(tmp_path):
    report, paths = run_scenario(_tiny(), out_dir=tmp_path)
    assert len(paths) == 2
    for path in paths:
        rows = read_csv(path)
        assert {r["method"] for r in rows} == {"analytic", "mc"}
        snrs = [r["snr_db"] for r in rows]
        assert snrs == sorted(snrs)
    assert report.rows and len(report.verdicts) == len(report.rows)


def test_csv_byte_identical_across_runs(tmp_path):
    _, paths_a = run_scenario(_tiny(), out_dir=tmp_path / "a")
    _, paths_b = run_scenario(_tiny(), out_dir=tmp_path / "b")
    for pa, pb in zip(paths_a, paths_b):
        assert pa.read_bytes() == pb.read_bytes()


def test_csv_round_trip_idempotent(tmp_path):
    _, paths = run_scenario(_tiny(), out_dir=tmp_path)
    original = paths[0].read_bytes()
    emit_csv(read_csv(paths[0]), paths[0])
    assert paths[0].read_bytes() == original


def test_csv_header_schema(tmp_path):
    _, paths = run_scenario(_tiny(), out_dir=tmp_path)
    first = paths[0].read_text().splitlines()[0]
    assert first == ",".join(CSV_HEADER)


def test_analytic_only_run_has_no_mc_rows(tmp_path):
    report, paths = run_scenario(_tiny(samples=0), out_dir=tmp_path, mode="analytic")
    for path in paths:
        assert all(r["method"] == "analytic" for r in read_csv(path))
    assert not report.rows  # nothing to compare
    assert report.all_pass


def test_mc_only_run_has_no_analytic_rows(tmp_path):
    report, paths = run_scenario(_tiny(samples=2000), out_dir=tmp_path, mode="mc")
    for path in paths:
        assert all(r["method"] == "mc" for r in read_csv(path))
    assert report.all_pass


def test_scheduling_run_is_mc_only(tmp_path):
    scenario = _tiny(scheduling=True, samples=2000)
    report, paths = run_scenario(scenario, out_dir=tmp_path, mode="both")
    for path in paths:
        assert all(r["method"] == "mc" for r in read_csv(path))
    assert not report.rows


def test_report_tolerance_rule():
    cfg = LinkConfig(10.0, 1.0, 2.0, 1.0)
    row = ReportRow(10.0, MetricKind.UNICAST_OUTAGE, 0.5, 0.504, 0.0005)
    assert row.tolerance(cfg) == pytest.approx(0.005)
    assert row.abs_diff <= row.tolerance(cfg)
    wide = ReportRow(10.0, MetricKind.UNICAST_OUTAGE, 0.5, 0.52, 0.01)
    assert wide.tolerance(cfg) == pytest.approx(0.03)  # 3 SE dominates


def test_scenario_file_loading(tmp_path):
    cfg_file = tmp_path / "custom.cfg"
    cfg_file.write_text(
        "[scenario]\n"
        "name = custom\n"
        "m = 2\n"
        "k = 3\n"
        "r_m = 1.0\n"
        "r_u = 2.0\n"
        "r_s = 1.0\n"
        "snr_db = 0:20:10\n"
        "na = 16\n"
        "metrics = unicast_outage, multicast_outage\n"
        "scheduling = off\n"
        "samples = 1000\n"
        "seed = 5\n")
    scenario = load_scenario_file(cfg_file)
    assert scenario.name == "custom"
    assert scenario.snr_grid_db == (0.0, 10.0, 20.0)
    assert scenario.metrics == (MetricKind.UNICAST_OUTAGE,
                                MetricKind.MULTICAST_OUTAGE)


def test_scenario_file_errors(tmp_path):
    missing = tmp_path / "nope.cfg"
    with pytest.raises(ScenarioError):
        load_scenario_file(missing)
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nname = x\nm = 2\n")  # missing required keys
    with pytest.raises(ScenarioError):
        load_scenario_file(bad)


def test_main_unknown_scenario_exit_code(tmp_path, capsys):
    code = main(["--scenario", "fig99", "--out", str(tmp_path)])
    assert code == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_main_unsupported_analytics_exit_code(tmp_path, capsys):
    # secrecy analytics are undefined for K = 2
    code = main(["--scenario", "fig4", "--k", "2", "--mode", "analytic",
                 "--snr", "10", "--out", str(tmp_path)])
    assert code == 3
    assert "unsupported" in capsys.readouterr().err


def test_main_scheduling_analytic_exit_code(tmp_path, capsys):
    code = main(["--scenario", "fig1", "--scheduling", "on", "--mode", "analytic",
                 "--snr", "10", "--out", str(tmp_path)])
    assert code == 3


def test_main_comparison_failure_exit_code(tmp_path, monkeypatch):
    import nomacast.cli as cli
    monkeypatch.setattr(cli, "analytic_value",
                        lambda metric, cfg, m, k, na, scheduling=False: 0.5)
    code = main(["--scenario", "fig1", "--samples", "2000", "--snr", "40",
                 "--metric", "unicast_outage", "--out", str(tmp_path)])
    assert code == 1  # outage at 40 dB is nowhere near 0.5


def test_main_end_to_end_pass(tmp_path):
    code = main(["--scenario", "fig1", "--samples", "40000", "--snr", "8:16:8",
                 "--out", str(tmp_path)])
    assert code == 0
    report = (tmp_path / "fig1_report.txt").read_text()
    assert "verdict: PASS" in report
    assert (tmp_path / "fig1_unicast_outage.csv").exists()


def test_main_config_file_end_to_end(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "[scenario]\nname = run\nm = 2\nk = 3\nr_m = 1\nr_u = 2\n"
        "snr_db = 10\nna = 16\nmetrics = unicast_outage\nsamples = 4000\nseed = 9\n")
    code = main(["--config", str(cfg_file), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "run_report.txt").exists()


def test_report_includes_scheme_gaps(tmp_path):
    scenario = _tiny(metrics=(MetricKind.OUTAGE_RATE_SECRECY,
                              MetricKind.OUTAGE_RATE_SECRECY_OMA),
                     snr_grid_db=(20.0,), samples=4000)
    report, _ = run_scenario(scenario, out_dir=tmp_path)
    assert len(report.gaps) == 1
    snr_db, label, gap = report.gaps[0]
    assert snr_db == 20.0 and "secrecy" in label
    assert "secrecy outage-rate gap" in report.render()


def test_report_render_mentions_fail():
    scenario = _tiny()
    report = ComparisonReport(scenario)
    report.rows.append(ReportRow(10.0, MetricKind.UNICAST_OUTAGE, 0.5, 0.9, 0.001))
    report.verdicts.append("FAIL")
    text = report.render()
    assert "FAIL" in text and not report.all_pass
