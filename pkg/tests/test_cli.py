import json
import math
import shutil
import subprocess
import sys

import pytest

from buildpeak import cli, monte_carlo
from buildpeak.data_io import Report, peak_rows, read_report, write_report
from buildpeak.emission_core import Peak

from conftest import CALIBRATION, MALFORMED, SPIKE, TOY

REPORTS = ("peak_distribution", "histograms", "prob_peak_by_year", "bands", "static_peaks")


def run(*argv):
    return cli.main([str(a) for a in argv])


def reports(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.name != cli.MANIFEST_FILE}


def bundle_with(tmp_path, src=TOY, **uncertainty):
    d = tmp_path / "bundle"
    shutil.copytree(src, d)
    doc = json.loads((d / "bundle.json").read_text())
    doc["uncertainty"].update(uncertainty)
    (d / "bundle.json").write_text(json.dumps(doc))
    return d


class TestValidate:
    def test_valid(self, capsys):
        assert run("validate", "--bundle", TOY) == 0
        assert "valid" in capsys.readouterr().out

    def test_broken(self, capsys):
        assert run("validate", "--bundle", MALFORMED[0]) == 1
        assert len(capsys.readouterr().out.strip().splitlines()) >= 1

    def test_missing_path(self, tmp_path):
        assert run("validate", "--bundle", tmp_path / "nope") == 2

    def test_console_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "buildpeak.cli", "validate", "--bundle", str(TOY)], capture_output=True, text=True
        )
        assert proc.returncode == 0, proc.stderr


class TestProject:
    def test_calibration_headline(self, tmp_path):
        assert run("project", "--bundle", CALIBRATION, "--scenario", "bau", "--out", tmp_path) == 0
        rows = read_report(tmp_path / "static_peaks.csv").records("peaks")
        national = [r for r in rows if r["unit"] == "national"][0]
        assert (national["peak_year"], national["peak_value"]) == (2028, 890)
        assert len(rows) == 31

    def test_flat_toy(self, tmp_path):
        assert run("project", "--bundle", TOY, "--scenario", "bau", "--out", tmp_path) == 0
        series = read_report(tmp_path / "static_series.csv").records("series")
        national = [r["emissions_mtco2"] for r in series if r["unit"] == "national"]
        assert len(national) == 41 and set(national) == {1}
        peaks = {r["unit"]: r for r in read_report(tmp_path / "static_peaks.csv").records("peaks")}
        assert peaks["national"]["peak_year"] == 2020
        assert peaks["Alpha"]["peak_value"] == 0.4 and peaks["Beta"]["peak_value"] == 0.6

    def test_identical_scenarios_identical_outputs(self, tmp_path):
        run("project", "--bundle", TOY, "--scenario", "bau", "--out", tmp_path / "a")
        run("project", "--bundle", TOY, "--scenario", "decarbonization", "--out", tmp_path / "b")
        assert reports(tmp_path / "a") == reports(tmp_path / "b")

    def test_scenario_required_when_ambiguous(self, tmp_path, capsys):
        assert run("project", "--bundle", TOY, "--out", tmp_path) == 1
        assert "--scenario" in capsys.readouterr().err

    def test_unknown_scenario(self, tmp_path):
        assert run("project", "--bundle", TOY, "--scenario", "nope", "--out", tmp_path) == 1

    def test_structured_format(self, tmp_path):
        assert run("project", "--bundle", SPIKE, "--out", tmp_path, "--format", "structured-text") == 0
        doc = json.loads((tmp_path / "static_peaks.json").read_text())
        assert doc["tables"][0]["rows"][-1][:3] == ["national", 2040, 100.0]


class TestSimulate:
    def test_repeatable(self, tmp_path):
        for out in ("a", "b"):
            assert run("simulate", "--bundle", TOY, "--scenario", "bau", "--draws", 1, "--seed", 42,
                       "--out", tmp_path / out) == 0
        a, b = reports(tmp_path / "a"), reports(tmp_path / "b")
        assert set(a) == {f"{r}.csv" for r in REPORTS} and a == b

    def test_zero_sigma(self, tmp_path):
        d = bundle_with(tmp_path, sigma_c=0.0)
        assert run("simulate", "--bundle", d, "--scenario", "bau", "--scope", "province", "--out", tmp_path / "o") == 0
        rows = read_report(tmp_path / "o" / "peak_distribution.csv").records("distributions")
        assert {r["unit"] for r in rows} == {"Alpha", "Beta", "national"}
        assert all(r["sd_value"] == 0 and r["sd_year"] == 0 for r in rows)
        assert all(r["mean_value"] == r["static_peak_value"] for r in rows)

    def test_spike_mean(self, tmp_path):
        assert run("simulate", "--bundle", SPIKE, "--out", tmp_path) == 0
        row = read_report(tmp_path / "peak_distribution.csv").records("distributions")[0]
        assert row["n"] == 100_000
        assert abs(row["mean_value"] - 100) < 3 * 5 / math.sqrt(100_000)
        assert row["year_p2.5"] == row["year_p97.5"] == 2040

    def test_outputs(self, tmp_path):
        assert run("simulate", "--bundle", TOY, "--scenario", "bau", "--draws", 500, "--out", tmp_path,
                   "--peak-interval", 0.9, 1.1, "--year-bound", 2040) == 0
        probs = [r["probability"] for r in read_report(tmp_path / "prob_peak_by_year.csv").records("prob_peak_by_year")]
        assert len(probs) == 41 and probs == sorted(probs)
        bands = read_report(tmp_path / "bands.csv")
        assert [r["k"] for r in bands.records("band_masses")] == [1, 2, 3]
        assert bands.records("band_masses")[0]["one_sided_mass"] == 0.341345
        interval = read_report(tmp_path / "peak_interval.csv").records("interval")[0]
        assert 0 <= interval["probability"] <= 1
        manifest = json.loads((tmp_path / cli.MANIFEST_FILE).read_text())
        for key in ("command", "bundle", "scenarios", "seed", "draws", "output_directory", "engine_version",
                    "duration_seconds"):
            assert key in manifest
        assert manifest["seed"] == 42 and manifest["draws"] == 500

    def test_rerun_from_manifest(self, tmp_path):
        run("simulate", "--bundle", TOY, "--scenario", "bau", "--draws", 300, "--seed", 9, "--out", tmp_path / "a")
        manifest = json.loads((tmp_path / "a" / cli.MANIFEST_FILE).read_text())
        argv = list(manifest["argv"])
        argv[argv.index("--out") + 1] = str(tmp_path / "b")
        assert cli.main(argv) == 0
        assert reports(tmp_path / "a") == reports(tmp_path / "b")

    def test_redraw_guard_exit(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(monte_carlo, "REDRAW_FACTOR", 0)
        d = bundle_with(tmp_path, sigma_c=2.0)
        assert run("simulate", "--bundle", d, "--scenario", "bau", "--draws", 2000, "--out", tmp_path / "o") == 1
        assert "redraws" in capsys.readouterr().err

    def test_bad_draws_flag(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            run("simulate", "--bundle", TOY, "--draws", 0, "--out", tmp_path)
        assert info.value.code == 2


def _peaks_dir(path, peaks):
    path.mkdir(parents=True)
    write_report(Report("static peaks", [peak_rows(peaks)]), "tabular-text", path / "static_peaks.csv")
    return path


class TestAllocate:
    def test_proportional_toy(self, tmp_path):
        bau = _peaks_dir(tmp_path / "bau", {"Alpha": Peak(2030, 10.0), "Beta": Peak(2030, 16.0)})
        dec = _peaks_dir(tmp_path / "dec", {"Alpha": Peak(2025, 8.0), "Beta": Peak(2025, 10.0)})
        code = run("allocate", "--bundle", TOY, "--bau-results", bau, "--dec-results", dec, "--basis",
                   "static_vs_static", "--strategy", "potential_proportional", "--target", 4, "--out", tmp_path / "o")
        assert code == 0
        rep = read_report(tmp_path / "o" / "allocation.csv")
        assert [(r["province"], r["reduction"]) for r in rep.records("allocation")] == [("Beta", 3), ("Alpha", 1)]
        assert {r["region"]: r["total"] for r in rep.records("regions")} == {"East": 3, "North": 1}

    def test_all_zero_with_target(self, tmp_path, capsys):
        same = {"Alpha": Peak(2030, 5.0), "Beta": Peak(2030, 6.0)}
        bau, dec = _peaks_dir(tmp_path / "bau", same), _peaks_dir(tmp_path / "dec", same)
        code = run("allocate", "--bundle", TOY, "--bau-results", bau, "--dec-results", dec, "--basis",
                   "static_vs_static", "--strategy", "potential_proportional", "--target", 4, "--out", tmp_path / "o")
        assert code == 1 and "zero" in capsys.readouterr().err

    def test_missing_results(self, tmp_path):
        dec = _peaks_dir(tmp_path / "dec", {"Alpha": Peak(2025, 8.0), "Beta": Peak(2025, 10.0)})
        assert run("allocate", "--bundle", TOY, "--bau-results", tmp_path / "none", "--dec-results", dec,
                   "--basis", "static_vs_static", "--out", tmp_path / "o") == 1
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run("allocate", "--bundle", TOY, "--bau-results", empty, "--dec-results", dec,
                   "--basis", "static_vs_static", "--out", tmp_path / "o") == 1

    def test_default_basis_needs_distribution(self, tmp_path, capsys):
        bau = _peaks_dir(tmp_path / "bau", {"Alpha": Peak(2030, 10.0), "Beta": Peak(2030, 16.0)})
        dec = _peaks_dir(tmp_path / "dec", {"Alpha": Peak(2025, 8.0), "Beta": Peak(2025, 10.0)})
        assert run("allocate", "--bundle", TOY, "--bau-results", bau, "--dec-results", dec, "--out", tmp_path / "o") == 1
        assert "distribution" in capsys.readouterr().err

    def test_calibration_static_ordering(self, tmp_path):
        for s in ("bau", "decarbonization"):
            assert run("project", "--bundle", CALIBRATION, "--scenario", s, "--out", tmp_path / s) == 0
        assert run("allocate", "--bundle", CALIBRATION, "--bau-results", tmp_path / "bau", "--dec-results",
                   tmp_path / "decarbonization", "--basis", "static_vs_static", "--out", tmp_path / "o") == 0
        rows = read_report(tmp_path / "o" / "allocation.csv").records("allocation")
        assert [r["province"] for r in rows[:3]] == ["Xinjiang", "Shandong", "Henan"]
        assert [r["rank"] for r in rows] == list(range(1, 31))
