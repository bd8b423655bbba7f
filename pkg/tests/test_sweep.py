"""Parameter sweeps: spec validation, deterministic ordering, serial vs
parallel equality, fault isolation, and the bifurcation bracket logic."""

import csv

import pytest

from kswave.errors import ConfigError
from kswave.sweep import (SweepSpec, bifurcation_scan, run_sweep,
                          summary_path, SUMMARY_COLUMNS)


def _read_summary(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestSpec:
    def test_empty_values_rejected(self):
        with pytest.raises(ConfigError):
            SweepSpec([], [1.0], "stability")
        with pytest.raises(ConfigError):
            SweepSpec([1.0], [], "stability")

    def test_unknown_pipeline_rejected(self):
        with pytest.raises(ConfigError):
            SweepSpec([1.0], [1.0], "quantum")

    def test_bad_n_jobs_rejected(self):
        with pytest.raises(ConfigError):
            SweepSpec([1.0], [1.0], "stability", n_jobs=0)

    def test_nonfinite_values_rejected(self):
        with pytest.raises(ConfigError):
            SweepSpec([float("inf")], [1.0], "stability")


class TestStabilityPipeline:
    def test_verdicts_bracket_threshold(self, tmp_path):
        spec = SweepSpec([3.5, 4.5], [1.0], "stability",
                         output_dir=str(tmp_path))
        records = run_sweep(spec)
        assert [r.classification for r in records] == ["stable", "unstable"]
        assert all(r.status == "ok" for r in records)

    def test_summary_in_product_order(self, tmp_path):
        spec = SweepSpec([2.0, 1.0], [0.5, 2.0], "stability",
                         output_dir=str(tmp_path))
        run_sweep(spec)
        rows = _read_summary(summary_path(spec))
        assert [(r["chi"], r["d"]) for r in rows] == [
            ("2.0", "0.5"), ("2.0", "2.0"), ("1.0", "0.5"), ("1.0", "2.0")]
        assert list(rows[0]) == SUMMARY_COLUMNS

    def test_parallel_equals_serial(self, tmp_path):
        spec = SweepSpec([1.0, 3.0, 5.0], [0.5, 1.0], "stability",
                         output_dir=str(tmp_path))
        run_sweep(spec)
        serial = (tmp_path / "summary.csv").read_bytes()
        run_sweep(SweepSpec([1.0, 3.0, 5.0], [0.5, 1.0], "stability",
                            output_dir=str(tmp_path), n_jobs=2))
        assert (tmp_path / "summary.csv").read_bytes() == serial


class TestCauchyPipeline:
    def test_speeds_and_classification(self, tmp_path):
        spec = SweepSpec([1.0, 3.0], [1.0], "cauchy",
                         output_dir=str(tmp_path))
        records = run_sweep(spec)
        assert all(r.status == "ok" for r in records)
        for r in records:
            assert 1.84 <= r.speed <= 1.95
            assert r.classification == "traveling_wave"
            assert r.bound_failures == 0
            assert (tmp_path / f"chi_{r.chi:g}_d_{r.d:g}"
                    / "snapshots.csv").exists()
            assert (tmp_path / f"chi_{r.chi:g}_d_{r.d:g}"
                    / "metadata.json").exists()

    def test_determinism(self, tmp_path):
        rows = []
        for name in ("a", "b"):
            spec = SweepSpec([1.0], [1.0], "cauchy",
                             output_dir=str(tmp_path / name))
            run_sweep(spec)
            got = _read_summary(summary_path(spec))
            for r in got:
                r.pop("artifact_dir")
            rows.append(got)
        assert rows[0] == rows[1]

    def test_fault_isolation(self, tmp_path):
        # d = -1 is rejected by parameter validation; the bad point must
        # produce a failed row without aborting the good one
        spec = SweepSpec([1.0], [-1.0, 1.0], "cauchy",
                         output_dir=str(tmp_path))
        records = run_sweep(spec)
        assert [r.status for r in records] == ["failed", "ok"]
        assert records[0].message != ""
        rows = _read_summary(summary_path(spec))
        assert [r["status"] for r in rows] == ["failed", "ok"]


class TestBifurcationScan:
    def test_invalid_range_rejected(self):
        with pytest.raises(ConfigError):
            bifurcation_scan([1.0], (4.0, 3.0))

    def test_invalid_tol_rejected(self):
        with pytest.raises(ConfigError):
            bifurcation_scan([1.0], (3.5, 4.5), tol=0.0)

    def test_non_bracketing_low_end(self):
        # chi = 4.5 at d = 1 already pulsates, so (4.5, 5.0) cannot bracket
        with pytest.raises(ConfigError, match="already pulsating"):
            bifurcation_scan([1.0], (4.5, 5.0))

    def test_non_bracketing_high_end(self):
        with pytest.raises(ConfigError, match="not pulsating"):
            bifurcation_scan([1.0], (3.0, 3.5))
