import copy
import csv
import json

import numpy as np
import pytest

from faircluster.cli import (ExperimentConfig, emit, load_csv, main, run_sweep)
from faircluster.core import ColoredDataset


def write_csv(path, rows, header=("name", "gender", "age", "score")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def basic_cfg(path, **kw):
    defaults = dict(input_path=str(path), color_column="gender",
                    positive_color_value="F",
                    feature_columns=("age", "score"), k_range=(1, 2),
                    t_prime=1, objective="both", seed=1)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


@pytest.fixture
def small_csv(tmp_path):
    path = tmp_path / "people.csv"
    write_csv(path, [
        ["ann", "F", "10", "0.5"],
        ["bob", "M", "20", "0.1"],
        ["cyd", "M", "30", "0.9"],
    ])
    return path


@pytest.fixture
def blob_csv(tmp_path):
    rng = np.random.default_rng(9)
    rows = []
    for i in range(40):
        rows.append([f"a{i}", "F", f"{rng.normal(0, 1):.6f}", f"{rng.normal(0, 1):.6f}"])
    for i in range(40):
        rows.append([f"b{i}", "M", f"{rng.normal(9, 1):.6f}", f"{rng.normal(0, 1):.6f}"])
    path = tmp_path / "blobs.csv"
    write_csv(path, rows)
    return path


class TestLoadCsv:
    def test_color_mapping(self, small_csv):
        ds = load_csv(basic_cfg(small_csv))
        assert len(ds.blue_ids) == 1 and len(ds.red_ids) == 2

    def test_subsample_deterministic(self, blob_csv):
        a = load_csv(basic_cfg(blob_csv, subsample=10, t_prime=2, seed=5))
        b = load_csv(basic_cfg(blob_csv, subsample=10, t_prime=2, seed=5))
        assert np.array_equal(a.coords, b.coords)
        assert np.array_equal(a.colors, b.colors)
        assert a.n == 10

    def test_unparsable_rows_skipped(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, [
            ["ann", "F", "10", "0.5"],
            ["bob", "M", "abc", "0.1"],
            ["cyd", "M", "30", "0.9"],
        ])
        ds = load_csv(basic_cfg(path))
        assert ds.n == 2

    def test_missing_column(self, small_csv):
        with pytest.raises(ValueError, match="missing columns"):
            load_csv(basic_cfg(small_csv, feature_columns=("age", "height")))

    def test_single_color_rejected(self, tmp_path):
        path = tmp_path / "mono.csv"
        write_csv(path, [["a", "M", "1", "2"], ["b", "M", "3", "4"]])
        with pytest.raises(ValueError, match="one color"):
            load_csv(basic_cfg(path))

    def test_normalization(self, small_csv):
        ds = load_csv(basic_cfg(small_csv))
        assert ds.coords.min() == 0.0 and ds.coords.max() == 1.0
        raw = load_csv(basic_cfg(small_csv, normalize=False))
        assert raw.coords.max() == 30.0

    def test_missing_file(self):
        with pytest.raises(ValueError, match="cannot open"):
            load_csv(basic_cfg("/nonexistent/file.csv"))


class TestRunSweep:
    def test_deterministic_reports(self, blob_csv):
        cfg = basic_cfg(blob_csv, k_range=(2, 4), t_prime=2, seed=3)
        a = run_sweep(cfg)
        b = run_sweep(cfg)
        meta_a = {k: v for k, v in a.metadata.items() if k != "wall_times"}
        meta_b = {k: v for k, v in b.metadata.items() if k != "wall_times"}
        assert meta_a == meta_b
        assert a.records == b.records

    def test_k1_balances_match_dataset(self, blob_csv):
        cfg = basic_cfg(blob_csv, k_range=(1, 1), t_prime=2, seed=3)
        rep = run_sweep(cfg)
        for rec in rep.records:
            assert rec["classical_balance"] == rep.metadata["dataset_balance"]
            assert rec["fair_balance"] == rep.metadata["dataset_balance"]

    def test_skipped_when_k_exceeds_fairlets(self, small_csv, tmp_path):
        path = tmp_path / "four.csv"
        write_csv(path, [
            ["a", "F", "0", "0"], ["b", "M", "1", "0"],
            ["c", "F", "5", "0"], ["d", "M", "6", "0"],
        ])
        cfg = basic_cfg(path, k_range=(1, 3), t_prime=1)
        rep = run_sweep(cfg)
        skipped = [r for r in rep.records if r.get("skipped")]
        # 2 fairlets, so k=3 is skipped for each objective
        assert {r["k"] for r in skipped} == {3}
        assert all("fairlet" in r["skipped"] for r in skipped)

    def test_infeasible_balance_raises(self, tmp_path):
        path = tmp_path / "skew.csv"
        rows = [["x", "F", "0", "0"]] + [[f"y{i}", "M", str(i), "0"]
                                         for i in range(1, 6)]
        write_csv(path, rows)
        from faircluster.fairlets import InfeasibleBalanceError
        with pytest.raises(InfeasibleBalanceError):
            run_sweep(basic_cfg(path, t_prime=2))

    def test_fair_balance_always_recorded_exact(self, blob_csv):
        from fractions import Fraction
        cfg = basic_cfg(blob_csv, k_range=(2, 5), t_prime=2)
        rep = run_sweep(cfg)
        for rec in rep.records:
            if rec.get("skipped"):
                continue
            assert Fraction(rec["fair_balance_exact"]) >= Fraction(1, 2)

    def test_thread_cap_respected(self, blob_csv, monkeypatch):
        monkeypatch.setenv("FAIRCLUSTER_THREADS", "1")
        cfg = basic_cfg(blob_csv, k_range=(2, 3), t_prime=2)
        rep = run_sweep(cfg)
        assert len(rep.records) == 4


class TestEmit:
    def _report(self, blob_csv):
        cfg = basic_cfg(blob_csv, k_range=(2, 3), t_prime=2, seed=2)
        return run_sweep(cfg)

    def test_json_round_trip(self, blob_csv, tmp_path):
        rep = self._report(blob_csv)
        out = tmp_path / "report.json"
        emit(rep, "JSON", str(out))
        doc = json.loads(out.read_text())
        assert doc["records"] == rep.records
        assert doc["metadata"]["n"] == rep.metadata["n"]

    def test_csv_layout(self, blob_csv, tmp_path):
        rep = self._report(blob_csv)
        out = tmp_path / "report.csv"
        emit(rep, "CSV", str(out))
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "objective,k,classical_cost,classical_balance,fair_cost,fair_balance,fairlet_cost"
        n_ok = sum(1 for r in rep.records if not r.get("skipped"))
        assert len(lines) == 1 + n_ok
        for line in lines[1:]:
            cells = line.split(",")
            # balances carry exactly six decimals
            assert len(cells[3].split(".")[1]) == 6
            assert len(cells[5].split(".")[1]) == 6

    def test_unknown_format(self, blob_csv, tmp_path):
        rep = self._report(blob_csv)
        with pytest.raises(ValueError):
            emit(rep, "XML", str(tmp_path / "x"))

    def test_empty_records_still_emit(self, tmp_path):
        from faircluster.cli import ExperimentReport
        rep = ExperimentReport(metadata={"n": 0, "t_prime": 2}, records=[])
        jpath, cpath = tmp_path / "e.json", tmp_path / "e.csv"
        emit(rep, "JSON", str(jpath))
        emit(rep, "CSV", str(cpath))
        doc = json.loads(jpath.read_text())
        assert doc["records"] == [] and doc["metadata"]["n"] == 0
        assert cpath.read_text().strip().splitlines() == [
            "objective,k,classical_cost,classical_balance,fair_cost,fair_balance,fairlet_cost"]


class TestMain:
    def test_sweep_success_exit_zero(self, blob_csv, tmp_path):
        out = tmp_path / "rep.json"
        csv_out = tmp_path / "rep.csv"
        code = main(["sweep", "--input", str(blob_csv), "--color-column",
                     "gender", "--positive", "F", "--features", "age,score",
                     "--k", "2..3", "--tprime", "2", "--objective", "both",
                     "--seed", "1", "--out", str(out), "--csv", str(csv_out)])
        assert code == 0
        assert out.exists() and csv_out.exists()

    def test_decompose_writes_fairlets(self, blob_csv, tmp_path):
        out = tmp_path / "dec.json"
        code = main(["decompose", "--input", str(blob_csv), "--color-column",
                     "gender", "--positive", "F", "--features", "age,score",
                     "--tprime", "2", "--objective", "median", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["median"]["fairlet_count"] >= 1
        members = sorted(m for f in doc["median"]["fairlets"] for m in f["members"])
        assert members == list(range(doc["metadata"]["n"]))

    def test_infeasible_exit_two(self, tmp_path):
        path = tmp_path / "skew.csv"
        rows = [["x", "F", "0", "0"]] + [[f"y{i}", "M", str(i), "0"]
                                         for i in range(1, 6)]
        write_csv(path, rows)
        code = main(["sweep", "--input", str(path), "--color-column", "gender",
                     "--positive", "F", "--features", "age,score", "--k", "1..2",
                     "--tprime", "2", "--out", str(tmp_path / "r.json")])
        assert code == 2

    def test_io_error_exit_one(self, tmp_path):
        code = main(["sweep", "--input", "/no/such/file.csv", "--color-column",
                     "gender", "--positive", "F", "--features", "age",
                     "--k", "2", "--out", str(tmp_path / "r.json")])
        assert code == 1

    def test_bad_arguments_exit_one(self):
        with pytest.raises(SystemExit) as exc:
            main(["sweep", "--input", "x.csv"])  # missing required options
        assert exc.value.code == 1


class TestQualitativeBlobProperty:
    def test_classical_unbalanced_fair_balanced(self, blob_csv):
        cfg = basic_cfg(blob_csv, k_range=(4, 4), t_prime=2, seed=1)
        rep = run_sweep(cfg)
        for rec in rep.records:
            assert rec["classical_balance"] < rec["fair_balance"]
            assert rec["fair_balance"] >= 0.5
