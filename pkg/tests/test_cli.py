import csv
import json

import pytest

from densitymetrics.cli import main
from densitymetrics.experiments import (
    ExperimentConfig,
    UsageError,
    c2_inequivalence_failures,
    c2_inequivalence_rows,
    run,
    strip_volatile,
)


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def comments(path):
    return {
        k: v
        for k, v in (l[2:].split("=", 1) for l in path.read_text().splitlines() if l.startswith("# "))
    }


class TestStrictFineness:
    def test_ten_rows(self, tmp_path):
        out = tmp_path / "fine.csv"
        assert main(["--experiment", "strict-fineness", "--nmax", "10", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 10
        assert all(float(r["residual"]) <= 1e-8 for r in rows)
        meta = comments(out)
        assert meta["schema_version"] == "1"
        assert json.loads(meta["config"])["nmax"] == 10

    def test_single_row(self, tmp_path):
        out = tmp_path / "one.csv"
        assert main(["--experiment", "strict-fineness", "--nmax", "1", "--out", str(out)]) == 0
        (row,) = read_csv(out)
        assert (row["n"], row["uniform"]) == ("1", "1")
        assert float(row["bures"]) == pytest.approx(0.239146, abs=1e-6)

    def test_empty_range(self, tmp_path, capsys):
        code = main(["--experiment", "strict-fineness", "--nmin", "5", "--nmax", "4",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert not (tmp_path / "x.csv").exists()
        assert "empty" in capsys.readouterr().err

    def test_failing_row_gives_exit_1(self, tmp_path, capsys):
        out = tmp_path / "tight.csv"
        code = main(["--experiment", "strict-fineness", "--nmax", "5", "--tol", "1e-30",
                     "--out", str(out)])
        assert code == 1
        assert "n=" in capsys.readouterr().err
        assert comments(out)["status"] == "fail"

    def test_json_format(self, tmp_path):
        out = tmp_path / "fine.json"
        assert main(["--experiment", "strict-fineness", "--nmax", "3", "--format", "json",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["schema_version"] == 1 and len(doc["rows"]) == 3 and doc["passed"]


class TestC2:
    def test_quarter_example(self):
        rows = c2_inequivalence_rows(1)
        assert rows[0]["ratio"] == pytest.approx(1.4641016, rel=1e-6)
        from densitymetrics import Seminorm, Trace, bures_distance, density_from_vector, mk_distance_lp

        tau = Trace.unit((1, 1))
        x, y = density_from_vector(tau, [1, 0]), density_from_vector(tau, [0.25, 0.75])
        d_b = bures_distance(tau, x, y)
        d_l = mk_distance_lp(tau, Seminorm.difference(), x, y)
        assert (d_b, d_l) == (pytest.approx(0.707107, abs=1e-6), pytest.approx(0.75))
        assert d_b / d_l == pytest.approx(0.942809, abs=1e-6)

    def test_model_at_one_in_a_million(self):
        rows = c2_inequivalence_rows(10)
        row = rows[9]  # 1 - y1 = 4^-10 ~ 9.5e-7
        assert row["ratio"] == pytest.approx(row["model"], rel=0.01)
        import math
        assert 1 / math.sqrt(2e-6) == pytest.approx(707.107, abs=1e-3)

    def test_run(self, tmp_path):
        out = tmp_path / "c2.csv"
        assert main(["--experiment", "c2-inequivalence", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 20
        ratios = [float(r["ratio"]) for r in rows]
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_failures_detected(self):
        rows = c2_inequivalence_rows(4)
        rows[2] = dict(rows[2], ratio=rows[1]["ratio"])
        assert any("not above" in f for f in c2_inequivalence_failures(rows))

    @pytest.mark.parametrize("kmax", ["0", "27"])
    def test_kmax_bounds(self, tmp_path, kmax):
        assert main(["--experiment", "c2-inequivalence", "--kmax", kmax,
                     "--out", str(tmp_path / "c.csv")]) == 2


class TestEquivalence:
    def test_run(self, tmp_path):
        out = tmp_path / "eq.json"
        assert main(["--experiment", "equivalence-suite", "--trials", "3", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["passed"] and len(doc["families"]) == 12
        shapes = {r["shape"] for r in doc["rows"]}
        assert shapes == {"1x1", "1x1x1", "2", "3"}
        assert all(r["quantum"] == "" for r in doc["rows"] if r["shape"] in ("2", "3"))
        assert all(r["quantum"] != "" for r in doc["rows"] if r["shape"] == "1x1")

    def test_csv(self, tmp_path):
        out = tmp_path / "eq.csv"
        assert main(["--experiment", "equivalence-suite", "--trials", "1", "--format", "csv",
                     "--out", str(out)]) == 0
        assert read_csv(out)[0].keys() == {"shape", "family", "k", "cstar", "bures", "quantum"}


class TestPropertySuites:
    def test_default_passes_and_is_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["--experiment", "property-suites", "--trials", "30", "--out", str(a)]) == 0
        assert main(["--experiment", "property-suites", "--trials", "30", "--out", str(b)]) == 0
        da, db = json.loads(a.read_text()), json.loads(b.read_text())
        assert "generated_at" in da
        da["config"]["out"] = db["config"]["out"] = None
        assert strip_volatile(da) == strip_volatile(db)
        assert da["passed"] and not da["failures"]
        assert {r["metric"] for r in da["axioms"]} == {"bures", "cstar", "quantum"}

    def test_tight_tolerance_reports_violations(self, tmp_path, capsys):
        out = tmp_path / "tight.json"
        code = main(["--experiment", "property-suites", "--trials", "10", "--tol", "1e-15",
                     "--out", str(out)])
        assert code == 1
        doc = json.loads(out.read_text())
        assert doc["failures"] and all("seeds" in f for f in doc["failures"])
        assert "FAIL" in capsys.readouterr().err

    def test_csv_rejected(self, tmp_path):
        assert main(["--experiment", "property-suites", "--format", "csv",
                     "--out", str(tmp_path / "p.csv")]) == 2


class TestConfig:
    def test_unknown_experiment(self, capsys):
        assert main(["--experiment", "nope"]) == 2

    def test_unknown_experiment_in_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"experiment": "nope"}))
        assert main(["--config", str(cfg)]) == 2

    def test_missing_experiment(self):
        assert main([]) == 2

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "c.json"
        out = tmp_path / "f.csv"
        cfg.write_text(json.dumps({"experiment": "strict-fineness", "nmax": 50, "out": str(out)}))
        assert main(["--config", str(cfg), "--nmax", "2"]) == 0
        assert len(read_csv(out)) == 2

    def test_bad_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        assert main(["--config", str(cfg)]) == 2
        cfg.write_text(json.dumps({"experiment": "strict-fineness", "colour": "red"}))
        assert main(["--config", str(cfg)]) == 2
        assert main(["--config", str(tmp_path / "missing.json")]) == 2

    def test_io_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = main(["--experiment", "strict-fineness", "--nmax", "1",
                     "--out", str(blocker / "sub" / "out.csv")])
        assert code == 3

    def test_validation_before_work(self):
        with pytest.raises(UsageError):
            run(ExperimentConfig("strict-fineness", nmin=3, nmax=1))

    def test_figure_data(self, tmp_path):
        out = tmp_path / "fig.csv"
        assert main(["--experiment", "figure-data", "--out", str(out)]) == 0
        assert read_csv(out)[0].keys() == {"x", "f1", "f2", "f3"}
