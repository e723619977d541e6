import json
from pathlib import Path

import pytest

from swmlab.cli import main
from swmlab.instances import random_instance, save_instance

SAMPLES = Path(__file__).resolve().parent.parent / "sample_instances"
OR_INDICATOR = str(SAMPLES / "or_indicator.json")
COVERAGE = str(SAMPLES / "coverage_three_agents.json")


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    save_instance(path, random_instance(4, 2, seed=0))
    return str(path)


class TestSimulate:
    def test_exact_report_and_csv(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["simulate", OR_INDICATOR, "--mode", "exact",
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["command"] == "simulate"
        assert report["results"]["ratio"] == pytest.approx(0.75)
        assert report["results"]["lower_bound_half_plus_beta"] >= 0.5
        csv = (tmp_path / "report.csv").read_text()
        assert csv.splitlines()[0] == "i,w,a,b"
        assert len(csv.splitlines()) == 3

    def test_exact_is_byte_deterministic(self, tmp_path, instance_file):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["simulate", instance_file, "--out", str(a)])
        main(["simulate", instance_file, "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_mc_deterministic_across_threads(self, tmp_path, instance_file):
        paths = []
        for threads in ("1", "2", "4"):
            out = tmp_path / f"t{threads}.json"
            main(["simulate", instance_file, "--mode", "mc", "--samples",
                  "400", "--seed", "7", "--threads", threads,
                  "--out", str(out)])
            paths.append(out)
        blobs = [p.read_bytes() for p in paths]
        assert blobs[0] == blobs[1] == blobs[2]

    def test_no_wall_clock_in_report(self, tmp_path, instance_file):
        out = tmp_path / "r.json"
        main(["simulate", instance_file, "--out", str(out)])
        assert "elapsed" not in out.read_text()
        assert "time" not in json.loads(out.read_text())["results"]

    def test_exact_size_guard_exits_2(self, tmp_path):
        save_instance(tmp_path / "big.json", random_instance(9, 2, seed=0))
        assert main(["simulate", str(tmp_path / "big.json"),
                     "--mode", "exact"]) == 2

    def test_missing_file_exits_2(self):
        assert main(["simulate", "/nonexistent/path.json"]) == 2


class TestLp:
    def test_beta_family(self, tmp_path, capsys):
        out = tmp_path / "lp.json"
        assert main(["lp", "--family", "beta", "--n", "4",
                     "--beta", "1/100", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["results"]["num_rows"] == 11
        assert report["results"]["num_vars"] == 14
        assert report["results"]["solution"]["status"] == "optimal"

    def test_beta_lambda_with_closed_form(self, tmp_path):
        out = tmp_path / "lp.json"
        assert main(["lp", "--family", "beta-lambda", "--n", "16",
                     "--lambda", "13/16", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["results"]["closed_form"] == pytest.approx(0.54375)
        assert abs(report["results"]["difference"]) < 1e-8

    def test_beta_lambda_requires_lambda(self):
        assert main(["lp", "--family", "beta-lambda", "--n", "8"]) == 2

    def test_general_family_reports_gap(self, tmp_path):
        out = tmp_path / "lp.json"
        assert main(["lp", "--family", "general", "--n", "8",
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        # the closed form overshoots the LP optimum for this family
        assert report["results"]["difference"] < -1e-3

    def test_export_lp_listing(self, tmp_path):
        listing = tmp_path / "model.lp"
        main(["lp", "--family", "beta", "--n", "4",
              "--out", str(tmp_path / "r.json"), "--export-lp", str(listing)])
        text = listing.read_text()
        assert "minimize:" in text and "w_1" in text

    def test_bad_n_exits_2(self):
        assert main(["lp", "--family", "beta", "--n", "6"]) == 2


class TestClassify:
    def test_coverage_sample(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", COVERAGE, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        labels = {a["classification"]["label"]
                  for a in report["results"]["agents"]}
        assert labels == {"supermodular"}


class TestVerify:
    def test_all_checks_pass(self, tmp_path, instance_file):
        out = tmp_path / "v.json"
        assert main(["verify", instance_file,
                     "--checks", "lemmas,eq1", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["results"]["passed"]
        assert set(report["results"]["checks"]) == {"lemmas", "eq1"}

    def test_secondhalf_on_small_instance(self, tmp_path):
        path = tmp_path / "i.json"
        save_instance(path, random_instance(4, 2, seed=1,
                                            families=("coverage",)))
        assert main(["verify", str(path), "--checks", "secondhalf"]) == 0

    def test_unknown_check_exits_2(self, instance_file):
        assert main(["verify", instance_file, "--checks", "bogus"]) == 2


class TestConjecture:
    def test_single_instance(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["conjecture", OR_INDICATOR, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["results"]["min_gap"] >= -1e-10
        assert report["results"]["counterexample"] is None

    def test_random_scan(self, tmp_path):
        out = tmp_path / "scan.json"
        assert main(["conjecture", "--random", "6", "--nmax", "4",
                     "--mmax", "2", "--seed", "3", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert len(report["results"]["instances"]) == 6
        assert report["results"]["min_gap"] >= -1e-10

    def test_requires_instance_or_random(self):
        assert main(["conjecture"]) == 2


class TestParser:
    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
