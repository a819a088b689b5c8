import csv
import io
from pathlib import Path

import pytest

from stc.evaluation import evaluate, load_dataset, report_csv, write_plotdata
from stc.metrics import RECALL_LEVELS

DATA = Path(__file__).parent / "data" / "owlstc_mini"


@pytest.fixture(scope="module")
def report():
    return evaluate(load_dataset(DATA))


def test_report_layout(report):
    rows = list(csv.DictReader(io.StringIO(report_csv(report))))
    assert list(rows[0])[-11:] == [f"ip_{lv:.1f}" for lv in RECALL_LEVELS]
    per_query = [r for r in rows if r["query_id"] != "MEAN"]
    assert len(per_query) == 8
    means = {r["phase"]: r for r in rows if r["query_id"] == "MEAN"}
    assert set(means) == {"phase1", "phase2"}
    assert report.excluded == ["q_unjudged"]


def test_mean_curve_is_levelwise_mean(report):
    for phase in ("phase1", "phase2"):
        rows = [r for r in report.rows if r.phase == phase]
        for k in range(11):
            assert report.mean_curves[phase][k] == pytest.approx(sum(r.curve[k] for r in rows) / len(rows), abs=1e-12)


def test_ranges(report):
    for r in report.rows:
        assert 0 <= r.precision <= 1 and 0 <= r.recall <= 1 and 0 <= r.f_measure <= 1
        assert all(0 <= v <= 1 for v in r.curve)
    for c in report.clusters:
        assert 0 <= c.avg_precision <= 1 and 0 <= c.avg_recall <= 1
    assert report.entropy_o >= 0 and report.entropy_relevant >= 0


def test_phase2_subset_of_phase1(report):
    by = {(r.query_id, r.phase): r for r in report.rows}
    for q in {r.query_id for r in report.rows}:
        assert by[(q, "phase2")].retrieved <= by[(q, "phase1")].retrieved
        assert by[(q, "phase2")].hits <= by[(q, "phase1")].hits


def test_known_outcomes(report):
    by = {(r.query_id, r.phase): r for r in report.rows}
    # the car-price query provides a sedan; only the car service accepts it
    assert by[("q_car_price", "phase2")].hits == 1
    assert by[("q_rent_car", "phase2")].recall == 1.0


def test_plotdata(report, tmp_path):
    files = write_plotdata(report, tmp_path)
    names = {p.name for p in files}
    assert {"domain_scores_O.csv", "domain_scores_I.csv", "query_avg_ip.csv", "mean_interpolated.csv",
            "f_measure.csv"} == names
    assert len((tmp_path / "mean_interpolated.csv").read_text().splitlines()) == 12


def test_deterministic():
    a = report_csv(evaluate(load_dataset(DATA)))
    b = report_csv(evaluate(load_dataset(DATA)))
    assert a == b
