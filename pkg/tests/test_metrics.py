from __future__ import annotations

import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustcat.metrics import (
    FAIRNESS_METRICS,
    BadBinCount,
    ClassificationRecord,
    ConfusionCounts,
    CsvError,
    DatasetError,
    EmptySlice,
    Interval,
    MetricNotSupported,
    MissingColumn,
    MissingScores,
    RangeError,
    RegressionRecord,
    UndefinedMetric,
    UnknownMetric,
    brier,
    calibration_metric,
    check_interval,
    check_registered,
    confusion_counts,
    ece,
    ece_bin,
    evaluate,
    fairness_metric,
    load_dataset,
    mae,
    mse,
    nll,
    performance_metric,
)

from . import oracles

TOL = 1e-12
COUNT_METRICS = ["accuracy", "precision", "recall", "sensitivity", "specificity", "f1", "balanced_accuracy", "auc"]


def recs(rows):
    return [ClassificationRecord(g, y, p, s) for g, y, p, s in rows]


def random_rows(rng: random.Random, n: int):
    # coarse score grid so that ties and bin edges actually occur
    grid = [i / 20 for i in range(21)]
    return [(rng.choice("ab"), rng.randint(0, 1), rng.randint(0, 1), rng.choice(grid + [rng.random()]))
            for _ in range(n)]


def _agree(compute, expected):
    if expected is None:
        with pytest.raises((UndefinedMetric, EmptySlice)):
            compute()
    else:
        assert abs(compute() - expected) <= TOL


def test_oracles_on_200_random_datasets():
    rng = random.Random(42)
    for _ in range(200):
        rows = random_rows(rng, rng.randint(1, 16))
        data = recs(rows)
        tp, fp, tn, fn = oracles.tally(rows)
        c = confusion_counts(data)
        assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
        for name in COUNT_METRICS:
            _agree(lambda: performance_metric(name, data).value, oracles.perf(name, rows))
        for name in sorted(FAIRNESS_METRICS):
            _agree(lambda: fairness_metric(name, data, "a", "b").value, oracles.fairness(name, rows, "a", "b"))
        assert abs(brier(data) - oracles.brier(rows)) <= TOL
        assert abs(nll(data) - oracles.nll(rows)) <= TOL
        for bins in (1, 3, 5, 10):
            assert abs(ece(data, bins) - oracles.ece(rows, bins)) <= TOL
        reg = [RegressionRecord(s * 10, g == "a" and s * 7 or p * 3) for g, _, p, s in rows]
        assert abs(mse(reg) - sum((r.y_pred - r.y_true) ** 2 for r in reg) / len(reg)) <= TOL
        assert abs(mae(reg) - sum(abs(r.y_pred - r.y_true) for r in reg) / len(reg)) <= TOL


def test_confusion_one_of_each():
    data = recs([("g", 1, 1, None), ("g", 0, 1, None), ("g", 0, 0, None), ("g", 1, 0, None)])
    assert confusion_counts(data) == ConfusionCounts(tp=1, fp=1, tn=1, fn=1)


def test_all_correct():
    data = recs([("g", 1, 1, None), ("g", 0, 0, None), ("g", 1, 1, None)])
    c = confusion_counts(data)
    assert c.fp == c.fn == 0
    assert performance_metric("accuracy", data).value == 1.0


def test_symmetric_precision_recall_f1():
    data = recs([("g", 1, 1, None), ("g", 0, 1, None), ("g", 1, 0, None)])
    for name in ("precision", "recall", "f1"):
        assert performance_metric(name, data).value == 0.5


def test_auc_twelve_records_against_pairs():
    rng = random.Random(12)
    rows = [("g", i % 2, 0, round(rng.random(), 1)) for i in range(12)]
    assert abs(performance_metric("auc", recs(rows)).value - oracles.perf("auc", rows)) <= TOL


def test_regression_example():
    data = [RegressionRecord(1, 1), RegressionRecord(2, 4)]
    assert performance_metric("mse", data).value == 2.0
    assert performance_metric("mae", data).value == 1.0


def test_spd_hand_case():
    data = recs([("a", 1, 1, None), ("a", 0, 1, None), ("a", 1, 0, None), ("a", 0, 0, None),
                 ("b", 1, 1, None), ("b", 1, 0, None), ("b", 0, 0, None), ("b", 0, 0, None)])
    r = fairness_metric("statistical_parity_difference", data, "a", "b")
    assert r.value == 0.25
    assert r.params == {"group_a": "a", "group_b": "b"}


def test_identical_groups_give_zero():
    base = [(1, 1), (0, 1), (1, 0), (0, 0), (1, 1)]
    data = recs([("a", y, p, None) for y, p in base] + [("b", y, p, None) for y, p in base])
    for name in FAIRNESS_METRICS:
        assert fairness_metric(name, data, "a", "b").value == 0.0


def test_equalized_odds_hand_count():
    # a: tp=2 fn=1 fp=1 tn=1 -> tpr 2/3, fpr 1/2 ; b: tp=1 fn=1 fp=0 tn=3 -> tpr 1/2, fpr 0
    rows = [("a", 1, 1), ("a", 1, 1), ("a", 1, 0), ("a", 0, 1), ("a", 0, 0),
            ("b", 1, 1), ("b", 1, 0), ("b", 0, 0), ("b", 0, 0), ("b", 0, 0)]
    data = recs([(g, y, p, None) for g, y, p in rows])
    assert fairness_metric("equalized_odds", data, "a", "b").value == pytest.approx(max(2 / 3 - 1 / 2, 1 / 2 - 0), abs=TOL)


def test_treatment_equality_undefined_without_false_positives():
    data = recs([("a", 1, 0, None), ("a", 0, 1, None), ("b", 1, 0, None), ("b", 0, 0, None)])
    with pytest.raises(UndefinedMetric):
        fairness_metric("treatment_equality_difference", data, "a", "b")


def test_missing_group_is_empty_slice():
    with pytest.raises(EmptySlice):
        fairness_metric("statistical_parity_difference", recs([("a", 1, 1, None)]), "a", "zz")


def test_calibration_perfect_confidence():
    data = recs([("g", 1, 1, 1.0)] * 5)
    assert brier(data) == 0
    assert nll(data) == pytest.approx(0, abs=1e-11)
    assert ece(data) == 0


def test_brier_single_record():
    assert brier(recs([("g", 1, 1, 0.5)])) == 0.25


def test_ece_uniform_seven_of_ten():
    data = recs([("g", 1 if i < 7 else 0, 1, 0.7) for i in range(10)])
    assert ece(data) == 0.0


def test_ece_twenty_records_five_bins():
    rng = random.Random(20)
    rows = random_rows(rng, 20)
    assert abs(ece(recs(rows), 5) - oracles.ece(rows, 5)) <= TOL


def test_ece_single_bin_identity():
    rng = random.Random(3)
    rows = random_rows(rng, 15)
    expected = abs(sum(s for *_, s in rows) / 15 - sum(y for _, y, _, _ in rows) / 15)
    assert abs(ece(recs(rows), 1) - expected) <= TOL


def test_ece_bin_edges():
    assert ece_bin(0.0, 10) == 0
    assert ece_bin(0.1, 10) == 1
    assert ece_bin(0.3, 10) == 3
    assert ece_bin(0.7, 10) == 7
    assert ece_bin(1.0, 10) == 9
    assert ece_bin(0.99999, 10) == 9


@settings(max_examples=500, deadline=None)
@given(st.integers(min_value=0, max_value=1000), st.integers(min_value=1, max_value=50))
def test_ece_bin_matches_float_edges(k, bins):
    s = k / 1000
    b = ece_bin(s, bins)
    assert b / bins <= s
    assert s < (b + 1) / bins or (b == bins - 1 and s == 1.0)


def test_calibration_params_reported():
    data = recs([("g", 1, 1, 0.2)])
    assert calibration_metric("nll", data).params == {"epsilon": 1e-12}
    assert calibration_metric("ece", data, {"bins": 4}).params == {"bins": 4}
    assert math.isfinite(nll(recs([("g", 1, 0, 0.0)])))


@pytest.mark.parametrize("bins", [0, -1, 2.5, True])
def test_bad_bin_count(bins):
    with pytest.raises(BadBinCount):
        ece(recs([("g", 1, 1, 0.5)]), bins)


def test_calibration_needs_scores():
    with pytest.raises(MissingScores):
        brier(recs([("g", 1, 1, None)]))


def test_score_range_enforced():
    with pytest.raises(ValueError):
        ClassificationRecord("g", 1, 1, 1.3)


# --------------------------------------------------------------------------
# dataset loading
# --------------------------------------------------------------------------


def test_load_eight_rows(tmp_path):
    from .conftest import CORPUS

    data = load_dataset(CORPUS / "data" / "spd-example.csv")
    assert len(data) == 8 and all(isinstance(r, ClassificationRecord) for r in data)


def test_score_out_of_range_row_number():
    with pytest.raises(RangeError) as ei:
        load_dataset(io.StringIO("group,y_true,y_pred,score\na,1,1,0.5\na,1,1,1.3\n"))
    assert ei.value.row == 3


def test_regression_missing_column():
    with pytest.raises(MissingColumn):
        load_dataset(io.StringIO("y_true\n1\n"), "regression")


@pytest.mark.parametrize("body", ["a,2,1\n", "a,yes,1\n", "a,1\n", "a,1.0,1\n"])
def test_bad_labels(body):
    with pytest.raises(DatasetError):
        load_dataset(io.StringIO("group,y_true,y_pred\n" + body))


def test_regression_rejects_thousands_separator():
    with pytest.raises(CsvError):
        load_dataset(io.StringIO('y_true,y_pred\n"1,000",3\n'), "regression")


def test_empty_csv():
    with pytest.raises(CsvError):
        load_dataset(io.StringIO(""))


# --------------------------------------------------------------------------
# registry and intervals
# --------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["bleu", "perplexity", "miou", "ssim", "psnr", "silhouette", "mrr", "dcg"])
def test_listed_but_unsupported(name):
    with pytest.raises(MetricNotSupported):
        check_registered(name)


def test_unknown_metric():
    with pytest.raises(UnknownMetric):
        evaluate("not_a_metric", [])


def test_interval_examples():
    assert check_interval(40, Interval.from_json({"min": 35, "max": None}))
    assert check_interval(0.0, Interval(0, 0))
    assert not check_interval(0.3, Interval(0, 0.2))
    assert not check_interval(0.1, Interval(0, 0.1, upper_closed=False))
    assert not check_interval(float("nan"), Interval())


def test_interval_well_formed():
    with pytest.raises(ValueError):
        Interval(1, 0)
    with pytest.raises(ValueError):
        Interval(0, 0, lower_closed=False)
    with pytest.raises(ValueError):
        Interval(float("nan"), 1)


@settings(max_examples=300, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.booleans(), st.booleans())
def test_interval_json_round_trip(a, b, lc, uc):
    lo, hi = min(a, b), max(a, b)
    if lo == hi:
        lc = uc = True
    iv = Interval(lo, hi, lc, uc)
    assert Interval.from_json(iv.to_json()) == iv


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 1), st.integers(0, 1),
                          st.floats(0, 1)), min_size=1, max_size=16))
def test_metric_ranges(rows):
    data = recs(rows)
    assert 0 <= brier(data) <= 1
    assert ece(data) <= 1 + TOL
    assert nll(data) >= 0
    for name in COUNT_METRICS:
        try:
            v = performance_metric(name, data).value
        except UndefinedMetric:
            continue
        assert 0 <= v <= 1
