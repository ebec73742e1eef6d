"""Quantitative criteria: datasets, performance, fairness and calibration metrics.

Only binary classification (with an optional group attribute and an
optional positive-class score) and scalar regression are supported.
Every metric raises :class:`UndefinedMetric` instead of returning NaN when a
denominator is zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

from .errors import InputError, TrustcatError

NLL_EPSILON = 1e-12
DEFAULT_ECE_BINS = 10


# --------------------------------------------------------------------------
# errors
# --------------------------------------------------------------------------


class MetricError(TrustcatError):
    """A metric could not be evaluated on the given data."""


class UndefinedMetric(MetricError):
    pass


class EmptySlice(MetricError):
    def __init__(self, group: str | None) -> None:
        self.group = group
        super().__init__(f"no records in group {group!r}" if group is not None else "dataset is empty")


class MissingScores(MetricError):
    pass


class BadBinCount(MetricError):
    pass


class MetricNotSupported(MetricError):
    def __init__(self, name: str, reason: str) -> None:
        self.name = name
        self.reason = reason
        super().__init__(f"metric {name!r} is not supported: {reason}")


class UnknownMetric(MetricError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"unknown metric {name!r}")


class DatasetError(InputError):
    pass


class CsvError(DatasetError):
    def __init__(self, row: int, message: str) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}")


class RangeError(DatasetError):
    def __init__(self, row: int, field_name: str, value: str) -> None:
        self.row = row
        self.field = field_name
        super().__init__(f"row {row}: {field_name}={value!r} out of range")


class MissingColumn(DatasetError):
    def __init__(self, column: str) -> None:
        self.column = column
        super().__init__(f"missing column {column!r}")


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationRecord:
    group: str
    y_true: int
    y_pred: int
    score: float | None = None
    row: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.y_true not in (0, 1) or self.y_pred not in (0, 1):
            raise ValueError("labels must be 0 or 1")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class RegressionRecord:
    y_true: float
    y_pred: float
    row: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.y_true) and math.isfinite(self.y_pred)):
            raise ValueError("regression values must be finite")


Dataset = Union[Sequence[ClassificationRecord], Sequence[RegressionRecord]]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricResult:
    name: str
    value: float
    slice: str = "all"
    params: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------

CLASSIFICATION_COLUMNS = ("group", "y_true", "y_pred")
REGRESSION_COLUMNS = ("y_true", "y_pred")


def _label(raw: str, row: int, name: str) -> int:
    raw = raw.strip()
    if raw == "0":
        return 0
    if raw == "1":
        return 1
    raise RangeError(row, name, raw)


def _real(raw: str, row: int, name: str) -> float:
    txt = raw.strip()
    if not txt or "," in txt:
        raise CsvError(row, f"{name}: not a decimal number: {raw!r}")
    try:
        val = float(txt)
    except ValueError:
        raise CsvError(row, f"{name}: not a decimal number: {raw!r}") from None
    if not math.isfinite(val):
        raise RangeError(row, name, raw)
    return val


def load_dataset(source: str | Path | IO[str], schema: str = "classification") -> list:
    """Read a CSV dataset. Row numbers are 1-based and count the header as row 1."""
    if schema not in ("classification", "regression"):
        raise ValueError(f"unknown schema {schema!r}")
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvError(1, "missing header row") from None
    except csv.Error as exc:
        raise CsvError(1, str(exc)) from None
    header = [h.strip() for h in header]
    needed = CLASSIFICATION_COLUMNS if schema == "classification" else REGRESSION_COLUMNS
    for col in needed:
        if col not in header:
            raise MissingColumn(col)
    pos = {h: i for i, h in enumerate(header)}
    has_score = schema == "classification" and "score" in pos

    out: list = []
    row = 1
    try:
        for cells in reader:
            row += 1
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise CsvError(row, f"expected {len(header)} fields, got {len(cells)}")
            if schema == "classification":
                score = None
                if has_score and cells[pos["score"]].strip() != "":
                    score = _real(cells[pos["score"]], row, "score")
                    if not 0.0 <= score <= 1.0:
                        raise RangeError(row, "score", cells[pos["score"]])
                out.append(ClassificationRecord(
                    group=cells[pos["group"]].strip(),
                    y_true=_label(cells[pos["y_true"]], row, "y_true"),
                    y_pred=_label(cells[pos["y_pred"]], row, "y_pred"),
                    score=score,
                    row=row,
                ))
            else:
                out.append(RegressionRecord(
                    y_true=_real(cells[pos["y_true"]], row, "y_true"),
                    y_pred=_real(cells[pos["y_pred"]], row, "y_pred"),
                    row=row,
                ))
    except csv.Error as exc:
        raise CsvError(row, str(exc)) from None
    return out


# --------------------------------------------------------------------------
# confusion counts and performance
# --------------------------------------------------------------------------


def _slice(data: Iterable[ClassificationRecord], group: str | None) -> list[ClassificationRecord]:
    recs = list(data) if group is None else [r for r in data if r.group == group]
    if not recs:
        raise EmptySlice(group)
    return recs


def confusion_counts(data: Iterable[ClassificationRecord], group: str | None = None) -> ConfusionCounts:
    tp = fp = tn = fn = 0
    for r in _slice(data, group):
        if r.y_pred == 1:
            if r.y_true == 1:
                tp += 1
            else:
                fp += 1
        elif r.y_true == 1:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def _ratio(num: float, den: float, what: str) -> float:
    if den == 0:
        raise UndefinedMetric(f"{what}: zero denominator")
    return num / den


def accuracy(c: ConfusionCounts) -> float:
    return _ratio(c.tp + c.tn, c.n, "accuracy")


def precision(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fp, "precision")


def recall(c: ConfusionCounts) -> float:
    return _ratio(c.tp, c.tp + c.fn, "recall")


def specificity(c: ConfusionCounts) -> float:
    return _ratio(c.tn, c.tn + c.fp, "specificity")


def false_positive_rate(c: ConfusionCounts) -> float:
    return _ratio(c.fp, c.fp + c.tn, "false positive rate")


def negative_predictive_value(c: ConfusionCounts) -> float:
    return _ratio(c.tn, c.tn + c.fn, "negative predictive value")


def positive_rate(c: ConfusionCounts) -> float:
    return _ratio(c.tp + c.fp, c.n, "positive prediction rate")


def f1(c: ConfusionCounts) -> float:
    # harmonic mean of precision and recall; both must be defined, and the
    # count form gives the limit 0 when tp == 0
    precision(c), recall(c)
    return 2 * c.tp / (2 * c.tp + c.fp + c.fn)


def auc(data: Sequence[ClassificationRecord]) -> float:
    """Mann-Whitney U / (n_pos * n_neg) with midranks for tied scores."""
    if any(r.score is None for r in data):
        raise MissingScores("auc needs a score on every record")
    n_pos = sum(r.y_true for r in data)
    n_neg = len(data) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetric("auc needs at least one positive and one negative record")
    ordered = sorted(data, key=lambda r: r.score)
    rank_sum_pos = 0.0
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1].score == ordered[i].score:
            j += 1
        midrank = (i + j) / 2 + 1
        rank_sum_pos += midrank * sum(r.y_true for r in ordered[i:j + 1])
        i = j + 1
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def mse(data: Sequence[RegressionRecord]) -> float:
    if not data:
        raise EmptySlice(None)
    return math.fsum((r.y_pred - r.y_true) ** 2 for r in data) / len(data)


def mae(data: Sequence[RegressionRecord]) -> float:
    if not data:
        raise EmptySlice(None)
    return math.fsum(abs(r.y_pred - r.y_true) for r in data) / len(data)


_COUNT_METRICS = {
    "accuracy": accuracy,
    "precision": precision,
    "recall": recall,
    "sensitivity": recall,
    "specificity": specificity,
    "f1": f1,
    "balanced_accuracy": lambda c: (recall(c) + specificity(c)) / 2,
}
_REGRESSION_METRICS = {"mse": mse, "mae": mae}
PERFORMANCE_METRICS = frozenset(_COUNT_METRICS) | {"auc"} | frozenset(_REGRESSION_METRICS)


def performance_metric(name: str, data: Dataset, group: str | None = None) -> MetricResult:
    if name not in PERFORMANCE_METRICS:
        raise UnknownMetric(name)
    if not data:
        raise EmptySlice(None)
    if name in _REGRESSION_METRICS:
        if not isinstance(data[0], RegressionRecord):
            raise MetricError(f"{name} needs a regression dataset")
        return MetricResult(name, _REGRESSION_METRICS[name](data))
    if not isinstance(data[0], ClassificationRecord):
        raise MetricError(f"{name} needs a classification dataset")
    recs = _slice(data, group)
    label = "all" if group is None else f"group={group}"
    if name == "auc":
        return MetricResult(name, auc(recs), label)
    return MetricResult(name, _COUNT_METRICS[name](confusion_counts(recs)), label)


# --------------------------------------------------------------------------
# fairness
# --------------------------------------------------------------------------


def _tpr_gap(a: ConfusionCounts, b: ConfusionCounts) -> float:
    return abs(recall(a) - recall(b))


def _fpr_gap(a: ConfusionCounts, b: ConfusionCounts) -> float:
    return abs(false_positive_rate(a) - false_positive_rate(b))


def _treatment_ratio(c: ConfusionCounts) -> float:
    return _ratio(c.fn, c.fp, "treatment equality (FN/FP)")


_FAIRNESS = {
    "statistical_parity_difference": lambda a, b: abs(positive_rate(a) - positive_rate(b)),
    "equal_opportunity_difference": _tpr_gap,
    "predictive_equality_difference": _fpr_gap,
    "equalized_odds": lambda a, b: max(_tpr_gap(a, b), _fpr_gap(a, b)),
    "predictive_parity_difference": lambda a, b: abs(precision(a) - precision(b)),
    "conditional_use_accuracy_difference": lambda a, b: max(
        abs(precision(a) - precision(b)),
        abs(negative_predictive_value(a) - negative_predictive_value(b)),
    ),
    "overall_accuracy_difference": lambda a, b: abs(accuracy(a) - accuracy(b)),
    "treatment_equality_difference": lambda a, b: abs(_treatment_ratio(a) - _treatment_ratio(b)),
}
FAIRNESS_METRICS = frozenset(_FAIRNESS)


def fairness_metric(name: str, data: Sequence[ClassificationRecord], group_a: str, group_b: str) -> MetricResult:
    """Absolute between-group gap of the statistic behind ``name``."""
    if name not in _FAIRNESS:
        raise UnknownMetric(name)
    ca = confusion_counts(data, group_a)
    cb = confusion_counts(data, group_b)
    value = _FAIRNESS[name](ca, cb)
    return MetricResult(name, value, f"{group_a} vs {group_b}", {"group_a": group_a, "group_b": group_b})


# --------------------------------------------------------------------------
# calibration
# --------------------------------------------------------------------------


def _scores(data: Sequence[ClassificationRecord]) -> list[tuple[float, int]]:
    if not data:
        raise EmptySlice(None)
    if any(r.score is None for r in data):
        raise MissingScores("calibration metrics need a score on every record")
    return [(r.score, r.y_true) for r in data]  # type: ignore[misc]


def brier(data: Sequence[ClassificationRecord]) -> float:
    pairs = _scores(data)
    return math.fsum((s - y) ** 2 for s, y in pairs) / len(pairs)


def nll(data: Sequence[ClassificationRecord], eps: float = NLL_EPSILON) -> float:
    pairs = _scores(data)
    total = 0.0
    for s, y in pairs:
        p = min(max(s, eps), 1.0 - eps)
        total -= math.log(p) if y == 1 else math.log(1.0 - p)
    return total / len(pairs)


def ece_bin(score: float, bins: int) -> int:
    """Index k with k/bins <= score < (k+1)/bins; the last bin is closed at 1."""
    k = min(int(score * bins), bins - 1)
    # float rounding in score*bins can land one bin off the edge comparison
    while k > 0 and k / bins > score:
        k -= 1
    while k < bins - 1 and (k + 1) / bins <= score:
        k += 1
    return k


def ece(data: Sequence[ClassificationRecord], bins: int = DEFAULT_ECE_BINS) -> float:
    if isinstance(bins, bool) or not isinstance(bins, int) or bins < 1:
        raise BadBinCount(f"bin count must be a positive integer, got {bins!r}")
    pairs = _scores(data)
    members: list[list[tuple[float, int]]] = [[] for _ in range(bins)]
    for s, y in pairs:
        members[ece_bin(s, bins)].append((s, y))
    n = len(pairs)
    total = []
    for m in members:
        if m:
            conf = math.fsum(s for s, _ in m) / len(m)
            acc = sum(y for _, y in m) / len(m)
            total.append(len(m) / n * abs(conf - acc))
    return math.fsum(total)


CALIBRATION_METRICS = frozenset({"ece", "brier", "nll"})


def calibration_metric(name: str, data: Sequence[ClassificationRecord], params: dict | None = None) -> MetricResult:
    params = dict(params or {})
    if name == "brier":
        return MetricResult(name, brier(data))
    if name == "nll":
        eps = NLL_EPSILON
        return MetricResult(name, nll(data, eps), params={"epsilon": eps})
    if name == "ece":
        bins = params.get("bins", DEFAULT_ECE_BINS)
        return MetricResult(name, ece(data, bins), params={"bins": bins})
    raise UnknownMetric(name)


# --------------------------------------------------------------------------
# registry and interval checks
# --------------------------------------------------------------------------

_NOT_SUPPORTED = {
    **dict.fromkeys(("mrr", "mean_reciprocal_rank", "dcg", "ndcg", "discounted_cumulative_gain"),
                    "ranking metrics are listed by name only"),
    **dict.fromkeys(("silhouette", "ami", "adjusted_mutual_information", "completeness"),
                    "clustering metrics are listed by name only"),
    **dict.fromkeys(("psnr", "ssim", "miou"), "computer-vision metrics are listed by name only"),
    **dict.fromkeys(("perplexity", "bleu"), "NLP metrics are listed by name only"),
    **dict.fromkeys(
        ("individual_fairness", "fairness_through_awareness", "counterfactual_fairness",
         "no_proxy_discrimination", "no_unresolved_discrimination", "fair_inference",
         "causal_discrimination"),
        "needs inputs (similarity metric or causal graph) the document format does not carry",
    ),
    **dict.fromkeys(
        ("conditional_statistical_parity", "test_fairness", "well_calibration",
         "balance_for_positive_class", "balance_for_negative_class"),
        "fairness definition without an implemented metric",
    ),
}

REGISTRY = PERFORMANCE_METRICS | FAIRNESS_METRICS | CALIBRATION_METRICS
REGRESSION_ONLY = frozenset(_REGRESSION_METRICS)


def check_registered(name: str) -> None:
    """Raise MetricNotSupported / UnknownMetric unless ``name`` is computable."""
    if name in REGISTRY:
        return
    if name in _NOT_SUPPORTED:
        raise MetricNotSupported(name, _NOT_SUPPORTED[name])
    raise UnknownMetric(name)


def schema_for(name: str) -> str:
    return "regression" if name in REGRESSION_ONLY else "classification"


def evaluate(name: str, data: Dataset, params: dict | None = None) -> MetricResult:
    """Dispatch on the metric family; ``params`` carries groups or bin counts."""
    check_registered(name)
    params = params or {}
    if name in FAIRNESS_METRICS:
        try:
            a, b = params["group_a"], params["group_b"]
        except KeyError:
            raise MetricError(f"{name} needs params group_a and group_b") from None
        return fairness_metric(name, data, str(a), str(b))  # type: ignore[arg-type]
    if name in CALIBRATION_METRICS:
        return calibration_metric(name, data, params)  # type: ignore[arg-type]
    return performance_metric(name, data, params.get("group"))


@dataclass(frozen=True)
class Interval:
    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self) -> None:
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval bounds must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"empty interval: lower {self.lower} > upper {self.upper}")
        if self.lower == self.upper and not (self.lower_closed and self.upper_closed):
            raise ValueError("a point interval must be closed on both sides")

    def __contains__(self, value: float) -> bool:
        return check_interval(value, self)

    def __str__(self) -> str:
        lo = "(-inf" if self.lower == -math.inf else ("[" if self.lower_closed else "(") + _num(self.lower)
        hi = "+inf)" if self.upper == math.inf else _num(self.upper) + ("]" if self.upper_closed else ")")
        return f"{lo}, {hi}"

    @classmethod
    def from_json(cls, obj: dict) -> "Interval":
        lo = obj.get("min")
        hi = obj.get("max")
        return cls(
            -math.inf if lo is None else float(lo),
            math.inf if hi is None else float(hi),
            bool(obj.get("min_closed", True)) and lo is not None,
            bool(obj.get("max_closed", True)) and hi is not None,
        )

    def to_json(self) -> dict:
        return {
            "min": None if self.lower == -math.inf else self.lower,
            "max": None if self.upper == math.inf else self.upper,
            "min_closed": self.lower_closed and self.lower != -math.inf,
            "max_closed": self.upper_closed and self.upper != math.inf,
        }


def _num(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(x)


def check_interval(value: float, target: Interval) -> bool:
    if math.isnan(value):
        return False
    lo_ok = value >= target.lower if target.lower_closed else value > target.lower
    hi_ok = value <= target.upper if target.upper_closed else value < target.upper
    return lo_ok and hi_ok
