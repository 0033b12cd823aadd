"""Confusion-matrix metrics, multi-run averaging, comparison reporting.

Erroneous is the positive class throughout: TPR is recall on defects,
TNR specificity, PPV precision on defects. Percentages are printed at
two decimals with round-half-away-from-zero (58/64 prints 90.63), and
run averages are taken over those printed two-decimal values; both
conventions are needed to reproduce the reference result tables the
shipped fixtures mirror.

Degenerate denominators surface as undefined (None) metrics rather
than silently coercing to 0 or 1; a balanced test split never hits
them, so an undefined metric usually means a dataset bug.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources

from .scans import Verdict

_CENT = Decimal("0.01")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float | None
    tpr: float | None
    tnr: float | None
    ppv: float | None
    run_id: str = ""
    max_validation_accuracy: float | None = None

    def to_json_dict(self) -> dict:
        out = {
            "run_id": self.run_id,
            "accuracy": self.accuracy,
            "tpr": self.tpr,
            "tnr": self.tnr,
            "ppv": self.ppv,
        }
        if self.max_validation_accuracy is not None:
            out["max_validation_accuracy"] = self.max_validation_accuracy
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "MetricsReport":
        return cls(
            accuracy=obj.get("accuracy"),
            tpr=obj.get("tpr"),
            tnr=obj.get("tnr"),
            ppv=obj.get("ppv"),
            run_id=obj.get("run_id", ""),
            max_validation_accuracy=obj.get("max_validation_accuracy"),
        )


def confusion(predictions: list[Verdict], truths: list[Verdict]) -> ConfusionMatrix:
    if len(predictions) != len(truths):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(truths)} truths")
    if not predictions:
        raise ValueError("empty input")
    tp = fp = tn = fn = 0
    for pred, truth in zip(predictions, truths):
        if pred is Verdict.ERRONEOUS and truth is Verdict.ERRONEOUS:
            tp += 1
        elif pred is Verdict.ERRONEOUS:
            fp += 1
        elif truth is Verdict.ERRONEOUS:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics(cm: ConfusionMatrix, run_id: str = "",
            max_validation_accuracy: float | None = None) -> MetricsReport:
    if cm.total == 0:
        raise ValueError("cannot compute metrics on an empty confusion matrix")
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        tpr=cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else None,
        tnr=cm.tn / (cm.tn + cm.fp) if cm.tn + cm.fp else None,
        ppv=cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else None,
        run_id=run_id,
        max_validation_accuracy=max_validation_accuracy,
    )


def percent_decimal(value: float) -> Decimal:
    """Two-decimal percent as an exact Decimal, half away from zero."""
    scaled = Decimal(value) * 100
    if scaled < 0:
        return -((-scaled).quantize(_CENT, rounding=ROUND_HALF_UP))
    return scaled.quantize(_CENT, rounding=ROUND_HALF_UP)


def format_percent(value: float | None) -> str:
    if value is None:
        return "undefined"
    return f"{percent_decimal(value)}%"


_COMPONENTS = ("accuracy", "tpr", "tnr", "ppv")


def aggregate_runs(reports: list[MetricsReport]) -> MetricsReport:
    """Unweighted mean per component over the two-decimal percent values.

    Averaging the printed (rounded) per-run percentages is what the
    reference result tables do, so e.g. TNRs 90.63/92.19/87.50 average
    to 90.11 rather than the 90.10 the exact fractions would give.
    """
    if not reports:
        raise ValueError("need at least one report to aggregate")
    values: dict[str, float] = {}
    for name in _COMPONENTS:
        cells = [getattr(r, name) for r in reports]
        if any(c is None for c in cells):
            raise ValueError(f"cannot aggregate: {name} undefined in at least one run")
        mean = sum(percent_decimal(c) for c in cells) / len(cells)
        values[name] = float(mean.quantize(_CENT, rounding=ROUND_HALF_UP)) / 100.0
    max_vals = [r.max_validation_accuracy for r in reports]
    agg_max = None
    if all(v is not None for v in max_vals):
        mean = sum(percent_decimal(v) for v in max_vals) / len(max_vals)
        agg_max = float(mean.quantize(_CENT, rounding=ROUND_HALF_UP)) / 100.0
    return MetricsReport(run_id="average", max_validation_accuracy=agg_max, **values)


# -- comparison report ---------------------------------------------------------

_ROW_LABELS = (("accuracy", "Accuracy"), ("tpr", "TPR"), ("tnr", "TNR"), ("ppv", "PPV"))


def load_reference_fixture() -> MetricsReport:
    """The shipped optical-inspection baseline used as comparison target."""
    text = resources.files("wsqa.data").joinpath("aoi_reference.json").read_text()
    return _reference_from_json(json.loads(text))


def load_reference_file(path) -> MetricsReport:
    with open(path, "r", encoding="utf-8") as fh:
        return _reference_from_json(json.load(fh))


def _reference_from_json(obj: dict) -> MetricsReport:
    # Baseline files carry percent units, the natural spelling for a
    # hand-authored reference (e.g. "accuracy": 96.88).
    return MetricsReport(
        accuracy=obj["accuracy"] / 100.0,
        tpr=obj["tpr"] / 100.0,
        tnr=obj["tnr"] / 100.0,
        ppv=obj["ppv"] / 100.0,
        run_id=obj.get("name", "reference"),
    )


def comparison_table(shrunk: MetricsReport, scaled: MetricsReport,
                     reference: MetricsReport | None) -> str:
    """Aligned three-column comparison of shrunk/scaled/reference results."""
    headers = ("", "Shrunk scans", "Scaled scans", "Reference system")
    rows = [headers]
    for attr, label in _ROW_LABELS:
        cells = [label]
        for report in (shrunk, scaled):
            cells.append(format_percent(getattr(report, attr)))
        cells.append("unavailable" if reference is None else format_percent(getattr(reference, attr)))
        rows.append(tuple(cells))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def report_text(report: MetricsReport) -> str:
    """One report as aligned label/value lines."""
    lines = [f"run: {report.run_id or '-'}"]
    if report.max_validation_accuracy is not None:
        lines.append(f"  max validation accuracy: {format_percent(report.max_validation_accuracy)}")
    for attr, label in _ROW_LABELS:
        lines.append(f"  {label.lower().ljust(8)}: {format_percent(getattr(report, attr))}")
    return "\n".join(lines) + "\n"
