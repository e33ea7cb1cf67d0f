"""Segmentation metrics over radar label maps.

Per-class intersection-over-union, pixel precision and pixel recall,
aggregated with arithmetic and harmonic means. Classes whose ratio is
undefined (zero denominator) are excluded from aggregation and recorded
as absent rather than zero-filled.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PointOutOfBounds, ValidationError

CLASS_NAMES = ("background", "pedestrian", "cyclist", "car")
NUM_CLASSES = len(CLASS_NAMES)
OBJECT_CLASSES = (1, 2, 3)


def class_id(name: str) -> int:
    try:
        return CLASS_NAMES.index(name)
    except ValueError:
        raise ValidationError(f"unknown class {name!r}") from None


def confusion(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """counts[i, j] = number of bins with truth class i predicted as j."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"pred {pred.shape} vs truth {truth.shape}")
    if pred.size and (pred.min() < 0 or pred.max() >= NUM_CLASSES
                      or truth.min() < 0 or truth.max() >= NUM_CLASSES):
        raise ValidationError(f"labels must be in [0, {NUM_CLASSES})")
    joint = truth.reshape(-1).astype(np.int64) * NUM_CLASSES + pred.reshape(-1)
    counts = np.bincount(joint, minlength=NUM_CLASSES * NUM_CLASSES)
    return counts.reshape(NUM_CLASSES, NUM_CLASSES)


def _ratio(num: int, den: int):
    return None if den == 0 else num / den


def per_class_metrics(conf: np.ndarray) -> dict:
    """{class name: {iou, pp, pr}} with None marking undefined ratios."""
    conf = np.asarray(conf, dtype=np.int64)
    if conf.shape != (NUM_CLASSES, NUM_CLASSES):
        raise DimensionMismatch(f"confusion must be {NUM_CLASSES}x{NUM_CLASSES}")
    out = {}
    for k, name in enumerate(CLASS_NAMES):
        tp = int(conf[k, k])
        fn = int(conf[k, :].sum()) - tp
        fp = int(conf[:, k].sum()) - tp
        out[name] = {
            "iou": _ratio(tp, tp + fp + fn),
            "pp": _ratio(tp, tp + fp),
            "pr": _ratio(tp, tp + fn),
        }
    return out


def aggregate(values) -> tuple:
    """(arithmetic mean, harmonic mean) over the defined values.

    The harmonic mean is 0 when any included value is 0; both are None
    when no value is defined.
    """
    defined = [v for v in values if v is not None]
    if not defined:
        return (None, None)
    arith = sum(defined) / len(defined)
    if any(v == 0 for v in defined):
        return (arith, 0.0)
    harm = len(defined) / sum(1.0 / v for v in defined)
    return (arith, harm)


@dataclass
class MetricReport:
    """Per-class metrics with their aggregated means (fractions in [0,1])."""

    per_class: dict
    aggregates: dict
    classes: tuple = CLASS_NAMES

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "per_class": self.per_class,
            "aggregates": self.aggregates,
        }


def build_report(conf: np.ndarray, classes=CLASS_NAMES,
                 metrics=("iou", "pp", "pr")) -> MetricReport:
    per_class_all = per_class_metrics(conf)
    per_class = {name: {m: per_class_all[name][m] for m in metrics} for name in classes}
    aggregates = {}
    for m in metrics:
        arith, harm = aggregate([per_class[name][m] for name in classes])
        aggregates[f"m{m}"] = arith
        aggregates[f"h{m}"] = harm
    return MetricReport(per_class=per_class, aggregates=aggregates, classes=tuple(classes))


def sparse_eval(pred: np.ndarray, truth_points) -> MetricReport:
    """Precision/recall restricted to labeled sparse points.

    ``truth_points`` is an iterable of ((row, col), class) with object
    classes only; background cannot be assessed on sparse annotations, so
    aggregation runs over the three object classes and IoU is omitted.
    """
    pred = np.asarray(pred)
    conf = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for (row, col), label in truth_points:
        if not (0 <= row < pred.shape[0] and 0 <= col < pred.shape[1]):
            raise PointOutOfBounds(f"point ({row}, {col}) outside map {pred.shape}")
        if label not in OBJECT_CLASSES:
            raise ValidationError("sparse truth labels must be object classes")
        conf[label, pred[row, col]] += 1
    object_names = tuple(CLASS_NAMES[k] for k in OBJECT_CLASSES)
    report = build_report(conf, classes=object_names, metrics=("pp", "pr"))
    return report


def format_table(report: MetricReport, as_percent: bool = True) -> str:
    """Aligned text table: one row per metric, one column per class plus
    the arithmetic and harmonic means."""
    metrics = sorted({m for v in report.per_class.values() for m in v})
    order = [m for m in ("iou", "pp", "pr") if m in metrics]
    headers = list(report.classes) + ["m", "h"]
    width = max(len(h) for h in headers + [""]) + 2

    def fmt(v):
        if v is None:
            return "---"
        return f"{v * 100:.1f}" if as_percent else f"{v:.4f}"

    lines = [" " * 6 + "".join(h.rjust(width) for h in headers)]
    for m in order:
        cells = [fmt(report.per_class[name][m]) for name in report.classes]
        cells.append(fmt(report.aggregates[f"m{m}"]))
        cells.append(fmt(report.aggregates[f"h{m}"]))
        lines.append(m.upper().ljust(6) + "".join(c.rjust(width) for c in cells))
    return "\n".join(lines)
