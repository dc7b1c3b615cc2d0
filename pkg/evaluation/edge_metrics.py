from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from utility.errors import DimensionError


@dataclass
class EdgeClassReport:
    accuracy: float
    iou: float
    dice: float
    precision: float
    recall: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def as_row(self) -> dict:
        return asdict(self)


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def edge_class_metrics(A_pred, A_true) -> EdgeClassReport:
    """
    Confusion counts over unordered node pairs (strict upper triangle).

    When both graphs are empty IoU, Dice, precision and recall are 1;
    otherwise a zero denominator gives 0.
    """
    pred = np.asarray(A_pred) != 0
    true = np.asarray(A_true) != 0
    if pred.shape != true.shape or pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
        raise DimensionError(f"prediction shape {pred.shape} does not match truth {true.shape}")

    upper = np.triu(np.ones(pred.shape, dtype=bool), k=1)
    p, t = pred[upper], true[upper]
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    fn = int(np.sum(~p & t))
    tn = int(np.sum(~p & ~t))
    total = tp + fp + fn + tn

    accuracy = _ratio(tp + tn, total) if total else 1.0
    if tp + fp + fn == 0:
        return EdgeClassReport(accuracy, 1.0, 1.0, 1.0, 1.0, tp, fp, fn, tn)
    return EdgeClassReport(
        accuracy=accuracy,
        iou=_ratio(tp, tp + fp + fn),
        dice=_ratio(2 * tp, 2 * tp + fp + fn),
        precision=_ratio(tp, tp + fp),
        recall=_ratio(tp, tp + fn),
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )


def aggregate_edge_reports(reports: Sequence[EdgeClassReport]) -> EdgeClassReport:
    """Mean of each metric; confusion counts are summed."""
    if not reports:
        return EdgeClassReport(0.0, 0.0, 0.0, 0.0, 0.0)
    return EdgeClassReport(
        accuracy=float(np.mean([r.accuracy for r in reports])),
        iou=float(np.mean([r.iou for r in reports])),
        dice=float(np.mean([r.dice for r in reports])),
        precision=float(np.mean([r.precision for r in reports])),
        recall=float(np.mean([r.recall for r in reports])),
        tp=sum(r.tp for r in reports),
        fp=sum(r.fp for r in reports),
        fn=sum(r.fn for r in reports),
        tn=sum(r.tn for r in reports),
    )
