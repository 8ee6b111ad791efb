"""Edge-level agreement between a predicted and a reference task graph."""
from dataclasses import asdict, dataclass

from .exceptions import ContractViolation
from .postprocess import BinaryTaskGraph


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall and F1 with 0/0 taken as 0."""
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class EdgeMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def edge_prf(pred: BinaryTaskGraph, truth: BinaryTaskGraph) -> EdgeMetrics:
    if pred.vocabulary != truth.vocabulary:
        raise ContractViolation(
            f"vocabulary mismatch: predicted graph has {list(pred.vocabulary.names)}, "
            f"reference graph has {list(truth.vocabulary.names)}")
    tp = len(pred.edges & truth.edges)
    fp = len(pred.edges - truth.edges)
    fn = len(truth.edges - pred.edges)
    return EdgeMetrics(tp, fp, fn, *prf(tp, fp, fn))


def mean_metrics(results: list[EdgeMetrics]) -> dict:
    """Unweighted average over procedures."""
    if not results:
        return {}
    keys = ("tp", "fp", "fn", "precision", "recall", "f1")
    return {k: sum(getattr(r, k) for r in results) / len(results) for k in keys}
