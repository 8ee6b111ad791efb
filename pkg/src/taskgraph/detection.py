"""Online mistake detection by checking pre-conditions against a binary task graph."""
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import ContractViolation, InvalidInputError
from .metrics import prf
from .postprocess import BinaryTaskGraph

CORRECT = "correct"
MISTAKE = "mistake"
LABELS = (CORRECT, MISTAKE)

PERTURBATIONS = ("replace", "delete", "insert")


@dataclass(frozen=True)
class MistakeVerdict:
    step: int
    label: str
    missing: tuple[int, ...] = ()

    @property
    def is_mistake(self) -> bool:
        return self.label == MISTAKE


def check_step(current: int, observed: Iterable[int], graph: BinaryTaskGraph) -> MistakeVerdict:
    """Flag ``current`` when one of its direct pre-conditions has not been observed."""
    if current == 0 or current == graph.vocabulary.end:
        raise ContractViolation("START and END cannot be checked for mistakes")
    observed = set(observed) | {0}
    missing = tuple(sorted(graph.predecessors(current) - observed))
    return MistakeVerdict(current, MISTAKE if missing else CORRECT, missing)


def replay(seq: Sequence[int], graph: BinaryTaskGraph) -> list[MistakeVerdict]:
    """Check every interior step in order; the history grows whatever the verdict.

    ``seq`` may be a canonical sequence (START ... END) or a bare list of steps.
    """
    end = graph.vocabulary.end
    steps = [s for s in seq if s not in (0, end)]
    observed = {0}
    verdicts = []
    for step in steps:
        verdicts.append(check_step(step, observed, graph))
        observed.add(step)
    return verdicts


@dataclass(frozen=True)
class PerturbationConfig:
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.rate <= 1:
            raise InvalidInputError("perturbation rate must lie in [0, 1]")


@dataclass(frozen=True)
class PerturbedStep:
    """What the detector sees for one prediction: a noisy history and a noisy current step."""

    history: tuple[int, ...]
    current: int


def _perturb_history(history, rng, rate, n):
    out = []
    for step in history:
        if rng.random() >= rate:
            out.append(step)
            continue
        kind = PERTURBATIONS[int(rng.integers(3))]
        if kind == "replace":
            out.append(int(rng.integers(1, n + 1)))
        elif kind == "insert":
            out.append(step)
            out.append(int(rng.integers(1, n + 1)))
        # delete: drop the step
    return tuple(out)


def perturb(seq: Sequence[int], cfg: PerturbationConfig, n: int) -> list[PerturbedStep]:
    """Simulate recognition noise for every prediction along ``seq``.

    For each interior position the current step is replaced with probability
    ``rate``, and each earlier step independently undergoes a replace, delete or
    insert (chosen uniformly) with probability ``rate``.  Random classes are
    drawn uniformly from ``1..n``.  The history is re-drawn for every prediction.
    """
    steps = [s for s in seq if s not in (0, n + 1)]
    rng = np.random.default_rng(cfg.seed)
    out = []
    for t, current in enumerate(steps):
        if cfg.rate > 0:
            if rng.random() < cfg.rate:
                current = int(rng.integers(1, n + 1))
            history = _perturb_history(steps[:t], rng, cfg.rate, n)
        else:
            history = tuple(steps[:t])
        out.append(PerturbedStep(history, current))
    return out


def replay_perturbed(stream: Iterable[PerturbedStep], graph: BinaryTaskGraph) -> list[MistakeVerdict]:
    return [check_step(p.current, p.history, graph) for p in stream]


@dataclass(frozen=True)
class DetectionMetrics:
    per_class: dict = field(default_factory=dict)  # label -> (precision, recall, f1)
    average_f1: float = 0.0

    def to_dict(self) -> dict:
        out = {"average_f1": self.average_f1}
        for label, (p, r, f) in self.per_class.items():
            out[label] = {"precision": p, "recall": r, "f1": f}
        return out


def detection_metrics(verdicts: Sequence, truth: Sequence[str]) -> DetectionMetrics:
    """Per-class precision/recall/F1 and their unweighted F1 mean."""
    predicted = [v.label if isinstance(v, MistakeVerdict) else v for v in verdicts]
    if len(predicted) != len(truth):
        raise ContractViolation(f"{len(predicted)} verdicts but {len(truth)} truth labels")
    for label in (*predicted, *truth):
        if label not in LABELS:
            raise InvalidInputError(f"unknown label {label!r}")
    per_class = {}
    for label in LABELS:
        tp = sum(p == label and t == label for p, t in zip(predicted, truth))
        fp = sum(p == label and t != label for p, t in zip(predicted, truth))
        fn = sum(p != label and t == label for p, t in zip(predicted, truth))
        per_class[label] = prf(tp, fp, fn)
    average = sum(f for _, _, f in per_class.values()) / len(LABELS)
    return DetectionMetrics(per_class, average)
