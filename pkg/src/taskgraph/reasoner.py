"""Procedure-understanding queries answered from a trained task graph.

Weighted scores read the adjacency matrix before post-processing; the
``binary_*`` functions work on the post-processed graph only.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, DegenerateStateError, UnsupportedOperation
from .likelihood import next_step_prob, sequence_log_likelihood
from .postprocess import BinaryTaskGraph
from .vocab import SequenceSet

DEFAULT_ALPHA = 0.7
OPTIONAL_VOTE = 0.5


@dataclass(frozen=True)
class ReasonerQuery:
    """Current key-step plus the ordered history observed before it (START implied)."""

    current: int
    history: tuple[int, ...] = ()

    def __post_init__(self):
        history = tuple(dict.fromkeys(int(h) for h in self.history if h != 0))
        object.__setattr__(self, "history", history)
        if self.current in self.observed:
            raise ContractViolation(f"current key-step {self.current} is already in the history")

    @property
    def observed(self) -> frozenset:
        return frozenset((0, *self.history))


@dataclass(frozen=True)
class OptionalityBreakdown:
    global_score: float
    local_score: float
    combined: float
    alpha: float
    unseen: bool = False


def previous_keystep_score(i: int, prev: int, Z_hat) -> float:
    """Share of the pre-condition mass on ``prev`` that goes to ``i``."""
    if i == prev:
        raise ContractViolation("a key-step cannot be its own previous key-step")
    Z_hat = np.asarray(Z_hat, dtype=np.float64)
    column = Z_hat[:, prev]
    den = column.sum() - column[prev]
    return float(Z_hat[i, prev] / den) if den > 0 else 0.0


def procedural_mistake_score(query: ReasonerQuery, Z_hat) -> float:
    size = np.asarray(Z_hat).shape[0]
    observed = query.observed
    return float(sum(previous_keystep_score(query.current, p, Z_hat)
                     for p in range(size) if p not in observed and p != query.current))


def missing_keystep_score(query: ReasonerQuery, m: int, Z_hat) -> float:
    if m == query.current:
        raise ContractViolation("the current key-step cannot be missing")
    if m in query.observed:
        return 0.0
    return previous_keystep_score(query.current, m, Z_hat)


def future_keystep_prob(query: ReasonerQuery, f: int, Z_hat) -> float:
    history = query.observed | {query.current}
    if f in history:
        raise ContractViolation(f"key-step {f} has already been observed")
    return next_step_prob(f, history, Z_hat)


def _probability(seq, Z_hat) -> float:
    try:
        return math.exp(sequence_log_likelihood(seq, Z_hat))
    except DegenerateStateError:
        return 0.0


def step_frequency(seqs: SequenceSet) -> np.ndarray:
    """Fraction of sequences that contain each key-step."""
    counts = np.zeros(seqs.vocabulary.size)
    for seq in seqs:
        counts[list(seq.steps)] += 1
    return counts / len(seqs)


def sequence_optionality(seq, i: int, Z_hat, fr: float) -> float:
    """How much better ``seq`` is explained without ``i``, weighted by how rare ``i`` is."""
    p_with = _probability(seq, Z_hat)
    p_without = _probability(tuple(s for s in seq if s != i), Z_hat)
    a = p_without * (1.0 - fr)
    b = p_with * fr
    return a / (a + b) if a + b > 0 else 0.0


def optionality_counts(seqs: SequenceSet, Z_hat, frequency=None):
    """Per key-step counts of sequences voting optional / mandatory."""
    frequency = step_frequency(seqs) if frequency is None else frequency
    size = seqs.vocabulary.size
    count_o = np.zeros(size, dtype=np.int64)
    count_m = np.zeros(size, dtype=np.int64)
    for seq in seqs:
        for i in seq.interior:
            if sequence_optionality(seq, i, Z_hat, frequency[i]) > OPTIONAL_VOTE:
                count_o[i] += 1
            else:
                count_m[i] += 1
    return count_o, count_m


def optionality(query: ReasonerQuery, model, alpha: float = DEFAULT_ALPHA) -> OptionalityBreakdown:
    """Blend of corpus-level optional votes and the chance of ending right before the current step."""
    i = query.current
    votes = int(model.count_optional[i] + model.count_mandatory[i])
    unseen = votes == 0
    global_score = model.count_optional[i] / votes if votes else 0.0
    end = model.vocabulary.end
    local_score = _probability((0, *query.history, end), model.adjacency)
    combined = alpha * global_score + (1 - alpha) * local_score
    return OptionalityBreakdown(float(global_score), float(local_score), float(combined), alpha, unseen)


def weighted_scores(query: ReasonerQuery, model, alpha: float = DEFAULT_ALPHA) -> dict:
    """All five scores for one query, keyed by key-step index."""
    Z_hat = model.adjacency
    size = Z_hat.shape[0]
    i = query.current
    history = query.observed | {i}
    return {
        "previous": {p: previous_keystep_score(i, p, Z_hat) for p in range(size) if p != i},
        "optional": optionality(query, model, alpha),
        "mistake": procedural_mistake_score(query, Z_hat),
        "missing": {m: missing_keystep_score(query, m, Z_hat) for m in range(size) if m != i},
        "future": {f: future_keystep_prob(query, f, Z_hat) for f in range(size) if f not in history},
    }


def binary_scores(query: ReasonerQuery, graph: BinaryTaskGraph) -> dict:
    i = query.current
    observed = query.observed
    pk = graph.predecessors(i)
    previous = {p: 1.0 / len(pk) for p in sorted(pk)}
    unmet = sorted(p for p in pk if p not in observed)
    missing = {m: 1.0 / len(unmet) for m in unmet}

    seen = observed | {i}
    raw = {f: 1.0 / (len(graph.successors(i)) + len(graph.predecessors(f) - seen))
           for f in sorted(graph.successors(i))}
    total = sum(raw.values())
    future = {f: v / total for f, v in raw.items()} if total else {}
    return {
        "previous": previous,
        "mistake": sum((previous[p] for p in unmet), 0.0),
        "missing": missing,
        "future": future,
    }


def binary_optionality(query: ReasonerQuery, graph: BinaryTaskGraph):
    raise UnsupportedOperation("optionality needs edge weights; a binary graph cannot score it")
