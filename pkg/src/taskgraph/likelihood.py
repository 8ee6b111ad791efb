"""Sequence likelihood under a weighted task graph and the TGML loss.

Conventions: ``Z[i, j]`` is the weight of edge ``i -> j``, i.e. key-step ``j``
is a pre-condition of key-step ``i``.  Row 0 (START), the diagonal and the
last column (END) are structurally zero.
"""
import math
from dataclasses import dataclass
from typing import Collection, Iterable

import numpy as np

from .exceptions import (ContractViolation, DegenerateStateError, InvalidInputError,
                         StructuralError)
from .vocab import KeyStepSequence, SequenceSet

LOG_CLAMP = 1e-12
ROW_SUM_TOL = 1e-9


def structural_mask(size: int) -> np.ndarray:
    """Boolean matrix marking cells that can never carry an edge."""
    if size < 3:
        raise InvalidInputError("need at least one key-step besides START and END")
    mask = np.eye(size, dtype=bool)
    mask[0, :] = True
    mask[:, size - 1] = True
    return mask


def check_adjacency(Z, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Validate a weighted adjacency matrix and return it as a float array."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InvalidInputError(f"adjacency must be square, got shape {Z.shape}")
    if not np.all(np.isfinite(Z)) or Z.min() < 0 or Z.max() > 1:
        raise InvalidInputError("adjacency entries must lie in [0, 1]")
    mask = structural_mask(Z.shape[0])
    if np.any(Z[mask] != 0):
        raise InvalidInputError("masked cells (diagonal, START row, END column) must be 0")
    sums = Z[1:].sum(axis=1)
    if np.any(np.abs(sums - 1) > tol):
        bad = int(np.argmax(np.abs(sums - 1))) + 1
        raise InvalidInputError(f"row {bad} sums to {sums[bad - 1]!r}, expected 1")
    return Z


def _observed_vector(observed: Collection[int], size: int) -> np.ndarray:
    vec = np.zeros(size, dtype=bool)
    vec[list(observed)] = True
    return vec


def feasibility(i: int, observed: Collection[int], Z) -> float:
    """Total weight of edges from ``i`` to observed key-steps."""
    if i in observed:
        raise ContractViolation(f"key-step {i} is already observed")
    Z = np.asarray(Z, dtype=np.float64)
    return float(Z[i, sorted(observed)].sum())


def next_step_prob(i: int, observed: Collection[int], Z) -> float:
    """Probability that ``i`` is the next key-step given the observed set."""
    if i in observed:
        raise ContractViolation(f"key-step {i} is already observed")
    Z = np.asarray(Z, dtype=np.float64)
    obs = _observed_vector(observed, Z.shape[0])
    feas = Z[~obs][:, obs].sum(axis=1)
    denom = feas.sum()
    if denom <= 0:
        raise DegenerateStateError(f"no unobserved key-step is feasible after observing {sorted(observed)}")
    return float(Z[i, obs].sum() / denom)


def unweighted_next_prob(i: int, observed: Collection[int], Zbar) -> float:
    """Counting version of :func:`next_step_prob` for a binary graph.

    A key-step is a possible case when none of its pre-conditions is still
    unobserved.
    """
    if i in observed:
        raise ContractViolation(f"key-step {i} is already observed")
    Zbar = np.asarray(Zbar) != 0
    obs = _observed_vector(observed, Zbar.shape[0])
    ready = ~Zbar[:, ~obs].any(axis=1)
    possible = int(ready[~obs].sum())
    if possible == 0:
        raise DegenerateStateError(f"no key-step has all pre-conditions met after {sorted(observed)}")
    return float(ready[i]) / possible


def sequence_log_likelihood(seq: KeyStepSequence | Iterable[int], Z) -> float:
    """Log-probability of a sequence; START is certain so scoring begins at position 1.

    Returns ``-inf`` when some step has zero feasibility.
    """
    steps = tuple(seq)
    Z = np.asarray(Z, dtype=np.float64)
    if len(set(steps)) != len(steps):
        raise InvalidInputError(f"sequence has repetitions: {steps}")
    obs = np.zeros(Z.shape[0], dtype=bool)
    obs[steps[0]] = True
    total = 0.0
    for t, y in enumerate(steps[1:], start=1):
        feas = Z[:, obs].sum(axis=1)
        denom = feas[~obs].sum()
        if denom <= 0:
            raise DegenerateStateError(
                f"no feasible key-step at position {t} of {steps}", position=t)
        num = feas[y]
        total += math.log(num / denom) if num > 0 else -math.inf
        obs[y] = True
    return total


def sequence_likelihood(seq, Z) -> float:
    return math.exp(sequence_log_likelihood(seq, Z))


@dataclass(frozen=True)
class StepBatch:
    """Every scored position of a sequence set, stacked.

    ``observed[t]`` is the indicator of key-steps seen before step ``t``,
    ``current[t]`` the key-step emitted at ``t`` and ``owner[t]`` the index of
    the sequence it belongs to.
    """

    observed: np.ndarray
    current: np.ndarray
    owner: np.ndarray
    n_sequences: int
    size: int

    @classmethod
    def from_sequences(cls, seqs: SequenceSet | Iterable[KeyStepSequence], size: int | None = None):
        seqs = list(seqs)
        if not seqs:
            raise InvalidInputError("sequence set is empty")
        if size is None:
            size = seqs[0].end + 1
        rows, current, owner = [], [], []
        for d, seq in enumerate(seqs):
            obs = np.zeros(size, dtype=bool)
            obs[seq[0]] = True
            for y in seq[1:]:
                rows.append(obs.copy())
                current.append(y)
                owner.append(d)
                obs[y] = True
        return cls(np.array(rows, dtype=np.float64).reshape(-1, size),
                   np.array(current, dtype=np.intp), np.array(owner, dtype=np.intp),
                   len(seqs), size)


def _as_batch(seqs, size) -> StepBatch:
    if isinstance(seqs, StepBatch):
        return seqs
    return StepBatch.from_sequences(seqs, size)


def _loss_terms(batch: StepBatch, Z: np.ndarray):
    O = batch.observed
    pos = np.einsum("tj,tj->t", Z[batch.current], O)
    neg = np.einsum("tj,tj->t", (1.0 - O) @ Z, O)
    return pos, neg


def tgml_loss(seqs, Z, beta: float) -> float:
    """Negative log-likelihood with a beta-weighted contrastive denominator.

    Both inner sums are clamped below at ``LOG_CLAMP`` before the logarithm.
    """
    if beta <= 0:
        raise InvalidInputError("beta must be positive")
    Z = np.asarray(Z, dtype=np.float64)
    batch = _as_batch(seqs, Z.shape[0])
    pos, neg = _loss_terms(batch, Z)
    return float(-(np.log(np.maximum(pos, LOG_CLAMP)).sum()
                   - beta * np.log(np.maximum(neg, LOG_CLAMP)).sum()))


def clamp_count(seqs, Z) -> int:
    """Number of inner sums that fell below the log clamp (diagnostic)."""
    Z = np.asarray(Z, dtype=np.float64)
    pos, neg = _loss_terms(_as_batch(seqs, Z.shape[0]), Z)
    return int((pos < LOG_CLAMP).sum() + (neg < LOG_CLAMP).sum())


def loss_gradient_wrt_adjacency(batch: StepBatch, Z: np.ndarray, beta: float):
    """Loss and d(loss)/dZ; clamped terms contribute no gradient."""
    pos, neg = _loss_terms(batch, Z)
    loss = -(np.log(np.maximum(pos, LOG_CLAMP)).sum()
             - beta * np.log(np.maximum(neg, LOG_CLAMP)).sum())
    O = batch.observed
    inv_pos = np.where(pos >= LOG_CLAMP, 1.0 / np.maximum(pos, LOG_CLAMP), 0.0)
    inv_neg = np.where(neg >= LOG_CLAMP, 1.0 / np.maximum(neg, LOG_CLAMP), 0.0)
    grad = beta * ((1.0 - O) * inv_neg[:, None]).T @ O
    np.add.at(grad, batch.current, -(O * inv_pos[:, None]))
    return float(loss), grad


def masked_softmax(A) -> np.ndarray:
    """Row softmax over unmasked cells; masked cells and the START row map to 0."""
    A = np.asarray(A, dtype=np.float64)
    mask = structural_mask(A.shape[0])
    if np.any(mask[1:].all(axis=1)):
        raise StructuralError("a non-START row has no unmasked cell")
    scores = np.where(mask, -np.inf, A)
    scores[0] = 0.0
    top = scores.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise StructuralError("every unmasked score in a row is -inf or the matrix holds inf/nan")
    scores = scores - top
    Z = np.exp(scores)
    Z[mask] = 0.0
    Z[0] = 0.0
    Z[1:] /= Z[1:].sum(axis=1, keepdims=True)
    return Z


def masked_softmax_backward(Z: np.ndarray, grad_Z: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Chain rule through a row softmax; masked cells receive zero gradient."""
    inner = (grad_Z * Z).sum(axis=1, keepdims=True)
    grad_A = Z * (grad_Z - inner)
    grad_A[mask] = 0.0
    return grad_A


def tgml_gradient(seqs, A, beta: float) -> np.ndarray:
    """Gradient of the TGML loss with respect to the raw score matrix ``A``.

    ``A`` may carry ``-inf`` or any value in masked cells; they are ignored.
    """
    A = np.asarray(A, dtype=np.float64)
    mask = structural_mask(A.shape[0])
    Z = masked_softmax(A)
    _, grad_Z = loss_gradient_wrt_adjacency(_as_batch(seqs, A.shape[0]), Z, beta)
    return masked_softmax_backward(Z, grad_Z, mask)
