"""Direct optimisation of the edge score matrix."""
import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .exceptions import InvalidInputError, TrainingError
from .likelihood import (StepBatch, loss_gradient_wrt_adjacency, masked_softmax,
                         masked_softmax_backward, structural_mask)
from .postprocess import BinaryTaskGraph, binarize_matrix, postprocess
from .vocab import SequenceSet

log = logging.getLogger(__name__)

BETA_COMPLETE = 0.005
BETA_INCOMPLETE = 0.50


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    max_epochs: int = 1000
    beta: float | None = None  # None: pick with default_beta()
    sa_stop_threshold: float = 0.95
    sa_patience: int = 25
    seed: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise InvalidInputError("max_epochs must be at least 1")
        if self.beta is not None and not 0 < self.beta <= 1:
            raise InvalidInputError("beta must lie in (0, 1]")
        if not 0 < self.sa_stop_threshold <= 1:
            raise InvalidInputError("sa_stop_threshold must lie in (0, 1]")
        if self.sa_patience < 0:
            raise InvalidInputError("sa_patience must be non-negative")
        if self.init_scale < 0:
            raise InvalidInputError("init_scale must be non-negative")

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise InvalidInputError(f"unknown config fields: {unknown}")
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "TrainConfig":
        from .vocab import read_json

        doc = read_json(path)
        if not isinstance(doc, dict):
            raise InvalidInputError(f"{path}: config must be a JSON object")
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return asdict(self)


class Adam:
    """Adam with bias-corrected moment estimates, updating a flat parameter vector in place."""

    def __init__(self, lr=0.1, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def default_beta(seqs: SequenceSet) -> float:
    """Small contrastive weight when some sequence covers the whole taxonomy, large otherwise."""
    n = seqs.vocabulary.n
    if any(len(seq.interior) == n for seq in seqs):
        return BETA_COMPLETE
    return BETA_INCOMPLETE


def case_score(prefix_size: int, pred_size: int, overlap: int) -> float:
    """Per-position compatibility between a sequence prefix and predicted predecessors."""
    if prefix_size == 0:
        # predictions for a step with nothing before it get the maximal penalty
        return 1.0 if pred_size == 0 else -1.0
    if pred_size > 0:
        return overlap / pred_size
    return 0.0


def _sequence_accuracy(batch: StepBatch, B: np.ndarray) -> float:
    pred = B[batch.current]
    O = batch.observed > 0
    pred_size = pred.sum(axis=1)
    overlap = (pred & O).sum(axis=1)
    # every prefix contains START, so only the ratio and empty-prediction cases occur
    c = np.where(pred_size > 0, overlap / np.maximum(pred_size, 1), 0.0)
    per_seq = (np.bincount(batch.owner, weights=c, minlength=batch.n_sequences)
               / np.bincount(batch.owner, minlength=batch.n_sequences))
    return float(per_seq.mean())


def sequence_accuracy(seqs, graph) -> float:
    """Mean over sequences of the mean positional compatibility with ``graph``.

    ``graph`` is a :class:`BinaryTaskGraph` or a boolean adjacency matrix.
    """
    B = graph.matrix() if isinstance(graph, BinaryTaskGraph) else np.asarray(graph, dtype=bool)
    batch = seqs if isinstance(seqs, StepBatch) else StepBatch.from_sequences(seqs, B.shape[0])
    return _sequence_accuracy(batch, B)


@dataclass
class TrainingResult:
    scores: np.ndarray
    adjacency: np.ndarray
    epochs_run: int
    best_epoch: int
    sa: float
    loss: float
    initial_loss: float
    beta: float
    history: list = field(default_factory=list)


def initial_scores(size: int, seed: int, init_scale: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 1.0, size=(size, size)) * init_scale
    A[structural_mask(size)] = -np.inf
    return A


def optimize_scores(seqs: SequenceSet, config: TrainConfig) -> TrainingResult:
    """Batch Adam on the score matrix, keeping the best-SA snapshot (ties go to the later epoch)."""
    size = seqs.vocabulary.size
    beta = config.beta if config.beta is not None else default_beta(seqs)
    batch = StepBatch.from_sequences(seqs, size)
    mask = structural_mask(size)
    free = ~mask

    A = initial_scores(size, config.seed, config.init_scale)
    params = A[free].copy()
    adam = Adam(lr=config.learning_rate)

    best = None
    best_sa = -np.inf
    stale = 0
    initial_loss = None
    history = []
    epoch = 0
    for epoch in range(config.max_epochs):
        A[free] = params
        Z = masked_softmax(A)
        loss, grad_Z = loss_gradient_wrt_adjacency(batch, Z, beta)
        grad_A = masked_softmax_backward(Z, grad_Z, mask)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad_A)):
            cells = [tuple(map(int, c)) for c in np.argwhere(~np.isfinite(grad_A) & free)]
            raise TrainingError(f"non-finite loss {loss} at epoch {epoch}; offending cells {cells[:10]}",
                                epoch=epoch, cells=cells)
        if initial_loss is None:
            initial_loss = loss

        sa = _sequence_accuracy(batch, binarize_matrix(Z))
        history.append((loss, sa))
        if sa > best_sa:
            stale = 0
        else:
            stale += 1
        if sa >= best_sa:
            best_sa = sa
            best = (epoch, A.copy(), Z, loss)
        if best_sa >= config.sa_stop_threshold and stale >= config.sa_patience:
            log.debug("early stop at epoch %d (best SA %.4f at epoch %d)", epoch, best_sa, best[0])
            break

        adam.step(params, grad_A[free])

    best_epoch, best_A, best_Z, best_loss = best
    return TrainingResult(best_A, best_Z, epoch + 1, best_epoch, float(best_sa), float(best_loss),
                          float(initial_loss), float(beta), history)


@dataclass
class TrainedModel:
    sequences: SequenceSet
    adjacency: np.ndarray  # weighted adjacency before post-processing
    graph: BinaryTaskGraph
    frequency: np.ndarray
    count_optional: np.ndarray
    count_mandatory: np.ndarray
    meta: dict

    @property
    def vocabulary(self):
        return self.sequences.vocabulary


def train_do(seqs: SequenceSet, config: TrainConfig | None = None) -> TrainedModel:
    from .reasoner import optionality_counts, step_frequency

    config = config or TrainConfig()
    result = optimize_scores(seqs, config)
    Z_hat = result.adjacency
    graph = postprocess(Z_hat, seqs.vocabulary)
    frequency = step_frequency(seqs)
    count_o, count_m = optionality_counts(seqs, Z_hat, frequency)
    effective = config.to_dict()
    effective["beta"] = result.beta
    meta = {
        "epochs_run": result.epochs_run,
        "best_epoch": result.best_epoch,
        "sa": result.sa,
        "loss": result.loss,
        "initial_loss": result.initial_loss,
        "config": effective,
    }
    return TrainedModel(seqs, Z_hat, graph, frequency, count_o, count_m, meta)
