import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .detection import replay
from .likelihood import sequence_log_likelihood
from .exceptions import DegenerateStateError
from .training import TrainConfig, train_do
from .validation import check_sequences, infer_vocabulary, to_raw_sequences
from .vocab import KEEP_FIRST, DEFAULT_EXPAND_CAP, KeyStepVocabulary, SequenceSet, canonicalize_keep_first


class TaskGraphLearner(BaseEstimator):
    """Learn a task graph from key-step sequences.

    Parameters
    ----------
    taxonomy : sequence of str, optional
        Key-step labels.  Inferred from the training sequences when omitted.
    learning_rate, max_epochs, beta, sa_stop_threshold, sa_patience, init_scale :
        Training settings, see :class:`taskgraph.training.TrainConfig`.
        ``beta=None`` picks 0.005 or 0.5 depending on whether some sequence
        covers the whole taxonomy.
    repetition : {"keep-first", "expand"}
        How repeated key-steps in the input are removed.
    expand_cap : int
        Maximum occurrence combinations per sequence for ``repetition="expand"``.
    random_state : int
        Seed for the score-matrix initialisation.

    Attributes
    ----------
    vocabulary_ : KeyStepVocabulary
    adjacency_ : ndarray of shape (n + 2, n + 2)
        Weighted adjacency before post-processing.
    graph_ : BinaryTaskGraph
        Post-processed binary task graph.
    model_ : TrainedModel
    n_epochs_ : int
    sequence_accuracy_ : float
    """

    def __init__(self, taxonomy=None, learning_rate=0.1, max_epochs=1000, beta=None,
                 sa_stop_threshold=0.95, sa_patience=25, init_scale=0.1,
                 repetition=KEEP_FIRST, expand_cap=DEFAULT_EXPAND_CAP, random_state=0):
        self.taxonomy = taxonomy
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.beta = beta
        self.sa_stop_threshold = sa_stop_threshold
        self.sa_patience = sa_patience
        self.init_scale = init_scale
        self.repetition = repetition
        self.expand_cap = expand_cap
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            beta=self.beta,
            sa_stop_threshold=self.sa_stop_threshold,
            sa_patience=self.sa_patience,
            seed=0 if self.random_state is None else int(self.random_state),
            init_scale=self.init_scale,
        )

    def fit(self, X, y=None):
        if isinstance(X, SequenceSet):
            vocabulary = X.vocabulary
        elif self.taxonomy is not None:
            vocabulary = KeyStepVocabulary(tuple(self.taxonomy))
        else:
            X = [list(seq) for seq in X]
            vocabulary = infer_vocabulary(X)
        seqs = check_sequences(X, vocabulary, self.repetition, self.expand_cap)

        self.model_ = train_do(seqs, self._config())
        self.vocabulary_ = vocabulary
        self.adjacency_ = self.model_.adjacency
        self.graph_ = self.model_.graph
        self.n_epochs_ = self.model_.meta["epochs_run"]
        self.sequence_accuracy_ = self.model_.meta["sa"]
        return self

    def predict(self, X):
        """Per-sequence boolean arrays flagging key-steps executed with unmet pre-conditions.

        Sequences may contain repetitions; they are replayed as given.
        """
        check_is_fitted(self, "model_")
        raws = to_raw_sequences(X, self.vocabulary_)
        return [np.array([v.is_mistake for v in replay(raw.steps, self.graph_)]) for raw in raws]

    def score_samples(self, X):
        """Log-likelihood of each sequence (repetitions dropped, first occurrence kept)."""
        check_is_fitted(self, "model_")
        raws = to_raw_sequences(X, self.vocabulary_)
        out = np.empty(len(raws))
        for k, raw in enumerate(raws):
            seq = canonicalize_keep_first(raw, self.vocabulary_.n)
            try:
                out[k] = sequence_log_likelihood(seq, self.adjacency_)
            except DegenerateStateError:
                out[k] = -np.inf
        return out

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))
