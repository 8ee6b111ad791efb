import numpy as np
import pytest

from taskgraph.postprocess import BinaryTaskGraph
from taskgraph.vocab import KeyStepVocabulary

S, A, B, E = 0, 1, 2, 3


@pytest.fixture
def toy_Z():
    """Two key-steps A, B; A needs START, B mostly needs A, END mostly needs B."""
    Z = np.zeros((4, 4))
    Z[A, S] = 1.0
    Z[B, S], Z[B, A] = 0.3, 0.7
    Z[E, A], Z[E, B] = 0.2, 0.8
    return Z


@pytest.fixture
def ab_vocab():
    return KeyStepVocabulary(("A", "B"))


@pytest.fixture
def chain_graph(ab_vocab):
    return BinaryTaskGraph(ab_vocab, frozenset({(A, S), (B, A), (E, B)}))


def random_adjacency(rng, size, sparsity=0.0):
    """Valid weighted adjacency with optional exact zeros."""
    from taskgraph.likelihood import structural_mask

    mask = structural_mask(size)
    Z = rng.random((size, size))
    if sparsity:
        Z[rng.random((size, size)) < sparsity] = 0.0
    Z[mask] = 0.0
    for i in range(1, size):
        if Z[i].sum() == 0:
            Z[i, 0 if i != 0 else 1] = 1.0
        Z[i] /= Z[i].sum()
    return Z
