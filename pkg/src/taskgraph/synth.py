"""Random ground-truth task graphs and sequences sampled from them."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import CapacityError, InvalidInputError
from .postprocess import BinaryTaskGraph, generic_vocabulary, transitive_reduce, wire_orphans
from .vocab import KeyStepSequence, KeyStepVocabulary, SequenceSet

MAX_EXTENSION_NODES = 12


@dataclass(frozen=True)
class GroundTruthDAG:
    graph: BinaryTaskGraph
    seed: int | None = None
    density: float | None = None

    @property
    def vocabulary(self) -> KeyStepVocabulary:
        return self.graph.vocabulary

    @property
    def edges(self) -> frozenset:
        return self.graph.edges

    @property
    def n(self) -> int:
        return self.graph.vocabulary.n


def random_dag(n: int, density: float, seed: int,
               vocabulary: KeyStepVocabulary | None = None) -> GroundTruthDAG:
    """Random transitively reduced, orphan-wired DAG over ``n`` key-steps."""
    if n < 2:
        raise InvalidInputError("random_dag needs n >= 2")
    if not 0 <= density <= 1:
        raise InvalidInputError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(np.arange(1, n + 1))
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            # later key-step depends on earlier one
            if rng.random() < density:
                edges.add((int(order[b]), int(order[a])))
    size = n + 2
    edges = transitive_reduce(edges, size)
    edges = wire_orphans(edges, size)
    edges = transitive_reduce(edges, size)
    vocabulary = vocabulary or generic_vocabulary(n)
    return GroundTruthDAG(BinaryTaskGraph(vocabulary, frozenset(edges)), seed, density)


def chain_dag(n: int, vocabulary: KeyStepVocabulary | None = None) -> GroundTruthDAG:
    edges = {(i, i - 1) for i in range(1, n + 2)}
    return GroundTruthDAG(BinaryTaskGraph(vocabulary or generic_vocabulary(n), frozenset(edges)))


def _interior_preconditions(graph: BinaryTaskGraph) -> list[int]:
    """Bitmask of interior pre-conditions for each node index."""
    pre = [0] * graph.size
    for i, j in graph.edges:
        if 1 <= j <= graph.vocabulary.n:
            pre[i] |= 1 << j
    return pre


def sample_topological_sorts(dag: GroundTruthDAG | BinaryTaskGraph, k: int, seed: int) -> SequenceSet:
    """Draw ``k`` linear extensions by repeatedly picking uniformly among available key-steps.

    This is not uniform over linear extensions.
    """
    graph = dag.graph if isinstance(dag, GroundTruthDAG) else dag
    if k < 1:
        raise InvalidInputError("k must be positive")
    n = graph.vocabulary.n
    pre = _interior_preconditions(graph)
    rng = np.random.default_rng(seed)
    seqs = []
    for _ in range(k):
        done = 0
        order = []
        remaining = list(range(1, n + 1))
        while remaining:
            ready = [v for v in remaining if pre[v] & ~done == 0]
            if not ready:
                raise InvalidInputError("graph has a cycle among key-steps")
            v = ready[int(rng.integers(len(ready)))]
            order.append(v)
            remaining.remove(v)
            done |= 1 << v
        seqs.append(KeyStepSequence.from_interior(order, n))
    return SequenceSet(graph.vocabulary, tuple(seqs))


def count_linear_extensions(dag: GroundTruthDAG | BinaryTaskGraph) -> int:
    graph = dag.graph if isinstance(dag, GroundTruthDAG) else dag
    n = graph.vocabulary.n
    if n > MAX_EXTENSION_NODES:
        raise CapacityError(f"counting extensions is limited to {MAX_EXTENSION_NODES} key-steps, got {n}")
    pre = _interior_preconditions(graph)
    full = sum(1 << v for v in range(1, n + 1))

    @lru_cache(maxsize=None)
    def count(done: int) -> int:
        if done == full:
            return 1
        return sum(count(done | 1 << v) for v in range(1, n + 1)
                   if not done >> v & 1 and pre[v] & ~done == 0)

    return count(0)
