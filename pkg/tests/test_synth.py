from collections import Counter
from math import factorial

import pytest

import oracles
from taskgraph.detection import replay
from taskgraph.exceptions import CapacityError, InvalidInputError
from taskgraph.postprocess import (BinaryTaskGraph, find_cycle, generic_vocabulary,
                                   transitive_reduce, wire_orphans)
from taskgraph.synth import chain_dag, count_linear_extensions, random_dag, sample_topological_sorts


def _graph(n, edges):
    return BinaryTaskGraph(generic_vocabulary(n), frozenset(edges))


class TestRandomDag:
    @pytest.mark.parametrize("seed", range(20))
    def test_invariants(self, seed):
        dag = random_dag(2 + seed % 9, (seed % 10) / 10, seed)
        size = dag.n + 2
        assert find_cycle(dag.edges, size) is None
        assert transitive_reduce(dag.edges, size) == set(dag.edges)
        assert wire_orphans(dag.edges, size) == set(dag.edges)

    def test_seeded(self):
        assert random_dag(8, 0.3, 4).edges == random_dag(8, 0.3, 4).edges
        assert random_dag(8, 0.3, 4).edges != random_dag(8, 0.3, 5).edges

    def test_zero_density(self):
        dag = random_dag(4, 0.0, 0)
        assert dag.edges == {(i, 0) for i in range(1, 5)} | {(5, i) for i in range(1, 5)}

    def test_two_nodes_full_density(self):
        for seed in range(5):
            dag = random_dag(2, 1.0, seed)
            assert len(dag.edges) == 3

    def test_rejects_tiny(self):
        with pytest.raises(InvalidInputError):
            random_dag(1, 0.5, 0)


class TestExtensions:
    def test_chain(self):
        assert count_linear_extensions(chain_dag(4)) == 1

    def test_antichain(self):
        assert count_linear_extensions(random_dag(3, 0.0, 0)) == 6

    def test_diamond(self):
        # K1, K2 after START, K3 after both
        g = _graph(3, {(1, 0), (2, 0), (3, 1), (3, 2), (4, 3)})
        assert count_linear_extensions(g) == 2

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_enumeration(self, seed):
        dag = random_dag(3 + seed % 5, 0.35, seed)
        pre = {i: sorted(dag.graph.predecessors(i)) for i in range(1, dag.n + 1)}
        assert count_linear_extensions(dag) == len(oracles.linear_extensions(dag.n, pre))

    def test_guard(self):
        with pytest.raises(CapacityError):
            count_linear_extensions(random_dag(13, 0.0, 0))

    def test_twelve_ok(self):
        assert count_linear_extensions(random_dag(12, 1.0, 0)) == 1
        assert count_linear_extensions(random_dag(8, 0.0, 0)) == factorial(8)


class TestSampler:
    def test_chain_copies(self):
        seqs = sample_topological_sorts(chain_dag(4), 5, 0)
        assert {s.steps for s in seqs} == {(0, 1, 2, 3, 4, 5)}
        assert len(seqs) == 5

    @pytest.mark.parametrize("seed", range(8))
    def test_valid_extensions(self, seed):
        dag = random_dag(6, 0.4, seed)
        pre = {i: sorted(dag.graph.predecessors(i)) for i in range(1, 7)}
        valid = set(oracles.linear_extensions(6, pre))
        for seq in sample_topological_sorts(dag, 30, seed):
            assert seq.interior in valid
            assert not any(v.is_mistake for v in replay(seq.steps, dag.graph))

    def test_seeded(self):
        dag = random_dag(6, 0.3, 1)
        assert sample_topological_sorts(dag, 10, 3) == sample_topological_sorts(dag, 10, 3)

    def test_rejects_k_zero(self):
        with pytest.raises(InvalidInputError):
            sample_topological_sorts(chain_dag(2), 0, 0)

    def test_fork_frequencies(self):
        # K1, K2 free; K3 needs K1.  Sequential choice gives P(2 1 3) = 1/4, the others 1/4 or 1/2.
        g = _graph(3, {(1, 0), (2, 0), (3, 1), (4, 2), (4, 3)})
        assert count_linear_extensions(g) == 3
        k = 4000
        counts = Counter(s.interior for s in sample_topological_sorts(g, k, 0))
        expected = {(1, 2, 3): 0.25, (1, 3, 2): 0.25, (2, 1, 3): 0.5}
        assert set(counts) == set(expected)
        chi2 = sum((counts[p] - k * q) ** 2 / (k * q) for p, q in expected.items())
        # 2 degrees of freedom, 0.999 quantile
        assert chi2 < 13.82
