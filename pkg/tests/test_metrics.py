import pytest
from hypothesis import given, strategies as st

from conftest import A, B, E, S
from taskgraph.exceptions import ContractViolation
from taskgraph.metrics import edge_prf, mean_metrics, prf
from taskgraph.postprocess import BinaryTaskGraph, generic_vocabulary
from taskgraph.vocab import KeyStepVocabulary


def test_identical(chain_graph):
    m = edge_prf(chain_graph, chain_graph)
    assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)


def test_two_thirds_fixture(ab_vocab, chain_graph):
    pred = BinaryTaskGraph(ab_vocab, frozenset({(A, S), (B, S), (E, B)}))
    m = edge_prf(pred, chain_graph)
    assert (m.tp, m.fp, m.fn) == (2, 1, 1)
    assert m.precision == m.recall == pytest.approx(2 / 3)
    assert m.f1 == pytest.approx(2 / 3)


def test_empty_prediction(ab_vocab, chain_graph):
    m = edge_prf(BinaryTaskGraph(ab_vocab, frozenset()), chain_graph)
    assert (m.precision, m.recall, m.f1) == (0.0, 0.0, 0.0)


def test_zero_over_zero():
    assert prf(0, 0, 0) == (0.0, 0.0, 0.0)


def test_vocabulary_mismatch_names_both(chain_graph):
    other = BinaryTaskGraph(KeyStepVocabulary(("A", "C")), frozenset())
    with pytest.raises(ContractViolation, match="'B'.*'C'"):
        edge_prf(chain_graph, other)


def test_mean(ab_vocab, chain_graph):
    empty = BinaryTaskGraph(ab_vocab, frozenset())
    mean = mean_metrics([edge_prf(chain_graph, chain_graph), edge_prf(empty, chain_graph)])
    assert mean["f1"] == 0.5 and mean["tp"] == 1.5
    assert mean_metrics([]) == {}


_VOCAB = generic_vocabulary(4)
_CELLS = [(i, j) for i in range(1, 6) for j in range(0, 5) if i != j]
edge_sets = st.frozensets(st.sampled_from(_CELLS))


@given(edge_sets, edge_sets)
def test_symmetry_and_bounds(x, y):
    a, b = BinaryTaskGraph(_VOCAB, x), BinaryTaskGraph(_VOCAB, y)
    ab, ba = edge_prf(a, b), edge_prf(b, a)
    assert ab.tp == ba.tp
    assert ab.precision == ba.recall
    assert 0 <= ab.f1 <= 1
    if ab.precision > 0 and ab.recall > 0:
        lo, hi = sorted((ab.precision, ab.recall))
        assert lo - 1e-12 <= ab.f1 <= hi + 1e-12
