import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from taskgraph import TaskGraphLearner
from taskgraph.exceptions import InvalidInputError
from taskgraph.synth import random_dag, sample_topological_sorts

SEQS = [["wash", "cut", "cook", "serve"], ["wash", "cut", "cook", "serve"],
        ["cut", "wash", "cook", "serve"]]


def test_params_round_trip():
    est = TaskGraphLearner(beta=0.5, random_state=3)
    params = est.get_params()
    assert params["beta"] == 0.5 and params["random_state"] == 3
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(max_epochs=10)
    assert est.max_epochs == 10


def test_fit_labels():
    est = TaskGraphLearner().fit(SEQS)
    assert est.vocabulary_.names == ("wash", "cut", "cook", "serve")
    assert est.adjacency_.shape == (6, 6)
    assert est.graph_.is_acyclic()
    assert est.n_epochs_ >= 1
    assert -1 <= est.sequence_accuracy_ <= 1
    # cook needs both preparation steps, serve needs cook
    cook, serve = est.vocabulary_.index("cook"), est.vocabulary_.index("serve")
    assert est.graph_.predecessors(serve) == {cook}


def test_predict_flags_mistakes():
    est = TaskGraphLearner().fit(SEQS)
    flags = est.predict([["wash", "cut", "cook", "serve"], ["serve", "wash"]])
    assert flags[0].tolist() == [False, False, False, False]
    assert flags[1][0]


def test_score_samples_prefers_training_orders():
    est = TaskGraphLearner().fit(SEQS)
    good, bad = est.score_samples([SEQS[0], ["serve", "cook", "cut", "wash"]])
    assert good > bad
    assert est.score(SEQS) == pytest.approx(np.mean(est.score_samples(SEQS)))


def test_integer_input_needs_taxonomy():
    with pytest.raises(InvalidInputError):
        TaskGraphLearner().fit([[1, 2, 3]])
    est = TaskGraphLearner(taxonomy=["a", "b", "c"]).fit([[1, 2, 3], [2, 1, 3]])
    assert est.vocabulary_.n == 3


def test_sequence_set_input():
    dag = random_dag(5, 0.3, 0)
    seqs = sample_topological_sorts(dag, 40, 0)
    est = TaskGraphLearner().fit(seqs)
    assert est.graph_.edges == dag.edges


def test_not_fitted():
    with pytest.raises(NotFittedError):
        TaskGraphLearner().predict(SEQS)


@pytest.mark.parametrize("bad", ["abc", [], [[]], [["wash", "fly"]]])
def test_bad_input(bad):
    est = TaskGraphLearner(taxonomy=["wash", "cut"])
    with pytest.raises(InvalidInputError):
        est.fit(bad)


def test_expand_strategy():
    est = TaskGraphLearner(repetition="expand").fit([["a", "b", "a", "c"], ["a", "b", "c"]])
    assert len(est.model_.sequences) == 3


def test_reproducible():
    a = TaskGraphLearner(random_state=1).fit(SEQS)
    b = TaskGraphLearner(random_state=1).fit(SEQS)
    assert np.array_equal(a.adjacency_, b.adjacency_)
