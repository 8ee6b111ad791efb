import json
import warnings

import pytest
from hypothesis import given, strategies as st

from oracles import expand_by_subsets
from taskgraph.exceptions import DatasetError, InvalidInputError, TruncationWarning
from taskgraph.vocab import (KeyStepSequence, KeyStepVocabulary, RawSequence, SequenceSet,
                             canonicalize_keep_first, expand_nonrepetitive, load_dataset)

# letters map to indices A=1, B=2, ...
A, B, C, D = 1, 2, 3, 4
N = 4
END = N + 1


def interior(seq):
    return seq.steps[1:-1]


class TestVocabulary:
    def test_indices(self):
        vocab = KeyStepVocabulary(("crack egg", "mix"))
        assert vocab.n == 2 and vocab.size == 4 and vocab.end == 3
        assert vocab.index("mix") == 2
        assert vocab.label(0) == "START" and vocab.label(3) == "END"
        assert vocab.labels() == ["START", "crack egg", "mix", "END"]

    @pytest.mark.parametrize("names", [(), ("a", "a"), ("a", ""), ("START",)])
    def test_rejects_bad_labels(self, names):
        with pytest.raises(InvalidInputError):
            KeyStepVocabulary(names)

    def test_unknown_label(self):
        with pytest.raises(InvalidInputError, match="unknown"):
            KeyStepVocabulary(("a",)).index("b")


def test_key_step_sequence_invariants():
    KeyStepSequence((0, 2, 1, 3))
    for bad in [(1, 2, 3), (0, 1, 1, 3), (0, 3, 3), (0, 4, 3)]:
        with pytest.raises(InvalidInputError):
            KeyStepSequence(bad)


def test_sequence_set_rejects_foreign_vocabulary():
    vocab = KeyStepVocabulary(("a", "b"))
    with pytest.raises(InvalidInputError):
        SequenceSet(vocab, (KeyStepSequence((0, 1, 2, 3, 4)),))
    with pytest.raises(InvalidInputError):
        SequenceSet(vocab, ())


@pytest.mark.parametrize("raw, expected", [
    ((B, A, C, A, D), (B, A, C, D)),
    ((A, B, C), (A, B, C)),
    ((A, A, A), (A,)),
])
def test_keep_first(raw, expected):
    seq = canonicalize_keep_first(raw, N)
    assert seq.steps == (0, *expected, END)


def test_keep_first_rejects_empty():
    with pytest.raises(InvalidInputError):
        canonicalize_keep_first(RawSequence(()), N)


def test_expand_worked_example():
    out = {interior(s) for s in expand_nonrepetitive((B, A, C, A, D), N)}
    assert out == {(B, A, C, D), (B, C, A, D)}


def test_expand_no_repetition():
    assert [s.steps for s in expand_nonrepetitive((A, B, C), N)] == [(0, A, B, C, END)]


def test_expand_abab_matches_enumeration():
    out = [interior(s) for s in expand_nonrepetitive((A, B, A, B), N, cap=8)]
    assert len(out) == len(set(out))
    assert set(out) == expand_by_subsets((A, B, A, B)) == {(A, B), (B, A)}


def test_expand_cap_truncates_with_warning():
    raw = (A, B, A, B, A, B, C, C)  # 3 * 3 * 2 = 18 combinations
    with pytest.warns(TruncationWarning):
        out = expand_nonrepetitive(raw, N, cap=4)
    assert 1 <= len(out) <= 4
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        expand_nonrepetitive(raw, N, cap=18)


raw_sequences = st.lists(st.integers(1, N), min_size=1, max_size=9)


@given(raw_sequences)
def test_outputs_are_canonical(raw):
    outputs = [canonicalize_keep_first(raw, N), *expand_nonrepetitive(raw, N, cap=10_000)]
    for seq in outputs:
        assert seq.steps[0] == 0 and seq.steps[-1] == END
        assert len(set(seq.steps)) == len(seq.steps)


@given(raw_sequences)
def test_keep_first_idempotent(raw):
    once = canonicalize_keep_first(raw, N)
    assert canonicalize_keep_first(interior(once), N) == once


@given(raw_sequences)
def test_expand_contains_keep_first_and_matches_enumeration(raw):
    expanded = {interior(s) for s in expand_nonrepetitive(raw, N, cap=10_000)}
    assert interior(canonicalize_keep_first(raw, N)) in expanded
    assert expanded == expand_by_subsets(raw)


class TestLoadDataset:
    def write(self, tmp_path, doc, name="data.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc, encoding="utf-8")
        return path

    def test_single_record(self, tmp_path):
        path = self.write(tmp_path, {"procedure": "p", "taxonomy": ["A", "B"],
                                     "sequences": [{"id": "r1", "steps": ["A", "B"]}]})
        seqs = load_dataset(path)
        assert [s.steps for s in seqs] == [(0, 1, 2, 3)]
        assert seqs.ids == ("r1",) and seqs.procedure == "p"

    def test_unknown_label_is_named(self, tmp_path):
        path = self.write(tmp_path, {"taxonomy": ["A", "B"], "sequences": [{"id": "r7", "steps": ["A", "Z"]}]})
        with pytest.raises(DatasetError, match=r"r7.*'Z'"):
            load_dataset(path)

    def test_keep_first_strategy(self, tmp_path):
        path = self.write(tmp_path, {"taxonomy": ["A", "B", "C", "D"],
                                     "sequences": [{"id": "x", "steps": list("BACAD")}]})
        assert load_dataset(path).sequences[0].steps == (0, B, A, C, D, END)
        expanded = load_dataset(path, strategy="expand")
        assert {interior(s) for s in expanded} == {(B, A, C, D), (B, C, A, D)}

    def test_parse_error_reports_line(self, tmp_path):
        path = self.write(tmp_path, '{"taxonomy": ["A"],\n "sequences": [\n oops]}')
        with pytest.raises(DatasetError, match="line 3"):
            load_dataset(path)

    def test_case_sensitive_labels(self, tmp_path):
        path = self.write(tmp_path, {"taxonomy": ["A"], "sequences": [{"id": "r", "steps": ["a"]}]})
        with pytest.raises(DatasetError):
            load_dataset(path)
