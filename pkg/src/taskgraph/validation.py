"""Input coercion for the estimator API."""
from typing import Iterable

from .exceptions import InvalidInputError
from .vocab import (DEFAULT_EXPAND_CAP, KEEP_FIRST, KeyStepSequence, KeyStepVocabulary, RawSequence,
                    SequenceSet, build_sequence_set)


def infer_vocabulary(X) -> KeyStepVocabulary:
    """Vocabulary from label sequences, in order of first appearance."""
    labels = {}
    for seq in X:
        for step in seq:
            if not isinstance(step, str):
                raise InvalidInputError("cannot infer a taxonomy from integer sequences; pass taxonomy=")
            labels.setdefault(step, None)
    if not labels:
        raise InvalidInputError("no key-steps found")
    return KeyStepVocabulary(tuple(labels))


def to_raw_sequences(X: Iterable, vocabulary: KeyStepVocabulary) -> list[RawSequence]:
    """Accept sequences of labels or of indices in ``1..n``; START/END markers are stripped."""
    if isinstance(X, (str, bytes)):
        raise InvalidInputError("expected a collection of sequences, got a string")
    raws = []
    for k, seq in enumerate(X):
        if isinstance(seq, KeyStepSequence):
            steps = seq.interior
        else:
            if isinstance(seq, (str, bytes)):
                raise InvalidInputError(f"sequence {k} is a string; expected a list of key-steps")
            steps = []
            for step in seq:
                idx = vocabulary.index(step) if isinstance(step, str) else int(step)
                if idx in (0, vocabulary.end):
                    continue
                if not 1 <= idx <= vocabulary.n:
                    raise InvalidInputError(f"sequence {k}: index {idx} outside 1..{vocabulary.n}")
                steps.append(idx)
        if not steps:
            raise InvalidInputError(f"sequence {k} has no key-steps")
        raws.append(RawSequence(tuple(steps), str(k)))
    if not raws:
        raise InvalidInputError("no sequences given")
    return raws


def check_sequences(X, vocabulary: KeyStepVocabulary, strategy: str = KEEP_FIRST,
                    cap: int = DEFAULT_EXPAND_CAP) -> SequenceSet:
    if isinstance(X, SequenceSet):
        if X.vocabulary != vocabulary:
            raise InvalidInputError("sequence set uses a different vocabulary")
        return X
    return build_sequence_set(vocabulary, to_raw_sequences(X, vocabulary), strategy, cap)
