"""Key-step vocabulary and canonical training sequences.

Index 0 is the START placeholder, indices ``1..n`` are the user key-steps and
index ``n + 1`` is END.  Canonical sequences are START-prefixed, END-suffixed
and free of repetitions.
"""
import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import DatasetError, InvalidInputError, TruncationWarning

START_LABEL = "START"
END_LABEL = "END"

KEEP_FIRST = "keep-first"
EXPAND = "expand"
STRATEGIES = (KEEP_FIRST, EXPAND)

DEFAULT_EXPAND_CAP = 64


@dataclass(frozen=True)
class KeyStepVocabulary:
    names: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(self.names)
        if not names:
            raise InvalidInputError("vocabulary needs at least one key-step")
        for name in names:
            if not isinstance(name, str) or not name:
                raise InvalidInputError(f"invalid key-step label {name!r}")
            if name in (START_LABEL, END_LABEL):
                raise InvalidInputError(f"label {name!r} is reserved")
        if len(set(names)) != len(names):
            dupes = sorted({x for x in names if names.count(x) > 1})
            raise InvalidInputError(f"duplicate key-step labels: {dupes}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", {name: i + 1 for i, name in enumerate(names)})

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def start(self) -> int:
        return 0

    @property
    def end(self) -> int:
        return len(self.names) + 1

    @property
    def size(self) -> int:
        return len(self.names) + 2

    def label(self, index: int) -> str:
        if index == 0:
            return START_LABEL
        if index == self.end:
            return END_LABEL
        if 1 <= index <= self.n:
            return self.names[index - 1]
        raise InvalidInputError(f"index {index} outside vocabulary of size {self.size}")

    def labels(self) -> list[str]:
        return [self.label(i) for i in range(self.size)]

    def index(self, label: str) -> int:
        if label == START_LABEL:
            return 0
        if label == END_LABEL:
            return self.end
        try:
            return self._index[label]
        except KeyError:
            raise InvalidInputError(f"unknown key-step label {label!r}") from None

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class RawSequence:
    """An observed demonstration, possibly with repeated key-steps."""

    steps: tuple[int, ...]
    source_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(int(s) for s in self.steps))

    def validate(self, n: int) -> None:
        if not self.steps:
            raise InvalidInputError(f"empty sequence {self.source_id!r}")
        bad = [s for s in self.steps if not 1 <= s <= n]
        if bad:
            raise InvalidInputError(
                f"sequence {self.source_id!r} has indices outside 1..{n}: {bad}")


@dataclass(frozen=True)
class KeyStepSequence:
    steps: tuple[int, ...]

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if len(steps) < 2 or steps[0] != 0:
            raise InvalidInputError(f"sequence must start with START (0): {steps}")
        end = steps[-1]
        if end < 1:
            raise InvalidInputError(f"sequence must end with END: {steps}")
        interior = steps[1:-1]
        if len(set(interior)) != len(interior):
            raise InvalidInputError(f"sequence has repeated key-steps: {steps}")
        if any(not 1 <= s < end for s in interior):
            raise InvalidInputError(f"interior indices must lie in 1..{end - 1}: {steps}")

    @property
    def end(self) -> int:
        return self.steps[-1]

    @property
    def interior(self) -> tuple[int, ...]:
        return self.steps[1:-1]

    @classmethod
    def from_interior(cls, interior: Iterable[int], n: int) -> "KeyStepSequence":
        return cls((0, *interior, n + 1))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, item):
        return self.steps[item]


@dataclass(frozen=True)
class SequenceSet:
    vocabulary: KeyStepVocabulary
    sequences: tuple[KeyStepSequence, ...]
    ids: tuple[str, ...] = ()
    procedure: str = ""

    def __post_init__(self):
        seqs = tuple(self.sequences)
        object.__setattr__(self, "sequences", seqs)
        if not seqs:
            raise InvalidInputError("sequence set is empty")
        end = self.vocabulary.end
        for seq in seqs:
            if seq.end != end:
                raise InvalidInputError(
                    f"sequence {seq.steps} does not match vocabulary of {self.vocabulary.n} key-steps")
        ids = tuple(self.ids) or tuple(str(i) for i in range(len(seqs)))
        if len(ids) != len(seqs):
            raise InvalidInputError("ids and sequences differ in length")
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __getitem__(self, item):
        return self.sequences[item]


def canonicalize_keep_first(raw: RawSequence | Sequence[int], n: int) -> KeyStepSequence:
    """Keep the first occurrence of every key-step, in original order."""
    raw = _as_raw(raw)
    raw.validate(n)
    kept = list(dict.fromkeys(raw.steps))
    return KeyStepSequence.from_interior(kept, n)


def expand_nonrepetitive(raw: RawSequence | Sequence[int], n: int,
                         cap: int = DEFAULT_EXPAND_CAP) -> list[KeyStepSequence]:
    """All repetition-free sequences obtained by keeping one occurrence per key-step.

    Combinations are enumerated with key-steps taken in order of first appearance
    and occurrence positions in increasing order.  When their number exceeds
    ``cap`` only the first ``cap`` combinations are used and a
    :class:`TruncationWarning` is emitted.
    """
    raw = _as_raw(raw)
    raw.validate(n)
    if cap < 1:
        raise InvalidInputError("cap must be a positive integer")
    positions: dict[int, list[int]] = {}
    for pos, step in enumerate(raw.steps):
        positions.setdefault(step, []).append(pos)

    total = 1
    for occ in positions.values():
        total *= len(occ)
    combos = itertools.product(*positions.values())
    if total > cap:
        warnings.warn(
            f"sequence {raw.source_id!r}: {total} occurrence combinations, keeping first {cap}",
            TruncationWarning, stacklevel=2)
        combos = itertools.islice(combos, cap)

    out = {}
    for choice in combos:
        kept = tuple(raw.steps[p] for p in sorted(choice))
        out.setdefault(kept, None)
    return [KeyStepSequence.from_interior(kept, n) for kept in out]


def _as_raw(raw) -> RawSequence:
    return raw if isinstance(raw, RawSequence) else RawSequence(tuple(raw))


def build_sequence_set(vocabulary: KeyStepVocabulary, raws: Iterable[RawSequence],
                       strategy: str = KEEP_FIRST, cap: int = DEFAULT_EXPAND_CAP,
                       procedure: str = "") -> SequenceSet:
    if strategy not in STRATEGIES:
        raise InvalidInputError(f"unknown repetition strategy {strategy!r}; expected one of {STRATEGIES}")
    seqs, ids = [], []
    for raw in raws:
        if strategy == KEEP_FIRST:
            seqs.append(canonicalize_keep_first(raw, vocabulary.n))
            ids.append(raw.source_id)
        else:
            expanded = expand_nonrepetitive(raw, vocabulary.n, cap)
            seqs.extend(expanded)
            ids.extend(raw.source_id if len(expanded) == 1 else f"{raw.source_id}#{k}"
                       for k in range(len(expanded)))
    return SequenceSet(vocabulary, tuple(seqs), tuple(ids), procedure)


def parse_dataset(doc: dict):
    """Validate a decoded dataset document; returns (vocabulary, raw sequences, procedure)."""
    if not isinstance(doc, dict):
        raise DatasetError("dataset must be a JSON object")
    for key in ("taxonomy", "sequences"):
        if key not in doc:
            raise DatasetError(f"dataset is missing field {key!r}")
    try:
        vocabulary = KeyStepVocabulary(tuple(doc["taxonomy"]))
    except InvalidInputError as exc:
        raise DatasetError(f"bad taxonomy: {exc}") from None
    if not isinstance(doc["sequences"], list):
        raise DatasetError("'sequences' must be a list")

    raws = []
    for k, record in enumerate(doc["sequences"]):
        if not isinstance(record, dict) or not isinstance(record.get("steps"), list):
            raise DatasetError(f"record {k}: expected an object with a 'steps' list")
        rid = str(record.get("id", k))
        if not record["steps"]:
            raise DatasetError(f"record {rid!r}: empty step list")
        steps = []
        for label in record["steps"]:
            if not isinstance(label, str) or label not in vocabulary:
                raise DatasetError(f"record {rid!r}: unknown key-step label {label!r}")
            steps.append(vocabulary.index(label))
        raws.append(RawSequence(tuple(steps), rid))
    return vocabulary, raws, str(doc.get("procedure", ""))


def read_json(path) -> object:
    """Read a UTF-8 JSON file, converting decode failures into DatasetError with a line number."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_dataset(path, strategy: str = KEEP_FIRST, cap: int = DEFAULT_EXPAND_CAP) -> SequenceSet:
    vocabulary, raws, procedure = parse_dataset(read_json(path))
    if not raws:
        raise DatasetError(f"{path}: no sequences")
    return build_sequence_set(vocabulary, raws, strategy, cap, procedure)


def dataset_document(sequences: SequenceSet) -> dict:
    """Inverse of :func:`load_dataset` for canonical sequences."""
    vocab = sequences.vocabulary
    return {
        "procedure": sequences.procedure,
        "taxonomy": list(vocab.names),
        "sequences": [
            {"id": sid, "steps": [vocab.label(i) for i in seq.interior]}
            for sid, seq in zip(sequences.ids, sequences.sequences)
        ],
    }
