"""JSON persistence for trained models and run manifests."""
import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError
from .likelihood import check_adjacency
from .postprocess import BinaryTaskGraph, graph_document, graph_from_document
from .training import TrainedModel
from .vocab import KeyStepSequence, KeyStepVocabulary, SequenceSet, read_json

FORMAT_VERSION = 1


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def model_document(model: TrainedModel, provenance: dict | None = None) -> dict:
    """Everything a model file holds; contains no timestamps so reruns are byte-identical."""
    seqs = model.sequences
    vocab = model.vocabulary
    return {
        "format": FORMAT_VERSION,
        "procedure": seqs.procedure,
        "vocabulary": list(vocab.names),
        "adjacency": model.adjacency.tolist(),
        "graph": graph_document(model.graph),
        "stats": {
            "frequency": model.frequency.tolist(),
            "count_optional": model.count_optional.tolist(),
            "count_mandatory": model.count_mandatory.tolist(),
        },
        "sequences": [{"id": sid, "steps": list(seq.steps)} for sid, seq in zip(seqs.ids, seqs.sequences)],
        "meta": model.meta,
        "provenance": provenance or {},
    }


def save_model(model: TrainedModel, path, provenance: dict | None = None) -> None:
    atomic_write(path, dumps(model_document(model, provenance)))


def model_from_document(doc: dict) -> TrainedModel:
    try:
        vocab = KeyStepVocabulary(tuple(doc["vocabulary"]))
        Z = check_adjacency(np.array(doc["adjacency"], dtype=np.float64))
        graph = graph_from_document(doc["graph"])
        stats = doc["stats"]
        seqs = SequenceSet(
            vocab,
            tuple(KeyStepSequence(tuple(r["steps"])) for r in doc["sequences"]),
            tuple(str(r["id"]) for r in doc["sequences"]),
            doc.get("procedure", ""),
        )
        meta = doc.get("meta", {})
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed model file: missing or bad field {exc}") from None
    if graph.vocabulary != vocab:
        raise InvalidInputError("model graph and vocabulary disagree")
    if Z.shape[0] != vocab.size:
        raise InvalidInputError("adjacency size does not match the vocabulary")
    return TrainedModel(
        seqs, Z, graph,
        np.array(stats["frequency"], dtype=np.float64),
        np.array(stats["count_optional"], dtype=np.int64),
        np.array(stats["count_mandatory"], dtype=np.int64),
        meta,
    )


def load_model(path) -> TrainedModel:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise InvalidInputError(f"{path}: model file must be a JSON object")
    return model_from_document(doc)


def load_graph(path) -> BinaryTaskGraph:
    """Read a graph JSON document, or the graph inside a model file."""
    doc = read_json(path)
    if isinstance(doc, dict) and "graph" in doc and "adjacency" in doc:
        doc = doc["graph"]
    return graph_from_document(doc)
