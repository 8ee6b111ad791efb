"""Turning a weighted adjacency matrix into a clean binary task graph."""
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation, InvalidInputError
from .likelihood import structural_mask
from .vocab import END_LABEL, START_LABEL, KeyStepVocabulary

Edge = tuple[int, int]


@dataclass(frozen=True)
class BinaryTaskGraph:
    """Unweighted task graph; edge ``(i, j)`` states that ``j`` is a pre-condition of ``i``."""

    vocabulary: KeyStepVocabulary
    edges: frozenset

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        object.__setattr__(self, "edges", edges)
        size = self.vocabulary.size
        mask = structural_mask(size)
        for i, j in edges:
            if not (0 <= i < size and 0 <= j < size):
                raise InvalidInputError(f"edge {(i, j)} outside vocabulary of size {size}")
            if mask[i, j]:
                raise InvalidInputError(f"edge {(i, j)} falls on a masked cell")

    @property
    def size(self) -> int:
        return self.vocabulary.size

    def predecessors(self, i: int) -> set[int]:
        """Direct pre-conditions of ``i``."""
        return {j for a, j in self.edges if a == i}

    def successors(self, i: int) -> set[int]:
        """Key-steps that list ``i`` as a direct pre-condition."""
        return {a for a, j in self.edges if j == i}

    def matrix(self) -> np.ndarray:
        B = np.zeros((self.size, self.size), dtype=bool)
        for i, j in self.edges:
            B[i, j] = True
        return B

    def is_acyclic(self) -> bool:
        return find_cycle(self.edges, self.size) is None

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def binarize_matrix(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    n = Z.shape[0] - 2
    if n < 1:
        raise InvalidInputError("need at least one key-step")
    return (Z >= 1.0 / n) & ~structural_mask(Z.shape[0])


def binarize(Z) -> set[Edge]:
    """Edges whose weight reaches ``1/n``."""
    return {(int(i), int(j)) for i, j in np.argwhere(binarize_matrix(Z))}


def _adjacency_lists(edges, size):
    adj = [[] for _ in range(size)]
    for i, j in sorted(edges):
        adj[i].append(j)
    return adj


def find_cycle(edges, size: int) -> list[Edge] | None:
    """Return the edges of one directed cycle found by depth-first search, or None."""
    adj = _adjacency_lists(edges, size)
    state = [0] * size  # 0 new, 1 on stack, 2 done
    for root in range(size):
        if state[root]:
            continue
        path = [root]
        iters = [iter(adj[root])]
        state[root] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                state[path.pop()] = 2
                iters.pop()
                continue
            if state[nxt] == 1:
                cyc = path[path.index(nxt):] + [nxt]
                return list(zip(cyc[:-1], cyc[1:]))
            if state[nxt] == 0:
                state[nxt] = 1
                path.append(nxt)
                iters.append(iter(adj[nxt]))
    return None


def break_cycles(edges, Z) -> set[Edge]:
    """Repeatedly drop the lowest-weight edge of a detected cycle until none remains.

    Ties on weight go to the lexicographically smallest edge.
    """
    Z = np.asarray(Z, dtype=np.float64)
    edges = set(edges)
    while True:
        cycle = find_cycle(edges, Z.shape[0])
        if cycle is None:
            return edges
        edges.remove(min(cycle, key=lambda e: (Z[e], e)))


def _closure(M: np.ndarray) -> np.ndarray:
    """Reachability by paths of length >= 1."""
    R = M.copy()
    Mi = M.astype(np.int64)
    while True:
        nxt = R | ((R.astype(np.int64) @ Mi) > 0)
        if np.array_equal(nxt, R):
            return R
        R = nxt


def reachability(edges, size: int) -> np.ndarray:
    M = np.zeros((size, size), dtype=bool)
    for i, j in edges:
        M[i, j] = True
    return _closure(M)


def transitive_reduce(edges, size: int) -> set[Edge]:
    """Drop every edge implied by a longer path; the input must be acyclic."""
    M = np.zeros((size, size), dtype=bool)
    for i, j in edges:
        M[i, j] = True
    R = _closure(M)
    if R.diagonal().any():
        raise ContractViolation("transitive reduction needs an acyclic graph")
    redundant = M & ((M.astype(np.int64) @ R.astype(np.int64)) > 0)
    return {(int(i), int(j)) for i, j in np.argwhere(M & ~redundant)}


def wire_orphans(edges, size: int) -> set[Edge]:
    """Give every key-step a pre-condition (START by default) and a dependent (END by default)."""
    end = size - 1
    edges = set(edges)
    has_pre = {i for i, _ in edges}
    has_dep = {j for _, j in edges}
    for i in range(1, end):
        if i not in has_pre:
            edges.add((i, 0))
        if i not in has_dep:
            edges.add((end, i))
    return edges


def postprocess(Z, vocabulary: KeyStepVocabulary | None = None) -> BinaryTaskGraph:
    """Threshold, break cycles, reduce, wire orphans.

    A final reduction pass removes the few edges that orphan wiring can make
    redundant, so the result is always transitively reduced.
    """
    Z = np.asarray(Z, dtype=np.float64)
    size = Z.shape[0]
    vocabulary = vocabulary or generic_vocabulary(size - 2)
    if vocabulary.size != size:
        raise InvalidInputError(f"vocabulary has {vocabulary.size} nodes, matrix has {size}")
    edges = binarize(Z)
    edges = break_cycles(edges, Z)
    edges = transitive_reduce(edges, size)
    edges = wire_orphans(edges, size)
    edges = transitive_reduce(edges, size)
    return BinaryTaskGraph(vocabulary, frozenset(edges))


def prune_start_pair(graph: BinaryTaskGraph) -> BinaryTaskGraph:
    """Drop the non-START pre-condition of key-steps with exactly two pre-conditions, one being START.

    Meant for noisy recognition logs; orphans created by the pruning are re-wired.
    """
    edges = set(graph.edges)
    for i in range(1, graph.vocabulary.end):
        pre = graph.predecessors(i)
        if len(pre) == 2 and 0 in pre:
            (other,) = pre - {0}
            edges.discard((i, other))
    edges = wire_orphans(edges, graph.size)
    return BinaryTaskGraph(graph.vocabulary, frozenset(edges))


def generic_vocabulary(n: int) -> KeyStepVocabulary:
    return KeyStepVocabulary(tuple(f"K{i}" for i in range(1, n + 1)))


def graph_document(graph: BinaryTaskGraph) -> dict:
    label = graph.vocabulary.label
    return {
        "nodes": graph.vocabulary.labels(),
        "edges": sorted([label(i), label(j)] for i, j in graph.edges),
    }


def export_graph(graph: BinaryTaskGraph, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(graph_document(graph), indent=2, ensure_ascii=False) + "\n"
    if fmt == "dot":
        label = graph.vocabulary.label
        lines = ["digraph taskgraph {", "  rankdir=BT;"]
        lines += [f"  {json.dumps(name, ensure_ascii=False)};" for name in graph.vocabulary.labels()]
        lines += [f"  {json.dumps(label(i), ensure_ascii=False)} -> {json.dumps(label(j), ensure_ascii=False)};"
                  for i, j in graph.sorted_edges()]
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise InvalidInputError(f"unknown export format {fmt!r}; expected 'json' or 'dot'")


def graph_from_document(doc: dict) -> BinaryTaskGraph:
    try:
        nodes = list(doc["nodes"])
        raw_edges = doc["edges"]
    except (KeyError, TypeError):
        raise InvalidInputError("graph document needs 'nodes' and 'edges'") from None
    if len(nodes) < 3 or nodes[0] != START_LABEL or nodes[-1] != END_LABEL:
        raise InvalidInputError("graph nodes must be START, key-steps..., END")
    vocabulary = KeyStepVocabulary(tuple(nodes[1:-1]))
    edges = set()
    for pair in raw_edges:
        if len(pair) != 2:
            raise InvalidInputError(f"malformed edge {pair!r}")
        edges.add((vocabulary.index(pair[0]), vocabulary.index(pair[1])))
    return BinaryTaskGraph(vocabulary, frozenset(edges))
