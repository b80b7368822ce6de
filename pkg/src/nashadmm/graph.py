"""Undirected communication graphs and their spectral quantities.

The solvers in this package exchange estimates over an undirected graph.
Everything they need from the topology lives here: neighbor lookups,
connectivity, and the two spectral numbers that drive the penalty
condition, lambda_min(D + A) and lambda_max of the normalized Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "CommGraph",
    "ring",
    "complete",
    "path",
    "random_connected_graph",
    "graph_from_config",
]


def _normalize_edges(n: int, edges: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    out = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop ({i},{i}) not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) out of range for n={n}")
        out.add((min(i, j), max(i, j)))
    return frozenset(out)


@dataclass(frozen=True)
class CommGraph:
    """Undirected simple graph on nodes 0..n-1, immutable after construction."""

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        object.__setattr__(self, "edges", _normalize_edges(self.n, self.edges))

    def neighbors(self, i: int) -> list[int]:
        """Sorted neighbor indices of node i."""
        if not (0 <= i < self.n):
            raise IndexError(f"node {i} out of range for n={self.n}")
        nbrs = set()
        for a, b in self.edges:
            if a == i:
                nbrs.add(b)
            elif b == i:
                nbrs.add(a)
        return sorted(nbrs)

    def neighbor_lists(self) -> list[list[int]]:
        """Neighbor list for every node, index-aligned."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return [sorted(l) for l in nbrs]

    def degrees(self) -> np.ndarray:
        """Vector of node degrees |N_i|."""
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        """Symmetric 0/1 adjacency matrix with zero diagonal."""
        A = np.zeros((self.n, self.n))
        for a, b in self.edges:
            A[a, b] = 1.0
            A[b, a] = 1.0
        return A

    def d_plus_a(self) -> np.ndarray:
        """D + A, the degree matrix plus the adjacency matrix."""
        A = self.adjacency()
        return np.diag(self.degrees().astype(float)) + A

    def laplacian(self) -> np.ndarray:
        """Combinatorial Laplacian L = D - A."""
        A = self.adjacency()
        return np.diag(self.degrees().astype(float)) - A

    def normalized_laplacian(self) -> np.ndarray:
        """L_N = D^{-1/2} (D - A) D^{-1/2}; requires every degree >= 1."""
        deg = self.degrees()
        if np.any(deg == 0):
            raise ValueError("normalized Laplacian undefined: isolated node present")
        dinv = 1.0 / np.sqrt(deg.astype(float))
        return self.laplacian() * np.outer(dinv, dinv)

    def is_connected(self) -> bool:
        """True iff every node is reachable from node 0."""
        if self.n == 1:
            return True
        nbrs = self.neighbor_lists()
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)

    def _require_connected(self):
        if self.n < 2:
            raise ValueError("spectral quantities need n >= 2")
        if not self.is_connected():
            raise ValueError("graph must be connected")

    def lambda_min_d_plus_a(self) -> float:
        """Smallest eigenvalue of D + A (nonnegative for connected graphs)."""
        self._require_connected()
        return float(np.linalg.eigvalsh(self.d_plus_a())[0])

    def lambda_max_normalized_laplacian(self) -> float:
        """Largest eigenvalue of the normalized Laplacian; at most 2."""
        self._require_connected()
        return float(np.linalg.eigvalsh(self.normalized_laplacian())[-1])

    def spectra(self) -> dict[str, np.ndarray]:
        """Full ascending spectra of D+A and L_N (connected graphs only)."""
        self._require_connected()
        return {
            "d_plus_a": np.linalg.eigvalsh(self.d_plus_a()),
            "normalized_laplacian": np.linalg.eigvalsh(self.normalized_laplacian()),
        }


def ring(n: int) -> CommGraph:
    """Cycle over 0..n-1 (a single edge for n = 2)."""
    if n < 2:
        raise ValueError("ring needs n >= 2")
    return CommGraph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> CommGraph:
    """Complete graph on n nodes."""
    return CommGraph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def path(n: int) -> CommGraph:
    """Path 0-1-...-(n-1)."""
    return CommGraph(n, frozenset((i, i + 1) for i in range(n - 1)))


def random_connected_graph(n: int, extra_edges: int, seed: int) -> CommGraph:
    """Ring over 0..n-1 plus `extra_edges` distinct random chords.

    Connected by construction and fully determined by (n, extra_edges, seed).
    """
    if n < 2:
        raise ValueError("random connected graph needs n >= 2")
    if extra_edges < 0:
        raise ValueError("extra_edges must be nonnegative")
    base = ring(n)
    pool = sorted(
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if (i, j) not in base.edges
    )
    if extra_edges > len(pool):
        raise ValueError(
            f"extra_edges={extra_edges} exceeds the {len(pool)} available chords for n={n}"
        )
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=extra_edges, replace=False) if extra_edges else []
    chords = {pool[int(p)] for p in picks}
    return CommGraph(n, base.edges | chords)


def graph_from_config(block: dict) -> CommGraph:
    """Build a graph from a config mapping.

    Accepted forms: {"type": "ring"|"complete"|"path", "n": int},
    {"type": "random", "n": int, "extra_edges": int, "seed": int},
    {"type": "explicit", "n": int, "edges": [[i, j], ...]}.
    """
    kind = block.get("type")
    if kind in ("ring", "complete", "path"):
        ctor = {"ring": ring, "complete": complete, "path": path}[kind]
        return ctor(int(block["n"]))
    if kind == "random":
        return random_connected_graph(
            int(block["n"]), int(block.get("extra_edges", 0)), int(block["seed"])
        )
    if kind == "explicit":
        return CommGraph(int(block["n"]), frozenset(tuple(e) for e in block["edges"]))
    raise ValueError(f"unknown graph type {kind!r}")
