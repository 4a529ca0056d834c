"""Visibility graphs: who each agent can see at a given step."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

COMPLETE = "complete"
STATIC = "static"
KNEAREST = "knearest"


@dataclass(frozen=True)
class VisibilityGraph:
    """Neighbor-set provider.

    ``mode`` is one of ``"complete"``, ``"static"`` (undirected ``edges``) or
    ``"knearest"`` (each agent sees its ``k`` closest agents; directed).
    """

    mode: str
    n_agents: int
    edges: tuple = ()
    k: int = 3

    def __post_init__(self):
        if self.mode not in (COMPLETE, STATIC, KNEAREST):
            raise ValueError(f"graph.mode: unknown mode {self.mode!r}")
        if self.n_agents < 1:
            raise ValueError("graph: need at least one agent")
        if self.mode == STATIC:
            for e in self.edges:
                i, j = e
                if not (0 <= i < self.n_agents and 0 <= j < self.n_agents):
                    raise ValueError(f"graph.edges: edge {tuple(e)} out of range for {self.n_agents} agents")
                if i == j:
                    raise ValueError(f"graph.edges: self loop {tuple(e)}")
            adj = [set() for _ in range(self.n_agents)]
            for i, j in self.edges:
                adj[i].add(j)
                adj[j].add(i)
            object.__setattr__(self, "_adj", tuple(frozenset(s) for s in adj))
        if self.mode == KNEAREST and self.k < 1:
            raise ValueError("graph.k: must be at least 1")

    @property
    def is_dynamic(self) -> bool:
        return self.mode == KNEAREST

    @property
    def is_complete(self) -> bool:
        if self.mode == COMPLETE:
            return True
        if self.mode == STATIC:
            return all(len(s) == self.n_agents - 1 for s in self._adj)
        return self.k >= self.n_agents - 1

    def neighbors(self, i: int, positions=None) -> frozenset:
        if not 0 <= i < self.n_agents:
            raise ValueError(f"agent id {i} out of range [0, {self.n_agents})")
        if self.mode == COMPLETE:
            return frozenset(j for j in range(self.n_agents) if j != i)
        if self.mode == STATIC:
            return self._adj[i]
        if positions is None:
            raise ValueError("k-nearest graph needs positions")
        P = np.asarray(positions, dtype=float)
        d2 = np.sum((P - P[i]) ** 2, axis=1)
        # lexsort: primary key distance, ties by lower id
        order = [j for j in np.lexsort((np.arange(self.n_agents), d2)) if j != i]
        return frozenset(int(j) for j in order[: min(self.k, self.n_agents - 1)])

    def neighbor_sets(self, positions=None) -> list:
        return [self.neighbors(i, positions) for i in range(self.n_agents)]

    def to_dict(self) -> dict:
        d = {"mode": self.mode}
        if self.mode == STATIC:
            d["edges"] = [list(e) for e in self.edges]
        if self.mode == KNEAREST:
            d["k"] = self.k
        return d


def neighbors(graph: VisibilityGraph, i: int, positions=None) -> frozenset:
    return graph.neighbors(i, positions)


def is_connected(graph: VisibilityGraph, positions=None) -> bool:
    """BFS over the symmetrised edge set."""
    n = graph.n_agents
    adj = [set(s) for s in graph.neighbor_sets(positions)]
    for i in range(n):
        for j in adj[i]:
            adj[j].add(i)
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return len(seen) == n


def line_graph(n: int) -> VisibilityGraph:
    return VisibilityGraph(STATIC, n, edges=tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> VisibilityGraph:
    return VisibilityGraph(COMPLETE, n)


def graph_from_dict(spec: dict, n_agents: int) -> VisibilityGraph:
    if not isinstance(spec, dict) or "mode" not in spec:
        raise ValueError("graph: expected a mapping with a 'mode' key")
    mode = spec["mode"]
    if mode == "line":
        return line_graph(n_agents)
    if mode == STATIC:
        edges = spec.get("edges")
        if edges is None:
            raise ValueError("graph.edges: static graph needs an edge list")
        try:
            edges = tuple((int(e[0]), int(e[1])) for e in edges)
        except (TypeError, IndexError, ValueError):
            raise ValueError("graph.edges: expected a list of integer pairs") from None
        return VisibilityGraph(STATIC, n_agents, edges=edges)
    if mode == KNEAREST:
        return VisibilityGraph(KNEAREST, n_agents, k=int(spec.get("k", 3)))
    return VisibilityGraph(mode, n_agents)
