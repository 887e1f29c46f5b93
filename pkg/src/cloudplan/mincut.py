"""Edmonds-Karp max-flow / min-cut on integer capacities.

Capacities are integer micro-dollars, so the computed cut value is exact.
The residual graph is a plain adjacency mapping; augmenting paths are found
with breadth-first search, and the source-side set of the minimum cut is
read off the final residual graph. This solver is the exact yardstick of the
planner, not its fast path, so it stays in the straightforward textbook
form.
"""

from __future__ import annotations

from collections import deque


class FlowNetwork:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.residual: list[dict[int, int]] = [{} for _ in range(n_nodes)]

    def add_edge(self, u: int, v: int, capacity: int) -> None:
        if capacity < 0:
            raise ValueError("negative capacity")
        self.residual[u][v] = self.residual[u].get(v, 0) + capacity
        self.residual[v].setdefault(u, 0)

    def _augmenting_path(self, source: int, sink: int) -> list[int] | None:
        """Shortest residual path as a node list, or None when flow is maximal."""
        parent = {source: source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, room in self.residual[u].items():
                if room > 0 and v not in parent:
                    parent[v] = u
                    if v == sink:
                        path = [sink]
                        while path[-1] != source:
                            path.append(parent[path[-1]])
                        path.reverse()
                        return path
                    queue.append(v)
        return None

    def max_flow(self, source: int, sink: int) -> int:
        total = 0
        while True:
            path = self._augmenting_path(source, sink)
            if path is None:
                return total
            pushed = min(self.residual[u][v] for u, v in zip(path, path[1:]))
            for u, v in zip(path, path[1:]):
                self.residual[u][v] -= pushed
                self.residual[v][u] += pushed
            total += pushed

    def min_cut_source_side(self, source: int) -> set[int]:
        """Nodes reachable from the source in the residual graph after max_flow."""
        seen = {source}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v, room in self.residual[u].items():
                if room > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen
