"""Spanning trees and the gauge that reduces edge velocities to tree velocities.

Edge velocities of the form v_e = sqrt(w_e) * (S_head - S_tail) for a nodal
potential S are determined by their values on any spanning tree: telescoping
the potential differences along the unique tree path from tail(e) to head(e)
gives

    v_e / sqrt(w_e) = sum_f a_f(e) * v_f / sqrt(w_f),   a_f(e) in {-1, 0, +1},

where f runs over tree edges and the sign records whether the path traverses
f along or against its canonical low-to-high orientation.  The coefficient
table is computed once per (graph, tree) pair and reused by the solver.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatchError,
    EdgeNotInGraphError,
    InputFormatError,
    NodeOutOfRangeError,
    NotATreeError,
)
from .graph import WeightedGraph, _data_lines

__all__ = ["SpanningTree", "kruskal", "read_tree_file"]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:  # path compression
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


class SpanningTree:
    """Oriented spanning tree of a weighted graph with gauge coefficients.

    Tree edges keep the canonical (low, high) orientation of the parent
    graph.  ``expand_velocities`` maps per-tree-edge velocities to all edges;
    ``recover_potential`` integrates tree velocities into a nodal potential.

    Parameters
    ----------
    graph : WeightedGraph
    tree_edges : sequence of (int, int)
        Exactly N-1 distinct graph edges forming a spanning tree; either
        orientation is accepted and normalized.
    """

    def __init__(self, graph: WeightedGraph, tree_edges: Sequence[tuple[int, int]]):
        n = graph.node_count
        canonical = []
        for a, b in tree_edges:
            a, b = int(a), int(b)
            if not graph.has_edge(a, b):
                raise EdgeNotInGraphError(f"tree edge ({a},{b}) not in graph")
            canonical.append((min(a, b), max(a, b)))
        if len(set(canonical)) != len(canonical):
            raise NotATreeError("tree edge listed twice")
        if len(canonical) != n - 1:
            raise NotATreeError(
                f"spanning tree needs {n - 1} edges, got {len(canonical)}"
            )
        uf = _UnionFind(n)
        for a, b in canonical:
            if not uf.union(a - 1, b - 1):
                raise NotATreeError(f"tree edges contain a cycle through ({a},{b})")

        self.graph = graph
        self.tree_edges: list[tuple[int, int]] = sorted(canonical)
        self._tree_index = {e: f for f, e in enumerate(self.tree_edges)}

        # 0-based endpoints and weights in tree-edge order
        self.tail = np.array([i - 1 for i, _ in self.tree_edges], dtype=np.intp)
        self.head = np.array([j - 1 for _, j in self.tree_edges], dtype=np.intp)
        pos = [graph.edge_position(i, j) for i, j in self.tree_edges]
        self.sqrt_weights = graph.sqrt_weights[np.array(pos, dtype=np.intp)]

        self._build_parent_structure()
        self._build_coefficients()

    # -- construction helpers ---------------------------------------------

    def _build_parent_structure(self) -> None:
        """Root the tree at node 1 and record parent and depth per node."""
        n = self.graph.node_count
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for f, (i, j) in enumerate(self.tree_edges):
            adjacency[i - 1].append((j, f))
            adjacency[j - 1].append((i, f))
        parent = np.zeros(n, dtype=np.intp)  # 1-based, 0 marks the root
        parent_edge = np.full(n, -1, dtype=np.intp)
        depth = np.full(n, -1, dtype=np.intp)
        depth[0] = 0
        stack = [1]
        while stack:
            u = stack.pop()
            for w, f in adjacency[u - 1]:
                if depth[w - 1] < 0:
                    depth[w - 1] = depth[u - 1] + 1
                    parent[w - 1] = u
                    parent_edge[w - 1] = f
                    stack.append(w)
        self._parent = parent
        self._parent_edge = parent_edge
        self._depth = depth

    def _climb(self, node: int, target_depth: int) -> tuple[int, list[tuple[int, int]]]:
        """Walk from ``node`` toward the root until ``target_depth``.

        Returns the stop node and the traversed steps as (tree edge index,
        sign), the sign being +1 when the step follows the edge's canonical
        orientation.
        """
        steps = []
        while self._depth[node - 1] > target_depth:
            p = int(self._parent[node - 1])
            f = int(self._parent_edge[node - 1])
            steps.append((f, 1 if node < p else -1))
            node = p
        return node, steps

    def _path_coefficients(self, a: int, b: int) -> list[tuple[int, int]]:
        """Signed tree edges of the unique path a -> b."""
        da, db = self._depth[a - 1], self._depth[b - 1]
        meet = min(da, db)
        ua, steps_a = self._climb(a, meet)
        ub, steps_b = self._climb(b, meet)
        while ua != ub:
            pa = int(self._parent[ua - 1])
            fa = int(self._parent_edge[ua - 1])
            steps_a.append((fa, 1 if ua < pa else -1))
            pb = int(self._parent[ub - 1])
            fb = int(self._parent_edge[ub - 1])
            steps_b.append((fb, 1 if ub < pb else -1))
            ua, ub = pa, pb
        # a -> lca uses the climbing direction, lca -> b reverses it
        return steps_a + [(f, -s) for f, s in steps_b]

    def _build_coefficients(self) -> None:
        g = self.graph
        rows, cols, signs = [], [], []
        for e, (i, j) in enumerate(g.edges):
            for f, s in self._path_coefficients(i, j):
                rows.append(e)
                cols.append(f)
                signs.append(s)
        coeff = sp.csr_matrix(
            (np.array(signs, dtype=float), (rows, cols)),
            shape=(g.edge_count, g.node_count - 1),
        )
        coeff.sum_duplicates()
        self.coefficients = coeff
        # expansion scaled by the weight ratio: v_e = sum_f sw_e/sw_f a_f v_f
        scale_rows = sp.diags(g.sqrt_weights)
        scale_cols = sp.diags(1.0 / self.sqrt_weights)
        self.expansion = (scale_rows @ coeff @ scale_cols).tocsr()

    # -- public operations --------------------------------------------------

    def tree_path_coefficients(self, edge: tuple[int, int]) -> dict[tuple[int, int], int]:
        """Nonzero gauge coefficients of a graph edge over tree edges.

        Returns a mapping from tree edge to its sign a_f in {-1, +1}; tree
        edges absent from the path are omitted.
        """
        i, j = edge
        e = self.graph.edge_position(i, j)  # validates membership
        row = self.coefficients.getrow(e).tocoo()
        return {self.tree_edges[f]: int(s) for f, s in zip(row.col, row.data)}

    def expand_velocities(self, tree_velocities: np.ndarray) -> np.ndarray:
        """Map tree-edge velocities to all-edge velocities via the gauge.

        Accepts a vector of length N-1 or an array of shape (levels, N-1);
        the result has matching leading shape with last axis E.
        """
        v = np.asarray(tree_velocities, dtype=float)
        if v.shape[-1] != self.graph.node_count - 1:
            raise DimensionMismatchError(
                f"expected last axis {self.graph.node_count - 1}, got {v.shape}"
            )
        if v.ndim == 1:
            return self.expansion @ v
        if v.ndim == 2:
            return (self.expansion @ v.T).T
        raise DimensionMismatchError(f"got {v.ndim}-d velocity array")

    def recover_potential(self, tree_velocities: np.ndarray, base: int = 1) -> np.ndarray:
        """Integrate tree velocities into a potential S with S[base] = 0.

        Along each tree edge f = (i, j), S_j - S_i = v_f / sqrt(w_f).  The
        result is unique because the tree is connected and acyclic.
        """
        g = self.graph
        v = np.asarray(tree_velocities, dtype=float)
        if v.shape != (g.node_count - 1,):
            raise DimensionMismatchError(
                f"expected shape ({g.node_count - 1},), got {v.shape}"
            )
        if not (1 <= base <= g.node_count):
            raise NodeOutOfRangeError(f"base {base} outside 1..{g.node_count}")
        jumps = v / self.sqrt_weights
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(g.node_count)]
        for f, (i, j) in enumerate(self.tree_edges):
            adjacency[i - 1].append((j, jumps[f]))
            adjacency[j - 1].append((i, -jumps[f]))
        potential = np.full(g.node_count, np.nan)
        potential[base - 1] = 0.0
        stack = [base]
        while stack:
            u = stack.pop()
            for w, jump in adjacency[u - 1]:
                if np.isnan(potential[w - 1]):
                    potential[w - 1] = potential[u - 1] + jump
                    stack.append(w)
        return potential

    def __repr__(self) -> str:  # pragma: no cover
        return f"SpanningTree(edges={self.tree_edges})"


def kruskal(graph: WeightedGraph) -> SpanningTree:
    """Minimum spanning tree with the deterministic tie-break (w, i, j).

    Edges are scanned in ascending order of (weight, lower node, higher
    node), so equal-weight graphs always yield the same tree.
    """
    order = sorted(
        range(graph.edge_count),
        key=lambda e: (graph.weights[e], graph.edges[e]),
    )
    uf = _UnionFind(graph.node_count)
    chosen = []
    for e in order:
        i, j = graph.edges[e]
        if uf.union(i - 1, j - 1):
            chosen.append((i, j))
            if len(chosen) == graph.node_count - 1:
                break
    return SpanningTree(graph, chosen)


def read_tree_file(path: str | Path, graph: WeightedGraph) -> SpanningTree:
    """Read an explicit spanning tree as a CSV edge list.

    Accepts the header ``i,j`` or ``i,j,omega``; weights are taken from the
    graph, so a third column is validated for format only.
    """
    path = Path(path)
    lines = _data_lines(path)
    if not lines:
        raise InputFormatError(f"{path}: no data lines")
    lineno, header = lines[0]
    fields = tuple(f.strip().lower() for f in header.split(","))
    if fields not in (("i", "j"), ("i", "j", "omega")):
        raise InputFormatError(
            f"{path}:{lineno}: expected header 'i,j' or 'i,j,omega', got {header!r}"
        )
    width = len(fields)
    edges = []
    for lineno, text in lines[1:]:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != width:
            raise InputFormatError(
                f"{path}:{lineno}: expected {width} fields, got {text!r}"
            )
        try:
            if width == 3:
                float(parts[2])
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise InputFormatError(f"{path}:{lineno}: {exc}") from None
    return SpanningTree(graph, edges)
