"""Weighted graphs, the VIG/CVIG encodings, components and community graphs."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .cnf import Formula, clause_vars
from .partition import Partition


class WeightedGraph:
    """Undirected weighted graph on nodes ``0..n-1`` (self-loops allowed).

    Each node keeps a sorted neighbour list with parallel weights. A
    self-loop ``(x, x)`` appears once in x's list, so ``degree[x]`` counts
    it once and ``total == sum(degree)`` is the sum of ``w(x, y)`` over
    ordered pairs.
    """

    __slots__ = ("n", "neighbors", "weights", "degree", "total", "stats")

    def __init__(self, n: int, neighbors: list[list[int]], weights: list[list[float]],
                 stats: dict | None = None):
        self.n = n
        self.neighbors = neighbors
        self.weights = weights
        self.degree = [math.fsum(ws) for ws in weights]
        self.total = math.fsum(self.degree)
        self.stats = stats or {}

    @classmethod
    def from_pairs(cls, n: int, pairs: dict[tuple[int, int], float],
                   stats: dict | None = None) -> WeightedGraph:
        """Build from ``{(x, y): w}`` with each unordered pair given once."""
        adj: list[dict[int, float]] = [dict() for _ in range(n)]
        for (x, y), w in pairs.items():
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if w == 0:
                continue
            adj[x][y] = adj[x].get(y, 0.0) + w
            if x != y:
                adj[y][x] = adj[y].get(x, 0.0) + w
        neighbors, weights = [], []
        for a in adj:
            keys = sorted(a)
            neighbors.append(keys)
            weights.append([a[k] for k in keys])
        return cls(n, neighbors, weights, stats)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> WeightedGraph:
        """Build from undirected ``(x, y, w)`` triples; repeats accumulate."""
        pairs: dict[tuple[int, int], float] = defaultdict(float)
        for x, y, w in edges:
            if not (0 <= x < n and 0 <= y < n):
                raise ValueError(f"edge ({x}, {y}) out of range for n={n}")
            pairs[(min(x, y), max(x, y))] += w
        return cls.from_pairs(n, pairs)

    def weight(self, x: int, y: int) -> float:
        nb = self.neighbors[x]
        # lists are short on sparse graphs; bisect buys little here
        for j, w in zip(nb, self.weights[x]):
            if j == y:
                return w
        return 0.0

    def self_loop(self, x: int) -> float:
        return self.weight(x, x)

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Undirected edges ``x <= y``, each once."""
        for x in range(self.n):
            for y, w in zip(self.neighbors[x], self.weights[x]):
                if y >= x:
                    yield x, y, w

    @property
    def num_edges(self) -> int:
        return sum(1 for _ in self.edges())

    def scaled(self, factor: float) -> WeightedGraph:
        return WeightedGraph(self.n, [list(nb) for nb in self.neighbors],
                             [[w * factor for w in ws] for ws in self.weights])

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={self.num_edges}, W={self.total:g})"


class BipartiteGraph:
    """Bipartite weighted graph between left nodes (variables) and right
    nodes (clauses). Combined node ids put left nodes first: left ``i`` is
    ``i`` and right ``j`` is ``n_left + j``.
    """

    __slots__ = ("n_left", "n_right", "left_adj", "right_adj",
                 "left_degree", "right_degree", "total")

    def __init__(self, n_left: int, n_right: int,
                 edges: dict[tuple[int, int], float]):
        self.n_left = n_left
        self.n_right = n_right
        left: list[dict[int, float]] = [dict() for _ in range(n_left)]
        right: list[dict[int, float]] = [dict() for _ in range(n_right)]
        for (i, j), w in edges.items():
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if w == 0:
                continue
            left[i][j] = left[i].get(j, 0.0) + w
            right[j][i] = right[j].get(i, 0.0) + w
        self.left_adj = [sorted(a.items()) for a in left]
        self.right_adj = [sorted(a.items()) for a in right]
        self.left_degree = [math.fsum(w for _, w in a) for a in self.left_adj]
        self.right_degree = [math.fsum(w for _, w in a) for a in self.right_adj]
        # each edge counted once
        self.total = math.fsum(self.left_degree)

    @property
    def n(self) -> int:
        return self.n_left + self.n_right

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """``(left, right, w)`` triples with side-local indices."""
        for i, adj in enumerate(self.left_adj):
            for j, w in adj:
                yield i, j, w

    def weight(self, i: int, j: int) -> float:
        for k, w in self.left_adj[i]:
            if k == j:
                return w
        return 0.0

    def __repr__(self):
        return f"BipartiteGraph(left={self.n_left}, right={self.n_right}, W={self.total:g})"


PAIR_CHUNK = 1 << 21


# -- SAT encodings -----------------------------------------------------------

def build_vig(f: Formula, max_clause_len: int | None = None) -> WeightedGraph:
    """Variable incidence graph; variable ``v`` is node ``v - 1``.

    A clause over s >= 2 distinct variables adds 1/C(s,2) to each of its
    variable pairs. Unit clauses add nothing and are counted in
    ``stats["unit_clauses"]``; tautologies are kept and counted.
    With ``max_clause_len`` set, wider clauses are skipped.
    """
    n = f.num_vars
    by_width: dict[int, list[tuple[int, ...]]] = defaultdict(list)
    units = tautologies = skipped = 0
    for clause in f.clauses:
        vs = clause_vars(clause)
        s = len(vs)
        if len(clause) > s:
            tautologies += 1
        if max_clause_len is not None and s > max_clause_len:
            skipped += 1
        elif s < 2:
            units += 1
        else:
            by_width[s].append(vs)
    stats = {"unit_clauses": units, "tautologies": tautologies, "skipped_long": skipped}

    keys, vals = [], []
    for s, group in by_width.items():
        a, b = np.triu_indices(s, 1)
        w = 2.0 / (s * (s - 1))
        # bound the pair arrays built at once; long learnt clauses have ~s^2/2 pairs
        step = max(1, PAIR_CHUNK // len(a))
        for lo in range(0, len(group), step):
            arr = np.sort(np.asarray(group[lo:lo + step], dtype=np.int64) - 1, axis=1)
            k = (arr[:, a] * n + arr[:, b]).ravel()
            u, inv = np.unique(k, return_inverse=True)
            keys.append(u)
            vals.append(np.bincount(inv) * w)
    if not keys:
        return WeightedGraph.from_pairs(n, {}, stats)
    uniq, inv = np.unique(np.concatenate(keys), return_inverse=True)
    sums = np.bincount(inv, weights=np.concatenate(vals))
    x, y = np.divmod(uniq, n)
    pairs = dict(zip(zip(x.tolist(), y.tolist()), sums.tolist()))
    return WeightedGraph.from_pairs(n, pairs, stats)


def build_cvig(f: Formula) -> BipartiteGraph:
    """Clause-variable incidence graph: edge (x, c) of weight 1/|c|."""
    edges: dict[tuple[int, int], float] = {}
    for j, clause in enumerate(f.clauses):
        vs = clause_vars(clause)
        if not vs:
            continue
        w = 1.0 / len(vs)
        for v in vs:
            edges[(v - 1, j)] = w
    return BipartiteGraph(f.num_vars, f.num_clauses, edges)


# -- connected components -----------------------------------------------------

def connected_components(g: WeightedGraph) -> Partition:
    """Components of the positive-weight edges, labelled by smallest member
    order. Report size via ``num_communities`` / ``largest_fraction``."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in range(g.n):
        for y, w in zip(g.neighbors[x], g.weights[x]):
            if y > x and w > 0:
                rx, ry = find(x), find(y)
                if rx != ry:
                    parent[max(rx, ry)] = min(rx, ry)
    return Partition(tuple(find(x) for x in range(g.n))).normalized()


# -- graph of communities ---------------------------------------------------

@dataclass
class CommunityGraph:
    """One node per community.

    ``intra[A]`` is the ordered-pair weight inside A (self-loops once);
    ``inter[(A, B)]`` for ``A < B`` is the weight between A and B counted in
    both orders, so ``sum(intra) + sum(inter)`` equals the original total.
    """

    sizes: list[int]
    intra: list[float]
    inter: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> float:
        return math.fsum(self.intra) + math.fsum(self.inter.values())

    @property
    def inter_total(self) -> float:
        return math.fsum(self.inter.values())


def build_community_graph(g: WeightedGraph, p: Partition) -> CommunityGraph:
    if len(p) != g.n:
        raise ValueError(f"partition labels {len(p)} nodes, graph has {g.n}")
    p = p.normalized()
    k = p.num_communities
    sizes = [0] * k
    for c in p.labels:
        sizes[c] += 1
    intra = [0.0] * k
    inter: dict[tuple[int, int], float] = defaultdict(float)
    labels = p.labels
    for x in range(g.n):
        cx = labels[x]
        for y, w in zip(g.neighbors[x], g.weights[x]):
            cy = labels[y]
            if cx == cy:
                intra[cx] += w
            elif cx < cy:
                inter[(cx, cy)] += 2 * w
    return CommunityGraph(sizes, intra, dict(sorted(inter.items())))


DOT_MIN_WIDTH = 0.2
DOT_WIDTH_SCALE = 0.1
DOT_MIN_PENWIDTH = 0.5
DOT_MAX_PENWIDTH = 12.0


def export_dot(cg: CommunityGraph, name: str = "communities") -> str:
    """Undirected DOT: node width ~ sqrt(size), edge penwidth ~ weight."""
    lines = [f"graph {name} {{", "  node [shape=circle, fixedsize=true];"]
    for a, size in enumerate(cg.sizes):
        width = max(DOT_MIN_WIDTH, DOT_WIDTH_SCALE * math.sqrt(size))
        lines.append(f'  n{a} [label="{a}", width={width:.4f}, '
                     f'members={size}, intra="{cg.intra[a]:.6f}"];')
    wmax = max(cg.inter.values(), default=0.0)
    for (a, b), w in cg.inter.items():
        if w <= 0:
            continue
        pen = max(DOT_MIN_PENWIDTH, DOT_MAX_PENWIDTH * w / wmax)
        lines.append(f'  n{a} -- n{b} [penwidth={pen:.4f}, mass="{w:.6f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
