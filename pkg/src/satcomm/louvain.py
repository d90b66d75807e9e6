"""Community detection: Louvain method, bipartite Louvain, label propagation.

Gains are kept in the unnormalised form ``k_i,c - deg(i) * D_c / W``
(``k_i,c`` = weight from i into c, ``D_c`` = degree sum of c with i
removed). Dividing by W would not change any comparison.
"""

from __future__ import annotations

import random
from collections import defaultdict

from .graphs import BipartiteGraph, WeightedGraph
from .modularity import ModularityReport, modularity, modularity_bipartite
from .partition import Partition

MAX_SWEEPS = 10_000
# a move must beat staying by this fraction of W; absorbs rounding so
# equal-gain moves cannot cycle
GAIN_EPS = 1e-12


def _order(n: int, seed, shuffle: bool) -> list[int]:
    order = list(range(n))
    if shuffle:
        random.Random(seed).shuffle(order)
    return order


def one_level(g: WeightedGraph, seed=None, max_sweeps: int = MAX_SWEEPS,
              shuffle: bool = False) -> tuple[Partition, int, bool]:
    """Greedy local moving from singletons.

    Returns ``(partition, sweeps, hit_cap)``. A sweep visits every node
    once; sweeping stops after a pass without moves.
    """
    n, W = g.n, g.total
    if W <= 0:
        return Partition.identity(n), 0, False
    deg = g.degree
    nbrs, wts = g.neighbors, g.weights
    label = list(range(n))
    tot = list(deg)
    order = _order(n, seed, shuffle)
    eps = GAIN_EPS * W
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        moved = False
        for i in order:
            ci = label[i]
            di = deg[i]
            links: dict[int, float] = {}
            for j, w in zip(nbrs[i], wts[i]):
                if j != i:
                    c = label[j]
                    links[c] = links.get(c, 0.0) + w
            if not links:
                continue
            tot[ci] -= di
            scale = di / W
            threshold = links.get(ci, 0.0) - scale * tot[ci]
            if threshold < 0.0:
                threshold = 0.0
            threshold += eps
            best = ci
            best_gain = threshold
            for c, k in links.items():
                if c == ci:
                    continue
                gain = k - scale * tot[c]
                if gain > best_gain or (gain == best_gain and best != ci and c < best):
                    best, best_gain = c, gain
            tot[best] += di
            if best != ci:
                label[i] = best
                moved = True
        if not moved:
            return Partition(tuple(label)).normalized(), sweeps, False
    return Partition(tuple(label)).normalized(), sweeps, True


def fold(g: WeightedGraph, p: Partition) -> WeightedGraph:
    """One node per community of ``p`` (in normalized label order).

    ``w2(A, B) = sum of w(x, y) for x in A, y in B``; for ``A == B`` that
    is the ordered-pair internal mass, stored as a self-loop.
    """
    if len(p) != g.n:
        raise ValueError(f"partition labels {len(p)} nodes, graph has {g.n}")
    p = p.normalized()
    labels = p.labels
    pairs: dict[tuple[int, int], float] = defaultdict(float)
    for x in range(g.n):
        a = labels[x]
        for y, w in zip(g.neighbors[x], g.weights[x]):
            b = labels[y]
            if a <= b:
                pairs[(a, b)] += w
    return WeightedGraph.from_pairs(p.num_communities, pairs)


def louvain(g: WeightedGraph, seed=None, shuffle: bool = False,
            max_sweeps: int = MAX_SWEEPS) -> tuple[Partition, ModularityReport]:
    """Alternate :func:`one_level` and :func:`fold` while Q strictly grows.

    The report's ``iterations`` is the total sweep count over all levels
    and ``level_q`` the modularity reached after each accepted level.
    """
    if g.total <= 0:
        p = Partition.identity(g.n)
        return p, ModularityReport.for_partition(0.0, p, degenerate=True)
    eps = GAIN_EPS
    mapping = Partition.identity(g.n)
    cur = g
    part, sweeps, cap = one_level(cur, seed, max_sweeps, shuffle)
    total_sweeps = sweeps
    q_prev = modularity(cur, Partition.identity(cur.n))
    q_new = modularity(cur, part)
    levels = [q_prev]
    while q_new > q_prev + eps:
        mapping = mapping.compose(part)
        cur = fold(cur, part)
        levels.append(q_new)
        q_prev = q_new
        part, sweeps, c = one_level(cur, seed, max_sweeps, shuffle)
        cap = cap or c
        total_sweeps += sweeps
        q_new = modularity(cur, part)
    mapping = mapping.normalized()
    report = ModularityReport.for_partition(
        modularity(g, mapping), mapping, total_sweeps, hit_sweep_cap=cap)
    report.level_q = tuple(levels)
    return mapping, report


# -- bipartite --------------------------------------------------------------

def one_level_bipartite(g: BipartiteGraph, init: Partition | None = None,
                        seed=None, max_sweeps: int = MAX_SWEEPS,
                        shuffle: bool = False) -> tuple[Partition, int, bool]:
    """Local moving under Barber modularity.

    Moving left node x into community c gains ``k_x,c - deg(x) * D2_c / W``
    where ``D2_c`` is c's right-side degree sum; right nodes are symmetric
    with the left-side sums. A node's own side total never enters its gain.
    """
    n1, n = g.n_left, g.n
    W = g.total
    if W <= 0:
        return Partition.identity(n), 0, False
    label = list(init.labels) if init is not None else list(range(n))
    if len(label) != n:
        raise ValueError("initial partition does not cover the graph")
    size = max(label) + 1
    d1 = [0.0] * size
    d2 = [0.0] * size
    for i, d in enumerate(g.left_degree):
        d1[label[i]] += d
    for j, d in enumerate(g.right_degree):
        d2[label[n1 + j]] += d
    adj = [[(n1 + j, w) for j, w in a] for a in g.left_adj]
    adj += [list(a) for a in g.right_adj]
    deg = g.left_degree + g.right_degree
    order = _order(n, seed, shuffle)
    eps = GAIN_EPS * W
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        moved = False
        for x in order:
            links: dict[int, float] = {}
            for y, w in adj[x]:
                c = label[y]
                links[c] = links.get(c, 0.0) + w
            if not links:
                continue
            cx = label[x]
            left = x < n1
            other = d2 if left else d1
            own = d1 if left else d2
            scale = deg[x] / W
            threshold = links.get(cx, 0.0) - scale * other[cx]
            if threshold < 0.0:
                threshold = 0.0
            threshold += eps
            best, best_gain = cx, threshold
            for c, k in links.items():
                if c == cx:
                    continue
                gain = k - scale * other[c]
                if gain > best_gain or (gain == best_gain and best != cx and c < best):
                    best, best_gain = c, gain
            if best != cx:
                own[cx] -= deg[x]
                own[best] += deg[x]
                label[x] = best
                moved = True
        if not moved:
            return Partition(tuple(label)).normalized(), sweeps, False
    return Partition(tuple(label)).normalized(), sweeps, True


def bipartite_blocks(g: BipartiteGraph, p: Partition) -> tuple[list[int], Partition, int]:
    """Map each node to its block in the bipartite fold.

    Returns ``(node_map, coarse, n_left_blocks)``: ``node_map[x]`` is x's
    node id in the folded graph and ``coarse`` labels folded nodes with the
    community they came from.
    """
    if len(p) != g.n:
        raise ValueError(f"partition labels {len(p)} nodes, graph has {g.n}")
    p = p.normalized()
    n1 = g.n_left
    left_ids: dict[int, int] = {}
    right_ids: dict[int, int] = {}
    for i in range(n1):
        left_ids.setdefault(p.labels[i], len(left_ids))
    for j in range(g.n_right):
        right_ids.setdefault(p.labels[n1 + j], len(right_ids))
    k1 = len(left_ids)
    node_map = [left_ids[p.labels[i]] for i in range(n1)]
    node_map += [k1 + right_ids[p.labels[n1 + j]] for j in range(g.n_right)]
    coarse = list(left_ids) + list(right_ids)
    return node_map, Partition(tuple(coarse)), k1


def fold_bipartite(g: BipartiteGraph, p: Partition) -> BipartiteGraph:
    """Collapse each community's variables into one left node and its
    clauses into one right node, keeping the graph bipartite."""
    node_map, coarse, k1 = bipartite_blocks(g, p)
    edges: dict[tuple[int, int], float] = defaultdict(float)
    n1 = g.n_left
    for i, j, w in g.edges():
        edges[(node_map[i], node_map[n1 + j] - k1)] += w
    return BipartiteGraph(k1, len(coarse) - k1, edges)


def louvain_bipartite(g: BipartiteGraph, seed=None, shuffle: bool = False,
                      max_sweeps: int = MAX_SWEEPS) -> tuple[Partition, ModularityReport]:
    """Louvain with the bipartite fold.

    Each level after the first starts local moving from the communities
    inherited from the previous level rather than from singletons, since
    the fold splits every mixed community into a left and a right node.
    """
    if g.total <= 0:
        p = Partition.identity(g.n)
        return p, ModularityReport.for_partition(0.0, p, degenerate=True)
    node_of = list(range(g.n))  # original node -> node of `cur`
    cur = g
    part, sweeps, cap = one_level_bipartite(cur, None, seed, max_sweeps, shuffle)
    total_sweeps = sweeps
    q_prev = modularity_bipartite(cur, Partition.identity(cur.n))
    q_new = modularity_bipartite(cur, part)
    levels = [q_prev]
    while q_new > q_prev + GAIN_EPS:
        node_map, coarse, _ = bipartite_blocks(cur, part)
        node_of = [node_map[x] for x in node_of]
        cur = fold_bipartite(cur, part)
        levels.append(q_new)
        q_prev = q_new
        part, sweeps, c = one_level_bipartite(cur, coarse, seed, max_sweeps, shuffle)
        cap = cap or c
        total_sweeps += sweeps
        q_new = modularity_bipartite(cur, part)
    final = Partition(tuple(part.labels[x] for x in node_of)).normalized()
    report = ModularityReport.for_partition(
        modularity_bipartite(g, final), final, total_sweeps, hit_sweep_cap=cap)
    report.level_q = tuple(levels)
    return final, report


# -- label propagation --------------------------------------------------------

def label_propagation(g: WeightedGraph, seed=None,
                      max_sweeps: int = 1000) -> tuple[Partition, ModularityReport]:
    """Asynchronous weighted label propagation.

    Each sweep visits nodes in a fresh random order and gives a node the
    label of largest total neighbour weight. A node already holding one of
    the maximal labels keeps it; other ties are broken at random.
    """
    n = g.n
    if g.total <= 0:
        p = Partition.identity(n)
        return p, ModularityReport.for_partition(0.0, p, degenerate=True)
    rng = random.Random(seed)
    label = list(range(n))
    order = list(range(n))
    nbrs, wts = g.neighbors, g.weights
    sweeps = 0
    cap = True
    while sweeps < max_sweeps:
        sweeps += 1
        rng.shuffle(order)
        changed = False
        for i in order:
            scores: dict[int, float] = {}
            for j, w in zip(nbrs[i], wts[i]):
                if j != i:
                    c = label[j]
                    scores[c] = scores.get(c, 0.0) + w
            if not scores:
                continue
            top = max(scores.values())
            cut = top - 1e-12 * top
            winners = sorted(c for c, s in scores.items() if s >= cut)
            if label[i] in winners:
                continue
            label[i] = winners[0] if len(winners) == 1 else rng.choice(winners)
            changed = True
        if not changed:
            cap = False
            break
    p = Partition(tuple(label)).normalized()
    return p, ModularityReport.for_partition(modularity(g, p), p, sweeps, hit_sweep_cap=cap)
