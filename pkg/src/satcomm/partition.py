from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence


@dataclass(frozen=True)
class Partition:
    """Community label per node; nodes are ``0..len(labels)-1``."""

    labels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))

    @classmethod
    def identity(cls, n: int) -> Partition:
        return cls(tuple(range(n)))

    @classmethod
    def single(cls, n: int) -> Partition:
        return cls((0,) * n)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], n: int | None = None) -> Partition:
        if n is None:
            n = sum(len(b) for b in blocks)
        labels = [-1] * n
        for c, block in enumerate(blocks):
            for x in block:
                if labels[x] != -1:
                    raise ValueError(f"node {x} appears in two blocks")
                labels[x] = c
        if -1 in labels:
            raise ValueError(f"node {labels.index(-1)} is not in any block")
        return cls(tuple(labels))

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, node):
        return self.labels[node]

    @cached_property
    def sizes(self) -> Counter:
        return Counter(self.labels)

    @property
    def num_communities(self) -> int:
        return len(self.sizes)

    @property
    def largest_fraction(self) -> float:
        if not self.labels:
            return 0.0
        return max(self.sizes.values()) / len(self.labels)

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for x, c in enumerate(self.labels):
            out.setdefault(c, []).append(x)
        return out

    def normalized(self) -> Partition:
        """Relabel communities 0, 1, ... in order of first appearance."""
        remap: dict[int, int] = {}
        return Partition(tuple(remap.setdefault(c, len(remap)) for c in self.labels))

    def compose(self, coarse: Partition) -> Partition:
        """Map each node through ``self`` and then through ``coarse``.

        ``self`` must use labels ``0..len(coarse)-1`` (a normalized partition
        whose communities are the nodes of a folded graph).
        """
        return Partition(tuple(coarse.labels[c] for c in self.labels))

    def same_grouping(self, other: Partition) -> bool:
        return self.normalized() == other.normalized()


def agreement(found: Partition, truth: Partition) -> float:
    """Fraction of nodes on which two partitions agree under the best
    one-to-one matching of their community labels."""
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    if len(found) != len(truth):
        raise ValueError("partitions cover different node counts")
    a = found.normalized().labels
    b = truth.normalized().labels
    table = np.zeros((max(a) + 1, max(b) + 1))
    np.add.at(table, (np.asarray(a), np.asarray(b)), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / len(a)


# -- partition files --------------------------------------------------------
# One line per node: "<node-id> <community-id>". Variables are 1-based bare
# integers; clause nodes (bipartite graphs) are written "c<k>", 1-based.

def format_partition(p: Partition, num_vars: int | None = None) -> str:
    n1 = len(p) if num_vars is None else num_vars
    lines = []
    for x, c in enumerate(p.labels):
        node = str(x + 1) if x < n1 else f"c{x - n1 + 1}"
        lines.append(f"{node} {c}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_partition(path: str | Path, p: Partition, num_vars: int | None = None) -> None:
    Path(path).write_text(format_partition(p, num_vars))


def parse_partition(text: str, num_vars: int, num_clauses: int = 0) -> Partition:
    total = num_vars + num_clauses
    labels: list[int | None] = [None] * total
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            node, comm = line.split()
            if node.startswith("c"):
                idx = num_vars + int(node[1:]) - 1
                if not num_vars <= idx < total:
                    raise IndexError
            else:
                idx = int(node) - 1
                if not 0 <= idx < num_vars:
                    raise IndexError
            label = int(comm)
        except (ValueError, IndexError):
            raise ValueError(f"partition line {lineno}: bad entry {line!r}") from None
        labels[idx] = label
    missing = [i for i, c in enumerate(labels) if c is None]
    if missing:
        raise ValueError(f"partition file leaves {len(missing)} node(s) unlabelled")
    return Partition(tuple(labels))


def read_partition(path: str | Path, num_vars: int, num_clauses: int = 0) -> Partition:
    return parse_partition(Path(path).read_text(), num_vars, num_clauses)
