"""Random and planted-community k-CNF generators.

All randomness comes from :class:`random.Random` (MT19937) seeded
explicitly, so a given config reproduces the same formula on any
platform running the same CPython minor version.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .cnf import Formula
from .partition import Partition

DEFAULT_SEED = 42


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    ratio: float | Fraction | str
    k: int = 3
    seed: int = DEFAULT_SEED
    communities: int | None = None
    p_intra: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n < self.k:
            raise ValueError(f"n={self.n} must be >= k={self.k}")
        if self.ratio_fraction <= 0:
            raise ValueError("ratio must be positive")
        if self.communities is not None:
            if not 1 <= self.communities <= self.n:
                raise ValueError("communities must lie in [1, n]")
            p = 1.0 if self.p_intra is None else self.p_intra
            if not 0.0 <= p <= 1.0:
                raise ValueError("p_intra must lie in [0, 1]")

    @property
    def ratio_fraction(self) -> Fraction:
        # going through str keeps 4.25 exact instead of its binary expansion
        r = self.ratio
        return r if isinstance(r, Fraction) else Fraction(str(r))

    @property
    def num_clauses(self) -> int:
        """round(ratio * n), halves rounded up."""
        x = self.ratio_fraction * self.n
        return int(x + Fraction(1, 2)) if x.denominator != 1 else int(x)


def _random_clause(rng: random.Random, pool, k: int) -> tuple[int, ...]:
    vs = rng.sample(pool, k)
    return tuple(v if rng.random() < 0.5 else -v for v in vs)


def gen_random(cfg: GeneratorConfig) -> Formula:
    """Uniform random k-CNF: k distinct variables per clause, fair signs."""
    if cfg.communities not in (None, 1):
        raise ValueError("gen_random does not take communities; use gen_planted")
    rng = random.Random(cfg.seed)
    pool = range(1, cfg.n + 1)
    clauses = tuple(_random_clause(rng, pool, cfg.k) for _ in range(cfg.num_clauses))
    return Formula(cfg.n, clauses)


def gen_planted(cfg: GeneratorConfig) -> tuple[Formula, Partition]:
    """k-CNF with C planted communities of equal size.

    Variables are split into C consecutive blocks. Each clause is drawn
    inside one uniformly chosen block with probability ``p_intra``;
    otherwise its k variables come from k distinct blocks.
    """
    C = cfg.communities
    if C is None:
        raise ValueError("gen_planted needs communities")
    p_intra = 1.0 if cfg.p_intra is None else cfg.p_intra
    n, k = cfg.n, cfg.k
    if n % C:
        raise ValueError(f"n={n} is not divisible by C={C}")
    size = n // C
    partition = Partition(tuple(i // size for i in range(n)))
    if C == 1:
        return gen_random(GeneratorConfig(n, cfg.ratio, k, cfg.seed)), partition
    if p_intra > 0 and size < k:
        raise ValueError(f"blocks of {size} variables cannot hold a {k}-clause")
    if p_intra < 1 and C < k:
        raise ValueError(f"C={C} < k={k}: no inter-community clause is possible")

    rng = random.Random(cfg.seed)
    blocks = [range(b * size + 1, (b + 1) * size + 1) for b in range(C)]
    block_ids = range(C)
    clauses = []
    for _ in range(cfg.num_clauses):
        if rng.random() < p_intra:
            clauses.append(_random_clause(rng, blocks[rng.randrange(C)], k))
        else:
            chosen = rng.sample(block_ids, k)
            vs = [blocks[b][rng.randrange(size)] for b in chosen]
            clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Formula(n, tuple(clauses)), partition
