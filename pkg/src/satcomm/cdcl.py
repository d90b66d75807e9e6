"""A small CDCL solver that records its learnt clauses at conflict checkpoints.

Two-watched-literal propagation, first-UIP learning, VSIDS-style activity
with phase saving and Luby restarts. :class:`Solver` is the readable
reference; :class:`FastSolver` runs the same search compiled with numba
(see :mod:`satcomm._kernel`) and is what :func:`solve` uses by default.

Internally variable ``v`` has literal codes ``2v`` (positive) and
``2v + 1`` (negative); ``code ^ 1`` negates.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .cnf import Clause, Formula, LearntTrace, augment, is_tautology

__all__ = ["SolveConfig", "SolveOutcome", "Status", "Solver", "FastSolver", "solve",
           "augment", "luby", "satisfies"]


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass(frozen=True)
class SolveConfig:
    checkpoints: tuple[int, ...] = ()
    conflict_budget: int | None = None
    restart: str = "luby"  # "luby" or "none"
    restart_unit: int = 100
    seed: int = 42
    var_decay: float = 0.95
    random_var_freq: float = 0.0
    # activity-based halving of the learnt DB; off keeps every learnt clause.
    # The DB is halved whenever it outgrows a limit that starts at
    # reduce_factor * (original clauses) and is multiplied by reduce_growth
    # at adjustment points spaced 100, 150, 225, ... conflicts apart.
    reduce_db: bool = False
    reduce_factor: float = 1 / 3
    reduce_growth: float = 1.1
    # "fast" runs the compiled kernel, "reference" the pure-Python Solver
    engine: str = "fast"

    def __post_init__(self):
        cps = tuple(int(x) for x in self.checkpoints)
        if any(b <= a for a, b in zip(cps, cps[1:])) or any(x <= 0 for x in cps):
            raise ValueError("checkpoints must be positive and strictly increasing")
        object.__setattr__(self, "checkpoints", cps)
        if self.conflict_budget is not None and self.conflict_budget < 0:
            raise ValueError("conflict budget must be nonnegative")
        if self.restart not in ("luby", "none"):
            raise ValueError(f"unknown restart policy {self.restart!r}")
        if not 0 < self.var_decay <= 1:
            raise ValueError("var_decay must lie in (0, 1]")
        if self.reduce_factor <= 0 or self.reduce_growth < 1:
            raise ValueError("reduce_factor must be positive and reduce_growth at least 1")
        if self.engine not in ("fast", "reference"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class SolveOutcome:
    status: Status
    model: tuple[bool, ...] | None
    trace: LearntTrace
    total_conflicts: int
    stats: dict = field(default_factory=dict)

    def stats_json(self) -> str:
        return json.dumps({"status": self.status.value, **self.stats}, sort_keys=True)


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


def satisfies(f: Formula, model: Sequence[bool]) -> bool:
    return all(any((lit > 0) == model[abs(lit) - 1] for lit in c) for c in f.clauses)


ADJUST_FIRST, ADJUST_INC = 100, 1.5


def _learnt_limit(f: Formula, cfg: SolveConfig) -> float:
    return cfg.reduce_factor * sum(1 for c in f.clauses if len(c) > 1 and not is_tautology(c))


def _to_code(lit: int) -> int:
    return 2 * lit if lit > 0 else 2 * -lit + 1


def _to_lit(code: int) -> int:
    return -(code >> 1) if code & 1 else code >> 1


class Solver:
    def __init__(self, f: Formula, cfg: SolveConfig = SolveConfig()):
        self.formula = f
        self.cfg = cfg
        n = f.num_vars
        self.n = n
        self.val = [0] * (2 * n + 2)  # per literal code: 1 true, -1 false, 0 free
        self.level = [0] * (n + 1)
        self.reason = [-1] * (n + 1)
        self.phase = [False] * (n + 1)
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.is_learnt: list[bool] = []
        self.alive: list[bool] = []
        self.clause_act: list[float] = []
        self.cla_inc = 1.0
        # retained learnt clauses in learning order; unit learnts are stored
        # as ~k, indexing self._unit_learnts
        self.learnt_ids: list[int] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.blockers: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.rng = random.Random(cfg.seed)
        self.heap = [(0.0, v) for v in range(1, n + 1)]
        self.conflicts = self.decisions = self.propagations = self.restarts = 0
        self.unsat = False
        self._unit_learnts: list[Clause] = []

        for clause in f.clauses:
            if not clause:
                self.unsat = True
                return
            if is_tautology(clause):
                continue
            codes = [_to_code(l) for l in clause]
            if len(codes) == 1:
                p = codes[0]
                if self.val[p] == -1:
                    self.unsat = True
                    return
                if self.val[p] == 0:
                    self._assign(p, -1)
            else:
                self._attach(codes, learnt=False)

    # -- bookkeeping ----------------------------------------------------------

    def _attach(self, codes: list[int], learnt: bool) -> int:
        ci = len(self.clauses)
        self.clauses.append(codes)
        self.is_learnt.append(learnt)
        self.alive.append(True)
        self.clause_act.append(0.0)
        self.watches[codes[0]].append(ci)
        self.blockers[codes[0]].append(codes[1])
        self.watches[codes[1]].append(ci)
        self.blockers[codes[1]].append(codes[0])
        if learnt:
            self.learnt_ids.append(ci)
        return ci

    def _assign(self, p: int, reason: int):
        v = p >> 1
        self.val[p] = 1
        self.val[p ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(p)

    def _backtrack(self, lvl: int):
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        val, phase, act, heap = self.val, self.phase, self.activity, self.heap
        for p in self.trail[start:]:
            v = p >> 1
            val[p] = val[p ^ 1] = 0
            phase[v] = not (p & 1)
            self.reason[v] = -1
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = start

    def _bump(self, v: int):
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for i in range(1, self.n + 1):
                act[i] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[i], i) for i in range(1, self.n + 1) if self.val[2 * i] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _pick_branch(self) -> int:
        val = self.val
        if self.cfg.random_var_freq and self.rng.random() < self.cfg.random_var_freq:
            free = [v for v in range(1, self.n + 1) if val[2 * v] == 0]
            if free:
                v = self.rng.choice(free)
                return 2 * v if self.phase[v] else 2 * v + 1
        heap, act = self.heap, self.activity
        if len(heap) > 8 * self.n + 64:
            self.heap = heap = [(-act[i], i) for i in range(1, self.n + 1) if val[2 * i] == 0]
            heapq.heapify(heap)
        while heap:
            key, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -key == act[v]:
                return 2 * v if self.phase[v] else 2 * v + 1
        for v in range(1, self.n + 1):
            if val[2 * v] == 0:
                return 2 * v if self.phase[v] else 2 * v + 1
        return -1

    # -- propagation and learning ----------------------------------------

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1.

        Each watch entry carries a blocker literal from its clause; when
        the blocker is true the clause is skipped without being read.
        """
        val, clauses, watches, blockers, trail, alive = (
            self.val, self.clauses, self.watches, self.blockers, self.trail, self.alive)
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            bs = blockers[false_lit]
            keep_w = []
            keep_b = []
            i, nws = 0, len(ws)
            while i < nws:
                b = bs[i]
                if val[b] == 1:
                    keep_w.append(ws[i])
                    keep_b.append(b)
                    i += 1
                    continue
                ci = ws[i]
                i += 1
                if not alive[ci]:
                    continue
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if val[first] == 1:
                    keep_w.append(ci)
                    keep_b.append(first)
                    continue
                for k in range(2, len(c)):
                    q = c[k]
                    if val[q] != -1:
                        c[1], c[k] = q, false_lit
                        watches[q].append(ci)
                        blockers[q].append(first)
                        break
                else:
                    keep_w.append(ci)
                    keep_b.append(first)
                    if val[first] == -1:
                        keep_w.extend(ws[i:])
                        keep_b.extend(bs[i:])
                        watches[false_lit] = keep_w
                        blockers[false_lit] = keep_b
                        return ci
                    self._assign(first, ci)
            watches[false_lit] = keep_w
            blockers[false_lit] = keep_b
        return -1

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learnt clause (asserting literal first) and backjump level."""
        seen = self._seen
        level, reason, clauses, trail = self.level, self.reason, self.clauses, self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = -1
        idx = len(trail) - 1
        ci = confl
        while True:
            if self.is_learnt[ci]:
                self._bump_clause(ci)
            c = clauses[ci]
            for q in (c if p == -1 else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            ci = reason[v]
            seen[v] = 0
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = 0
        assert sum(1 for q in learnt if level[q >> 1] == cur) == 1, "learnt clause is not 1UIP"
        if len(learnt) == 1:
            return learnt, 0
        hi = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[hi] = learnt[hi], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _bump_clause(self, ci: int):
        self.clause_act[ci] += self.cla_inc
        if self.clause_act[ci] > 1e20:
            for k in self.learnt_ids:
                if k >= 0:
                    self.clause_act[k] *= 1e-20
            self.cla_inc *= 1e-20

    def _reduce_db(self):
        """Delete the less active half of the learnt clauses. Clauses of
        length <= 2 and clauses serving as a reason are kept."""
        locked = {self.reason[p >> 1] for p in self.trail}
        ids = sorted((k for k in self.learnt_ids if k >= 0 and len(self.clauses[k]) > 2),
                     key=lambda k: self.clause_act[k])
        target = len(self.learnt_ids) // 2
        drop = set()
        for k in ids:
            if len(drop) >= target:
                break
            if k not in locked:
                drop.add(k)
        for k in drop:
            self.alive[k] = False
        self.learnt_ids = [k for k in self.learnt_ids if k not in drop]

    def learnt_clauses(self) -> tuple[Clause, ...]:
        """Currently retained learnt clauses in learning order, each sorted
        by variable (watching permutes literals in place)."""
        units, clauses = self._unit_learnts, self.clauses
        return tuple(units[~k] if k < 0 else tuple(sorted(map(_to_lit, clauses[k]), key=abs))
                     for k in self.learnt_ids)

    # -- main loop ------------------------------------------------------------

    def solve(self) -> SolveOutcome:
        cfg = self.cfg
        snapshots: dict[int, tuple[Clause, ...]] = {}
        pending = list(cfg.checkpoints)

        def finish(status, model=None):
            if self.conflicts not in snapshots:
                snapshots[self.conflicts] = self.learnt_clauses()
            trace = LearntTrace(self.n, dict(sorted(snapshots.items())))
            stats = {"conflicts": self.conflicts, "decisions": self.decisions,
                     "propagations": self.propagations, "restarts": self.restarts,
                     "learnt_kept": len(self.learnt_ids)}
            return SolveOutcome(status, model, trace, self.conflicts, stats)

        if self.unsat or self._propagate() != -1:
            return finish(Status.UNSAT)

        self._seen = bytearray(self.n + 1)
        restart_at = cfg.restart_unit * luby(0) if cfg.restart == "luby" else None
        since_restart = 0
        max_learnts = _learnt_limit(self.formula, cfg)
        adjust_confl = float(ADJUST_FIRST)
        adjust_cnt = ADJUST_FIRST
        decay = 1.0 / cfg.var_decay
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    return finish(Status.UNSAT)
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self.learnt_ids.append(~len(self._unit_learnts))
                    self._unit_learnts.append((_to_lit(learnt[0]),))
                    self._assign(learnt[0], -1)
                else:
                    ci = self._attach(learnt, learnt=True)
                    self._bump_clause(ci)
                    self._assign(learnt[0], ci)
                self.var_inc *= decay
                self.cla_inc *= 1.001
                adjust_cnt -= 1
                if adjust_cnt == 0:
                    adjust_confl *= ADJUST_INC
                    adjust_cnt = int(adjust_confl)
                    max_learnts *= cfg.reduce_growth
                while pending and pending[0] <= self.conflicts:
                    snapshots[pending.pop(0)] = self.learnt_clauses()
                if cfg.conflict_budget is not None and self.conflicts >= cfg.conflict_budget:
                    return finish(Status.BUDGET_EXHAUSTED)
                continue

            if restart_at is not None and since_restart >= restart_at:
                self.restarts += 1
                since_restart = 0
                restart_at = cfg.restart_unit * luby(self.restarts)
                self._backtrack(0)
                continue
            if cfg.reduce_db and len(self.learnt_ids) - len(self.trail) >= max_learnts:
                self._reduce_db()

            p = self._pick_branch()
            if p == -1:
                model = tuple(self.val[2 * v] == 1 for v in range(1, self.n + 1))
                return finish(Status.SAT, model)
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._assign(p, -1)


def _outcome(status, model, n, snapshots, conflicts, stats) -> SolveOutcome:
    trace = LearntTrace(n, dict(sorted(snapshots.items())))
    return SolveOutcome(status, model, trace, conflicts, stats)


class FastSolver:
    """Array-backed solver driving the compiled search loop.

    The kernel returns control at every checkpoint (so the retained
    learnt set can be copied out) and whenever the clause arena needs to
    grow.
    """

    def __init__(self, f: Formula, cfg: SolveConfig = SolveConfig()):
        from . import _kernel as K
        self.K = K
        self.formula = f
        self.cfg = cfg
        n = self.n = f.num_vars
        self.unsat = False
        self.val = np.zeros(2 * n + 2, np.int8)
        self.level = np.zeros(n + 1, np.int32)
        self.reason = np.full(n + 1, -1, np.int32)
        self.phase = np.zeros(n + 1, np.uint8)
        self.act = np.zeros(n + 1, np.float64)
        self.heap = np.zeros(n + 1, np.int32)
        self.hpos = np.full(n + 1, -1, np.int32)
        self.trail = np.zeros(n + 1, np.int32)
        self.trail_lim = np.zeros(n + 1, np.int32)
        self.seen = np.zeros(n + 1, np.uint8)
        self.buf = np.zeros(n + 1, np.int32)
        self.wstart = np.zeros(2 * n + 2, np.int64)
        self.wsize = np.zeros(2 * n + 2, np.int32)
        self.wcap = np.zeros(2 * n + 2, np.int32)
        self.wpool = np.zeros(0, np.int32)
        ist = self.ist = np.zeros(K.IST_SIZE, np.int64)
        fst = self.fst = np.zeros(K.FST_SIZE, np.float64)
        ist[K.N] = n
        ist[K.RNG] = (cfg.seed * 0x9E3779B97F4A7C15 + 1) % (1 << 63) or 1
        ist[K.RESTART_UNIT] = cfg.restart_unit
        ist[K.RESTART_AT] = cfg.restart_unit * luby(0) if cfg.restart == "luby" else 0
        ist[K.REDUCE_ON] = int(cfg.reduce_db)
        ist[K.ADJUST_CNT] = ADJUST_FIRST
        fst[K.MAX_LEARNTS] = _learnt_limit(f, cfg)
        fst[K.ADJUST_CONFL] = ADJUST_FIRST
        fst[K.LEARNT_GROWTH] = cfg.reduce_growth
        fst[K.VAR_INC] = fst[K.CLA_INC] = 1.0
        fst[K.VAR_DECAY_INV] = 1.0 / cfg.var_decay
        fst[K.RANDOM_FREQ] = cfg.random_var_freq

        kept = []
        for clause in f.clauses:
            if not clause:
                self.unsat = True
            elif not is_tautology(clause):
                kept.append([_to_code(l) for l in clause])
        lits = sum(len(c) for c in kept)
        self._alloc(max(2 * len(kept) + 64, 1024), max(2 * lits + 4 * n + 64, 4096))
        for v in range(1, n + 1):
            K.heap_insert(self.heap, self.hpos, self.act, ist, v)
        if self.unsat:
            return
        for codes in kept:
            if len(codes) == 1:
                p = codes[0]
                if self.val[p] == -1:
                    self.unsat = True
                    return
                if self.val[p] == 0:
                    self.val[p], self.val[p ^ 1] = 1, -1
                    self.trail[ist[K.TRAIL]] = p
                    ist[K.TRAIL] += 1
            else:
                arr = np.asarray(codes, np.int32)
                K.attach(self.mem, self.cstart, self.clen, self.cflags, self.cact,
                         self.wpool, self.wstart, self.wsize, self.wcap, ist, arr, len(arr), 0)

    def _alloc(self, clauses: int, mem: int):
        self.mem = np.zeros(mem, np.int32)
        self.cstart = np.zeros(clauses, np.int64)
        self.clen = np.zeros(clauses, np.int32)
        self.cflags = np.zeros(clauses, np.uint8)
        self.cact = np.zeros(clauses, np.float64)
        self.learnt_list = np.zeros(clauses, np.int32)
        self._grow_pool()

    def _grow_pool(self):
        need = 2 * self.K.pool_pairs(len(self.wstart), len(self.clen))
        if len(self.wpool) < need:
            self.wpool = np.concatenate([self.wpool, np.zeros(need - len(self.wpool), np.int32)])

    def _grow(self):
        K, ist = self.K, self.ist
        if ist[K.MEMUSED] + self.n + 1 > len(self.mem):
            self.mem = np.concatenate([self.mem, np.zeros(len(self.mem), np.int32)])
        if ist[K.NCLAUSES] + 1 > len(self.clen):
            extra = len(self.clen)
            for name in ("cstart", "clen", "cflags", "cact", "learnt_list"):
                a = getattr(self, name)
                setattr(self, name, np.concatenate([a, np.zeros(extra, a.dtype)]))
            self._grow_pool()

    def learnt_clauses(self) -> tuple[Clause, ...]:
        K = self.K
        ids = self.learnt_list[: self.ist[K.NLEARNT]]
        mem, cstart, clen = self.mem, self.cstart, self.clen
        out = []
        for k in ids.tolist():
            s = int(cstart[k])
            codes = mem[s: s + clen[k]].tolist()
            out.append(tuple(sorted((-(c >> 1) if c & 1 else c >> 1 for c in codes), key=abs)))
        return tuple(out)

    def solve(self) -> SolveOutcome:
        K, ist, cfg = self.K, self.ist, self.cfg
        snapshots: dict[int, tuple[Clause, ...]] = {}
        pending = list(cfg.checkpoints)

        def finish(status, model=None):
            conflicts = int(ist[K.CONFLICTS])
            if conflicts not in snapshots:
                snapshots[conflicts] = self.learnt_clauses()
            stats = {"conflicts": conflicts, "decisions": int(ist[K.DECISIONS]),
                     "propagations": int(ist[K.PROPS]), "restarts": int(ist[K.RESTARTS]),
                     "learnt_kept": int(ist[K.NLEARNT])}
            return _outcome(status, model, self.n, snapshots, conflicts, stats)

        if self.unsat:
            return finish(Status.UNSAT)
        while True:
            if cfg.conflict_budget is not None and ist[K.CONFLICTS] >= cfg.conflict_budget:
                return finish(Status.BUDGET_EXHAUSTED)
            stops = pending[:1]
            if cfg.conflict_budget is not None:
                stops.append(cfg.conflict_budget)
            stop = min(stops) if stops else np.iinfo(np.int64).max
            code = K.search(self.val, self.level, self.reason, self.phase, self.act,
                            self.heap, self.hpos, self.trail, self.trail_lim,
                            self.mem, self.cstart, self.clen, self.cflags, self.cact,
                            self.wpool, self.wstart, self.wsize, self.wcap, self.learnt_list,
                            self.seen, self.buf, ist, self.fst, stop)
            if code == K.GROW:
                self._grow()
            elif code == K.LIMIT:
                conflicts = int(ist[K.CONFLICTS])
                while pending and pending[0] <= conflicts:
                    snapshots[pending.pop(0)] = self.learnt_clauses()
                if cfg.conflict_budget is not None and conflicts >= cfg.conflict_budget:
                    return finish(Status.BUDGET_EXHAUSTED)
            elif code == K.SAT:
                model = tuple(bool(x) for x in (self.val[2: 2 * self.n + 2: 2] == 1))
                return finish(Status.SAT, model)
            elif code == K.UNSAT:
                return finish(Status.UNSAT)
            else:
                raise AssertionError("learnt clause is not 1UIP")


def solve(f: Formula, cfg: SolveConfig = SolveConfig()) -> SolveOutcome:
    cls = FastSolver if cfg.engine == "fast" else Solver
    return cls(f, cfg).solve()
