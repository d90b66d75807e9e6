"""Compiled CDCL search loop used by :class:`satcomm.cdcl.FastSolver`.

Same algorithm as the reference solver in :mod:`satcomm.cdcl`, laid out in
flat arrays so numba can compile it:

* clauses live in one int32 arena ``mem``; clause k is
  ``mem[cstart[k]:cstart[k] + clen[k]]``;
* the first two literals of a clause are its watches; the watch list of
  ``lit`` is ``wsize[lit]`` ``(clause, blocker)`` pairs stored from
  ``wpool[2 * wstart[lit]]`` with room for ``wcap[lit]`` pairs. A full list
  moves to the end of the pool; a full pool is compacted;
* scalar state is kept in the ``ist`` / ``fst`` arrays so a search can be
  suspended (checkpoint, capacity) and resumed.
"""

import numpy as np
from numba import njit

# ist slots
N, TRAIL, QHEAD, LEVELS, NCLAUSES, MEMUSED, HEAPSIZE = 0, 1, 2, 3, 4, 5, 6
CONFLICTS, DECISIONS, PROPS, RESTARTS, NLEARNT = 7, 8, 9, 10, 11
SINCE_RESTART, RESTART_AT, ADJUST_CNT, WASTED, RNG = 12, 13, 14, 15, 16
RESTART_UNIT, REDUCE_ON, NREDUCE, POOLUSED = 17, 18, 19, 20
IST_SIZE = 21
# fst slots
VAR_INC, CLA_INC, VAR_DECAY_INV, RANDOM_FREQ = 0, 1, 2, 3
MAX_LEARNTS, ADJUST_CONFL, LEARNT_GROWTH = 4, 5, 6
FST_SIZE = 7

# return codes
LIMIT, SAT, UNSAT, GROW, BROKEN = 0, 1, 2, 3, 9

LEARNT, DELETED = 1, 2


@njit(cache=True)
def luby(i):
    size = 1
    seq = 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


@njit(cache=True)
def _rand(ist):
    # xorshift64*, state kept in ist[RNG]
    x = np.uint64(ist[RNG])
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    ist[RNG] = np.int64(x)
    r = x * np.uint64(2685821657736338717)
    return (r >> np.uint64(11)) * (1.0 / 9007199254740992.0)


# -- activity heap --------------------------------------------------------------

@njit(cache=True)
def _heap_up(heap, pos, act, i):
    v = heap[i]
    a = act[v]
    while i > 0:
        parent = (i - 1) >> 1
        u = heap[parent]
        if act[u] >= a:
            break
        heap[i] = u
        pos[u] = i
        i = parent
    heap[i] = v
    pos[v] = i


@njit(cache=True)
def _heap_down(heap, pos, act, i, size):
    v = heap[i]
    a = act[v]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and act[heap[child + 1]] > act[heap[child]]:
            child += 1
        u = heap[child]
        if act[u] <= a:
            break
        heap[i] = u
        pos[u] = i
        i = child
    heap[i] = v
    pos[v] = i


@njit(cache=True)
def heap_insert(heap, pos, act, ist, v):
    if pos[v] >= 0:
        return
    size = ist[HEAPSIZE]
    heap[size] = v
    pos[v] = size
    ist[HEAPSIZE] = size + 1
    _heap_up(heap, pos, act, size)


@njit(cache=True)
def _heap_pop(heap, pos, act, ist):
    size = ist[HEAPSIZE]
    v = heap[0]
    pos[v] = -1
    size -= 1
    ist[HEAPSIZE] = size
    if size > 0:
        heap[0] = heap[size]
        pos[heap[0]] = 0
        _heap_down(heap, pos, act, 0, size)
    return v


@njit(cache=True)
def _bump_var(heap, pos, act, ist, fst, v):
    act[v] += fst[VAR_INC]
    if act[v] > 1e100:
        n = ist[N]
        for i in range(1, n + 1):
            act[i] *= 1e-100
        fst[VAR_INC] *= 1e-100
    if pos[v] >= 0:
        _heap_up(heap, pos, act, pos[v])


@njit(cache=True)
def _bump_clause(cact, learnt_list, ist, fst, k):
    cact[k] += fst[CLA_INC]
    if cact[k] > 1e20:
        for i in range(ist[NLEARNT]):
            cact[learnt_list[i]] *= 1e-20
        fst[CLA_INC] *= 1e-20


# -- clause database ----------------------------------------------------------

@njit(cache=True)
def pool_pairs(num_lits, clause_cap):
    """Pool size (in pairs) that always leaves room after compaction."""
    return 16 * num_lits + 24 * clause_cap + 64


@njit(cache=True)
def _compact_pool(wpool, wstart, wsize, wcap, ist):
    tmp = np.empty_like(wpool)
    pos = 0
    for lit in range(wstart.shape[0]):
        sz = wsize[lit]
        src = 2 * wstart[lit]
        tmp[2 * pos: 2 * pos + 2 * sz] = wpool[src: src + 2 * sz]
        wstart[lit] = pos
        cap = max(4, 2 * sz)
        wcap[lit] = cap
        pos += cap
    wpool[: 2 * pos] = tmp[: 2 * pos]
    ist[POOLUSED] = pos


@njit(cache=True)
def _watch(wpool, wstart, wsize, wcap, ist, lit, k, blocker):
    sz = wsize[lit]
    if sz == wcap[lit]:
        cap = max(8, 2 * sz)
        if 2 * (ist[POOLUSED] + cap) > wpool.shape[0]:
            _compact_pool(wpool, wstart, wsize, wcap, ist)
        src = 2 * wstart[lit]
        dst = ist[POOLUSED]
        for t in range(2 * sz):
            wpool[2 * dst + t] = wpool[src + t]
        wstart[lit] = dst
        wcap[lit] = cap
        ist[POOLUSED] = dst + cap
    at = 2 * (wstart[lit] + sz)
    wpool[at] = k
    wpool[at + 1] = blocker
    wsize[lit] = sz + 1


@njit(cache=True)
def attach(mem, cstart, clen, cflags, cact, wpool, wstart, wsize, wcap, ist,
           lits, nlits, flags):
    """Append a clause (lits[:nlits]) and watch its first two literals."""
    k = ist[NCLAUSES]
    s = ist[MEMUSED]
    for j in range(nlits):
        mem[s + j] = lits[j]
    cstart[k] = s
    clen[k] = nlits
    cflags[k] = flags
    cact[k] = 0.0
    ist[MEMUSED] = s + nlits
    ist[NCLAUSES] = k + 1
    if nlits >= 2:
        _watch(wpool, wstart, wsize, wcap, ist, lits[0], k, lits[1])
        _watch(wpool, wstart, wsize, wcap, ist, lits[1], k, lits[0])
    return k


@njit(cache=True)
def _rebuild_watches(mem, cstart, clen, cflags, wpool, wstart, wsize, wcap, ist):
    wsize[:] = 0
    for k in range(ist[NCLAUSES]):
        if clen[k] < 2 or cflags[k] & DELETED:
            continue
        s = cstart[k]
        _watch(wpool, wstart, wsize, wcap, ist, mem[s], k, mem[s + 1])
        _watch(wpool, wstart, wsize, wcap, ist, mem[s + 1], k, mem[s])


@njit(cache=True)
def _collect(mem, cstart, clen, cflags, cact, wpool, wstart, wsize, wcap,
             reason, trail, learnt_list, ist):
    """Compact the arena in place, renumbering live clauses."""
    nc = ist[NCLAUSES]
    newid = np.full(nc, -1, np.int32)
    nk = 0
    pos = 0
    for k in range(nc):
        if cflags[k] & DELETED:
            continue
        s = cstart[k]
        L = clen[k]
        for j in range(L):
            mem[pos + j] = mem[s + j]
        cstart[nk] = pos
        clen[nk] = L
        cflags[nk] = cflags[k]
        cact[nk] = cact[k]
        newid[k] = nk
        pos += L
        nk += 1
    ist[NCLAUSES] = nk
    ist[MEMUSED] = pos
    ist[WASTED] = 0
    for i in range(ist[TRAIL]):
        v = trail[i] >> 1
        if reason[v] >= 0:
            reason[v] = newid[reason[v]]
    m = 0
    for i in range(ist[NLEARNT]):
        k = newid[learnt_list[i]]
        if k >= 0:
            learnt_list[m] = k
            m += 1
    ist[NLEARNT] = m
    _rebuild_watches(mem, cstart, clen, cflags, wpool, wstart, wsize, wcap, ist)


@njit(cache=True)
def _reduce(val, reason, mem, cstart, clen, cflags, cact, learnt_list, ist):
    """Delete the less active half of the learnt clauses; clauses of
    length <= 2 and clauses currently serving as a reason are kept."""
    m = ist[NLEARNT]
    cand = np.empty(m, np.int32)
    nc = 0
    for i in range(m):
        k = learnt_list[i]
        if clen[k] > 2:
            cand[nc] = k
            nc += 1
    cand = cand[:nc]
    acts = np.empty(nc)
    for i in range(nc):
        acts[i] = cact[cand[i]]
    order = np.argsort(acts, kind="mergesort")
    target = m // 2
    removed = 0
    for i in range(nc):
        if removed >= target:
            break
        k = cand[order[i]]
        s = cstart[k]
        locked = False
        for w in range(2):
            lit = mem[s + w]
            if val[lit] == 1 and reason[lit >> 1] == k:
                locked = True
        if locked:
            continue
        cflags[k] |= DELETED
        ist[WASTED] += clen[k]
        removed += 1
    j = 0
    for i in range(m):
        k = learnt_list[i]
        if not cflags[k] & DELETED:
            learnt_list[j] = k
            j += 1
    ist[NLEARNT] = j


# -- search ---------------------------------------------------------------------

@njit(cache=True)
def _assign(val, level, reason, trail, ist, p, r):
    val[p] = 1
    val[p ^ 1] = -1
    v = p >> 1
    level[v] = ist[LEVELS]
    reason[v] = r
    trail[ist[TRAIL]] = p
    ist[TRAIL] += 1


@njit(cache=True)
def _backtrack(val, reason, phase, act, heap, hpos, trail, trail_lim, ist, lvl):
    if ist[LEVELS] <= lvl:
        return
    start = trail_lim[lvl]
    for i in range(ist[TRAIL] - 1, start - 1, -1):
        p = trail[i]
        v = p >> 1
        val[p] = 0
        val[p ^ 1] = 0
        phase[v] = 1 - (p & 1)
        reason[v] = -1
        heap_insert(heap, hpos, act, ist, v)
    ist[TRAIL] = start
    ist[QHEAD] = start
    ist[LEVELS] = lvl


@njit(cache=True)
def _purge(cflags, wpool, wstart, wsize):
    """Drop watchers of deleted clauses so propagation never checks flags."""
    for lit in range(wstart.shape[0]):
        base = 2 * wstart[lit]
        j = 0
        for i in range(wsize[lit]):
            k = wpool[base + 2 * i]
            if not cflags[k] & DELETED:
                wpool[base + 2 * j] = k
                wpool[base + 2 * j + 1] = wpool[base + 2 * i + 1]
                j += 1
        wsize[lit] = j


@njit(cache=True)
def _propagate(val, level, reason, trail, mem, cstart, clen, cflags,
               wpool, wstart, wsize, wcap, ist):
    qhead = ist[QHEAD]
    props = 0
    while qhead < ist[TRAIL]:
        p = trail[qhead]
        qhead += 1
        props += 1
        fl = p ^ 1
        ws = wpool
        base = 2 * wstart[fl]
        size = wsize[fl]
        i = 0
        j = 0
        while i < size:
            k = ws[base + 2 * i]
            b = ws[base + 2 * i + 1]
            i += 1
            if val[b] == 1:
                ws[base + 2 * j] = k
                ws[base + 2 * j + 1] = b
                j += 1
                continue
            s = cstart[k]
            # keep the false watch at position 1
            if mem[s] == fl:
                mem[s] = mem[s + 1]
                mem[s + 1] = fl
            first = mem[s]
            if val[first] == 1:
                ws[base + 2 * j] = k
                ws[base + 2 * j + 1] = first
                j += 1
                continue
            moved = False
            for t in range(s + 2, s + clen[k]):
                q = mem[t]
                if val[q] != -1:
                    mem[s + 1] = q
                    mem[t] = fl
                    _watch(wpool, wstart, wsize, wcap, ist, q, k, first)
                    # compaction may have moved this list
                    base = 2 * wstart[fl]
                    moved = True
                    break
            if moved:
                continue
            ws[base + 2 * j] = k
            ws[base + 2 * j + 1] = first
            j += 1
            if val[first] == -1:
                while i < size:
                    ws[base + 2 * j] = ws[base + 2 * i]
                    ws[base + 2 * j + 1] = ws[base + 2 * i + 1]
                    i += 1
                    j += 1
                wsize[fl] = j
                ist[QHEAD] = ist[TRAIL]
                ist[PROPS] += props
                return k
            _assign(val, level, reason, trail, ist, first, k)
        wsize[fl] = j
    ist[QHEAD] = qhead
    ist[PROPS] += props
    return -1


@njit(cache=True)
def search(val, level, reason, phase, act, heap, hpos, trail, trail_lim,
           mem, cstart, clen, cflags, cact, wpool, wstart, wsize, wcap, learnt_list,
           seen, buf, ist, fst, stop):
    n = ist[N]
    while True:
        if (ist[MEMUSED] + n + 1 > mem.shape[0] or ist[NCLAUSES] + 1 > clen.shape[0]
                or wpool.shape[0] < 2 * pool_pairs(wstart.shape[0], clen.shape[0])):
            return GROW
        confl = _propagate(val, level, reason, trail, mem, cstart, clen, cflags,
                           wpool, wstart, wsize, wcap, ist)
        if confl >= 0:
            ist[CONFLICTS] += 1
            ist[SINCE_RESTART] += 1
            if ist[LEVELS] == 0:
                return UNSAT
            # first-UIP analysis
            cur = ist[LEVELS]
            path = 0
            p = -1
            idx = ist[TRAIL] - 1
            k = confl
            nb = 1
            while True:
                if cflags[k] & LEARNT:
                    _bump_clause(cact, learnt_list, ist, fst, k)
                s = cstart[k]
                for j in range(s, s + clen[k]):
                    q = mem[j]
                    if q == p:
                        continue
                    v = q >> 1
                    if seen[v] == 0 and level[v] > 0:
                        seen[v] = 1
                        _bump_var(heap, hpos, act, ist, fst, v)
                        if level[v] >= cur:
                            path += 1
                        else:
                            buf[nb] = q
                            nb += 1
                while seen[trail[idx] >> 1] == 0:
                    idx -= 1
                p = trail[idx]
                idx -= 1
                v = p >> 1
                k = reason[v]
                seen[v] = 0
                path -= 1
                if path == 0:
                    break
            buf[0] = p ^ 1
            at_cur = 0
            back = 0
            hi = 1
            for j in range(nb):
                lv = level[buf[j] >> 1]
                if lv == cur:
                    at_cur += 1
                if j > 0:
                    seen[buf[j] >> 1] = 0
                    if lv > back:
                        back = lv
                        hi = j
            if at_cur != 1:
                return BROKEN
            if nb > 1:
                t = buf[1]
                buf[1] = buf[hi]
                buf[hi] = t
            _backtrack(val, reason, phase, act, heap, hpos, trail, trail_lim, ist, back)
            k = attach(mem, cstart, clen, cflags, cact, wpool, wstart, wsize, wcap, ist,
                       buf, nb, LEARNT)
            learnt_list[ist[NLEARNT]] = k
            ist[NLEARNT] += 1
            _bump_clause(cact, learnt_list, ist, fst, k)
            _assign(val, level, reason, trail, ist, buf[0], k if nb > 1 else -1)
            fst[VAR_INC] *= fst[VAR_DECAY_INV]
            fst[CLA_INC] *= 1.001
            ist[ADJUST_CNT] -= 1
            if ist[ADJUST_CNT] == 0:
                fst[ADJUST_CONFL] *= 1.5
                ist[ADJUST_CNT] = int(fst[ADJUST_CONFL])
                fst[MAX_LEARNTS] *= fst[LEARNT_GROWTH]
            if ist[CONFLICTS] >= stop:
                return LIMIT
            continue

        if ist[RESTART_AT] > 0 and ist[SINCE_RESTART] >= ist[RESTART_AT]:
            ist[RESTARTS] += 1
            ist[SINCE_RESTART] = 0
            ist[RESTART_AT] = ist[RESTART_UNIT] * luby(ist[RESTARTS])
            _backtrack(val, reason, phase, act, heap, hpos, trail, trail_lim, ist, 0)
            continue
        if ist[REDUCE_ON] and ist[NLEARNT] - ist[TRAIL] >= fst[MAX_LEARNTS]:
            _reduce(val, reason, mem, cstart, clen, cflags, cact, learnt_list, ist)
            ist[NREDUCE] += 1
            if 2 * ist[WASTED] > ist[MEMUSED]:
                _collect(mem, cstart, clen, cflags, cact, wpool, wstart, wsize, wcap,
                         reason, trail, learnt_list, ist)
            else:
                _purge(cflags, wpool, wstart, wsize)

        # decide
        v = -1
        if fst[RANDOM_FREQ] > 0 and _rand(ist) < fst[RANDOM_FREQ] and ist[HEAPSIZE] > 0:
            u = heap[int(_rand(ist) * ist[HEAPSIZE])]
            if val[2 * u] == 0:
                v = u
        while v == -1 and ist[HEAPSIZE] > 0:
            u = _heap_pop(heap, hpos, act, ist)
            if val[2 * u] == 0:
                v = u
        if v == -1:
            return SAT
        ist[DECISIONS] += 1
        trail_lim[ist[LEVELS]] = ist[TRAIL]
        ist[LEVELS] += 1
        _assign(val, level, reason, trail, ist, 2 * v + (0 if phase[v] else 1), -1)
