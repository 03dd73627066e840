"""Exhaustive reference searches.

Nothing here evaluates a cut condition.  Arcs are assigned one at a time
to a forest/colour or left unused, with only local pruning (in-degree, cycles,
bound counts), so verdicts are independent of the theory being tested.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .digraph import Digraph, ForestState, bits, mask_of
from .errors import InputError

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
BUDGET = "budget_exceeded"


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: Optional[int] = 2_000_000
    time_limit: Optional[float] = None

    def __post_init__(self):
        for v in (self.max_nodes, self.time_limit):
            if v is not None and v <= 0:
                raise InputError("budget limits must be positive")


@dataclass(frozen=True)
class BFResult:
    status: str
    witness: Optional[tuple] = None
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


class _OutOfBudget(Exception):
    pass


class _Counter:
    def __init__(self, budget: Optional[SearchBudget]):
        self.budget = budget or SearchBudget()
        self.nodes = 0
        self.deadline = (time.monotonic() + self.budget.time_limit
                         if self.budget.time_limit else None)

    def tick(self):
        self.nodes += 1
        if self.budget.max_nodes is not None and self.nodes > self.budget.max_nodes:
            raise _OutOfBudget
        if self.deadline is not None and not self.nodes & 1023 and time.monotonic() > self.deadline:
            raise _OutOfBudget


def _creates_cycle(parent: dict, u: int, v: int) -> bool:
    """Would u -> v close a directed cycle given in-forest parent pointers?"""
    w = u
    while w is not None:
        if w == v:
            return True
        w = parent.get(w)
    return False


def bf_feasible_completion(state: ForestState, budget: Optional[SearchBudget] = None) -> BFResult:
    """Search all extensions of the forests by unused arcs.

    Accepts when every forest spans and every active part bound holds;
    the witness is the tuple of completed forests.
    """
    D, x, k = state.digraph, state.root, state.k
    arcs = D.arcs
    parents = []
    for f in state.forests:
        parents.append({arcs[e][1]: arcs[e][0] for e in f})
    roots = [sum(1 for e in f if arcs[e][0] == x) for f in state.forests]
    owner = [0] * k
    for a, p in enumerate(state.partition):
        for i in p:
            owner[i] = a
    part_roots = [sum(roots[i] for i in p) for p in state.partition]
    lower, upper = state.lower, state.upper
    if upper is not None and any(r > c for r, c in zip(part_roots, upper)):
        return BFResult(INFEASIBLE)
    free = [e for e in range(D.m) if e not in state.used]
    last_into = {}
    for pos, e in enumerate(free):
        if arcs[e][1] != x:
            last_into[arcs[e][1]] = pos
    remaining_root = sum(1 for e in free if arcs[e][0] == x)
    chosen = [set(f) for f in state.forests]
    others = [v for v in range(D.n) if v != x]
    counter = _Counter(budget)

    def complete_at(v):
        return all(v in parents[i] for i in range(k))

    # vertices no free arc enters must already be covered everywhere
    for v in others:
        if v not in last_into and not complete_at(v):
            return BFResult(INFEASIBLE)

    def rec(pos, remaining_root):
        counter.tick()
        if lower is not None:
            for a in range(len(part_roots)):
                if part_roots[a] + remaining_root < lower[a]:
                    return False
        if pos == len(free):
            return True
        e = free[pos]
        u, v = arcs[e]
        is_root = u == x
        left = remaining_root - (1 if is_root else 0)
        last = last_into.get(v) == pos
        if v != x:
            for i in range(k):
                par = parents[i]
                if v in par or _creates_cycle(par, u, v):
                    continue
                a = owner[i]
                if is_root and upper is not None and part_roots[a] + 1 > upper[a]:
                    continue
                par[v] = u
                chosen[i].add(e)
                if is_root:
                    part_roots[a] += 1
                if (not last or complete_at(v)) and rec(pos + 1, left):
                    return True
                if is_root:
                    part_roots[a] -= 1
                chosen[i].discard(e)
                del par[v]
        if last and not complete_at(v):
            return False
        return rec(pos + 1, left)

    try:
        ok = rec(0, remaining_root)
    except _OutOfBudget:
        return BFResult(BUDGET, nodes=counter.nodes)
    if not ok:
        return BFResult(INFEASIBLE, nodes=counter.nodes)
    return BFResult(FEASIBLE, tuple(frozenset(c) for c in chosen), counter.nodes)


def bf_feasible_branchings(D: Digraph, k: int, *, root_bounds=None, part_bounds=None,
                           contain=None, rootsets=None, cover_all=False,
                           budget: Optional[SearchBudget] = None) -> BFResult:
    """Search for k arc-disjoint spanning branchings of D.

    root_bounds: per branching ``(lo, hi)`` on |R(B_i)| (either may be None).
    part_bounds: ``(partition, lo, hi)`` bounding sums of |R(B_i)| over parts.
    contain: vertex masks U_i that must lie inside R(B_i).
    rootsets: vertex masks R_i that must equal R(B_i).
    cover_all: every arc must be used (a decomposition).
    """
    n, arcs = D.n, D.arcs
    if k < 0:
        raise InputError("k must be nonnegative")
    rb = list(root_bounds) if root_bounds is not None else [(None, None)] * k
    if len(rb) != k:
        raise InputError("root_bounds needs one entry per branching")
    forbid = [0] * k     # heads that may not get an in-arc in branching i
    required = [0] * k   # heads that must get an in-arc in branching i
    for seq, exact in ((contain, False), (rootsets, True)):
        if seq is None:
            continue
        if len(seq) != k:
            raise InputError("one vertex set per branching is required")
        for i, U in enumerate(seq):
            U = U if isinstance(U, int) else mask_of(U)
            forbid[i] |= U
            if exact:
                required[i] |= D.all_mask & ~U
    groups = []
    if part_bounds is not None:
        partition, plo, phi = part_bounds
        for a, p in enumerate(partition):
            groups.append((tuple(p), None if plo is None else plo[a],
                           None if phi is None else phi[a]))
    # root counts: |R(B_i)| = n - (arcs in B_i); track arcs per branching
    size = [0] * k
    parents = [dict() for _ in range(k)]
    chosen = [set() for _ in range(k)]
    last_into = {}
    for e, (u, v) in enumerate(arcs):
        last_into[v] = e
    counter = _Counter(budget)

    def roots(i):
        return n - size[i]

    def feasible_counts(remaining):
        # roots only shrink as arcs are added; at most `remaining` more arcs
        for i, (lo, hi) in enumerate(rb):
            if lo is not None and roots(i) < lo:
                return False
            if hi is not None and roots(i) - remaining > hi:
                return False
        for p, lo, hi in groups:
            tot = sum(roots(i) for i in p)
            if lo is not None and tot < lo:
                return False
            if hi is not None and tot - remaining > hi:
                return False
        return True

    def ends_ok():
        for i, (lo, hi) in enumerate(rb):
            if (lo is not None and roots(i) < lo) or (hi is not None and roots(i) > hi):
                return False
        for p, lo, hi in groups:
            tot = sum(roots(i) for i in p)
            if (lo is not None and tot < lo) or (hi is not None and tot > hi):
                return False
        return True

    def required_met(v):
        return all(v in parents[i] for i in range(k) if required[i] >> v & 1)

    for v in range(n):
        if v not in last_into and any(required[i] >> v & 1 for i in range(k)):
            return BFResult(INFEASIBLE)

    def rec(e):
        counter.tick()
        if not feasible_counts(len(arcs) - e):
            return False
        if e == len(arcs):
            return ends_ok()
        u, v = arcs[e]
        last = last_into[v] == e
        for i in range(k):
            par = parents[i]
            if forbid[i] >> v & 1 or v in par or _creates_cycle(par, u, v):
                continue
            par[v] = u
            chosen[i].add(e)
            size[i] += 1
            if (not last or required_met(v)) and rec(e + 1):
                return True
            size[i] -= 1
            chosen[i].discard(e)
            del par[v]
        if cover_all or (last and not required_met(v)):
            return False
        return rec(e + 1)

    try:
        ok = rec(0)
    except _OutOfBudget:
        return BFResult(BUDGET, nodes=counter.nodes)
    if not ok:
        return BFResult(INFEASIBLE, nodes=counter.nodes)
    return BFResult(FEASIBLE, tuple(frozenset(c) for c in chosen), counter.nodes)


def bf_feasible_decomposition(D: Digraph, k: int, *, at_least: Optional[int] = None,
                              at_most: Optional[int] = None, root_bounds=None,
                              budget: Optional[SearchBudget] = None) -> BFResult:
    """Partition all arcs of D into k branchings with root-set size constraints."""
    if root_bounds is None:
        root_bounds = [(at_least, at_most)] * k
    return bf_feasible_branchings(D, k, root_bounds=root_bounds, cover_all=True,
                                  budget=budget)


def bf_cover(inst, budget: Optional[SearchBudget] = None) -> BFResult:
    """Search edge sets E outside E0, with d_E(t) <= g(t), covering p_T.

    Witness: sorted tuple of added (s, t) pairs.
    """
    S, T = list(inst.S), list(inst.T)
    nT = len(T)
    tpos = {t: j for j, t in enumerate(T)}
    base = [0] * nT  # neighbour masks over S, per t
    spos = {s: j for j, s in enumerate(S)}
    for s, t in inst.E0:
        base[tpos[t]] |= 1 << spos[s]
    slots = [(s, t) for t in T for s in S if not base[tpos[t]] >> spos[s] & 1]
    cap = list(inst.g)
    demands = [(X, inst.p_T[X]) for X in range(1, 1 << nT) if inst.p_T[X] > 0]

    def covers(nbr):
        for X, need in demands:
            gam = 0
            for j in bits(X):
                gam |= nbr[j]
            if gam.bit_count() < need:
                return False
        return True

    counter = _Counter(budget)
    nbr = list(base)
    picked = []

    def rec(pos):
        counter.tick()
        if covers(nbr):
            return True
        if pos == len(slots):
            return False
        # optimistic bound: all remaining slots that still fit the caps
        opt = list(nbr)
        for s, t in slots[pos:]:
            if cap[tpos[t]] > 0:
                opt[tpos[t]] |= 1 << spos[s]
        if not covers(opt):
            return False
        s, t = slots[pos]
        j = tpos[t]
        if cap[j] > 0:
            cap[j] -= 1
            nbr[j] |= 1 << spos[s]
            picked.append((s, t))
            if rec(pos + 1):
                return True
            picked.pop()
            nbr[j] ^= 1 << spos[s]
            cap[j] += 1
        return rec(pos + 1)

    try:
        ok = rec(0)
    except _OutOfBudget:
        return BFResult(BUDGET, nodes=counter.nodes)
    if not ok:
        return BFResult(INFEASIBLE, nodes=counter.nodes)
    return BFResult(FEASIBLE, tuple(sorted(picked)), counter.nodes)
