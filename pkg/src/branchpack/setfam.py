"""Families of disjoint subsets, their lattice order, and uncrossing.

Subsets of the ground set are int bitmasks.  A :class:`DisjointFamily` is a
set of pairwise disjoint nonempty subsets; a :class:`MultiFamily` is a
multiset of subsets kept as a sorted tuple.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .errors import ContractError, InputError


@dataclass(frozen=True)
class DisjointFamily:
    ground: int
    members: frozenset = frozenset()

    def __post_init__(self):
        members = frozenset(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        seen = 0
        for m in members:
            if m == 0:
                raise InputError("empty member in a disjoint family")
            if m & ~self.ground:
                raise InputError("member outside the ground set")
            if m & seen:
                raise InputError("members are not pairwise disjoint")
            seen |= m

    @property
    def union(self) -> int:
        u = 0
        for m in self.members:
            u |= m
        return u

    def sorted(self) -> tuple:
        return tuple(sorted(self.members))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.sorted())


@dataclass(frozen=True)
class MultiFamily:
    ground: int
    members: tuple = ()

    def __post_init__(self):
        members = tuple(sorted(int(m) for m in self.members))
        object.__setattr__(self, "members", members)
        for m in members:
            if m & ~self.ground:
                raise InputError("member outside the ground set")

    def count(self, v: int) -> int:
        """Number of members containing element ``v``."""
        return sum(1 for m in self.members if m >> v & 1)

    def maximal(self) -> tuple:
        """Distinct members not strictly contained in another member."""
        distinct = sorted(set(self.members))
        return tuple(X for X in distinct
                     if not any(X != Y and X & Y == X for Y in distinct))

    def __len__(self):
        return len(self.members)


def properly_intersecting(X: int, Y: int) -> bool:
    return bool(X & Y) and bool(X & ~Y) and bool(Y & ~X)


def _same_ground(F1, F2):
    if F1.ground != F2.ground:
        raise InputError("families live on different ground sets")


def family_leq(F1: DisjointFamily, F2: DisjointFamily) -> bool:
    """F1 <= F2: every member of F1 lies inside some member of F2."""
    _same_ground(F1, F2)
    return all(any(X & Y == X for Y in F2.members) for X in F1.members)


def family_join(F1: DisjointFamily, F2: DisjointFamily) -> DisjointFamily:
    """Least upper bound: unions of the components of the 'intersects' graph."""
    _same_ground(F1, F2)
    blocks = []
    for X in list(F1.members) + list(F2.members):
        merged = X
        while True:
            hit = [B for B in blocks if B & merged]
            if not hit:
                break
            for B in hit:
                blocks.remove(B)
                merged |= B
        blocks.append(merged)
    return DisjointFamily(F1.ground, frozenset(blocks))


def family_meet(F1: DisjointFamily, F2: DisjointFamily) -> DisjointFamily:
    """Greatest lower bound: all nonempty pairwise intersections."""
    _same_ground(F1, F2)
    return DisjointFamily(F1.ground, frozenset(
        X & Y for X in F1.members for Y in F2.members if X & Y))


def is_laminar(M) -> bool:
    members = list(M.members)
    return not any(properly_intersecting(members[a], members[b])
                   for a in range(len(members)) for b in range(a + 1, len(members)))


def crossing_pairs(M: MultiFamily) -> list:
    """Distinct properly intersecting pairs (X, Y), X < Y, in canonical order."""
    distinct = sorted(set(M.members))
    return [(X, Y) for a, X in enumerate(distinct) for Y in distinct[a + 1:]
            if properly_intersecting(X, Y)]


def pieo_step(M: MultiFamily, X: int, Y: int, kind: int) -> MultiFamily:
    """Replace one copy each of X and Y by their union and/or intersection.

    Type 1 puts back both, type 2 only the union, type 3 only the intersection.
    """
    if kind not in (1, 2, 3):
        raise ContractError(f"unknown elimination type {kind}")
    if not properly_intersecting(X, Y):
        raise ContractError("pair is not properly intersecting")
    rest = list(M.members)
    try:
        rest.remove(X)
        rest.remove(Y)
    except ValueError:
        raise ContractError("pair is not in the family") from None
    if kind in (1, 2):
        rest.append(X | Y)
    if kind in (1, 3):
        rest.append(X & Y)
    return MultiFamily(M.ground, tuple(rest))


@dataclass
class PieoTrace:
    steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    @property
    def types(self) -> list:
        return [kind for _, _, kind in self.steps]


Policy = Callable[[MultiFamily, list], tuple]


def first_pair_type1(M: MultiFamily, pairs: list) -> tuple:
    X, Y = pairs[0]
    return X, Y, 1


def random_policy(rng: random.Random, types=(1, 2, 3)) -> Policy:
    def policy(M, pairs):
        X, Y = rng.choice(pairs)
        return X, Y, rng.choice(types)
    return policy


def run_pieo(F1: DisjointFamily, F2: DisjointFamily,
             policy: Optional[Policy] = None, max_steps: int = 10_000):
    """Uncross F1 + F2 (multiset union) until laminar.

    Returns ``(F3, F4, trace)`` where F3 holds the maximal members of the
    final family and F4 the remaining ones.
    """
    _same_ground(F1, F2)
    policy = policy or first_pair_type1
    G = MultiFamily(F1.ground, tuple(F1.members) + tuple(F2.members))
    trace = PieoTrace(snapshots=[G])
    while True:
        pairs = crossing_pairs(G)
        if not pairs:
            break
        if len(trace.steps) >= max_steps:
            raise ContractError("uncrossing did not terminate")
        X, Y, kind = policy(G, pairs)
        if not properly_intersecting(X, Y) or X not in G.members or Y not in G.members:
            raise ContractError("policy chose a pair that is not properly intersecting")
        G = pieo_step(G, X, Y, kind)
        trace.steps.append((X, Y, kind))
        trace.snapshots.append(G)
    top = G.maximal()
    counts = Counter(G.members)
    for X in top:
        counts[X] -= 1
    rest = list(counts.elements())
    F3 = DisjointFamily(F1.ground, frozenset(top))
    F4 = DisjointFamily(F1.ground, frozenset(rest))
    if len(rest) != len(F4.members):
        raise ContractError("lower part of a laminar family is not disjoint")
    return F3, F4, trace
