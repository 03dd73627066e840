"""Digraphs with multiple arcs, arborescences, branchings and forest states.

Vertices and arcs are dense integer ids.  Vertex subsets are int bitmasks
(bit ``v`` set means vertex ``v`` is in the set); arc sets are frozensets of
arc ids.  Parallel arcs keep distinct ids.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from .errors import ContractError, InputError


def bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def submasks(mask: int) -> Iterator[int]:
    """Nonempty submasks of ``mask`` in increasing numeric order."""
    if not mask:
        return
    positions = list(bits(mask))
    for code in range(1, 1 << len(positions)):
        m = 0
        for j, p in enumerate(positions):
            if code >> j & 1:
                m |= 1 << p
        yield m


@dataclass(frozen=True)
class Digraph:
    """Loopless directed multigraph.

    ``names[v]`` is the external name of vertex ``v``; ``arcs[e]`` is the
    ``(tail, head)`` pair of arc ``e``.
    """

    names: tuple
    arcs: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))
        object.__setattr__(self, "arcs", tuple((int(t), int(h)) for t, h in self.arcs))
        if len(set(self.names)) != len(self.names):
            raise InputError("duplicate vertex names")
        n = len(self.names)
        for e, (t, h) in enumerate(self.arcs):
            if not (0 <= t < n and 0 <= h < n):
                raise InputError(f"arc {e} refers to an unknown vertex")
            if t == h:
                raise InputError(f"arc {e} is a loop")

    @classmethod
    def from_names(cls, vertices: Sequence[str], arcs: Iterable[tuple]) -> "Digraph":
        index = {str(v): i for i, v in enumerate(vertices)}
        try:
            arc_ids = [(index[str(t)], index[str(h)]) for t, h in arcs]
        except KeyError as exc:
            raise InputError(f"unknown vertex {exc.args[0]!r}") from None
        return cls(tuple(vertices), tuple(arc_ids))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def m(self) -> int:
        return len(self.arcs)

    @property
    def all_mask(self) -> int:
        return (1 << self.n) - 1

    def index(self, name: str) -> int:
        try:
            return self.names.index(str(name))
        except ValueError:
            raise InputError(f"unknown vertex {name!r}") from None

    def mask(self, names: Iterable[str]) -> int:
        return mask_of(self.index(v) for v in names)

    def names_of(self, mask: int) -> list:
        return [self.names[v] for v in bits(mask)]

    def check_mask(self, mask: int) -> None:
        if mask < 0 or mask & ~self.all_mask:
            raise InputError("vertex subset refers to an unknown vertex")

    def in_degrees(self, arcset: Optional[Iterable[int]] = None) -> list:
        deg = [0] * self.n
        for e in self._ids(arcset):
            deg[self.arcs[e][1]] += 1
        return deg

    def _ids(self, arcset):
        return range(self.m) if arcset is None else arcset


def count_arcs(D: Digraph, arcset: Optional[Iterable[int]], X: int, Y: int) -> int:
    """Number of arcs of ``arcset`` (all arcs if None) with tail in X and head in Y."""
    D.check_mask(X)
    D.check_mask(Y)
    total = 0
    for e in D._ids(arcset):
        t, h = D.arcs[e]
        if X >> t & 1 and Y >> h & 1:
            total += 1
    return total


def in_degree(D: Digraph, arcset: Optional[Iterable[int]], Y: int) -> int:
    """d^-(Y) within ``arcset``: arcs entering Y from its complement."""
    return count_arcs(D, arcset, D.all_mask & ~Y, Y)


def _parent_map(D: Digraph, arcs: Iterable[int]) -> Optional[dict]:
    parent = {}
    for e in arcs:
        if not (isinstance(e, int) and 0 <= e < D.m):
            return None
        t, h = D.arcs[e]
        if h in parent:
            return None
        parent[h] = t
    return parent


def _acyclic(parent: dict) -> bool:
    state = {}
    for start in parent:
        path = []
        v = start
        while v in parent and v not in state:
            state[v] = 1
            path.append(v)
            v = parent[v]
            if state.get(v) == 1:
                return False
        for u in path:
            state[u] = 2
    return True


def is_arborescence(D: Digraph, root: int, arcs: Iterable[int]) -> bool:
    """True iff ``arcs`` form a (possibly non-spanning) arborescence rooted at ``root``."""
    arcs = list(arcs)
    if len(set(arcs)) != len(arcs):
        return False
    parent = _parent_map(D, arcs)
    if parent is None or root in parent:
        return False
    # every vertex must lead back to the root through its unique in-arc
    for v in parent:
        seen = set()
        u = v
        while u != root:
            if u in seen or u not in parent:
                return False
            seen.add(u)
            u = parent[u]
    return True


def arborescence_vertices(D: Digraph, root: int, arcs: Iterable[int]) -> int:
    m = 1 << root
    for e in arcs:
        m |= 1 << D.arcs[e][1]
    return m


def is_branching(D: Digraph, arcs: Iterable[int]) -> bool:
    arcs = list(arcs)
    if len(set(arcs)) != len(arcs):
        return False
    parent = _parent_map(D, arcs)
    return parent is not None and _acyclic(parent)


def root_set(D: Digraph, arcs: Iterable[int]) -> int:
    """Mask of the in-degree-0 vertices of a branching."""
    arcs = list(arcs)
    if not is_branching(D, arcs):
        raise ContractError("root_set of a non-branching")
    heads = mask_of(D.arcs[e][1] for e in arcs)
    return D.all_mask & ~heads


@dataclass(frozen=True)
class RootedInstance:
    """A digraph on V+x together with its distinguished root x."""

    digraph: Digraph
    root: int

    def __post_init__(self):
        if not 0 <= self.root < self.digraph.n:
            raise InputError("root is not a vertex of the digraph")

    @property
    def V(self) -> int:
        return self.digraph.all_mask & ~(1 << self.root)

    @cached_property
    def root_arcs(self) -> frozenset:
        return frozenset(e for e, (t, _) in enumerate(self.digraph.arcs) if t == self.root)


@dataclass(frozen=True)
class ForestState:
    """Arc-disjoint x-arborescences F_1..F_k with a partition of their indices
    and optional lower/upper bounds on the root-arc count of every part.

    Forest and part indices are 0-based.  ``partition`` defaults to
    singletons.
    """

    inst: RootedInstance
    forests: tuple
    partition: tuple = None
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None
    _skip_checks: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        forests = tuple(frozenset(f) for f in self.forests)
        object.__setattr__(self, "forests", forests)
        k = len(forests)
        part = self.partition
        if part is None:
            part = tuple((i,) for i in range(k))
        part = tuple(tuple(sorted(int(i) for i in p)) for p in part)
        object.__setattr__(self, "partition", part)
        for name in ("lower", "upper"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, tuple(int(c) for c in val))
        if not self._skip_checks:
            self._validate()

    def _validate(self):
        D, x = self.inst.digraph, self.inst.root
        seen = set()
        for i, f in enumerate(self.forests):
            if not is_arborescence(D, x, f):
                raise InputError(f"forest {i} is not an arborescence rooted at the root")
            if seen & f:
                raise InputError("forests are not arc-disjoint")
            seen |= f
        flat = sorted(i for p in self.partition for i in p)
        if flat != list(range(self.k)) or any(not p for p in self.partition):
            raise InputError("partition is not a partition of the forest indices")
        for name in ("lower", "upper"):
            val = getattr(self, name)
            if val is not None:
                if len(val) != self.l:
                    raise InputError(f"{name} bounds need one entry per part")
                if any(c < 0 for c in val):
                    raise InputError(f"{name} bounds must be nonnegative")
        if self.lower is not None and self.upper is not None:
            if any(c > cp for c, cp in zip(self.lower, self.upper)):
                raise InputError("lower bound exceeds upper bound")

    # -- derived quantities -------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.forests)

    @property
    def l(self) -> int:
        return len(self.partition)

    @property
    def digraph(self) -> Digraph:
        return self.inst.digraph

    @property
    def root(self) -> int:
        return self.inst.root

    @cached_property
    def used(self) -> frozenset:
        return frozenset().union(*self.forests) if self.forests else frozenset()

    @cached_property
    def residual(self) -> tuple:
        """Arc ids of A minus the union of the forests, increasing."""
        return tuple(e for e in range(self.digraph.m) if e not in self.used)

    @cached_property
    def residual_nonroot(self) -> tuple:
        """Arc ids of A minus (union of forests and arcs leaving x)."""
        x = self.root
        return tuple(e for e in self.residual if self.digraph.arcs[e][0] != x)

    @cached_property
    def forest_vertices(self) -> tuple:
        D, x = self.digraph, self.root
        return tuple(arborescence_vertices(D, x, f) for f in self.forests)

    @cached_property
    def part_of(self) -> tuple:
        owner = [0] * self.k
        for a, p in enumerate(self.partition):
            for i in p:
                owner[i] = a
        return tuple(owner)

    @cached_property
    def part_masks(self) -> tuple:
        return tuple(mask_of(p) for p in self.partition)

    def root_degree(self, i: int) -> int:
        x = self.root
        return sum(1 for e in self.forests[i] if self.digraph.arcs[e][0] == x)

    @cached_property
    def part_root_degrees(self) -> tuple:
        return tuple(sum(self.root_degree(i) for i in p) for p in self.partition)

    def is_spanning(self, i: int) -> bool:
        return self.forest_vertices[i] == self.digraph.all_mask

    @property
    def all_spanning(self) -> bool:
        return all(self.is_spanning(i) for i in range(self.k))

    def index_mask(self, I: Iterable[int]) -> int:
        m = mask_of(I)
        if m & ~((1 << self.k) - 1):
            raise InputError("index set refers to an unknown forest")
        return m

    def is_part_union(self, Imask: int) -> bool:
        return all(Imask & pm in (0, pm) for pm in self.part_masks)

    def parts_inside(self, Imask: int) -> list:
        """Part indices alpha with I_alpha contained in the index mask."""
        return [a for a, pm in enumerate(self.part_masks) if Imask & pm == pm]

    def union_of_parts(self, part_code: int) -> int:
        """Index mask of the union of the parts selected by ``part_code``."""
        m = 0
        for a in bits(part_code):
            m |= self.part_masks[a]
        return m

    # -- updates (return new states) -----------------------------------------

    def with_arc(self, i: int, e: int) -> "ForestState":
        forests = list(self.forests)
        forests[i] = forests[i] | {e}
        return ForestState(self.inst, tuple(forests), self.partition,
                           self.lower, self.upper, _skip_checks=True)

    def with_bounds(self, lower="keep", upper="keep") -> "ForestState":
        return ForestState(
            self.inst, self.forests, self.partition,
            self.lower if lower == "keep" else lower,
            self.upper if upper == "keep" else upper,
        )


def p_mask(state: ForestState, Imask: int, X: int) -> int:
    """Bitmask form of P_I(X): indices in I whose forest misses X."""
    out = 0
    for i in bits(Imask):
        if not X & state.forest_vertices[i]:
            out |= 1 << i
    return out


def p_set(state: ForestState, I: Iterable[int], X: int) -> frozenset:
    """P_I(X) = {i in I : X does not meet V(F_i)}.  X must avoid the root."""
    state.digraph.check_mask(X)
    if X >> state.root & 1:
        raise InputError("X must not contain the root")
    return frozenset(bits(p_mask(state, state.index_mask(I), X)))


def w_value(state: ForestState, I: Iterable[int], u: int) -> int:
    """Capacity for new root arcs into ``u`` usable by forests indexed by I."""
    return _w(state, state.index_mask(I), u)


def _w(state: ForestState, Imask: int, u: int) -> int:
    D, x = state.digraph, state.root
    if not any(D.arcs[e] == (x, u) for e in range(D.m)):
        return 0
    missing = sum(1 for i in bits(Imask) if not state.forest_vertices[i] >> u & 1)
    free = sum(1 for e in state.residual if D.arcs[e] == (x, u))
    return min(missing, free)


def w_tilde(state: ForestState, I: Iterable[int], X: int) -> int:
    Imask = state.index_mask(I)
    return sum(_w(state, Imask, u) for u in bits(X))


def solution_problems(state: ForestState, forests) -> list:
    """Everything wrong with ``forests`` as a bounded spanning completion of ``state``.

    An empty list means the forests extend the inputs, are arc-disjoint
    spanning x-arborescences with |V| arcs each, and meet every active bound.
    """
    D, x = state.digraph, state.root
    forests = [frozenset(f) for f in forests]
    problems = []
    if len(forests) != state.k:
        return [f"expected {state.k} forests, got {len(forests)}"]
    seen = set()
    nV = D.n - 1
    for i, f in enumerate(forests):
        if not state.forests[i] <= f:
            problems.append(f"forest {i} drops input arcs")
        if not is_arborescence(D, x, f) or arborescence_vertices(D, x, f) != D.all_mask:
            problems.append(f"forest {i} is not a spanning arborescence")
        if len(f) != nV:
            problems.append(f"forest {i} has {len(f)} arcs, expected {nV}")
        if seen & f:
            problems.append(f"forest {i} reuses arcs")
        seen |= f
    degs = [sum(1 for i in p for e in forests[i] if D.arcs[e][0] == x) for p in state.partition]
    for a, d in enumerate(degs):
        if state.lower is not None and d < state.lower[a]:
            problems.append(f"part {a} has {d} root arcs, below {state.lower[a]}")
        if state.upper is not None and d > state.upper[a]:
            problems.append(f"part {a} has {d} root arcs, above {state.upper[a]}")
    return problems
