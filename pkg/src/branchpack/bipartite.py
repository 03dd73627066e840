"""Bipartite covering of a supermodular demand with per-vertex degree caps.

An instance is a simple bipartite graph G0 = (S, T; E0), a demand p_T on
nonempty subsets of T, and caps g on T.  We look for new edges E with
d_E(t) <= g(t) such that |Gamma(X)| >= p_T(X) for every X in G0 + E.

Arborescence completion reduces to this: S are the forests, T the
vertices, and an edge i-v means F_i already reaches v.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .digraph import ForestState, _w, bits, in_degree
from .errors import CapacityError, ContractError, InputError
from .oracles import ViolationCertificate

COVER_LIMIT = 16
VALIDATE_LIMIT = 10


@dataclass(frozen=True)
class BipartiteInstance:
    """``p_T`` is indexed by bitmask over positions in ``T`` (entry 0 unused);
    ``g`` is aligned with ``T``."""

    S: tuple
    T: tuple
    E0: frozenset
    p_T: tuple
    g: tuple
    validate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(self.S))
        object.__setattr__(self, "T", tuple(self.T))
        edges = [tuple(e) for e in self.E0]
        object.__setattr__(self, "E0", frozenset(edges))
        object.__setattr__(self, "p_T", tuple(int(v) for v in self.p_T))
        object.__setattr__(self, "g", tuple(int(v) for v in self.g))
        if len(edges) != len(self.E0):
            raise InputError("E0 has repeated edges")
        if len(set(self.S)) != len(self.S) or len(set(self.T)) != len(self.T):
            raise InputError("S and T must not repeat elements")
        if set(self.S) & set(self.T):
            raise InputError("S and T must be disjoint")
        Sset, Tset = set(self.S), set(self.T)
        if any(s not in Sset or t not in Tset for s, t in self.E0):
            raise InputError("edges must join S to T")
        if len(self.T) > COVER_LIMIT:
            raise CapacityError(f"|T| = {len(self.T)} exceeds {COVER_LIMIT}")
        if len(self.p_T) != 1 << len(self.T) or len(self.g) != len(self.T):
            raise InputError("p_T needs 2^|T| entries and g one per element of T")
        if any(v < 0 for v in self.g):
            raise InputError("caps must be nonnegative")
        if any(v > len(self.S) for v in self.p_T[1:]):
            raise InputError("demand exceeds |S|")
        if self.validate:
            bad = supermodularity_violation(self)
            if bad is not None:
                raise InputError(f"p_T is not positively intersecting supermodular at {bad}")

    @property
    def full(self) -> int:
        return (1 << len(self.T)) - 1

    def neighbour_masks(self, extra=()) -> list:
        spos = {s: j for j, s in enumerate(self.S)}
        tpos = {t: j for j, t in enumerate(self.T)}
        nbr = [0] * len(self.T)
        for s, t in list(self.E0) + list(extra):
            nbr[tpos[t]] |= 1 << spos[s]
        return nbr

    def names(self, X: int) -> list:
        return [self.T[j] for j in bits(X)]

    def mask(self, names) -> int:
        pos = {t: j for j, t in enumerate(self.T)}
        try:
            return sum(1 << pos[t] for t in set(names))
        except KeyError as exc:
            raise InputError(f"unknown element {exc.args[0]!r}") from None

    # JSON form: sets as string lists, p_T keyed by comma-joined sorted names
    def to_json(self) -> dict:
        return {
            "S": [str(s) for s in self.S],
            "T": [str(t) for t in self.T],
            "E0": sorted([str(s), str(t)] for s, t in self.E0),
            "p_T": {",".join(sorted(str(t) for t in self.names(X))): self.p_T[X]
                    for X in range(1, 1 << len(self.T)) if self.p_T[X]},
            "g": {str(t): self.g[j] for j, t in enumerate(self.T)},
        }

    @classmethod
    def from_json(cls, obj: dict, validate=True) -> "BipartiteInstance":
        try:
            S, T = [str(s) for s in obj["S"]], [str(t) for t in obj["T"]]
            table = [0] * (1 << len(T))
            pos = {t: j for j, t in enumerate(T)}
            for key, val in obj.get("p_T", {}).items():
                X = 0
                for name in key.split(","):
                    X |= 1 << pos[name]
                table[X] = int(val)
            g = obj.get("g", {})
            caps = [int(g.get(t, 0)) for t in T]
            E0 = frozenset((str(s), str(t)) for s, t in obj.get("E0", []))
            if len(E0) != len(obj.get("E0", [])):
                raise InputError("E0 has repeated edges")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed bipartite instance: {exc}") from None
        return cls(tuple(S), tuple(T), E0, tuple(table), tuple(caps), validate)


def supermodularity_violation(inst: BipartiteInstance) -> Optional[tuple]:
    """First properly intersecting pair with positive values breaking supermodularity."""
    n = len(inst.T)
    if n > VALIDATE_LIMIT:
        raise CapacityError(f"validation enumerates pairs; |T| = {n} exceeds {VALIDATE_LIMIT}")
    p = inst.p_T
    pos = [X for X in range(1, 1 << n) if p[X] > 0]
    for a, X in enumerate(pos):
        for Y in pos[a + 1:]:
            if X & Y and X & ~Y and Y & ~X and p[X] + p[Y] > p[X | Y] + p[X & Y]:
                return X, Y
    return None


def _gamma(nbr, X) -> int:
    g = 0
    for j in bits(X):
        g |= nbr[j]
    return g


def eval_cond_44(inst: BipartiteInstance, T0: int) -> tuple:
    nbr = inst.neighbour_masks()
    lhs = _gamma(nbr, T0).bit_count() + sum(inst.g[j] for j in bits(T0))
    return lhs, inst.p_T[T0]


def check_cond_44(inst: BipartiteInstance, *, maximal=True) -> Optional[ViolationCertificate]:
    """|Gamma(T0)| + g(T0) >= p_T(T0) for every nonempty T0."""
    nbr = inst.neighbour_masks()
    found = None
    for X in range(1, 1 << len(inst.T)):
        lhs = _gamma(nbr, X).bit_count() + sum(inst.g[j] for j in bits(X))
        if lhs < inst.p_T[X]:
            cert = ViolationCertificate("cond44", (X,), (), lhs, inst.p_T[X])
            if not maximal:
                return cert
            if found is None or (X.bit_count(), X) > (found.family[0].bit_count(), found.family[0]):
                found = cert
    return found


@dataclass(frozen=True)
class CoverResult:
    edges: Optional[tuple] = None
    certificate: Optional[ViolationCertificate] = None
    steps: tuple = ()   # ("add_edge", s, t) or ("lower_cap", t)

    @property
    def ok(self) -> bool:
        return self.edges is not None


def covers(inst: BipartiteInstance, edges) -> bool:
    """Validator: simple, caps respected, and every demand met."""
    edges = [tuple(e) for e in edges]
    if len(set(edges)) != len(edges) or set(edges) & inst.E0:
        return False
    Sset = set(inst.S)
    tpos = {t: j for j, t in enumerate(inst.T)}
    deg = [0] * len(inst.T)
    for s, t in edges:
        if s not in Sset or t not in tpos:
            return False
        deg[tpos[t]] += 1
    if any(d > c for d, c in zip(deg, inst.g)):
        return False
    nbr = inst.neighbour_masks(edges)
    return all(_gamma(nbr, X).bit_count() >= inst.p_T[X] for X in range(1, 1 << len(inst.T)))


def cover_greedy(inst: BipartiteInstance) -> CoverResult:
    """Constructive cover: spend caps one at a time, keeping the cap condition.

    For the first t0 with remaining cap: if no set through t0 is tight, the
    cap is simply lowered.  Otherwise T1 is the union of the tight sets through
    t0 (itself tight), and t0 gets an edge to the first s outside Gamma(T1).
    """
    cert = check_cond_44(inst)
    if cert is not None:
        return CoverResult(certificate=cert)
    n = len(inst.T)
    g = list(inst.g)
    added = []
    steps = []
    nbr = inst.neighbour_masks()
    p = inst.p_T

    def slack(X):
        return _gamma(nbr, X).bit_count() + sum(g[j] for j in bits(X)) - p[X]

    while True:
        live = [j for j in range(n) if g[j] > 0]
        if not live:
            break
        j0 = live[0]
        tight = [X for X in range(1, 1 << n) if X >> j0 & 1 and slack(X) == 0]
        if tight:
            T1 = 0
            for X in tight:
                T1 |= X
            if slack(T1) != 0:
                raise ContractError("union of tight sets through t0 is not tight")
            outside = [s for j, s in enumerate(inst.S) if not _gamma(nbr, T1) >> j & 1]
            if not outside:
                raise ContractError("tight set already sees all of S")
            s0 = outside[0]
            nbr[j0] |= 1 << inst.S.index(s0)
            added.append((s0, inst.T[j0]))
            steps.append(("add_edge", s0, inst.T[j0]))
        else:
            steps.append(("lower_cap", inst.T[j0]))
        g[j0] -= 1
        if any(slack(X) < 0 for X in range(1, 1 << n) if X >> j0 & 1):
            raise ContractError("greedy step broke the cap condition")
    if not covers(inst, added):
        raise ContractError("greedy edges do not cover the demand")
    return CoverResult(edges=tuple(added), steps=tuple(steps))


def lemma53_reduce(state: ForestState) -> BipartiteInstance:
    """Bipartite form of the completion problem for ``state``.

    S = forests, T = V, E0 = {(F_i, v) : v in V(F_i)},
    p_T(X) = max(0, k - d^-(X)) over residual non-root arcs, g(v) = w_[k](v).
    """
    D, x, k = state.digraph, state.root, state.k
    T_ids = [v for v in range(D.n) if v != x]
    S = tuple(f"F{i}" for i in range(k))
    T = tuple(D.names[v] for v in T_ids)
    E0 = frozenset((S[i], D.names[v]) for i in range(k) for v in T_ids
                   if state.forest_vertices[i] >> v & 1)
    pool = state.residual_nonroot
    table = [0] * (1 << len(T_ids))
    for X in range(1, 1 << len(T_ids)):
        Xv = sum(1 << T_ids[j] for j in bits(X))
        table[X] = max(0, k - in_degree(D, pool, Xv))
    full = (1 << k) - 1
    g = tuple(_w(state, full, v) for v in T_ids)
    return BipartiteInstance(S, T, E0, tuple(table), g)


def vertex_mask_of(state: ForestState, T0: int) -> int:
    """Translate a mask over T positions back to a vertex mask of the digraph."""
    T_ids = [v for v in range(state.digraph.n) if v != state.root]
    return sum(1 << T_ids[j] for j in bits(T0))


def cover_to_completion(state: ForestState, edges):
    """Turn a cover of the reduced instance into spanning forests.

    Each edge (F_i, v) becomes a free root arc x -> v added to F_i; the rest
    is completed with non-root arcs only.
    """
    from .augment import complete_to_spanning

    D, x = state.digraph, state.root
    free = {}
    for e in state.residual:
        t, h = D.arcs[e]
        if t == x:
            free.setdefault(h, []).append(e)
    for s, t in sorted(edges, key=lambda st: (D.index(st[1]), int(st[0][1:]))):
        i, v = int(s[1:]), D.index(t)
        if not free.get(v):
            raise InputError(f"no free root arc into {t}")
        state = state.with_arc(i, free[v].pop(0))
    return complete_to_spanning(state, state.residual_nonroot)
