"""Branching packings via a super-root.

Each problem on a plain digraph D adds a new vertex x with arcs into D and
solves a completion problem on the result.  Vertex ids of D are kept and x
gets id ``D.n``.  Arc ids of D are kept and the new root arcs come after
them.  Branching i is then F*_i minus its root arcs, so |R(B_i)| equals
the number of root arcs in F*_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import augment, oracles
from .digraph import Digraph, ForestState, RootedInstance, bits, is_branching, mask_of, root_set
from .errors import ContractError, InputError


@dataclass(frozen=True)
class PackResult:
    branchings: Optional[tuple] = None
    certificate: Optional[oracles.ViolationCertificate] = None
    steps: tuple = field(default_factory=tuple)
    forests: Optional[tuple] = None   # completed forests in the reduced digraph

    @property
    def ok(self) -> bool:
        return self.branchings is not None


def root_name(D: Digraph) -> str:
    name = "x"
    while name in D.names:
        name += "'"
    return name


def super_root(D: Digraph, heads: Sequence[int]) -> RootedInstance:
    """D plus a new root with one arc to each entry of ``heads`` (in order)."""
    x = D.n
    arcs = tuple(D.arcs) + tuple((x, v) for v in heads)
    return RootedInstance(Digraph(tuple(D.names) + (root_name(D),), arcs), x)


def parallel_root_state(D: Digraph, k: int, U=None, partition=None, lower=None,
                        upper=None) -> ForestState:
    """k parallel root arcs into every vertex; forest i starts as the star on U_i.

    The arc from x to v reserved for forest i has id ``D.m + v*k + i``.
    """
    inst = super_root(D, [v for v in range(D.n) for _ in range(k)])
    U = [0] * k if U is None else [u if isinstance(u, int) else mask_of(u) for u in U]
    if len(U) != k or any(u & ~D.all_mask for u in U):
        raise InputError("U needs one vertex set of D per branching")
    stars = [frozenset(D.m + v * k + i for v in bits(U[i])) for i in range(k)]
    return ForestState(inst, tuple(stars), partition, lower, upper)


def _branchings(D: Digraph, state: ForestState, forests) -> tuple:
    x = state.root
    out = []
    for f in forests:
        B = frozenset(e for e in f if e < D.m)
        if not is_branching(D, B):
            raise ContractError("reduced solution does not give a branching")
        roots = frozenset(state.digraph.arcs[e][1] for e in f if e >= D.m)
        if root_set(D, B) != mask_of(roots) or len(roots) != len(f) - len(B):
            raise ContractError("root arcs and root set disagree")
        out.append(B)
    return tuple(out)


def rootsets_state(D: Digraph, R: Sequence) -> ForestState:
    """Forest i starts as the star from x onto R_i; no other root arcs exist."""
    R = [r if isinstance(r, int) else mask_of(r) for r in R]
    if any(not r or r & ~D.all_mask for r in R):
        raise InputError("root sets must be nonempty subsets of V")
    inst = super_root(D, [v for r in R for v in bits(r)])
    stars, pos = [], D.m
    for r in R:
        size = r.bit_count()
        stars.append(frozenset(range(pos, pos + size)))
        pos += size
    return ForestState(inst, tuple(stars))


def pack_rootsets(D: Digraph, R: Sequence) -> PackResult:
    """Arc-disjoint branchings with R(B_i) = R_i exactly."""
    state = rootsets_state(D, R)
    R = [r if isinstance(r, int) else mask_of(r) for r in R]
    res = augment.complete_to_spanning(state, range(D.m))
    if not res.ok:
        cert = oracles.check_edmonds(D, R)
        if cert is None:
            raise ContractError("completion failed although the packing condition holds")
        return PackResult(certificate=cert)
    return PackResult(_branchings(D, state, res.forests), steps=res.steps, forests=res.forests)


def _check_prescribed(D, k, partition, c_prime, U):
    partition = tuple(tuple(p) for p in partition)
    if len(c_prime) != len(partition):
        raise InputError("c_prime needs one entry per part")
    U = [u if isinstance(u, int) else mask_of(u) for u in U]
    for a, p in enumerate(partition):
        if sum(U[i].bit_count() for i in p) > c_prime[a]:
            raise InputError("prescribed roots exceed the part bound")
    return partition, U


def pack_prescribed(D: Digraph, partition, c_prime: Sequence[int], U: Sequence) -> PackResult:
    """Branchings with U_i inside R(B_i) and at most c'_alpha roots per part."""
    k = len(U)
    partition, U = _check_prescribed(D, k, partition, c_prime, U)
    state = parallel_root_state(D, k, U, partition, upper=tuple(c_prime))
    res = augment.augment_upper(state)
    if not res.ok:
        cert = oracles.check_cond_2(D, k, partition, c_prime, U)
        if cert is None:
            raise ContractError("augmentation failed although the prescribed-root condition holds")
        return PackResult(certificate=cert)
    return PackResult(_branchings(D, state, res.forests), steps=res.steps, forests=res.forests)


def pack_at_most(D: Digraph, partition, c_prime: Sequence[int]) -> PackResult:
    k = sum(len(p) for p in partition)
    return pack_prescribed(D, partition, c_prime, [0] * k)


def exact_sizes_state(D: Digraph, c: Sequence[int]) -> ForestState:
    c = tuple(int(v) for v in c)
    if any(not 1 <= v <= D.n for v in c):
        raise InputError("exact sizes must lie between 1 and |V(D)|")
    return parallel_root_state(D, len(c), lower=c, upper=c)


def pack_exact_sizes(D: Digraph, c: Sequence[int]) -> PackResult:
    """Arc-disjoint branchings with |R(B_i)| = c_i."""
    state = exact_sizes_state(D, c)
    k = len(state.forests)
    res = augment.augment_both(state)
    if not res.ok:
        cert = oracles.check_cond_2(D, k, [[i] for i in range(k)], list(c), [0] * k)
        if cert is None:
            raise ContractError("augmentation failed although the size condition holds")
        return PackResult(certificate=cert)
    return PackResult(_branchings(D, state, res.forests), steps=res.steps, forests=res.forests)


def pack_spanning(D: Digraph, k: int) -> PackResult:
    """k arc-disjoint spanning arborescences (branchings with one root each)."""
    if k < 0:
        raise InputError("k must be nonnegative")
    if k == 0:
        return PackResult(branchings=())
    res = pack_exact_sizes(D, [1] * k)
    if res.ok:
        return res
    cert = oracles.check_spanning_pack(D, k)
    if cert is None:
        raise ContractError("size-one packing failed although the spanning condition holds")
    return PackResult(certificate=cert)
