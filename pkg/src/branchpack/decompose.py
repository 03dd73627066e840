"""Splitting all arcs of a digraph into k branchings, optionally with many roots each."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import augment, oracles
from .digraph import Digraph, ForestState, bits, is_branching, root_set
from .errors import ContractError, InputError
from .oracles import ViolationCertificate
from .pack import super_root


@dataclass(frozen=True)
class ArboricityReport:
    numerator: int
    denominator: int
    witness: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


def fractional_arboricity(D: Digraph) -> ArboricityReport:
    """max |E(H)| / (|V(H)| - 1) over vertex sets with at least two vertices.

    Ties go to the numerically smallest vertex mask.
    """
    val, witness = oracles.fractional_arboricity_value(D)
    return ArboricityReport(val.numerator, val.denominator, witness)


def precondition_certificate(D: Digraph, k: int, c: int):
    """The first failed precondition among in-degree, arboricity and density."""
    indeg = D.in_degrees()
    if indeg:
        top = max(indeg)
        if top > k:
            v = indeg.index(top)
            return ViolationCertificate("max_indegree", (1 << v,), (), top, k, "<=")
    rep = fractional_arboricity(D)
    if rep.value > k:
        H = rep.witness
        edges = sum(1 for t, h in D.arcs if H >> t & 1 and H >> h & 1)
        return ViolationCertificate("arboricity", (H,), (), edges, k * (H.bit_count() - 1), "<=")
    # |E| / (|V| - c) <= k, multiplied out so that c = |V| is allowed
    if D.m > k * (D.n - c):
        return ViolationCertificate("density", (D.all_mask,), (), D.m, k * (D.n - c), "<=")
    return None


def padded_state(D: Digraph, k: int, c: int) -> ForestState:
    """Root arcs raise every in-degree to k; empty forests, lower bound c each."""
    indeg = D.in_degrees()
    heads = [v for v in range(D.n) for _ in range(k - indeg[v])]
    inst = super_root(D, heads)
    return ForestState(inst, tuple(frozenset() for _ in range(k)), lower=(c,) * k)


def decompose_cplus(D: Digraph, k: int, c: int, log=None):
    """k branchings partitioning the arcs, each with at least c roots.

    Returns a list of arc-id frozensets or a :class:`ViolationCertificate`.
    The augmentation steps on the padded instance are appended to ``log``.
    """
    if k < 1:
        raise InputError("k must be positive")
    if not 0 <= c <= D.n:
        raise InputError("c must lie between 0 and |V|")
    cert = precondition_certificate(D, k, c)
    if cert is not None:
        return cert
    state = padded_state(D, k, c)
    res = augment.augment_lower(state)
    if not res.ok:
        raise ContractError("padded instance is infeasible although the preconditions hold")
    if log is not None:
        log.extend(res.steps)
    out = [frozenset(e for e in f if e < D.m) for f in res.forests]
    _check_decomposition(D, out)
    if any(D.n - len(B) < c for B in out):
        raise ContractError("a branching has fewer than c roots")
    return out


def decompose_k(D: Digraph, k: int, log=None):
    """k branchings partitioning the arcs (no root-count requirement)."""
    return decompose_cplus(D, k, 0, log)


def _check_decomposition(D: Digraph, branchings) -> None:
    seen = set()
    for B in branchings:
        if not is_branching(D, B):
            raise ContractError("part is not a branching")
        if seen & B:
            raise ContractError("parts share an arc")
        seen |= B
        if root_set(D, B).bit_count() + len(B) != D.n:
            raise ContractError("|R(B)| + |A(B)| differs from |V|")
    if seen != set(range(D.m)):
        raise ContractError("parts do not cover every arc")


def _potential(sizes) -> tuple:
    hi, lo = max(sizes), min(sizes)
    return hi - lo, sum(1 for s in sizes if s in (hi, lo))


def balance_decomposition(D: Digraph, branchings: Sequence, log=None) -> list:
    """Re-split extreme pairs until all root-set sizes differ by at most one.

    Each re-split is appended to ``log`` as ``(i, j, new_i, new_j)``.
    """
    B = [frozenset(b) for b in branchings]
    if not B:
        raise InputError("need at least one branching")
    try:
        _check_decomposition(D, B)
    except ContractError as exc:
        raise InputError(f"input is not a decomposition into branchings: {exc}") from None
    k = len(B)
    while True:
        sizes = [D.n - len(b) for b in B]
        if max(sizes) - min(sizes) <= 1:
            break
        i = sizes.index(max(sizes))
        j = sizes.index(min(sizes))
        ids = sorted(B[i] | B[j])
        sub = Digraph(D.names, tuple(D.arcs[e] for e in ids))
        split = decompose_cplus(sub, 2, (sizes[i] + sizes[j]) // 2)
        if isinstance(split, ViolationCertificate):
            raise ContractError("pair of branchings could not be re-split")
        new_i, new_j = (frozenset(ids[e] for e in part) for part in split)
        if abs(len(new_i) - len(new_j)) > 1 or new_i | new_j != B[i] | B[j]:
            raise ContractError("re-split is unbalanced or lost arcs")
        before = _potential(sizes)
        B[i], B[j] = new_i, new_j
        if log is not None:
            log.append((i, j, new_i, new_j))
        if _potential([D.n - len(b) for b in B]) >= before:
            raise ContractError("balancing made no progress")
    check_balanced(D, B)
    return B


def apply_resplit(D: Digraph, branchings: Sequence, i: int, j: int, new_i, new_j) -> list:
    """Replace branchings i and j by a validated re-split of their union."""
    B = [frozenset(b) for b in branchings]
    new_i, new_j = frozenset(new_i), frozenset(new_j)
    if i == j or new_i | new_j != B[i] | B[j] or new_i & new_j:
        raise InputError("re-split must partition the union of the pair")
    if not is_branching(D, new_i) or not is_branching(D, new_j):
        raise InputError("re-split parts must be branchings")
    B[i], B[j] = new_i, new_j
    return B


def check_balanced(D: Digraph, B) -> None:
    _check_decomposition(D, B)
    k = len(B)
    c = k * D.n - D.m
    if any(D.n - len(b) not in (c // k, -(-c // k)) for b in B):
        raise ContractError("balanced sizes are not floor/ceil of c/k")


def root_set_size(D: Digraph, B) -> int:
    return root_set(D, B).bit_count()


def arc_disjoint_branchings(D: Digraph, branchings) -> bool:
    seen = set()
    for B in branchings:
        B = frozenset(B)
        if not is_branching(D, B) or seen & B:
            return False
        seen |= B
    return True


def is_decomposition(D: Digraph, branchings) -> bool:
    try:
        _check_decomposition(D, [frozenset(b) for b in branchings])
    except ContractError:
        return False
    return True


def is_balanced(D: Digraph, branchings) -> bool:
    """Root-set sizes all floor or ceil of c/k, c = k|V| - |E| (equivalently arc counts of |E|/k)."""
    k = len(branchings)
    c = k * D.n - D.m
    sizes_ok = all(D.n - len(b) in (c // k, -(-c // k)) for b in branchings)
    arcs_ok = all(len(b) in (D.m // k, -(-D.m // k)) for b in branchings)
    return sizes_ok and arcs_ok
