"""Exact feasibility checkers for the completion and packing problems.

Every checker enumerates the quantified sets exhaustively and returns
``None`` when the condition holds, or a :class:`ViolationCertificate`
naming a concrete witness.  Families range over pairwise disjoint
*nonempty* vertex sets (the empty family included); index sets ``I`` range
over unions of parts of the partition, ``I = {}`` and ``I = [k]`` included.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .digraph import (
    Digraph, ForestState, RootedInstance, _w, bits, in_degree, mask_of, p_mask,
    submasks,
)
from .errors import CapacityError, ContractError, InputError
from .setfam import DisjointFamily, family_join

FAMILY_LIMIT = 10
SUBSET_LIMIT = 20


@dataclass(frozen=True)
class ViolationCertificate:
    """A witness ``(family, I)`` for a failed inequality ``lhs <sense> rhs``.

    ``sense`` is the relation the condition demands (``">="`` or ``"<="``);
    a certificate is genuine when that relation is false.
    """

    condition: str
    family: tuple
    index_union: tuple
    lhs: int
    rhs: int
    sense: str = ">="

    @property
    def violated(self) -> bool:
        if self.sense == ">=":
            return self.lhs < self.rhs
        return self.lhs > self.rhs

    @property
    def margin(self) -> int:
        return self.lhs - self.rhs if self.sense == ">=" else self.rhs - self.lhs


def _check_size(nbits: int, limit: int) -> None:
    if nbits > limit:
        raise CapacityError(f"{nbits} elements exceed the enumeration limit {limit}")


def disjoint_families(ground: int) -> Iterator[tuple]:
    """All families of disjoint nonempty subsets of ``ground``.

    Each family is produced once, as the classes of a labelling of the
    elements (0 = outside, classes numbered by first appearance), in
    lexicographic order of the labelling.
    """
    elems = list(bits(ground))
    classes = []

    def rec(pos):
        if pos == len(elems):
            yield tuple(classes)
            return
        b = 1 << elems[pos]
        yield from rec(pos + 1)
        for c in range(len(classes)):
            classes[c] |= b
            yield from rec(pos + 1)
            classes[c] ^= b
        classes.append(b)
        yield from rec(pos + 1)
        classes.pop()

    yield from rec(0)


def _family_opt(ground: int, value: dict, maximize: bool) -> int:
    """Optimum of sum(value[X]) over disjoint families inside ``ground``."""
    order = sorted(submasks(ground))
    best = {0: 0}
    for U in order:
        low = U & -U
        rest = U ^ low
        b = best[rest]
        S = rest
        while True:
            cand = value[low | S] + best[rest & ~S]
            if (cand > b) if maximize else (cand < b):
                b = cand
            if not S:
                break
            S = (S - 1) & rest
        best[U] = b
    return best[ground] if ground else 0


# ---------------------------------------------------------------------------
# per-state tables

class _Tables:
    """In-degrees and P-masks of every subset of V for one forest state."""

    def __init__(self, state: ForestState, pool=None):
        D, x = state.digraph, state.root
        self.V = state.inst.V
        res = state.residual if pool is None else tuple(sorted(pool))
        res_arcs = [(1 << D.arcs[e][0], 1 << D.arcs[e][1]) for e in res]
        xbit = 1 << x
        nox = [(t, h) for t, h in res_arcs if t != xbit]
        fv = state.forest_vertices
        self.din = {}
        self.din_nox = {}
        self.pmask = {}
        for X in submasks(self.V):
            self.din[X] = sum(1 for t, h in res_arcs if X & h and not X & t)
            self.din_nox[X] = sum(1 for t, h in nox if X & h and not X & t)
            pm = 0
            for i, f in enumerate(fv):
                if not X & f:
                    pm |= 1 << i
            self.pmask[X] = pm
        self._w = {}
        self.state = state

    def w(self, Imask: int, u: int) -> int:
        key = (Imask, u)
        if key not in self._w:
            self._w[key] = _w(self.state, Imask, u)
        return self._w[key]

    def w_tilde(self, Imask: int, X: int) -> int:
        return sum(self.w(Imask, u) for u in bits(X))


def _tables(state: ForestState) -> _Tables:
    cache = state.__dict__
    if "_oracle_tables" not in cache:
        cache["_oracle_tables"] = _Tables(state)
    return cache["_oracle_tables"]


def _part_unions(state: ForestState) -> Iterator[int]:
    for code in range(1 << state.l):
        yield state.union_of_parts(code)


def _full(state: ForestState) -> int:
    return (1 << state.k) - 1


def _lower_slack(state: ForestState, Icomp: int) -> int:
    """sum over parts inside Icomp of (c_alpha - root degree of the part)."""
    return sum(state.lower[a] - state.part_root_degrees[a] for a in state.parts_inside(Icomp))


def _upper_slack(state: ForestState, Imask: int) -> int:
    return sum(state.upper[a] - state.part_root_degrees[a] for a in state.parts_inside(Imask))


def _as_index_mask(state: ForestState, I) -> int:
    Imask = I if isinstance(I, int) else state.index_mask(I)
    if not state.is_part_union(Imask):
        raise InputError("index set is not a union of parts")
    return Imask


def _as_members(state: ForestState, family) -> tuple:
    members = tuple(family.sorted() if isinstance(family, DisjointFamily) else family)
    seen = 0
    for X in members:
        if not X or X & ~state.inst.V or X & seen:
            raise InputError("family members must be disjoint nonempty subsets of V")
        seen |= X
    return members


def _indices(mask: int) -> tuple:
    return tuple(bits(mask))


# ---------------------------------------------------------------------------
# deficit functions

def deficit_H(state: ForestState, I, family) -> int:
    """sum over members of |P_I(X)| - d^-(X) in A minus (forests and root arcs)."""
    T = _tables(state)
    Imask = _as_index_mask(state, I)
    return sum((T.pmask[X] & Imask).bit_count() - T.din_nox[X]
               for X in _as_members(state, family))


def eval_cond_4(state: ForestState, family, I) -> tuple:
    if state.lower is None:
        raise InputError("lower bounds are not set")
    T = _tables(state)
    Imask = _as_index_mask(state, I)
    members = _as_members(state, family)
    Icomp = _full(state) & ~Imask
    covered = mask_of(()) | 0
    for X in members:
        covered |= X
    lhs = sum(T.din[X] for X in members)
    rhs = (sum((T.pmask[X] & Imask).bit_count() for X in members)
           + _lower_slack(state, Icomp)
           - T.w_tilde(Icomp, T.V & ~covered))
    return lhs, rhs


def deficit_F(state: ForestState, family, I) -> int:
    """LHS minus RHS of the lower-bound condition; >= 0 iff it holds for (family, I)."""
    lhs, rhs = eval_cond_4(state, family, I)
    return lhs - rhs


def eval_cond_22(state: ForestState, family, I) -> tuple:
    if state.upper is None:
        raise InputError("upper bounds are not set")
    Imask = _as_index_mask(state, I)
    return deficit_H(state, Imask, family), _upper_slack(state, Imask)


def eval_cond_11(state: ForestState, X: int, pool=None) -> tuple:
    T = _tables(state) if pool is None else _Tables(state, pool)
    return T.din[X], T.pmask[X].bit_count()


def eval_cond_54R(state: ForestState, X: int) -> tuple:
    T = _tables(state)
    return T.din_nox[X] + T.w_tilde(_full(state), X), T.pmask[X].bit_count()


# ---------------------------------------------------------------------------
# single-set conditions

def _single_set_check(V: int, evaluate, name: str, maximal: bool, sense=">=", I=()):
    found = None
    for X in submasks(V):
        lhs, rhs = evaluate(X)
        bad = lhs < rhs if sense == ">=" else lhs > rhs
        if not bad:
            continue
        if not maximal:
            return ViolationCertificate(name, (X,), I, lhs, rhs, sense)
        key = (X.bit_count(), X)
        if found is None or key > found[0]:
            found = (key, ViolationCertificate(name, (X,), I, lhs, rhs, sense))
    return None if found is None else found[1]


def check_cond_11(state: ForestState, pool=None, *, maximal=True, limit=SUBSET_LIMIT):
    """d^-(X) over the residual arcs (or ``pool``) is at least |P(X)| for all X."""
    _check_size(state.inst.V.bit_count(), limit)
    T = _tables(state) if pool is None else _Tables(state, pool)
    name = "cond11" if pool is None else "cond11_restricted"
    return _single_set_check(
        T.V, lambda X: (T.din[X], T.pmask[X].bit_count()), name, maximal,
        I=_indices(_full(state)))


def check_cond_54R(state: ForestState, *, maximal=True, limit=SUBSET_LIMIT):
    _check_size(state.inst.V.bit_count(), limit)
    T = _tables(state)
    full = _full(state)
    return _single_set_check(
        T.V, lambda X: (T.din_nox[X] + T.w_tilde(full, X), T.pmask[X].bit_count()),
        "cond54r", maximal, I=_indices(full))


def cond11_holds(state: ForestState, pool=None) -> bool:
    T = _tables(state) if pool is None else _Tables(state, pool)
    return all(T.din[X] >= T.pmask[X].bit_count() for X in T.din)


# ---------------------------------------------------------------------------
# family conditions on forest states

def cond4_holds(state: ForestState) -> bool:
    """Fast yes/no form of :func:`check_cond_4` (subset dynamic programming)."""
    T = _tables(state)
    full = _full(state)
    for Imask in _part_unions(state):
        Icomp = full & ~Imask
        val = {X: T.din[X] - (T.pmask[X] & Imask).bit_count() - T.w_tilde(Icomp, X)
               for X in T.din}
        best = _family_opt(T.V, val, maximize=False)
        if best + T.w_tilde(Icomp, T.V) - _lower_slack(state, Icomp) < 0:
            return False
    return True


def cond22_holds(state: ForestState) -> bool:
    T = _tables(state)
    for Imask in _part_unions(state):
        val = {X: (T.pmask[X] & Imask).bit_count() - T.din_nox[X] for X in T.din}
        if _family_opt(T.V, val, maximize=True) > _upper_slack(state, Imask):
            return False
    return True


def _family_check(state, holds, evaluate, name, sense, maximal, limit):
    _check_size(state.inst.V.bit_count(), limit)
    if not maximal and holds(state):
        return None
    found = None
    for fam in disjoint_families(state.inst.V):
        for Imask in _part_unions(state):
            lhs, rhs = evaluate(state, fam, Imask)
            bad = lhs < rhs if sense == ">=" else lhs > rhs
            if bad:
                found = ViolationCertificate(name, fam, _indices(Imask), lhs, rhs, sense)
                if not maximal:
                    return found
    return found


def check_cond_4(state: ForestState, *, maximal=False, limit=FAMILY_LIMIT):
    """Lower-bound completion condition over all (family, union of parts)."""
    if state.lower is None:
        raise InputError("lower bounds are not set")
    return _family_check(state, cond4_holds, eval_cond_4, "cond4", ">=", maximal, limit)


def check_cond_22(state: ForestState, *, maximal=False, limit=FAMILY_LIMIT):
    """Upper-bound completion condition over all (family, union of parts)."""
    if state.upper is None:
        raise InputError("upper bounds are not set")
    if any(d > c for d, c in zip(state.part_root_degrees, state.upper)):
        raise InputError("a part already exceeds its upper bound")
    return _family_check(state, cond22_holds, eval_cond_22, "cond22", "<=", maximal, limit)


# ---------------------------------------------------------------------------
# conditions stated on a plain digraph

def _din_table(D: Digraph, ground: int) -> dict:
    arcs = [(1 << t, 1 << h) for t, h in D.arcs]
    return {X: sum(1 for t, h in arcs if X & h and not X & t) for X in submasks(ground)}


def _check_partition(k: int, partition) -> tuple:
    part = tuple(tuple(sorted(p)) for p in partition)
    if sorted(i for p in part for i in p) != list(range(k)) or any(not p for p in part):
        raise InputError("partition is not a partition of the forest indices")
    return part


def eval_cond_2(D: Digraph, k, partition, c_prime, U, family, I) -> tuple:
    part = _check_partition(k, partition)
    Imask = mask_of(I) if not isinstance(I, int) else I
    Umasks = [u if isinstance(u, int) else mask_of(u) for u in U]
    lhs = 0
    for X in family:
        missing = sum(1 for i in bits(Imask) if not X & Umasks[i])
        lhs += missing - in_degree(D, None, X)
    rhs = 0
    for a, p in enumerate(part):
        pm = mask_of(p)
        if Imask & pm == pm:
            rhs += c_prime[a] - sum(Umasks[i].bit_count() for i in p)
    return lhs, rhs


def check_cond_2(D: Digraph, k: int, partition, c_prime, U, *, maximal=False,
                 limit=FAMILY_LIMIT):
    """Prescribed-roots packing condition; ``U[i]`` is a vertex mask."""
    _check_size(D.n, limit)
    part = _check_partition(k, partition)
    U = [u if isinstance(u, int) else mask_of(u) for u in U]
    if len(U) != k or len(c_prime) != len(part):
        raise InputError("U needs k entries and c_prime one entry per part")
    for a, p in enumerate(part):
        if sum(U[i].bit_count() for i in p) > c_prime[a]:
            raise InputError("prescribed root sets exceed the part bound")
    din = _din_table(D, D.all_mask)
    found = None
    for fam in disjoint_families(D.all_mask):
        for code in range(1 << len(part)):
            Imask = 0
            rhs = 0
            for a in bits(code):
                Imask |= mask_of(part[a])
                rhs += c_prime[a] - sum(U[i].bit_count() for i in part[a])
            lhs = sum(sum(1 for i in bits(Imask) if not X & U[i]) - din[X] for X in fam)
            if lhs > rhs:
                found = ViolationCertificate("cond2", fam, _indices(Imask), lhs, rhs, "<=")
                if not maximal:
                    return found
    return found


def check_edmonds(D: Digraph, R: Sequence[int], *, maximal=True, limit=SUBSET_LIMIT):
    """Edmonds' branching packing condition for root sets ``R[i]`` (masks)."""
    _check_size(D.n, limit)
    R = [r if isinstance(r, int) else mask_of(r) for r in R]
    if any(not r for r in R):
        raise InputError("root sets must be nonempty")
    din = _din_table(D, D.all_mask)
    return _single_set_check(
        D.all_mask, lambda X: (din[X], sum(1 for r in R if not r & X)), "edmonds",
        maximal, I=tuple(range(len(R))))


def check_spanning_pack(D: Digraph, k: int, *, maximal=False, limit=FAMILY_LIMIT):
    """k arc-disjoint spanning arborescences: sum d^-(X_j) >= k(t-1)."""
    _check_size(D.n, limit)
    din = _din_table(D, D.all_mask)
    found = None
    for fam in disjoint_families(D.all_mask):
        lhs = sum(din[X] for X in fam)
        rhs = k * (len(fam) - 1)
        if lhs < rhs:
            found = ViolationCertificate("spanning", fam, tuple(range(k)), lhs, rhs)
            if not maximal:
                return found
    return found


def check_cai_frank(D: Digraph, k: int, f: Sequence[int], g: Sequence[int], *,
                    limit=FAMILY_LIMIT):
    """Feasibility conditions for k spanning arborescences whose root counts
    at every vertex v lie in [f(v), g(v)].  Checker only."""
    _check_size(D.n, limit)
    if len(f) != D.n or len(g) != D.n or any(a > b for a, b in zip(f, g)):
        raise InputError("f and g need one entry per vertex with f <= g")
    fV = sum(f)
    if fV > k:
        return ViolationCertificate("cai_frank_i", (), (), fV, k, "<=")
    din = _din_table(D, D.all_mask)
    for fam in disjoint_families(D.all_mask):
        if not fam:
            continue
        covered = 0
        for X in fam:
            covered |= X
        lhs = sum(din[X] for X in fam)
        rhs = k * (len(fam) - 1) + sum(f[v] for v in bits(D.all_mask & ~covered))
        if lhs < rhs:
            return ViolationCertificate("cai_frank_ii", fam, (), lhs, rhs)
    for X in submasks(D.all_mask):
        lhs = sum(g[v] for v in bits(X))
        rhs = k - din[X]
        if lhs < rhs:
            return ViolationCertificate("cai_frank_iii", (X,), (), lhs, rhs)
    return None


# ---------------------------------------------------------------------------
# tight families for the upper-bound augmentation

def _positive(state: ForestState, Imask: int) -> dict:
    T = _tables(state)
    return {X: (T.pmask[X] & Imask).bit_count() - T.din_nox[X] for X in T.din}


def enumerate_E1(state: ForestState, I, *, limit=FAMILY_LIMIT) -> list:
    """Disjoint families, all members with positive H-term, whose H value
    reaches the upper slack of the parts inside I."""
    _check_size(state.inst.V.bit_count(), limit)
    Imask = _as_index_mask(state, I)
    h = _positive(state, Imask)
    target = _upper_slack(state, Imask)
    out = []
    for fam in disjoint_families(state.inst.V):
        if all(h[X] > 0 for X in fam) and sum(h[X] for X in fam) == target:
            out.append(DisjointFamily(state.inst.V, frozenset(fam)))
    return out


def enumerate_E2(state: ForestState, *, limit=FAMILY_LIMIT) -> list:
    _check_size(state.inst.V.bit_count(), limit)
    T = _tables(state)
    h = _positive(state, _full(state))
    out = []
    for fam in disjoint_families(state.inst.V):
        if not all(h[X] > 0 for X in fam):
            continue
        if sum(h[X] for X in fam) == sum(T.din[X] - T.din_nox[X] for X in fam):
            out.append(DisjointFamily(state.inst.V, frozenset(fam)))
    return out


def find_V(state: ForestState, I, *, families=None) -> Optional[DisjointFamily]:
    """Minimum of the tight families for I: minimal union, then most members."""
    fams = enumerate_E1(state, I) if families is None else families
    if not fams:
        return None
    unions = [F.union for F in fams]
    minimal = [F for F, u in zip(fams, unions)
               if not any(v != u and v & u == v for v in unions)]
    return max(minimal, key=len)


def find_U(state: ForestState, I=None, *, families=None) -> Optional[DisjointFamily]:
    """Maximum of the tight families for I (all indices by default)."""
    if I is None:
        I = _full(state)
    fams = enumerate_E1(state, I) if families is None else families
    if not fams:
        return None
    top = fams[0]
    for F in fams[1:]:
        top = family_join(top, F)
    if top not in fams:
        raise ContractError("join of tight families is not tight")
    return top


# ---------------------------------------------------------------------------
# balance function of the c+-branching decomposition

def balance_parts(Dprime: RootedInstance, k: int, family: Sequence[int], I) -> list:
    """Extend a disjoint family to the partition X_1..X_t, X_{t+1}, X_{t+2}."""
    D, x = Dprime.digraph, Dprime.root
    nbar = k - len(tuple(I))
    covered = 0
    for X in family:
        covered |= X
    low = high = 0
    for u in bits(Dprime.V & ~covered):
        xu = sum(1 for t, h in D.arcs if t == x and h == u)
        if xu <= nbar:
            low |= 1 << u
        else:
            high |= 1 << u
    return list(family) + [low, high]


def check_balance_G(Dprime: RootedInstance, k: int, c: int, parts: Sequence[int], I) -> int:
    """G(X_1..X_{t+2}; I) for a partition of V given as t+2 masks (last two may be empty)."""
    D, x = Dprime.digraph, Dprime.root
    parts = list(parts)
    if len(parts) < 2:
        raise InputError("need at least the two trailing classes")
    union = 0
    for X in parts:
        if X & union or X & ~Dprime.V:
            raise InputError("parts must be disjoint subsets of V")
        union |= X
    if union != Dprime.V:
        raise InputError("parts must cover V")
    I = tuple(I)
    nI, nbar = len(I), k - len(I)
    head, tail = parts[:-2], parts[-2:]
    t = len(head)
    xarcs = sum(1 for a, h in D.arcs if a == x and tail[0] >> h & 1)
    return (sum(in_degree(D, None, X) for X in head)
            - (t * nI + c * nbar - xarcs - nbar * tail[1].bit_count()))


# ---------------------------------------------------------------------------
# decomposition preconditions

def fractional_arboricity_value(D: Digraph, *, limit=SUBSET_LIMIT):
    """(value, witness): max |E(H)|/(|V(H)|-1) over vertex sets with >= 2 vertices."""
    _check_size(D.n, limit)
    if D.n <= 1:
        return Fraction(0), D.all_mask
    best, witness = None, None
    for X in submasks(D.all_mask):
        size = X.bit_count()
        if size < 2:
            continue
        edges = sum(1 for t, h in D.arcs if X >> t & 1 and X >> h & 1)
        val = Fraction(edges, size - 1)
        if best is None or val > best or (val == best and X < witness):
            best, witness = val, X
    return best, witness


# ---------------------------------------------------------------------------
# certificate re-evaluation

def reevaluate(cert: ViolationCertificate, state: Optional[ForestState] = None, **ctx) -> tuple:
    """Recompute ``(lhs, rhs)`` of the named condition at the certificate's witness."""
    name, fam, I = cert.condition, cert.family, cert.index_union
    if name == "cond11":
        return eval_cond_11(state, fam[0])
    if name == "cond11_restricted":
        return eval_cond_11(state, fam[0], pool=ctx["pool"])
    if name == "cond54r":
        return eval_cond_54R(state, fam[0])
    if name == "cond4":
        return eval_cond_4(state, fam, I)
    if name == "cond22":
        return eval_cond_22(state, fam, I)
    D = ctx.get("digraph")
    if name == "cond2":
        k = ctx["k"]
        return eval_cond_2(D, k, ctx.get("partition") or [[i] for i in range(k)],
                           ctx["c_prime"], ctx.get("U") or [0] * k, fam, I)
    if name == "edmonds":
        X = fam[0]
        R = [r if isinstance(r, int) else mask_of(r) for r in ctx["rootsets"]]
        return in_degree(D, None, X), sum(1 for r in R if not r & X)
    if name == "spanning":
        return sum(in_degree(D, None, X) for X in fam), ctx["k"] * (len(fam) - 1)
    if name.startswith("cai_frank"):
        k, f, g = ctx["k"], ctx["f"], ctx["g"]
        if name == "cai_frank_i":
            return sum(f), k
        if name == "cai_frank_ii":
            covered = mask_of(v for X in fam for v in bits(X))
            return (sum(in_degree(D, None, X) for X in fam),
                    k * (len(fam) - 1) + sum(f[v] for v in bits(D.all_mask & ~covered)))
        X = fam[0]
        return sum(g[v] for v in bits(X)), k - in_degree(D, None, X)
    if name == "max_indegree":
        return D.in_degrees()[next(bits(fam[0]))], ctx["k"]
    if name == "arboricity":
        X = fam[0]
        edges = sum(1 for t, h in D.arcs if X >> t & 1 and X >> h & 1)
        return edges, ctx["k"] * (X.bit_count() - 1)
    if name == "density":
        return D.m, ctx["k"] * (D.n - ctx["c"])
    if name == "cond44":
        from .bipartite import eval_cond_44
        return eval_cond_44(ctx["bipartite"], fam[0])
    raise InputError(f"unknown condition {name!r}")


def verify_certificate(cert: ViolationCertificate, state: Optional[ForestState] = None,
                       **ctx) -> bool:
    """True iff the certificate's numbers are reproduced and they violate the condition."""
    lhs, rhs = reevaluate(cert, state, **ctx)
    return (lhs, rhs) == (cert.lhs, cert.rhs) and cert.violated
