"""Hypothesis strategies and shared checks for the test suite."""
import itertools
import random

from hypothesis import strategies as st

from branchpack.digraph import Digraph, ForestState, RootedInstance
from branchpack.setfam import (
    DisjointFamily, crossing_pairs, family_join, family_leq, is_laminar, random_policy, run_pieo,
)


@st.composite
def rooted_digraphs(draw, max_v=4, max_arcs=9):
    n = draw(st.integers(1, max_v))
    pair = st.tuples(st.integers(0, n), st.integers(1, n)).filter(lambda p: p[0] != p[1])
    arcs = draw(st.lists(pair, max_size=max_arcs))
    return Digraph(("x",) + tuple(f"v{i}" for i in range(1, n + 1)), tuple(arcs))


@st.composite
def plain_digraphs(draw, max_v=4, max_arcs=8, max_mult=2):
    n = draw(st.integers(1, max_v))
    if n == 1:
        return Digraph(("v0",), ())
    pair = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda p: p[0] != p[1])
    arcs = draw(st.lists(pair, max_size=max_arcs))
    arcs = [a for j, a in enumerate(arcs) if arcs[:j].count(a) < max_mult]
    return Digraph(tuple(f"v{i}" for i in range(n)), tuple(arcs))


def _grow(draw, D, used):
    f, reach = set(), 1
    for _ in range(draw(st.integers(0, D.n))):
        opts = [e for e, (t, h) in enumerate(D.arcs)
                if e not in used and reach >> t & 1 and not reach >> h & 1]
        if not opts:
            break
        e = draw(st.sampled_from(opts))
        f.add(e)
        used.add(e)
        reach |= 1 << D.arcs[e][1]
    return frozenset(f)


@st.composite
def forest_states(draw, max_v=4, max_k=3, min_k=1, lower=False, upper=False, max_arcs=9):
    D = draw(rooted_digraphs(max_v, max_arcs))
    k = draw(st.integers(min_k, max_k))
    used = set()
    forests = tuple(_grow(draw, D, used) for _ in range(k))
    labels = draw(st.lists(st.integers(0, max(k - 1, 0)), min_size=k, max_size=k))
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    partition = tuple(tuple(g) for g in sorted(groups.values()))
    base = ForestState(RootedInstance(D, 0), forests, partition)
    degs = base.part_root_degrees
    lo = hi = None
    if lower:
        lo = tuple(draw(st.integers(0, d + 2)) for d in degs)
    if upper:
        floor = lo if lo is not None else degs
        hi = tuple(max(f, d) + draw(st.integers(0, 2)) for f, d in zip(floor, degs))
    return ForestState(base.inst, forests, partition, lo, hi)


@st.composite
def disjoint_families(draw, n=6):
    """A random family of disjoint nonempty subsets of range(n)."""
    labels = draw(st.lists(st.integers(0, n), min_size=n, max_size=n))
    blocks = {}
    for v, lab in enumerate(labels):
        if lab:
            blocks[lab] = blocks.get(lab, 0) | 1 << v
    return DisjointFamily((1 << n) - 1, frozenset(blocks.values()))


def all_families(ground):
    """Every family of disjoint nonempty subsets of ``ground``, as tuples of masks.

    Written independently of the library enumerator so tests can compare the two.
    """
    elts = [e for e in range(ground.bit_length()) if ground >> e & 1]
    out = set()
    for labels in itertools.product(range(len(elts) + 1), repeat=len(elts)):
        blocks = {}
        for e, lab in zip(elts, labels):
            if lab:
                blocks[lab] = blocks.get(lab, 0) | 1 << e
        out.add(tuple(sorted(blocks.values())))
    return sorted(out)


def with_extra_arc(state, tail, head):
    """The same state in a digraph with one more arc (appended, so ids are kept)."""
    D = state.digraph
    D2 = Digraph(D.names, tuple(D.arcs) + ((tail, head),))
    return ForestState(RootedInstance(D2, state.root), state.forests, state.partition,
                       state.lower, state.upper)


def check_pieo_run(F1, F2, types, seed):
    """Assert the uncrossing properties on one randomized run."""
    F3, F4, trace = run_pieo(F1, F2, random_policy(random.Random(seed), types))
    snaps = trace.snapshots
    G0 = snaps[0]
    elts = range(F1.ground.bit_length())
    for (X, Y, kind), before, after in zip(trace.steps, snaps, snaps[1:]):
        assert all(before.count(v) >= after.count(v) for v in elts)
        top = before.maximal()
        assert X in top and Y in top
        if set(trace.types) <= {1, 2}:
            for Z in after.maximal():
                assert any(W & Z == W for W in G0.members)
        assert len(after.maximal()) < len(before.maximal()) or len(after) < len(before)
    assert is_laminar(snaps[-1]) and not crossing_pairs(snaps[-1])
    meet_union = F1.union & F2.union
    assert F4.union & meet_union == F4.union
    assert (F4.union == meet_union) == all(t == 1 for t in trace.types)
    if set(trace.types) <= {1, 2}:
        assert F3 == family_join(F1, F2)
        if F2.union & F1.union == F2.union:
            assert len(F3) <= len(F1)
            assert (len(F3) == len(F1)) == family_leq(F2, F1)
    return trace
