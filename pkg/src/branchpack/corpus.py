"""Seeded random instances and the solver / checker / brute-force comparison harness."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from . import augment, bipartite, bruteforce, decompose, oracles, pack
from .digraph import Digraph, ForestState, RootedInstance, solution_problems


@dataclass(frozen=True)
class Profile:
    arc_p: float        # chance of each internal ordered pair getting an arc
    parallel_p: float   # chance of a second parallel copy
    root_p: float       # chance of an arc x -> v
    growth: float       # chance per step of growing an initial forest
    slack: int          # how far bounds may stray from the current root counts


PROFILES = {
    "sparse": Profile(0.3, 0.1, 0.5, 0.3, 3),
    "tight": Profile(0.45, 0.2, 0.7, 0.4, 1),
    "dense": Profile(0.8, 0.35, 0.9, 0.3, 2),
}


def random_digraph(rng: random.Random, n: int, profile: Profile, with_root=True,
                   max_arcs: Optional[int] = None) -> Digraph:
    names = ["x"] + [f"v{j}" for j in range(1, n + 1)] if with_root else \
        [f"v{j}" for j in range(1, n + 1)]
    first = 1 if with_root else 0
    arcs = []
    if with_root:
        for v in range(1, n + 1):
            if rng.random() < profile.root_p:
                arcs.append((0, v))
                if rng.random() < profile.parallel_p:
                    arcs.append((0, v))
        if n and rng.random() < 0.05:
            arcs.append((rng.randint(1, n), 0))
    for u in range(first, len(names)):
        for v in range(first, len(names)):
            if u != v and rng.random() < profile.arc_p:
                arcs.append((u, v))
                if rng.random() < profile.parallel_p:
                    arcs.append((u, v))
    rng.shuffle(arcs)
    if max_arcs is not None:
        arcs = arcs[:max_arcs]
    return Digraph(tuple(names), tuple(arcs))


def random_state(rng: random.Random, profile: Profile, max_v=4, max_k=3,
                 max_residual=10) -> ForestState:
    """Random rooted instance with initial forests, a partition and both bound vectors."""
    n = rng.randint(1, max_v)
    D = random_digraph(rng, n, profile)
    k = rng.randint(1, max_k)
    used = set()
    forests = []
    for _ in range(k):
        f, reach = set(), 1
        while rng.random() < profile.growth:
            options = [e for e, (t, h) in enumerate(D.arcs)
                       if e not in used and reach >> t & 1 and not reach >> h & 1]
            if not options:
                break
            e = rng.choice(options)
            f.add(e)
            used.add(e)
            reach |= 1 << D.arcs[e][1]
        forests.append(f)
    # keep at most max_residual unused arcs; renumber the survivors
    free = [e for e in range(D.m) if e not in used]
    rng.shuffle(free)
    keep = sorted(used | set(free[:max_residual]))
    new_id = {e: j for j, e in enumerate(keep)}
    D = Digraph(D.names, tuple(D.arcs[e] for e in keep))
    forests = tuple(frozenset(new_id[e] for e in f) for f in forests)
    labels = [rng.randrange(k) for _ in range(k)]
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    partition = tuple(tuple(g) for g in sorted(groups.values()))
    base = ForestState(RootedInstance(D, 0), forests, partition)
    degs = base.part_root_degrees
    lower, upper = [], []
    for a, p in enumerate(partition):
        lo = max(0, degs[a] + rng.randint(-1, profile.slack))
        hi = max(lo, degs[a]) + rng.randint(0, profile.slack)
        lower.append(lo)
        upper.append(hi)
    return ForestState(base.inst, forests, partition, tuple(lower), tuple(upper))


def variants(state: ForestState) -> dict:
    """The same forests under each of the four bound regimes."""
    def make(lo, hi):
        return ForestState(state.inst, state.forests, state.partition,
                           state.lower if lo else None, state.upper if hi else None)
    return {"completion": make(False, False), "lower": make(True, False),
            "upper": make(False, True), "both": make(True, True)}


def plain_digraph(state: ForestState) -> Digraph:
    """The instance with its root removed (vertex ids shift down by one)."""
    D, x = state.digraph, state.root
    keep = [v for v in range(D.n) if v != x]
    pos = {v: j for j, v in enumerate(keep)}
    arcs = tuple((pos[t], pos[h]) for t, h in D.arcs if t != x and h != x)
    return Digraph(tuple(D.names[v] for v in keep), arcs)


# ---------------------------------------------------------------------------
# harness

ENGINES = {
    "completion": augment.complete_to_spanning,
    "lower": augment.augment_lower,
    "upper": augment.augment_upper,
    "both": augment.augment_both,
}


def _cond_completion(s):
    return oracles.check_cond_11(s)


def _cond_lower(s):
    return oracles.check_cond_4(s)


def _cond_upper(s):
    return oracles.check_cond_11(s) or oracles.check_cond_22(s)


def _cond_both(s):
    return oracles.check_cond_4(s) or oracles.check_cond_22(s)


CHECKS = {"completion": _cond_completion, "lower": _cond_lower,
          "upper": _cond_upper, "both": _cond_both}

MUTATIONS = ("cond11", "cond4", "cond22", "spanning")


@dataclass
class Tally:
    rows: dict = field(default_factory=dict)
    invalid_solutions: list = field(default_factory=list)
    bad_certificates: list = field(default_factory=list)
    mismatch_tags: list = field(default_factory=list)
    solutions: int = 0
    certificates: int = 0

    def add(self, problem: str, outcome: str):
        self.rows.setdefault(problem, Counter())[outcome] += 1

    @property
    def mismatches(self) -> int:
        return sum(c["mismatch"] for c in self.rows.values())

    def table(self) -> str:
        lines = [f"{'problem':<12}{'pass':>6}{'mismatch':>10}{'budget':>8}"]
        for name in sorted(self.rows):
            c = self.rows[name]
            lines.append(f"{name:<12}{c['pass']:>6}{c['mismatch']:>10}{c['budget']:>8}")
        lines.append(f"solutions validated: {self.solutions} "
                     f"(invalid {len(self.invalid_solutions)}); "
                     f"certificates verified: {self.certificates} "
                     f"(bad {len(self.bad_certificates)})")
        return "\n".join(lines)


def _cert_ok(tally: Tally, tag, cert, state=None, **ctx):
    tally.certificates += 1
    if not oracles.verify_certificate(cert, state, **ctx):
        tally.bad_certificates.append((tag, cert))


def _verdicts(tally: Tally, problem: str, verdicts: list, tag):
    """verdicts: booleans, or None for a budget exceedance."""
    if any(v is None for v in verdicts):
        tally.add(problem, "budget")
    elif len(set(verdicts)) == 1:
        tally.add(problem, "pass")
    else:
        tally.add(problem, "mismatch")
        tally.mismatch_tags.append((problem, tag, tuple(verdicts)))


def _bf_verdict(res):
    return None if res.status == bruteforce.BUDGET else res.feasible


def mutated_checks(name: Optional[str]) -> dict:
    """Checker table with one checker deliberately broken (harness self-test)."""
    checks = dict(CHECKS)
    if name is None:
        return checks
    if name not in MUTATIONS:
        raise ValueError(f"unknown mutation {name!r}")
    if name == "cond11":
        checks["completion"] = lambda s: None
    elif name == "cond4":
        checks["lower"] = lambda s: None
    elif name == "cond22":
        checks["upper"] = lambda s: oracles.check_cond_11(s)
    return checks


def run_state(state: ForestState, tally: Tally, tag, budget=None, checks=None,
              record: Optional[list] = None):
    """Compare engine, checker and brute force on all four bound regimes plus the bipartite chain."""
    checks = checks or CHECKS
    for name, s in variants(state).items():
        res = ENGINES[name](s)
        cert = checks[name](s)
        bf = bruteforce.bf_feasible_completion(s, budget)
        _verdicts(tally, name, [res.ok, cert is None, _bf_verdict(bf)], tag)
        if res.ok:
            tally.solutions += 1
            problems = solution_problems(s, res.forests)
            if problems:
                tally.invalid_solutions.append((tag, name, problems))
            elif augment.replay(s, res.steps) != res.forests:
                tally.invalid_solutions.append((tag, name, ["step log does not replay"]))
        else:
            _cert_ok(tally, (tag, name), res.certificate, s)
        if bf.feasible:
            tally.solutions += 1
            if solution_problems(s, bf.witness):
                tally.invalid_solutions.append((tag, name, ["brute-force witness invalid"]))
        if record is not None:
            record.append((tag, name, res.ok, cert is None, _bf_verdict(bf)))
        if name == "completion":
            chain(s, tally, tag, budget, completable=_bf_verdict(bf))


def chain(s: ForestState, tally: Tally, tag, budget=None, completable=None):
    """completable, (11), (54-R), (44) on the reduction, greedy cover, brute-force cover."""
    binst = bipartite.lemma53_reduce(s)
    c11 = oracles.check_cond_11(s) is None
    c54 = oracles.check_cond_54R(s) is None
    c44 = bipartite.check_cond_44(binst)
    cov = bipartite.cover_greedy(binst)
    bfc = bruteforce.bf_cover(binst, budget)
    if completable is None:
        completable = _bf_verdict(bruteforce.bf_feasible_completion(s, budget))
    _verdicts(tally, "chain", [completable, c11, c54, c44 is None, cov.ok, _bf_verdict(bfc)], tag)
    if cov.ok:
        done = bipartite.cover_to_completion(s, cov.edges)
        tally.solutions += 1
        if not done.ok or solution_problems(s, done.forests):
            tally.invalid_solutions.append((tag, "chain", ["cover does not map back"]))
    else:
        _cert_ok(tally, (tag, "chain"), cov.certificate, bipartite=binst)


def run_plain(D: Digraph, k: int, c: int, tally: Tally, tag, budget=None, spanning_check=None):
    """Packing and decomposition comparisons on a root-free digraph."""
    spanning_check = spanning_check or oracles.check_spanning_pack
    # spanning arborescences, three ways plus brute force
    sp = pack.pack_spanning(D, k)
    ex = pack.pack_exact_sizes(D, [1] * k) if k else sp
    cert = spanning_check(D, k)
    bf = bruteforce.bf_feasible_branchings(D, k, root_bounds=[(1, 1)] * k, budget=budget)
    _verdicts(tally, "spanning", [sp.ok, ex.ok, cert is None, _bf_verdict(bf)], tag)
    for res, ctx in ((sp, {"k": k}), (ex, {"k": k, "c_prime": [1] * k})):
        if res.ok:
            tally.solutions += 1
            if any(decompose.root_set_size(D, b) != 1 for b in res.branchings) or \
                    not decompose.arc_disjoint_branchings(D, res.branchings):
                tally.invalid_solutions.append((tag, "spanning", ["bad arborescences"]))
        else:
            _cert_ok(tally, (tag, "spanning"), res.certificate, digraph=D, **ctx)
    # c+-decomposition
    kk = max(k, 1)
    out = decompose.decompose_cplus(D, kk, c)
    pre = decompose.precondition_certificate(D, kk, c)
    bfd = bruteforce.bf_feasible_decomposition(D, kk, at_least=c, budget=budget)
    ok = not isinstance(out, oracles.ViolationCertificate)
    _verdicts(tally, "decompose", [ok, pre is None, _bf_verdict(bfd)], tag)
    if ok:
        tally.solutions += 1
        if any(D.n - len(b) < c for b in out) or not decompose.is_decomposition(D, out):
            tally.invalid_solutions.append((tag, "decompose", ["bad decomposition"]))
        bal = decompose.balance_decomposition(D, out)
        good = decompose.is_decomposition(D, bal) and decompose.is_balanced(D, bal)
        tally.add("balance", "pass" if good else "mismatch")
    else:
        _cert_ok(tally, (tag, "decompose"), out, digraph=D, k=kk, c=c)


def run_corpus(seed: int, count: int, max_v: int = 4, profile: Optional[str] = None,
               budget: Optional[int] = None, mutate: Optional[str] = None,
               record: Optional[list] = None) -> Tally:
    rng = random.Random(seed)
    sb = bruteforce.SearchBudget(max_nodes=budget) if budget else None
    checks = mutated_checks(mutate)
    spanning_check = (lambda D, k: None) if mutate == "spanning" else None
    names = sorted(PROFILES) if profile is None else [profile]
    tally = Tally()
    for idx in range(count):
        prof = PROFILES[names[idx % len(names)]]
        state = random_state(rng, prof, max_v=max_v)
        run_state(state, tally, idx, sb, checks, record)
        D = plain_digraph(state)
        if D.n:
            run_plain(D, state.k if D.n > 1 else 1, rng.randint(0, D.n), tally, idx, sb,
                      spanning_check)
    return tally


# ---------------------------------------------------------------------------
# exhaustive small instances

def _arborescences(D: Digraph, root: int) -> list:
    """Every (possibly non-spanning) root-arborescence of D, as arc-id frozensets."""
    out = set()

    def grow(reach, cur):
        if cur in out:
            return
        out.add(cur)
        for e, (t, h) in enumerate(D.arcs):
            if reach >> t & 1 and not reach >> h & 1:
                grow(reach | 1 << h, cur | {e})

    grow(1 << root, frozenset())
    return sorted(out, key=lambda f: (len(f), sorted(f)))


def small_digraphs(max_v=3, max_mult=2, max_arcs=6):
    """All rooted multidigraphs on x + V, |V| <= max_v, in a fixed order.

    Arcs into x are left out: they can never be used and enter no subset of V.
    """
    import itertools

    for n in range(1, max_v + 1):
        slots = [(0, v) for v in range(1, n + 1)] + \
                [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
        names = ("x",) + tuple(f"v{j}" for j in range(1, n + 1))
        for mult in itertools.product(range(max_mult + 1), repeat=len(slots)):
            if sum(mult) > max_arcs:
                continue
            arcs = tuple(p for p, c in zip(slots, mult) for _ in range(c))
            yield Digraph(names, arcs)


def exhaustive_states(max_v=3, max_mult=2, max_arcs=6, ks=(1, 2)):
    """Every digraph from :func:`small_digraphs` with every tuple of k arc-disjoint
    initial x-arborescences (ordered), for each k in ``ks``."""
    import itertools

    for D in small_digraphs(max_v, max_mult, max_arcs):
        inst = RootedInstance(D, 0)
        arbs = _arborescences(D, 0)
        for k in ks:
            for combo in itertools.product(arbs, repeat=k):
                used = set()
                for f in combo:
                    if used & f:
                        break
                    used |= f
                else:
                    yield ForestState(inst, combo, _skip_checks=True)
