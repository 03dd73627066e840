import json
import random
import time
from fractions import Fraction

import pytest

from branchpack import augment, bipartite, bruteforce, corpus, decompose, oracles, pack
from branchpack.cli import main
from branchpack.digraph import Digraph, solution_problems
from branchpack.jsonio import instance_json
from branchpack.oracles import ViolationCertificate
from branchpack.setfam import DisjointFamily

from support import check_pieo_run

SWEEP_LIMIT_S = 300
CORPUS_LIMIT_S = 600
PIEO_LIMIT_S = 60


class Validity:
    """Counts of validated solutions and certificates, and anything that failed."""

    def __init__(self):
        self.solutions = self.certificates = 0
        self.bad = []

    def solution(self, tag, state, forests, steps=None):
        self.solutions += 1
        problems = solution_problems(state, forests)
        if not problems and steps is not None and augment.replay(state, steps) != forests:
            problems = ["step log does not replay"]
        if problems:
            self.bad.append((tag, problems))

    def certificate(self, tag, cert, state=None, **ctx):
        self.certificates += 1
        if not oracles.verify_certificate(cert, state, **ctx):
            self.bad.append((tag, cert))


def _same(values):
    return len(set(values)) == 1


@pytest.fixture(scope="module")
def sweep():
    """Every small rooted instance: completion three ways plus the bipartite chain."""
    out = {"states": 0, "completion_bad": [], "chain_bad": [], "supermodular_bad": [],
           "completion_s": 0.0, "chain_s": 0.0, "validity": Validity()}
    val = out["validity"]
    for idx, s in enumerate(corpus.exhaustive_states(max_v=3, max_mult=2, max_arcs=6, ks=(1, 2))):
        out["states"] += 1
        t0 = time.perf_counter()
        res = augment.complete_to_spanning(s)
        cert = oracles.check_cond_11(s)
        bf = bruteforce.bf_feasible_completion(s)
        t1 = time.perf_counter()
        if not _same([res.ok, cert is None, bf.feasible]):
            out["completion_bad"].append(idx)
        if res.ok:
            val.solution(idx, s, res.forests, res.steps)
        else:
            val.certificate(idx, res.certificate, s)
        if bf.feasible:
            val.solution(idx, s, bf.witness)
        binst = bipartite.lemma53_reduce(s)
        if bipartite.supermodularity_violation(binst) is not None:
            out["supermodular_bad"].append(idx)
        c54 = oracles.check_cond_54R(s)
        c44 = bipartite.check_cond_44(binst)
        cov = bipartite.cover_greedy(binst)
        bfc = bruteforce.bf_cover(binst)
        if not _same([bf.feasible, cert is None, c54 is None, c44 is None, cov.ok, bfc.feasible]):
            out["chain_bad"].append(idx)
        if cov.ok:
            done = bipartite.cover_to_completion(s, cov.edges)
            val.solution(idx, s, done.forests if done.ok else ())
        else:
            val.certificate(idx, cov.certificate, bipartite=binst)
        if c54 is not None:
            val.certificate(idx, c54, s)
        out["completion_s"] += t1 - t0
        out["chain_s"] += time.perf_counter() - t1
    return out


@pytest.fixture(scope="module")
def random_corpus():
    t0 = time.perf_counter()
    tally = corpus.run_corpus(seed=20240601, count=360, max_v=4)
    return tally, time.perf_counter() - t0


def _random_plain(rng, max_v=5, max_arcs=10):
    n = rng.randint(1, max_v)
    prof = corpus.PROFILES[rng.choice(sorted(corpus.PROFILES))]
    return corpus.random_digraph(rng, n, prof, with_root=False, max_arcs=max_arcs)


@pytest.fixture(scope="module")
def decomposition_corpus():
    rng = random.Random(77)
    cases = []
    for _ in range(400):
        D = _random_plain(rng)
        cases.append((D, rng.randint(1, 3), rng.randint(0, D.n)))
    # the directed triangle at every k, c
    tri = Digraph.from_names("abc", [("a", "b"), ("b", "c"), ("c", "a")])
    cases += [(tri, k, c) for k in (1, 2, 3) for c in range(4)]
    return cases


def _preconditions(D, k, c):
    """Decomposability preconditions computed directly from the definitions."""
    indeg = [sum(1 for _, h in D.arcs if h == v) for v in range(D.n)]
    arb = Fraction(0)
    for X in range(1, 1 << D.n):
        size = bin(X).count("1")
        if size >= 2:
            inside = sum(1 for t, h in D.arcs if X >> t & 1 and X >> h & 1)
            arb = max(arb, Fraction(inside, size - 1))
    return max(indeg, default=0) <= k and arb <= k and D.m <= k * (D.n - c)


# ---------------------------------------------------------------------------

def test_criterion_1_completion_sweep(sweep, acceptance_detail):
    acceptance_detail(1, f"{sweep['states']} states, {len(sweep['completion_bad'])} mismatches, "
                         f"{sweep['completion_s']:.0f}s")
    assert sweep["states"] > 100_000
    assert sweep["completion_bad"] == []
    assert sweep["completion_s"] <= SWEEP_LIMIT_S


def test_criterion_2_bounded_completion_corpus(random_corpus, acceptance_detail):
    tally, elapsed = random_corpus
    rows = {name: tally.rows[name] for name in ("lower", "upper", "both")}
    total = sum(r["pass"] + r["mismatch"] + r["budget"] for r in rows.values())
    acceptance_detail(2, f"3 x {rows['both']['pass']} instances, "
                         f"{sum(r['mismatch'] for r in rows.values())} mismatches, {elapsed:.0f}s")
    assert total >= 3 * 300
    assert all(r["mismatch"] == 0 and r["budget"] == 0 for r in rows.values())
    assert tally.rows["completion"]["mismatch"] == 0
    assert elapsed <= CORPUS_LIMIT_S


def test_criterion_3_validity(sweep, random_corpus, decomposition_corpus, acceptance_detail):
    val = sweep["validity"]
    tally, _ = random_corpus
    for D, k, c in decomposition_corpus:
        out = decompose.decompose_cplus(D, k, c)
        if isinstance(out, ViolationCertificate):
            val.certificate(("decompose", D, k, c), out, digraph=D, k=k, c=c)
        else:
            val.solutions += 1
            if not decompose.is_decomposition(D, out) or any(D.n - len(b) < c for b in out):
                val.bad.append((("decompose", D, k, c), "bad decomposition"))
    solutions = val.solutions + tally.solutions
    certificates = val.certificates + tally.certificates
    bad = len(val.bad) + len(tally.invalid_solutions) + len(tally.bad_certificates)
    acceptance_detail(3, f"{solutions} solutions, {certificates} certificates, {bad} invalid")
    assert val.bad == []
    assert tally.invalid_solutions == [] and tally.bad_certificates == []
    assert solutions > 0 and certificates > 0


def test_criterion_4_decomposition(decomposition_corpus, acceptance_detail):
    tri = Digraph.from_names("abc", [("a", "b"), ("b", "c"), ("c", "a")])
    assert decompose.fractional_arboricity(tri).value == Fraction(3, 2)
    cert = decompose.decompose_cplus(tri, 1, 0)
    assert cert.condition == "arboricity" and Fraction(cert.lhs, 2) == Fraction(3, 2)
    bad = []
    feasible = 0
    for D, k, c in decomposition_corpus:
        out = decompose.decompose_cplus(D, k, c)
        ok = not isinstance(out, ViolationCertificate)
        bf = bruteforce.bf_feasible_decomposition(D, k, at_least=c)
        feasible += ok
        if not _same([ok, _preconditions(D, k, c), bf.feasible]):
            bad.append((D, k, c))
    acceptance_detail(4, f"{len(decomposition_corpus)} instances ({feasible} decomposable), "
                         f"{len(bad)} mismatches")
    assert bad == []
    assert 0 < feasible < len(decomposition_corpus)


def test_criterion_5_balance(decomposition_corpus, random_corpus, acceptance_detail):
    checked = 0
    bad = []
    for D, k, c in decomposition_corpus:
        out = decompose.decompose_cplus(D, k, c)
        if isinstance(out, ViolationCertificate):
            continue
        bal = decompose.balance_decomposition(D, out)
        checked += 1
        total = k * D.n - D.m
        sizes = [decompose.root_set_size(D, b) for b in bal]
        arcs = [len(b) for b in bal]
        ok = (decompose.is_decomposition(D, bal)
              and all(s in (total // k, -(-total // k)) for s in sizes)
              and all(a in (D.m // k, -(-D.m // k)) for a in arcs))
        if not ok:
            bad.append((D, k, c))
    tally, _ = random_corpus
    checked += tally.rows["balance"]["pass"] + tally.rows["balance"]["mismatch"]
    acceptance_detail(5, f"{checked} decompositions balanced, {len(bad)} failures")
    assert bad == [] and tally.rows["balance"]["mismatch"] == 0
    assert checked > 100


def test_criterion_6_uncrossing(acceptance_detail):
    rng = random.Random(31)
    t0 = time.perf_counter()
    runs = crossed = steps = 0
    for run in range(1200):
        n = rng.randint(1, 8) if run % 4 == 0 else rng.randint(5, 8)
        ground = (1 << n) - 1
        fams = []
        for _ in range(2):
            # few labels give large blocks, which cross more often
            top = rng.randint(1, n)
            labels = [rng.randint(0, top) for _ in range(n)]
            blocks = {}
            for v, lab in enumerate(labels):
                if lab:
                    blocks[lab] = blocks.get(lab, 0) | 1 << v
            fams.append(DisjointFamily(ground, frozenset(blocks.values())))
        types = [(1,), (1, 2), (1, 2, 3), (2,), (3,)][run % 5]
        trace = check_pieo_run(fams[0], fams[1], types, rng.randrange(2**32))
        runs += 1
        crossed += bool(trace.steps)
        steps += len(trace.steps)
    elapsed = time.perf_counter() - t0
    acceptance_detail(6, f"{runs} runs ({crossed} with crossings), {steps} steps, {elapsed:.1f}s")
    assert runs >= 1000 and crossed >= runs // 4
    assert elapsed <= PIEO_LIMIT_S


def test_criterion_7_bipartite_chain(sweep, acceptance_detail):
    acceptance_detail(7, f"{sweep['states']} states, {len(sweep['chain_bad'])} mismatches, "
                         f"{len(sweep['supermodular_bad'])} non-supermodular demands")
    assert sweep["chain_bad"] == []
    assert sweep["supermodular_bad"] == []


def test_criterion_8_spanning(random_corpus, decomposition_corpus, acceptance_detail):
    tally, _ = random_corpus
    bad = []
    seen = set()
    for D, _, _ in decomposition_corpus:
        for k in (1, 2, 3):
            if (D, k) in seen:
                continue
            seen.add((D, k))
            sp = pack.pack_spanning(D, k)
            ex = pack.pack_exact_sizes(D, [1] * k)
            ok = oracles.check_spanning_pack(D, k) is None
            if not _same([sp.ok, ex.ok, ok]):
                bad.append((D, k))
    row = tally.rows["spanning"]
    acceptance_detail(8, f"{len(seen) + row['pass']} instances, "
                         f"{len(bad) + row['mismatch']} mismatches")
    assert bad == [] and row["mismatch"] == 0 and row["budget"] == 0


def _replay_documents():
    """Instance documents covering every solve mode."""
    rng = random.Random(11)
    docs = []
    for idx in range(40):
        s = corpus.random_state(rng, corpus.PROFILES[sorted(corpus.PROFILES)[idx % 3]])
        D = s.digraph
        base = dict(instance_json(D, root=D.names[s.root]),
                    forests=[sorted(f) for f in s.forests],
                    partition=[list(p) for p in s.partition])
        docs.append(dict(base, mode="complete"))
        docs.append(dict(base, mode="augment_lower", lower=list(s.lower)))
        docs.append(dict(base, mode="augment_upper", upper=list(s.upper)))
        docs.append(dict(base, mode="augment_both", lower=list(s.lower), upper=list(s.upper)))
        docs.append(dict(base, mode="cover"))
        P = corpus.plain_digraph(s)
        k = rng.randint(1, 2)
        plain = instance_json(P)
        docs.append(dict(plain, mode="pack_spanning", k=k))
        docs.append(dict(plain, mode="pack_exact", c=[rng.randint(1, P.n) for _ in range(k)]))
        docs.append(dict(plain, mode="pack_rootsets",
                         rootsets=[P.names_of(rng.randint(1, P.all_mask)) for _ in range(k)]))
        docs.append(dict(plain, mode="pack_prescribed", partition=[[i] for i in range(k)],
                         U=[[] for _ in range(k)], c_prime=[P.n] * k))
        docs.append(dict(plain, mode="decompose", k=3))
        docs.append(dict(plain, mode="decompose_cplus", k=3, c=rng.randint(0, P.n)))
        out = decompose.decompose_k(P, 3)
        if not isinstance(out, ViolationCertificate):
            docs.append(dict(plain, mode="balance", branchings=[sorted(b) for b in out]))
    return docs


def test_criterion_9_replay(tmp_path, acceptance_detail):
    replayed = {}
    mismatched = []
    for idx, doc in enumerate(_replay_documents()):
        inp = tmp_path / f"in{idx}.json"
        out = tmp_path / f"out{idx}.json"
        again = tmp_path / f"again{idx}.json"
        inp.write_text(json.dumps(doc), encoding="utf-8")
        code = main(["solve", "--in", str(inp), "--out", str(out)])
        if code != 0:
            continue
        code = main(["replay", "--in", str(inp), "--result", str(out), "--out", str(again)])
        if code != 0 or again.read_bytes() != out.read_bytes():
            mismatched.append((doc["mode"], idx))
        replayed[doc["mode"]] = replayed.get(doc["mode"], 0) + 1
    acceptance_detail(9, f"{sum(replayed.values())} solutions over {len(replayed)} modes, "
                         f"{len(mismatched)} differ")
    assert mismatched == []
    assert len(replayed) == 12
