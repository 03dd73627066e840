from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from branchpack import oracles
from branchpack.bruteforce import bf_feasible_decomposition
from branchpack.decompose import (
    apply_resplit, balance_decomposition, decompose_cplus, decompose_k, fractional_arboricity,
    is_balanced, is_decomposition, precondition_certificate, root_set_size,
)
from branchpack.digraph import Digraph, root_set
from branchpack.errors import InputError
from branchpack.oracles import ViolationCertificate

from support import plain_digraphs

PATH = Digraph.from_names("abc", [("a", "b"), ("b", "c")])
TRIANGLE = Digraph.from_names("abc", [("a", "b"), ("b", "c"), ("c", "a")])


def test_arboricity_examples():
    rep = fractional_arboricity(TRIANGLE)
    assert rep.value == Fraction(3, 2) and rep.witness == TRIANGLE.all_mask
    assert fractional_arboricity(PATH).value == 1
    assert fractional_arboricity(Digraph.from_names("ab", [("a", "b")] * 2)).value == 2


def test_path_single_branching():
    out = decompose_cplus(PATH, 1, 1)
    assert out == [frozenset({0, 1})]
    assert root_set(PATH, out[0]) == PATH.mask("a")


def test_triangle_needs_two_branchings():
    cert = decompose_cplus(TRIANGLE, 1, 1)
    assert cert.condition == "arboricity"
    assert Fraction(cert.lhs, cert.family[0].bit_count() - 1) == Fraction(3, 2)
    assert oracles.verify_certificate(cert, digraph=TRIANGLE, k=1, c=1)


def test_triangle_two_branchings_root_total():
    out = decompose_cplus(TRIANGLE, 2, 1)
    assert is_decomposition(TRIANGLE, out)
    sizes = sorted(root_set_size(TRIANGLE, B) for B in out)
    assert sum(sizes) == 2 * 3 - 3
    # brute force agrees, and no split with both sizes >= 2 exists
    assert bf_feasible_decomposition(TRIANGLE, 2, at_least=1).feasible
    assert not bf_feasible_decomposition(TRIANGLE, 2, at_least=2).feasible
    assert decompose_cplus(TRIANGLE, 2, 2).condition == "density"


def test_decompose_k_examples():
    assert decompose_k(PATH, 1) == [frozenset({0, 1})]
    cyc = Digraph.from_names("ab", [("a", "b"), ("b", "a")])
    assert sorted(map(sorted, decompose_k(cyc, 2))) == [[0], [1]]
    fan = Digraph.from_names("abcd", [("a", "d"), ("b", "d"), ("c", "d")])
    cert = decompose_k(fan, 2)
    assert cert.condition == "max_indegree" and cert.family == (fan.mask("d"),)


def test_bad_parameters():
    with pytest.raises(InputError):
        decompose_cplus(PATH, 0, 0)
    with pytest.raises(InputError):
        decompose_cplus(PATH, 1, 4)


def test_balance_examples():
    assert balance_decomposition(PATH, [{0, 1}]) == [frozenset({0, 1})]
    fork = Digraph.from_names("abc", [("a", "b"), ("a", "c")])
    log = []
    out = balance_decomposition(fork, [{0, 1}, set()], log)
    assert [root_set_size(fork, B) for B in out] == [2, 2]
    assert len(log) == 1
    i, j, new_i, new_j = log[0]
    assert apply_resplit(fork, [{0, 1}, set()], i, j, new_i, new_j) == out
    balanced = [frozenset({0}), frozenset({1})]
    assert balance_decomposition(fork, balanced) == balanced
    with pytest.raises(InputError):
        balance_decomposition(fork, [{0}])
    with pytest.raises(InputError):
        apply_resplit(fork, [{0, 1}, set()], 0, 1, {0}, set())


@given(plain_digraphs(max_v=5, max_arcs=10), st.integers(1, 3), st.data())
def test_decompose_matches_preconditions_and_brute_force(D, k, data):
    c = data.draw(st.integers(0, D.n))
    out = decompose_cplus(D, k, c)
    ok = not isinstance(out, ViolationCertificate)
    pre = (max(D.in_degrees(), default=0) <= k and fractional_arboricity(D).value <= k
           and D.m <= k * (D.n - c))
    assert ok == pre == bf_feasible_decomposition(D, k, at_least=c).feasible
    if ok:
        assert is_decomposition(D, out)
        assert all(root_set_size(D, B) >= c for B in out)
        bal = balance_decomposition(D, out)
        assert is_decomposition(D, bal) and is_balanced(D, bal)
    else:
        assert oracles.verify_certificate(out, digraph=D, k=k, c=c)
    assert (precondition_certificate(D, k, c) is None) == ok
