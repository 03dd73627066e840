import pytest
from hypothesis import given

from branchpack import augment, oracles
from branchpack.augment import (
    ADD_INTERNAL, ADD_ROOT, DECREMENT, StepAction, apply_step, augment_both, augment_lower,
    augment_upper, complete_to_spanning, replay,
)
from branchpack.bruteforce import bf_feasible_completion
from branchpack.digraph import Digraph, ForestState, RootedInstance, solution_problems
from branchpack.errors import InputError

from support import forest_states


def state_of(vertices, arcs, forests, **kw):
    D = Digraph.from_names(vertices, arcs)
    return ForestState(RootedInstance(D, 0), forests, **kw)


def arcs_of(state, forest):
    D = state.digraph
    return sorted((D.names[t], D.names[h]) for t, h in (D.arcs[e] for e in forest))


def test_complete_path():
    s = state_of("xab", [("x", "a"), ("a", "b")], [[]])
    res = complete_to_spanning(s)
    assert res.ok and arcs_of(s, res.forests[0]) == [("a", "b"), ("x", "a")]
    assert [st.kind for st in res.steps] == [ADD_ROOT, ADD_INTERNAL]


def test_complete_already_spanning_is_noop():
    s = state_of("xab", [("x", "a"), ("a", "b")], [[0, 1]])
    res = complete_to_spanning(s)
    assert res.forests == s.forests and res.steps == ()


def test_complete_unreachable_gives_certificate():
    res = complete_to_spanning(state_of("xb", [], [[]]))
    assert not res.ok and res.certificate.family == (0b10,)


def test_complete_rejects_pool_with_used_arc():
    s = state_of("xa", [("x", "a")], [[0]])
    with pytest.raises(InputError):
        complete_to_spanning(s, [0])


def test_lower_zero_bounds_is_plain_completion():
    s = state_of("xab", [("x", "a"), ("a", "b")], [[]], lower=[0])
    res = augment_lower(s)
    assert res.forests == complete_to_spanning(s.with_bounds(lower=None)).forests


def test_lower_two_parallel_root_arcs():
    s = state_of("xa", [("x", "a"), ("x", "a")], [[], []], partition=[[0, 1]], lower=[2])
    res = augment_lower(s)
    assert res.ok
    assert [len(f) for f in res.forests] == [1, 1]
    assert not solution_problems(s, res.forests)


def test_lower_one_root_arc_is_not_enough():
    res = augment_lower(state_of("xa", [("x", "a")], [[]], lower=[2]))
    assert not res.ok
    cert = res.certificate
    assert cert.family == () and (cert.lhs, cert.rhs) == (0, 1)


def test_upper_prefers_internal_arc():
    s = state_of("xab", [("x", "a"), ("x", "b"), ("a", "b")], [[]], upper=[1])
    res = augment_upper(s)
    assert arcs_of(s, res.forests[0]) == [("a", "b"), ("x", "a")]


def test_upper_zero_slack_avoids_new_root_arcs():
    s = state_of("xab", [("x", "a"), ("x", "b"), ("a", "b")], [[0]], upper=[1])
    res = augment_upper(s)
    assert arcs_of(s, res.forests[0]) == [("a", "b"), ("x", "a")]
    assert all(step.kind != ADD_ROOT for step in res.steps)


def test_upper_certificate_two_sources():
    s = state_of("xab", [("x", "a"), ("x", "b")], [[]], upper=[1])
    res = augment_upper(s)
    cert = res.certificate
    assert cert.condition == "cond22"
    assert sorted(cert.family) == [0b010, 0b100] and cert.index_union == (0,)
    assert (cert.lhs, cert.rhs) == (2, 1)


def test_both_with_zero_lower_equals_upper():
    s = state_of("xab", [("x", "a"), ("x", "b"), ("a", "b")], [[]], lower=[0], upper=[2])
    assert augment_both(s).forests == augment_upper(s.with_bounds(lower=None)).forests


def test_both_tight_bounds_is_completion():
    s = state_of("xab", [("x", "a"), ("a", "b")], [[0]], lower=[1], upper=[1])
    res = augment_both(s)
    assert arcs_of(s, res.forests[0]) == [("a", "b"), ("x", "a")]


def test_engines_reject_wrong_bounds():
    s = state_of("xa", [("x", "a")], [[]], lower=[1], upper=[1])
    with pytest.raises(InputError):
        augment_lower(s)
    with pytest.raises(InputError):
        augment_upper(s)
    with pytest.raises(InputError):
        augment_both(s.with_bounds(lower=None))
    with pytest.raises(InputError):
        augment_upper(state_of("xa", [("x", "a")], [[0]], upper=[0]))


def test_apply_step_checks_preconditions():
    s = state_of("xab", [("x", "a"), ("a", "b")], [[0]], upper=[1])
    with pytest.raises(InputError):
        apply_step(s, StepAction(ADD_ROOT, 0, 0))          # arc already used
    with pytest.raises(InputError):
        apply_step(s, StepAction(ADD_ROOT, 0, 1))          # wrong kind
    with pytest.raises(InputError):
        apply_step(s, StepAction(DECREMENT, 0))            # no slack
    with pytest.raises(InputError):
        StepAction.from_json({"kind": "jump"})
    step = StepAction(ADD_INTERNAL, 0, 1)
    assert StepAction.from_json(step.to_json()) == step
    assert apply_step(s, step).forests == (frozenset({0, 1}),)


def _check_result(state, res, want_ok):
    assert res.ok == want_ok
    if res.ok:
        assert solution_problems(state, res.forests) == []
        assert replay(state, res.steps) == res.forests
        assert replay(state, [s.to_json() for s in res.steps]) == res.forests
    else:
        assert oracles.verify_certificate(res.certificate, state)


@given(forest_states(max_v=4, max_k=3))
def test_completion_matches_oracles(state):
    res = complete_to_spanning(state)
    _check_result(state, res, bf_feasible_completion(state).feasible)


@given(forest_states(max_v=4, max_k=3, lower=True))
def test_lower_matches_oracles(state):
    res = augment_lower(state)
    want = bf_feasible_completion(state).feasible
    assert want == (oracles.check_cond_4(state) is None)
    _check_result(state, res, want)


@given(forest_states(max_v=4, max_k=3, upper=True))
def test_upper_matches_oracles(state):
    res = augment_upper(state)
    want = bf_feasible_completion(state).feasible
    assert want == (oracles.check_cond_11(state) is None and oracles.check_cond_22(state) is None)
    _check_result(state, res, want)


@given(forest_states(max_v=4, max_k=3, lower=True, upper=True))
def test_both_matches_oracles(state):
    res = augment_both(state)
    want = bf_feasible_completion(state).feasible
    assert want == (oracles.check_cond_4(state) is None and oracles.check_cond_22(state) is None)
    _check_result(state, res, want)


@given(forest_states(max_v=4, max_k=3, lower=True, upper=True))
def test_inputs_left_untouched(state):
    before = (state.forests, state.lower, state.upper)
    augment.solve(state)
    assert (state.forests, state.lower, state.upper) == before
