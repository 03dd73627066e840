"""Step-by-step completion of arc-disjoint arborescences to spanning ones.

Each engine checks its feasibility condition first.  When it holds, the
engine grows the forests one arc at a time.  A candidate step is accepted
only if the exact condition still holds afterwards.  The theory guarantees
such a step always exists, so failing to find one raises
:class:`ContractError`.  Candidates are scanned by part, then forest, then
arc id.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import oracles
from .digraph import ForestState
from .errors import ContractError, InputError

ADD_ROOT = "add_root_arc"
ADD_INTERNAL = "add_internal_arc"
DECREMENT = "decrement_upper"


@dataclass(frozen=True)
class StepAction:
    kind: str
    index: int          # forest index, or part index for decrements
    arc: Optional[int] = None

    def to_json(self) -> dict:
        if self.kind == DECREMENT:
            return {"kind": self.kind, "part": self.index}
        return {"kind": self.kind, "forest": self.index, "arc": self.arc}

    @classmethod
    def from_json(cls, obj: dict) -> "StepAction":
        kind = obj.get("kind")
        if kind == DECREMENT:
            return cls(kind, int(obj["part"]))
        if kind in (ADD_ROOT, ADD_INTERNAL):
            return cls(kind, int(obj["forest"]), int(obj["arc"]))
        raise InputError(f"unknown step kind {kind!r}")


@dataclass(frozen=True)
class AugmentResult:
    forests: Optional[tuple] = None
    certificate: Optional[oracles.ViolationCertificate] = None
    steps: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.forests is not None


def apply_step(state: ForestState, step: StepAction) -> ForestState:
    """Apply one action after checking its local preconditions."""
    D, x = state.digraph, state.root
    if step.kind == DECREMENT:
        a = step.index
        if state.upper is None or not 0 <= a < state.l:
            raise InputError("decrement needs upper bounds and a valid part")
        if state.upper[a] <= state.part_root_degrees[a]:
            raise InputError("part has no slack to decrement")
        upper = list(state.upper)
        upper[a] -= 1
        return ForestState(state.inst, state.forests, state.partition, state.lower,
                           tuple(upper), _skip_checks=True)
    i, e = step.index, step.arc
    if not 0 <= i < state.k or e is None or not 0 <= e < D.m:
        raise InputError("step refers to an unknown forest or arc")
    if e in state.used:
        raise InputError(f"arc {e} is already used")
    u, v = D.arcs[e]
    fv = state.forest_vertices[i]
    if (u == x) != (step.kind == ADD_ROOT):
        raise InputError("step kind does not match the arc's tail")
    if not fv >> u & 1 or fv >> v & 1:
        raise InputError("arc does not leave the forest's vertex set")
    return state.with_arc(i, e)


def replay(state: ForestState, steps: Iterable) -> tuple:
    """Re-apply a step log; returns the resulting forests."""
    for step in steps:
        if isinstance(step, dict):
            step = StepAction.from_json(step)
        state = apply_step(state, step)
    return state.forests


def _kind(state, e):
    return ADD_ROOT if state.digraph.arcs[e][0] == state.root else ADD_INTERNAL


def _complete(state: ForestState, pool: set, steps: list) -> ForestState:
    D = state.digraph
    while not state.all_spanning:
        for i in range(state.k):
            if state.is_spanning(i):
                continue
            fv = state.forest_vertices[i]
            chosen = None
            for e in sorted(pool):
                u, v = D.arcs[e]
                if not fv >> u & 1 or fv >> v & 1:
                    continue
                cand = state.with_arc(i, e)
                if oracles.cond11_holds(cand, pool - {e}):
                    chosen = (cand, e)
                    break
            if chosen is None:
                raise ContractError("no completion step keeps the cut condition")
            state, e = chosen
            pool.discard(e)
            steps.append(StepAction(_kind(state, e), i, e))
            break
    return state


def complete_to_spanning(state: ForestState, arc_pool: Optional[Iterable[int]] = None) -> AugmentResult:
    """Complete every forest to a spanning arborescence using arcs of ``arc_pool``
    (default: all arcs outside the forests)."""
    residual = set(state.residual)
    if arc_pool is None:
        pool = set(residual)
        cert = oracles.check_cond_11(state)
    else:
        pool = set(arc_pool)
        if not pool <= residual:
            raise InputError("arc pool must avoid the forests' arcs")
        cert = oracles.check_cond_11(state, None if pool == residual else pool)
    if cert is not None:
        return AugmentResult(certificate=cert)
    steps: list = []
    final = _complete(state, pool, steps)
    return AugmentResult(forests=final.forests, steps=tuple(steps))


def _deficient(state: ForestState) -> list:
    return [a for a in range(state.l) if state.part_root_degrees[a] < state.lower[a]]


def _root_candidates(state: ForestState, a: int):
    D, x = state.digraph, state.root
    free = [e for e in state.residual if D.arcs[e][0] == x]
    for i in state.partition[a]:
        fv = state.forest_vertices[i]
        for e in free:
            if not fv >> D.arcs[e][1] & 1:
                yield i, e


def _lower_phase(state: ForestState, steps: list, keep) -> ForestState:
    while True:
        short = _deficient(state)
        if not short:
            return state
        before = sum(state.lower[a] - state.part_root_degrees[a] for a in short)
        a0 = short[0]
        for i, e in _root_candidates(state, a0):
            cand = state.with_arc(i, e)
            if keep(cand):
                break
        else:
            raise ContractError(f"no root-arc step repairs part {a0}")
        after = sum(max(0, cand.lower[a] - cand.part_root_degrees[a]) for a in range(cand.l))
        if after != before - 1:
            raise ContractError("total deficiency did not drop by one")
        state = cand
        steps.append(StepAction(ADD_ROOT, i, e))


def augment_lower(state: ForestState) -> AugmentResult:
    """Spanning completion in which every part gets at least its lower bound of root arcs."""
    if state.lower is None:
        raise InputError("lower bounds are required")
    if state.upper is not None:
        raise InputError("use augment_both when upper bounds are present")
    cert = oracles.check_cond_4(state)
    if cert is not None:
        return AugmentResult(certificate=cert)
    steps: list = []
    state = _lower_phase(state, steps, oracles.cond4_holds)
    state = _complete(state, set(state.residual), steps)
    return AugmentResult(forests=state.forests, steps=tuple(steps))


def _check_upper_start(state: ForestState):
    if any(d > c for d, c in zip(state.part_root_degrees, state.upper)):
        raise InputError("a part already has more root arcs than its upper bound")


def _upper_slack_total(state: ForestState) -> int:
    return sum(c - d for c, d in zip(state.upper, state.part_root_degrees))


def _guided_candidates(state: ForestState, a0: int):
    """Root arcs suggested by the extreme tight families, before a plain scan."""
    D, x = state.digraph, state.root
    full = (1 << state.k) - 1
    fams = oracles.enumerate_E1(state, full)
    top = oracles.find_U(state, full, families=fams)
    bottom = oracles.find_V(state, full, families=fams)
    if top is None or bottom is None:
        return
    free = [e for e in state.residual if D.arcs[e][0] == x]
    for X0 in top:
        for i in state.partition[a0]:
            if X0 & state.forest_vertices[i]:
                continue
            for Y0 in bottom:
                if Y0 & X0 != Y0:
                    continue
                for e in free:
                    if Y0 >> D.arcs[e][1] & 1:
                        yield i, e


def _upper_phase(state: ForestState, steps: list) -> ForestState:
    def keeps(s):
        return oracles.cond11_holds(s) and oracles.cond22_holds(s)

    while True:
        slack = [a for a in range(state.l) if state.part_root_degrees[a] < state.upper[a]]
        if not slack:
            break
        before = _upper_slack_total(state)
        accepted = None
        for a in slack:
            step = StepAction(DECREMENT, a)
            cand = apply_step(state, step)
            if oracles.cond22_holds(cand):
                accepted = (cand, step)
                break
        if accepted is None:
            a0 = slack[0]
            for i, e in _guided_candidates(state, a0):
                cand = state.with_arc(i, e)
                if keeps(cand):
                    accepted = (cand, StepAction(ADD_ROOT, i, e))
                    break
        if accepted is None:
            for a in slack:
                for i, e in _root_candidates(state, a):
                    cand = state.with_arc(i, e)
                    if keeps(cand):
                        accepted = (cand, StepAction(ADD_ROOT, i, e))
                        break
                if accepted:
                    break
        if accepted is None:
            raise ContractError("neither a decrement nor a root arc keeps the upper-bound condition")
        state, step = accepted
        if _upper_slack_total(state) != before - 1:
            raise ContractError("upper slack did not drop by one")
        steps.append(step)
    pool = set(state.residual_nonroot)
    if not oracles.cond11_holds(state, pool):
        raise ContractError("tight upper bounds left an incompletable state")
    return _complete(state, pool, steps)


def augment_upper(state: ForestState) -> AugmentResult:
    """Spanning completion in which every part gets at most its upper bound of root arcs."""
    if state.upper is None:
        raise InputError("upper bounds are required")
    if state.lower is not None:
        raise InputError("use augment_both when lower bounds are present")
    _check_upper_start(state)
    cert = oracles.check_cond_11(state) or oracles.check_cond_22(state)
    if cert is not None:
        return AugmentResult(certificate=cert)
    steps: list = []
    final = _upper_phase(state, steps)
    return AugmentResult(forests=final.forests, steps=tuple(steps))


def augment_both(state: ForestState) -> AugmentResult:
    """Spanning completion with lower and upper bounds on every part."""
    if state.lower is None or state.upper is None:
        raise InputError("both bound vectors are required")
    _check_upper_start(state)
    cert = oracles.check_cond_4(state) or oracles.check_cond_22(state)
    if cert is not None:
        return AugmentResult(certificate=cert)
    steps: list = []
    state = _lower_phase(state, steps,
                         lambda s: oracles.cond4_holds(s) and oracles.cond22_holds(s))
    plain = ForestState(state.inst, state.forests, state.partition, None, state.upper,
                        _skip_checks=True)
    final = _upper_phase(plain, steps)
    return AugmentResult(forests=final.forests, steps=tuple(steps))


def solve(state: ForestState) -> AugmentResult:
    """Dispatch on which bound vectors are present."""
    if state.lower is not None and state.upper is not None:
        return augment_both(state)
    if state.lower is not None:
        return augment_lower(state)
    if state.upper is not None:
        return augment_upper(state)
    return complete_to_spanning(state)
