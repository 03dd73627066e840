"""JSON instance and result files, plus the solve/check/replay dispatch behind the CLI.

Vertices are named by strings and arcs referred to by their index in the
``arcs`` list.  Forest and part indices are 0-based.  Results are dumped
with sorted keys so equal results are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import augment, bipartite, decompose, oracles, pack
from .digraph import Digraph, ForestState, RootedInstance, solution_problems
from .errors import InputError
from .oracles import ViolationCertificate

CONDITIONS = ("cond11", "cond4", "cond22", "cond2", "edmonds", "spanning", "cai_frank",
              "cond54r", "cond44", "arboricity")
MODES = ("complete", "augment_lower", "augment_upper", "augment_both", "pack_rootsets",
         "pack_prescribed", "pack_exact", "pack_spanning", "decompose", "decompose_cplus",
         "balance", "cover")
AUGMENT_MODES = {
    "complete": None,
    "augment_lower": augment.augment_lower,
    "augment_upper": augment.augment_upper,
    "augment_both": augment.augment_both,
}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class Instance:
    raw: dict
    digraph: Digraph
    root: Optional[int]

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def require(self, key):
        if key not in self.raw:
            raise InputError(f"instance needs field {key!r}")
        return self.raw[key]

    def vmask(self, names) -> int:
        if not isinstance(names, list):
            raise InputError("vertex sets are lists of names")
        return self.digraph.mask(names)


def parse_instance(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InputError("instance must be a JSON object")
    if "vertices" not in obj:
        if "S" in obj and "T" in obj:
            return Instance(obj, Digraph((), ()), None)
        raise InputError("instance needs field 'vertices'")
    try:
        names = [str(v) for v in obj["vertices"]]
        arcs = [(str(t), str(h)) for t, h in obj.get("arcs", [])]
    except (TypeError, ValueError):
        raise InputError("vertices must be names and arcs [tail, head] pairs") from None
    D = Digraph.from_names(names, arcs)
    root = None
    if obj.get("root") is not None:
        root = D.index(str(obj["root"]))
    return Instance(obj, D, root)


def load_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    return parse_instance(obj)


def instance_json(D: Digraph, **fields) -> dict:
    """Canonical instance document for a digraph plus extra fields."""
    doc = {"vertices": list(D.names), "arcs": [[D.names[t], D.names[h]] for t, h in D.arcs]}
    doc.update({k: v for k, v in fields.items() if v is not None})
    return doc


def _int_list(val, what):
    if not isinstance(val, list) or not all(isinstance(v, int) for v in val):
        raise InputError(f"{what} must be a list of integers")
    return val


def forest_state(inst: Instance, *, lower=True, upper=True) -> ForestState:
    if inst.root is None:
        raise InputError("instance needs a 'root'")
    if "forests" in inst.raw:
        forests = [frozenset(_int_list(f, "forest")) for f in inst.raw["forests"]]
    else:
        forests = [frozenset()] * int(inst.require("k"))
    for f in forests:
        if any(not 0 <= e < inst.digraph.m for e in f):
            raise InputError("forest refers to an unknown arc")
    part = inst.get("partition")
    if part is not None:
        part = [_int_list(p, "partition part") for p in part]
    lo = inst.get("lower") if lower else None
    hi = inst.get("upper") if upper else None
    return ForestState(RootedInstance(inst.digraph, inst.root), tuple(forests), part,
                       None if lo is None else _int_list(lo, "lower"),
                       None if hi is None else _int_list(hi, "upper"))


def certificate_json(cert: ViolationCertificate, names) -> dict:
    return {
        "condition": cert.condition,
        "family": [names(X) for X in cert.family],
        "I": list(cert.index_union),
        "lhs": cert.lhs,
        "rhs": cert.rhs,
        "sense": cert.sense,
    }


def _infeasible(cert, names) -> tuple:
    return 1, {"status": "infeasible", "certificate": certificate_json(cert, names)}


def _arc_lists(sets) -> list:
    return [sorted(s) for s in sets]


# ---------------------------------------------------------------------------
# check

def _k(inst):
    k = inst.require("k")
    if not isinstance(k, int) or k < 0:
        raise InputError("k must be a nonnegative integer")
    return k


def _prescribed_args(inst):
    D = inst.digraph
    if "U" in inst.raw:
        U = [inst.vmask(u) for u in inst.raw["U"]]
        k = len(U)
    else:
        k = _k(inst)
        U = [0] * k
    part = [_int_list(p, "partition part") for p in inst.get("partition", [[i] for i in range(k)])]
    c_prime = _int_list(inst.require("c_prime"), "c_prime")
    return k, part, c_prime, U


def _vertex_map(inst, key):
    D = inst.digraph
    val = inst.require(key)
    if not isinstance(val, dict):
        raise InputError(f"{key} must map vertex names to integers")
    return [int(val.get(name, 0)) for name in D.names]


def run_check(inst: Instance, condition: str) -> tuple:
    """Return ``(exit_code, result_dict)``."""
    D = inst.digraph
    names = D.names_of
    if condition in ("cond11", "cond4", "cond22", "cond54r"):
        state = forest_state(inst, lower=condition == "cond4", upper=condition == "cond22")
        cert = {
            "cond11": oracles.check_cond_11,
            "cond4": oracles.check_cond_4,
            "cond22": oracles.check_cond_22,
            "cond54r": oracles.check_cond_54R,
        }[condition](state)
    elif condition == "cond2":
        k, part, c_prime, U = _prescribed_args(inst)
        cert = oracles.check_cond_2(D, k, part, c_prime, U)
    elif condition == "edmonds":
        cert = oracles.check_edmonds(D, [inst.vmask(r) for r in inst.require("rootsets")])
    elif condition == "spanning":
        cert = oracles.check_spanning_pack(D, _k(inst))
    elif condition == "cai_frank":
        cert = oracles.check_cai_frank(D, _k(inst), _vertex_map(inst, "f"), _vertex_map(inst, "g"))
    elif condition == "cond44":
        binst = _bipartite(inst)
        cert = bipartite.check_cond_44(binst)
        names = binst.names
    elif condition == "arboricity":
        rep = decompose.fractional_arboricity(D)
        k = _k(inst)
        out = {"status": "ok", "condition": condition, "value": str(rep.value),
               "witness": names(rep.witness)}
        if rep.value > k:
            H = rep.witness
            edges = sum(1 for t, h in D.arcs if H >> t & 1 and H >> h & 1)
            cert = ViolationCertificate("arboricity", (H,), (), edges, k * (H.bit_count() - 1), "<=")
            code, res = _infeasible(cert, names)
            res["value"], res["witness"] = out["value"], out["witness"]
            return code, res
        return 0, out
    else:
        raise InputError(f"unknown condition {condition!r}")
    if cert is None:
        return 0, {"status": "ok", "condition": condition}
    return _infeasible(cert, names)


def _bipartite(inst: Instance) -> bipartite.BipartiteInstance:
    if "S" in inst.raw:
        return bipartite.BipartiteInstance.from_json(inst.raw)
    return bipartite.lemma53_reduce(forest_state(inst, lower=False, upper=False))


# ---------------------------------------------------------------------------
# solve and replay

def _step_json(steps) -> list:
    return [s.to_json() for s in steps]


def _reduced_state(inst: Instance, mode: str) -> ForestState:
    """The completion problem a mode is solved through."""
    D = inst.digraph
    if mode in AUGMENT_MODES:
        if mode == "complete":
            return forest_state(inst, lower=False, upper=False)
        return forest_state(inst)
    if mode == "pack_rootsets":
        return pack.rootsets_state(D, [inst.vmask(r) for r in inst.require("rootsets")])
    if mode == "pack_prescribed":
        k, part, c_prime, U = _prescribed_args(inst)
        pack._check_prescribed(D, k, part, c_prime, U)
        return pack.parallel_root_state(D, k, U, part, upper=tuple(c_prime))
    if mode == "pack_exact":
        return pack.exact_sizes_state(D, _int_list(inst.require("c"), "c"))
    if mode == "pack_spanning":
        return pack.exact_sizes_state(D, [1] * _k(inst))
    if mode in ("decompose", "decompose_cplus"):
        c = 0 if mode == "decompose" else int(inst.require("c"))
        return decompose.padded_state(D, _k(inst), c)
    raise InputError(f"mode {mode!r} has no reduced completion problem")


def _forest_payload(inst: Instance, mode: str, state: ForestState, forests, steps) -> dict:
    D = inst.digraph
    out = {"status": "solution", "mode": mode, "step_log": _step_json(steps)}
    if mode in AUGMENT_MODES:
        out["forests"] = _arc_lists(forests)
        return out
    B = [frozenset(e for e in f if e < D.m) for f in forests]
    out["branchings"] = _arc_lists(B)
    out["roots"] = [D.names_of(_roots(D, b)) for b in B]
    return out


def _roots(D: Digraph, B) -> int:
    heads = 0
    for e in B:
        heads |= 1 << D.arcs[e][1]
    return D.all_mask & ~heads


def _balance_input(inst: Instance) -> list:
    return [frozenset(_int_list(b, "branching")) for b in inst.require("branchings")]


def run_solve(inst: Instance, mode: Optional[str] = None) -> tuple:
    mode = mode or inst.get("mode")
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}")
    D = inst.digraph
    if mode == "cover":
        binst = _bipartite(inst)
        res = bipartite.cover_greedy(binst)
        if not res.ok:
            return _infeasible(res.certificate, binst.names)
        return 0, _cover_payload(res.steps)
    if mode == "balance":
        log = []
        B = decompose.balance_decomposition(D, _balance_input(inst), log)
        return 0, _balance_payload(D, B, log)
    if mode == "pack_spanning" and _k(inst) == 0:
        return 0, {"status": "solution", "mode": mode, "branchings": [], "roots": [],
                   "step_log": []}
    if mode in AUGMENT_MODES:
        state = _reduced_state(inst, mode)
        if mode == "complete":
            pool = inst.get("pool")
            res = augment.complete_to_spanning(
                state, None if pool is None else _int_list(pool, "pool"))
        else:
            res = AUGMENT_MODES[mode](state)
        if not res.ok:
            return _infeasible(res.certificate, D.names_of)
        return 0, _forest_payload(inst, mode, state, res.forests, res.steps)
    if mode in ("decompose", "decompose_cplus"):
        c = 0 if mode == "decompose" else int(inst.require("c"))
        log = []
        out = decompose.decompose_cplus(D, _k(inst), c, log)
        if isinstance(out, ViolationCertificate):
            return _infeasible(out, D.names_of)
        state = _reduced_state(inst, mode)
        forests = augment.replay(state, log)
        return 0, _forest_payload(inst, mode, state, forests, log)
    if mode == "pack_rootsets":
        res = pack.pack_rootsets(D, [inst.vmask(r) for r in inst.require("rootsets")])
    elif mode == "pack_prescribed":
        k, part, c_prime, U = _prescribed_args(inst)
        res = pack.pack_prescribed(D, part, c_prime, U)
    elif mode == "pack_exact":
        res = pack.pack_exact_sizes(D, _int_list(inst.require("c"), "c"))
    else:
        res = pack.pack_spanning(D, _k(inst))
    if not res.ok:
        return _infeasible(res.certificate, D.names_of)
    state = _reduced_state(inst, mode)
    return 0, _forest_payload(inst, mode, state, res.forests, res.steps)


def _cover_payload(steps) -> dict:
    log, edges = [], []
    for step in steps:
        if step[0] == "add_edge":
            log.append({"kind": "add_edge", "s": step[1], "t": step[2]})
            edges.append([step[1], step[2]])
        else:
            log.append({"kind": "lower_cap", "t": step[1]})
    return {"status": "solution", "mode": "cover", "edges": edges, "step_log": log}


def _balance_payload(D, B, log) -> dict:
    return {
        "status": "solution",
        "mode": "balance",
        "branchings": _arc_lists(B),
        "roots": [D.names_of(_roots(D, b)) for b in B],
        "step_log": [{"kind": "resplit", "i": i, "j": j, "arcs_i": sorted(a), "arcs_j": sorted(b)}
                     for i, j, a, b in log],
    }


def run_replay(inst: Instance, result: dict) -> tuple:
    """Rebuild a solution document from its step log alone."""
    if not isinstance(result, dict) or result.get("status") != "solution":
        raise InputError("only solution documents can be replayed")
    mode = result.get("mode")
    steps = result.get("step_log")
    if mode not in MODES or not isinstance(steps, list):
        raise InputError("result lacks a mode or a step log")
    D = inst.digraph
    if mode == "cover":
        binst = _bipartite(inst)
        tup = []
        for s in steps:
            if s.get("kind") == "add_edge":
                tup.append(("add_edge", s["s"], s["t"]))
            elif s.get("kind") == "lower_cap":
                tup.append(("lower_cap", s["t"]))
            else:
                raise InputError("unknown cover step")
        edges = [(s, t) for kind, *rest in tup if kind == "add_edge" for s, t in [rest]]
        if not bipartite.covers(binst, edges):
            raise InputError("replayed edges do not cover the demand")
        return 0, _cover_payload(tup)
    if mode == "balance":
        B = _balance_input(inst)
        log = []
        for s in steps:
            B = decompose.apply_resplit(D, B, s["i"], s["j"], s["arcs_i"], s["arcs_j"])
            log.append((s["i"], s["j"], frozenset(s["arcs_i"]), frozenset(s["arcs_j"])))
        decompose.check_balanced(D, B)
        return 0, _balance_payload(D, B, log)
    if mode == "pack_spanning" and _k(inst) == 0:
        return 0, {"status": "solution", "mode": mode, "branchings": [], "roots": [],
                   "step_log": []}
    state = _reduced_state(inst, mode)
    actions = [augment.StepAction.from_json(s) for s in steps]
    forests = augment.replay(state, actions)
    problems = solution_problems(state, forests)
    if problems:
        raise InputError("replayed forests are invalid: " + "; ".join(problems))
    return 0, _forest_payload(inst, mode, state, forests, actions)
