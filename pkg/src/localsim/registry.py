"""Named algorithms for the command line and the benchmark sweeps.

``DUAL`` lists algorithms available in both the function view and the
message view; ``run_algorithm`` dispatches any named algorithm to a checked
RunResult.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .compilers import (CycleFailureOracle, derandomize, slocal_to_local_via_coloring,
                        slocal_to_local_via_decomposition, speedup_constantize, speedup_params)
from .decomposition import ball_carving_sequential, distributed_decomposition, mpx_decomposition, validate
from .engine import (FunctionAlgorithm, RunResult, function_from_protocol, protocol_from_function, random_order,
                     run_sequential)
from .errors import InvalidParameters
from .graph import Graph, RandomTape, assign_ids
from .lll import solve_sinkless
from .problems import check_solution, mis, proper_coloring, sinkless_orientation
from .seeds import derive_seed
from .symmetry import (ColeStepProtocol, ColeVishkinCycle, Cycle3ColorLocal, LinialProtocol, LubyProtocol,
                       cycle_3color_randomized, greedy_coloring_slocal, greedy_mis_slocal, linial_color, luby_mis)


@dataclass
class DualEntry:
    name: str
    graphs: str  # "any" or "cycle"
    build: Callable  # (g, seed) -> (function algorithm, protocol, labels)


def _ids(g, seed):
    return assign_ids(g, seed=derive_seed(seed, 1))


def _linial(g, seed):
    ids = _ids(g, seed)
    p = LinialProtocol(ids.range_bound, max(g.max_degree, 1))
    return function_from_protocol(p), p, list(ids.ids)


def _luby(g, seed):
    ids = _ids(g, seed)
    w, it = 32, 3
    tape = RandomTape.generate(g.n, w * it, derive_seed(seed, 2))
    p = LubyProtocol(w * it, w=w, use_ids=True)
    return function_from_protocol(p), p, [(ids[u], tape[u]) for u in range(g.n)]


def _cole_step(g, seed):
    ids = _ids(g, seed)
    p = ColeStepProtocol(ids.range_bound.bit_length(), max(g.max_degree, 1))
    return function_from_protocol(p), p, list(ids.ids)


def _strip_id(inner):
    def ev(n, b):
        from .compilers import _relabel
        return inner.evaluate(n, _relabel(b, [x[1] for x in b.labels]))
    return FunctionAlgorithm(inner.radius, ev, inner.name, False)


def _cycle3(g, seed):
    ids = _ids(g, seed)
    tape = RandomTape.generate(g.n, 2, derive_seed(seed, 2))
    f = _strip_id(Cycle3ColorLocal(attempts=2, window=6))
    return f, protocol_from_function(f), [(ids[u], tape[u]) for u in range(g.n)]


def _cv(g, seed):
    ids = _ids(g, seed)
    f = ColeVishkinCycle(3)
    return f, protocol_from_function(f), list(ids.ids)


DUAL = {
    "linial": DualEntry("linial", "any", _linial),
    "luby": DualEntry("luby", "any", _luby),
    "cole_step": DualEntry("cole_step", "any", _cole_step),
    "cycle3color_window": DualEntry("cycle3color_window", "cycle", _cycle3),
    "cole_vishkin": DualEntry("cole_vishkin", "cycle", _cv),
}


# full dispatch

def _coloring_result(res, g, k=None):
    cols = len(set(res.labels))
    res.valid = check_solution(proper_coloring(k or max(max(res.labels, default=1), 1)), g, res.labels).valid
    res.extra["colors"] = cols
    return res


def _decomp_result(nd, g, name):
    rep = validate(g, nd)
    res = RunResult([[c, k] for c, k in zip(nd.color, nd.cluster)], int(nd.stats.get("rounds", 0)), 0, name, g.n,
                    valid=rep.valid, extra={"c": nd.c, "d": nd.d, "kind": nd.kind})
    return res


def _run_linial(g, seed, p):
    return _coloring_result(linial_color(g, _ids(g, seed)), g)


def _run_luby(g, seed, p):
    tape = RandomTape.generate(g.n, int(p.get("budget", 4096)), derive_seed(seed, 2))
    res = luby_mis(g, tape, _ids(g, seed))
    res.valid = None not in res.labels and check_solution(mis(), g, res.labels).valid
    return res


def _run_cycle3(g, seed, p):
    attempts = int(p.get("attempts", 8))
    tape = RandomTape.generate(g.n, attempts, derive_seed(seed, 2))
    return _coloring_result(cycle_3color_randomized(g, tape, attempts), g, 3)


def _run_cv(g, seed, p):
    from .engine import run_function_mode
    res = run_function_mode(ColeVishkinCycle(int(p.get("exponent", 3))), g, labels=list(_ids(g, seed).ids))
    return _coloring_result(res, g, 3)


def _run_slocal(seq, problem):
    def run(g, seed, p):
        res = run_sequential(seq(), g, random_order(g.n, derive_seed(seed, 3)))
        del res.extra["info"]
        res.valid = check_solution(problem(g), g, res.labels).valid
        return res
    return run


def _run_compiled(seq, problem, via):
    def run(g, seed, p):
        c = slocal_to_local_via_decomposition(seq()) if via == "nd" else slocal_to_local_via_coloring(seq())
        res = c.run(g, _ids(g, seed))
        res.valid = check_solution(problem(g), g, res.labels).valid
        return res
    return run


def _mis_spec(g):
    return mis()


def _col_spec(g):
    return proper_coloring(g.max_degree + 1)


def _run_ballcarve(g, seed, p):
    return _decomp_result(ball_carving_sequential(g, _ids(g, seed)), g, "ballcarve")


def _run_distdecomp(g, seed, p):
    return _decomp_result(distributed_decomposition(g, _ids(g, seed)), g, "distdecomp")


def _run_mpx(g, seed, p):
    return _decomp_result(mpx_decomposition(g, seed, _ids(g, seed)), g, "mpx")


def _run_sinkless(method):
    def run(g, seed, p):
        labels, info = solve_sinkless(g, seed=seed, method=method)
        rep = check_solution(sinkless_orientation(), g, labels)
        return RunResult(labels, 0, 0, f"lll:sinkless_{method}", g.n, valid=rep.valid, extra=info)
    return run


def _run_derand(g, seed, p):
    if g.n > 16:
        raise InvalidParameters("derandomized cycle coloring is limited to n <= 16")
    d = derandomize(Cycle3ColorLocal(attempts=2), proper_coloring(3), 2, oracle=CycleFailureOracle(2))
    res = d.run(g, random_order(g.n, derive_seed(seed, 3)))
    res.extra["trace"] = [str(x) for x in res.extra["trace"]]
    res.extra["initial_expectation"] = str(res.extra["initial_expectation"])
    return res


def _run_constantized(g, seed, p):
    cv = ColeVishkinCycle(3)
    c = speedup_constantize(cv, speedup_params(cv, int(p.get("n0", 512)), 1, 2))
    res = c.run(g, _ids(g, seed))
    del res.extra["fake_ids"]
    return _coloring_result(res, g, 3)


ALGORITHMS: dict[str, Callable] = {
    "linial": _run_linial,
    "luby": _run_luby,
    "cycle3color": _run_cycle3,
    "cole_vishkin": _run_cv,
    "ballcarve": _run_ballcarve,
    "distdecomp": _run_distdecomp,
    "mpx": _run_mpx,
    "slocal:greedy_mis": _run_slocal(greedy_mis_slocal, _mis_spec),
    "slocal:greedy_coloring": _run_slocal(greedy_coloring_slocal, _col_spec),
    "compiled:greedy_mis": _run_compiled(greedy_mis_slocal, _mis_spec, "nd"),
    "compiled:greedy_coloring": _run_compiled(greedy_coloring_slocal, _col_spec, "nd"),
    "compiled_col:greedy_mis": _run_compiled(greedy_mis_slocal, _mis_spec, "col"),
    "compiled_col:greedy_coloring": _run_compiled(greedy_coloring_slocal, _col_spec, "col"),
    "lll:sinkless": _run_sinkless("fg"),
    "lll:sinkless_mt": _run_sinkless("mt"),
    "derandomized:cycle3color": _run_derand,
    "constantized:cole_vishkin": _run_constantized,
}


def run_algorithm(name: str, g: Graph, seed: int = 0, params: dict | None = None) -> RunResult:
    if name not in ALGORITHMS:
        raise KeyError(name)
    res = ALGORITHMS[name](g, seed, params or {})
    res.seed = seed
    return res
