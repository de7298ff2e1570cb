"""Command-line front end: gen, run, check, bench, decompose, lll, roundelim.

Exit codes: 0 ok, 1 invalid result, 2 usage error, 3 internal assertion.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .engine import _jsonable
from .errors import InvalidParameters
from .graph import FAMILIES, Graph, generate


class UsageError(Exception):
    pass


def _params(pairs) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise UsageError(f"parameter {p!r} is not key=value")
        k, v = p.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _read_graph(path) -> Graph:
    with open(path) as f:
        return Graph.from_text(f.read())


def _emit(args, obj, text=None):
    if args.quiet:
        return
    if args.json or text is None:
        s = json.dumps(_jsonable(obj), sort_keys=True)
    else:
        s = text
    if getattr(args, "out", None):
        with open(args.out, "w") as f:
            f.write(s + "\n")
    else:
        print(s)


def _status(args, valid) -> int:
    if valid is False and not args.allow_invalid:
        return 1
    return 0


def cmd_gen(args) -> int:
    p = _params(args.param)
    for key in ("n", "delta", "layers"):
        v = getattr(args, key)
        if v is not None:
            p[key] = v
    try:
        g = generate(args.family, seed=args.seed, **p)
    except KeyError as e:
        raise UsageError(f"missing parameter {e}") from None
    text = g.to_text()
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    elif not args.quiet:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    from .registry import ALGORITHMS, run_algorithm
    if args.alg not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {args.alg!r}; known: {', '.join(sorted(ALGORITHMS))}")
    g = _read_graph(args.graph)
    res = run_algorithm(args.alg, g, args.seed, _params(args.param))
    _emit(args, res.to_dict(), f"{res.algorithm}: n={res.n} rounds={res.rounds} valid={res.valid}")
    return _status(args, res.valid)


def _load_labels(path):
    with open(path) as f:
        data = json.load(f)
    if isinstance(data, dict):
        data = data["labels"]
    return [tuple(x) if isinstance(x, list) else x for x in data]


def cmd_check(args) -> int:
    from .problems import builtin, check, load_table
    g = _read_graph(args.graph)
    labels = _load_labels(args.labels)
    if args.problem.endswith(".json"):
        spec = load_table(args.problem)
    else:
        try:
            spec = builtin(args.problem, **_params(args.param))
        except (ValueError, KeyError) as e:
            raise UsageError(str(e)) from None
    inputs = _load_labels(args.inputs) if args.inputs else None
    try:
        rep = check(spec, g, labels, inputs)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(args, rep.to_dict(), f"{spec.name}: valid={rep.valid} violations={len(rep.violations)}")
    return _status(args, rep.valid)


def cmd_bench(args) -> int:
    from .bench import ExperimentConfig, run_sweep, to_csv
    from .registry import ALGORITHMS
    if args.config:
        with open(args.config) as f:
            cfg = ExperimentConfig.from_dict(json.load(f))
    else:
        if not (args.alg and args.family and args.sizes):
            raise UsageError("bench needs --config or --alg, --family and --sizes")
        cfg = ExperimentConfig(args.alg, args.family, [int(x) for x in args.sizes.split(",")], args.trials,
                               args.seed, args.delta, _params(args.param))
    if args.timing:
        cfg.timing = True
    if cfg.alg not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {cfg.alg!r}")
    rows = run_sweep(cfg)
    text = to_csv(rows)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    elif not args.quiet:
        sys.stdout.write(text)
    ok = all(r["valid"] == "true" for r in rows)
    return _status(args, ok)


def cmd_decompose(args) -> int:
    from .decomposition import ball_carving_sequential, distributed_decomposition, mpx_decomposition, validate
    from .graph import assign_ids
    from .seeds import derive_seed
    g = _read_graph(args.graph)
    ids = assign_ids(g, seed=derive_seed(args.seed, 1))
    if args.method == "ballcarve":
        nd = ball_carving_sequential(g, ids)
    elif args.method == "distdecomp":
        nd = distributed_decomposition(g, ids)
    else:
        nd = mpx_decomposition(g, args.seed, ids)
    rep = validate(g, nd)
    d = nd.to_dict()
    d["valid"] = rep.valid
    d["violations"] = rep.to_dict()["violations"]
    _emit(args, d, f"{args.method}: colors={nd.c} d={nd.d} valid={rep.valid}")
    return _status(args, rep.valid)


def cmd_lll(args) -> int:
    from .lll import LLLInstance, check_criterion, complete_assignment, fg_first_phase, moser_tardos, sinkless_to_lll
    if args.sinkless:
        enc = sinkless_to_lll(_read_graph(args.instance))
        inst = enc.instance
    else:
        with open(args.instance) as f:
            inst = LLLInstance.from_dict(json.load(f))
    out = {"events": len(inst.events), "variables": len(inst.var_bits), "delta": inst.delta}
    for kind in ("tight", "relaxed"):
        c = check_criterion(inst, kind)
        out[kind] = c.holds
    if args.method == "fg":
        sr = fg_first_phase(inst, seed=args.seed)
        assign = complete_assignment(inst, sr, seed=args.seed)
        out["components"] = sr.component_sizes
    else:
        res = moser_tardos(inst, seed=args.seed, max_resamples=args.max_resamples)
        assign = res.assignment
        out["resamples"] = res.resamples
    bad = inst.violated_events(assign)
    out["assignment"] = assign
    out["violated"] = len(bad)
    valid = not bad
    if args.sinkless:
        from .problems import check_solution, sinkless_orientation
        out["labels"] = enc.labels(assign)
        valid = valid and check_solution(sinkless_orientation(), enc.g, out["labels"]).valid
    out["valid"] = valid
    _emit(args, out, f"lll {args.method}: events={out['events']} violated={len(bad)} valid={valid}")
    return _status(args, valid)


def cmd_roundelim(args) -> int:
    from .round_elim import PathAlgorithmTable, pipeline, verify_table, zero_round_analysis
    with open(args.table) as f:
        tab = PathAlgorithmTable.from_dict(json.load(f))
    rep = verify_table(tab)
    out = {"valid": rep.valid, "witness": rep.witness.to_dict() if rep.witness else None}
    if tab.kind == "node" and tab.t == 0:
        z = zero_round_analysis(tab)
        out["zero_round"] = z if isinstance(z, str) else z.to_dict()
    elif rep.valid and args.steps:
        chain = pipeline(tab, args.steps)
        out["chain"] = [{"kind": x.kind, "t": x.t, "k": str(x.k)} for x in chain]
        if args.out_table:
            with open(args.out_table, "w") as f:
                f.write(chain[-1].to_json())
    _emit(args, out, f"table {tab.kind} t={tab.t} N={tab.N} k={tab.k}: valid={rep.valid}")
    return _status(args, rep.valid)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--csv", action="store_true", help="CSV output where applicable")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--allow-invalid", action="store_true", help="exit 0 even for invalid results")
    common.add_argument("--out", help="write output here instead of stdout")

    ap = argparse.ArgumentParser(prog="localsim", description="LOCAL-model algorithm simulator")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a graph")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--layers", type=int)
    p.add_argument("--param", action="append")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("run", parents=[common], help="run a registered algorithm")
    p.add_argument("alg")
    p.add_argument("graph")
    p.add_argument("--param", action="append")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("check", parents=[common], help="check labels against a problem")
    p.add_argument("problem", help="builtin name or table JSON file")
    p.add_argument("graph")
    p.add_argument("labels")
    p.add_argument("--inputs")
    p.add_argument("--param", action="append")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("bench", parents=[common], help="run a sweep and emit CSV")
    p.add_argument("--config")
    p.add_argument("--alg")
    p.add_argument("--family")
    p.add_argument("--sizes")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--delta", type=int)
    p.add_argument("--param", action="append")
    p.add_argument("--timing", action="store_true", help="fill wall_ms (makes output nondeterministic)")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("decompose", parents=[common], help="network decomposition")
    p.add_argument("method", choices=("ballcarve", "distdecomp", "mpx"))
    p.add_argument("graph")
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("lll", parents=[common], help="solve an LLL instance")
    p.add_argument("instance", help="instance JSON, or a graph file with --sinkless")
    p.add_argument("--sinkless", action="store_true")
    p.add_argument("--method", choices=("fg", "mt"), default="fg")
    p.add_argument("--max-resamples", type=int, default=None)
    p.set_defaults(fn=cmd_lll)

    p = sub.add_parser("roundelim", parents=[common], help="verify and eliminate a path table")
    p.add_argument("table")
    p.add_argument("--steps", type=int, default=0)
    p.add_argument("--out-table")
    p.set_defaults(fn=cmd_roundelim)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"localsim: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError, InvalidParameters) as e:
        print(f"localsim: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        print(f"localsim: internal assertion failed: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
