"""Command-line interface: ``lipext {validate,gen,extend,glue,modulus,run,plot}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io, lab
from .errors import CertificationFailure, LipextError, MetricValidationError
from .gluing import run_claim1
from .metric import lipschitz_constant
from .moduli import check_claim1, e_n, e_up_n, modulus_for_subset, modulus_for_subset_euclidean
from .plotting import plot_data
from .solvers import ENUMERATION_CAP, extend


def _emit(obj, out: str | None = None):
    text = io.dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    try:
        space = io.instance_from_json(args.instance)
    except MetricValidationError as exc:
        _emit({"valid": False, "violations": [str(v) for v in exc.violations]})
        return 1
    out = {"valid": True, "size": space.size}
    if args.map:
        phi = io.map_from_json(args.map, space)
        rep = lipschitz_constant(phi)
        out["map"] = {"domain_size": len(phi), "lipschitz": rep.constant,
                      "witness_pair": list(rep.witness_pair) if rep.witness_pair else None}
    _emit(out)
    return 0


def cmd_gen(args) -> int:
    if args.spec:
        files = lab.generate(lab.load_specs(args.spec), args.out_dir or "instances")
        _emit({"generated": sorted(files)})
        return 0
    params = {}
    if args.kind in ("path", "cycle"):
        params["m"] = args.m
    elif args.kind == "random_graph":
        params.update(n=args.n, edge_prob=args.edge_prob, weights=list(args.weights), seed=args.seed)
    else:
        params.update(n=args.n, dim=args.dim, p=args.p, seed=args.seed)
    _emit(lab.generate_instance(args.kind, **params), args.output)
    return 0


def _load_case(args):
    space = io.instance_from_json(args.instance)
    phi = io.map_from_json(args.map, space)
    return space, phi


def cmd_extend(args) -> int:
    space, phi = _load_case(args)
    kw = {}
    if args.oracle == "euclidean":
        kw["budget"] = args.budget
    elif args.oracle == "brute":
        kw["cap"] = args.cap
    res = extend(phi, args.to, oracle=args.oracle, **kw)
    _emit({"map": io.map_to_json(res.map), "constant": res.constant, "optimality": res.optimality,
           "gap": res.gap, "iterations": res.iterations, "oracle": res.oracle,
           "input_lipschitz": lipschitz_constant(phi).constant})
    return 0


def cmd_glue(args) -> int:
    space, phi = _load_case(args)
    try:
        tr = run_claim1(space, phi.domain, args.xs, phi, oracle=args.oracle, delta=args.delta,
                        perturb=args.perturb, K=args.K)
    except CertificationFailure as exc:
        _emit({"certified": False, "pair": list(exc.pair), "achieved": exc.achieved_ratio,
               "certified_ratio": exc.certified_ratio})
        return 1
    _emit({"certified": True, **tr.to_dict()})
    return 0


def cmd_modulus(args) -> int:
    space = io.instance_from_json(args.instance)
    target = io.parse_target(args.target)
    q = args.quantity
    if q == "e":
        S = args.subset if args.subset else None
        if S is None:
            raise LipextError("--subset is required for quantity e")
        if hasattr(target, "dim"):
            res = modulus_for_subset_euclidean(space, S, target.dim, trials=args.trials, budget=args.budget,
                                               seed=args.seed)
        else:
            res = modulus_for_subset(space, S, target, cap=args.cap)
        out = res.to_dict()
    elif q == "e_n":
        out = e_n(space, args.n, target, args.cap).to_dict()
    elif q == "e_up_n":
        out = e_up_n(space, args.n, target, args.cap).to_dict()
    else:
        try:
            out = check_claim1(space, args.n, target, args.cap).to_dict()
        except CertificationFailure as exc:
            _emit({"certified": False, "e_up_n": exc.achieved_ratio, "e_n_plus_2": exc.certified_ratio})
            return 1
    if args.out == "csv":
        flat = {k: v for k, v in out.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}
        row = lab.ResultRow(Path(args.instance).stem, q, flat, lab.digest(out), bool(out.get("exact", True)))
        sys.stdout.write(lab.rows_to_csv([row]))
    else:
        _emit(out)
    return 0


def cmd_run(args) -> int:
    specs = lab.load_specs(args.spec)
    result = lab.run(specs, budget_ms=args.budget_ms, timing=args.timing)
    lab.write_outputs(result, args.out_dir, args.out)
    s = result.summary()
    sys.stderr.write(f"{s['rows']} rows, {len(s['failures'])} failures, {len(s['errors'])} errors, "
                     f"{len(s['skipped'])} skipped\n")
    return 0 if result.ok else 1


def cmd_plot(args) -> int:
    rows = lab.read_rows(args.results)
    for p in plot_data(rows, args.out_dir):
        sys.stdout.write(f"{p}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lipext", description="Lipschitz extension moduli on finite metric spaces.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check an instance (and optionally a map)")
    v.add_argument("instance")
    v.add_argument("--map")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen", help="generate instance JSON")
    g.add_argument("kind", nargs="?", choices=lab.GENERATORS, default="path")
    g.add_argument("--spec", help="experiment spec; writes every instance it references")
    g.add_argument("--out-dir")
    g.add_argument("--m", type=int, default=4)
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--weights", type=int, nargs=2, default=[1, 3])
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--p", type=float, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    for name, func, hlp in (("extend", cmd_extend, "extend a map"), ("glue", cmd_glue, "run the gluing construction")):
        e = sub.add_parser(name, help=hlp)
        e.add_argument("instance")
        e.add_argument("map")
        e.add_argument("--oracle", choices=("mcshane", "euclidean", "brute"))
        e.add_argument("--cap", type=int, default=ENUMERATION_CAP)
        e.add_argument("--budget", type=int, default=3000)
        e.set_defaults(func=func)
    sub.choices["extend"].add_argument("--to", type=int, nargs="*")
    gl = sub.choices["glue"]
    gl.add_argument("--xs", type=int, nargs="+", required=True)
    gl.add_argument("--delta", type=float, default=0.0)
    gl.add_argument("--perturb", action="store_true")
    gl.add_argument("--K", type=float)

    m = sub.add_parser("modulus", help="compute e, e_n, e^n or check e^n <= e_n + 2")
    m.add_argument("instance")
    m.add_argument("--quantity", choices=("e", "e_n", "e_up_n", "claim1"), default="claim1")
    m.add_argument("--target", default="two-point")
    m.add_argument("--n", type=int, default=1)
    m.add_argument("--subset", type=int, nargs="*")
    m.add_argument("--cap", type=int, default=ENUMERATION_CAP)
    m.add_argument("--trials", type=int, default=20)
    m.add_argument("--budget", type=int, default=3000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", choices=("json", "csv"), default="json")
    m.set_defaults(func=cmd_modulus)

    r = sub.add_parser("run", help="run an experiment spec")
    r.add_argument("spec")
    r.add_argument("--out-dir", default="results")
    r.add_argument("--out", choices=("json", "csv", "both"), default="json")
    r.add_argument("--budget-ms", type=float)
    r.add_argument("--timing", action="store_true", help="record wall time per row (breaks byte stability)")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="emit plot series from results")
    pl.add_argument("results")
    pl.add_argument("--out-dir", default="plots")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LipextError as exc:
        sys.stderr.write(f"lipext: {type(exc).__name__}: {exc}\n")
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"lipext: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
