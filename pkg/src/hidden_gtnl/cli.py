"""Command-line front end. Every subcommand prints one JSON document.

Exit codes: 0 success, 2 invalid input, 3 bracket or optimizer failure, 4 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from .bellineq import BUILTIN_FACETS, closed_form_B, read_facet_file
from .entangle import cgm_family, cgm_xstate
from .errors import BracketError, GtnlError, NullOutcome
from .measure import BellOutcome
from .optimize import OptimizerConfig, maximize_facet, maximize_facet_filtered, violation_threshold
from .protocol import smp_prepare
from .qlin import trace_distance
from .scan import (ScanSpec, classify_point, filtered_locality_check, run_scan,
                   svetlichny_threshold)
from .states import (Family, StateFamilyParams, extract_x_params, make_family, make_rho1,
                     make_rho2, make_rho3, make_rho4_closed_form)

EXIT_OK, EXIT_INVALID, EXIT_OPTIMIZER, EXIT_IO = 0, 2, 3, 4


def _params(ns) -> StateFamilyParams:
    return StateFamilyParams(ns.theta1, ns.p1, ns.p2, ns.theta3, ns.p3)


def _cfg(ns) -> OptimizerConfig:
    return OptimizerConfig(starts=ns.starts, seed=ns.seed, backend=ns.backend)


def _facets(ns) -> list:
    if getattr(ns, "facet_file", None):
        facets = read_facet_file(ns.facet_file)
    else:
        facets = [BUILTIN_FACETS[i]() for i in BUILTIN_FACETS]
    if getattr(ns, "facet", None) is not None:
        facets = [f for f in facets if f.id == ns.facet]
        if not facets:
            raise argparse.ArgumentTypeError(f"no facet with id {ns.facet}")
    return facets


def _matrix(m) -> list:
    m = np.asarray(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def cmd_state_info(ns):
    p = _params(ns)
    fam = Family.parse(ns.family)
    b = closed_form_B(fam, p)
    return {"family": fam.value, "params": asdict(p), "B": b.value, "branch": b.branch.value,
            "sine": b.sine, "diagonal": b.diagonal, "cgm": cgm_family(fam, p),
            "cgm_numeric": cgm_xstate(extract_x_params(make_family(fam, p)))}


def cmd_smp(ns):
    p = _params(ns)
    outcomes = tuple(BellOutcome(o) for o in ns.outcomes)
    rho, prob = smp_prepare(make_rho1(p.theta1, p.p1), make_rho2(p.p2),
                            make_rho3(p.theta3, p.p3), outcomes)
    out = {"outcomes": [o.value for o in outcomes], "probability": prob,
           "rho": _matrix(rho)}
    if all(o in (BellOutcome.PsiPlus, BellOutcome.PsiMinus) for o in outcomes):
        out["closed_form_residual"] = trace_distance(
            rho, make_rho4_closed_form(p.theta1, p.theta3, p.p3))
    return out


def cmd_maximize(ns):
    p = _params(ns)
    rho = make_family(ns.family, p)
    cfg = _cfg(ns)
    out = []
    for f in _facets(ns):
        r = (maximize_facet_filtered if ns.filtered else maximize_facet)(rho, f, cfg)
        out.append({"facet": f.id, "value": r.value, "bound": r.bound, "violated": r.violated,
                    "starts_converged": r.starts_converged, "evaluations": r.evaluations,
                    "setting": r.setting.as_array().tolist(),
                    "filters": None if r.filters is None else list(r.filters.as_tuple())})
    return {"family": Family.parse(ns.family).value, "params": asdict(p), "results": out}


def cmd_threshold(ns):
    p = _params(ns)
    fam = Family.parse(ns.family)
    if ns.facet == 185 and not ns.facet_file and ns.param == {Family.RHO1: "p1", Family.RHO2: "p2",
                                                                Family.RHO3: "p3"}.get(fam):
        value = svetlichny_threshold(fam, p, filtered=ns.filtered, lo=ns.lo, hi=ns.hi)
        if value is None:
            raise BracketError(f"no Svetlichny violation for {ns.param} in [{ns.lo}, {ns.hi}]")
        return {"family": fam.value, "param": ns.param, "threshold": value, "method": "closed-form"}
    (f,) = _facets(ns)
    cfg = _cfg(ns)

    def build(v):
        return make_family(fam, StateFamilyParams(**{**asdict(p), ns.param: v}))

    objective = None
    if ns.filtered:
        def objective(v):
            return maximize_facet_filtered(build(v), f, cfg).value
    value = violation_threshold(build, f, ns.lo, ns.hi, cfg, objective=objective, width=ns.width)
    return {"family": fam.value, "facet": f.id, "param": ns.param, "threshold": value,
            "method": "optimizer"}


def cmd_scan(ns):
    spec = ScanSpec.from_file(ns.config)
    if ns.output:
        spec.output = ns.output
    if ns.jsonl:
        spec.jsonl = True
    if ns.workers:
        spec.workers = ns.workers
    summary = run_scan(spec)
    summary["output"] = spec.output
    return summary


def cmd_filters(ns):
    p = _params(ns)
    local, worst, fid = filtered_locality_check(ns.family, p, _facets(ns), _cfg(ns),
                                                resolution=ns.resolution)
    return {"family": Family.parse(ns.family).value, "params": asdict(p),
            "filtered_local": local, "worst_excess": worst, "worst_facet": fid}


def cmd_classify(ns):
    facets = _facets(ns)
    label = None
    if ns.facet_file:
        label = "file:" + os.path.basename(ns.facet_file)
    r = classify_point(_params(ns), facets, _cfg(ns), filter_check=ns.filter_check,
                       facet_set=label)
    out = r.row()
    out["facet_set"], out["partial_coverage"] = r.facet_set, r.partial_coverage
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hidden-gtnl", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def state_args(p, family=True):
        if family:
            p.add_argument("--family", required=True, choices=[f.value for f in Family])
        p.add_argument("--theta1", type=float, default=0.1)
        p.add_argument("--p1", type=float, default=0.5)
        p.add_argument("--p2", type=float, default=0.5)
        p.add_argument("--theta3", type=float, default=0.144)
        p.add_argument("--p3", type=float, default=0.5)

    def opt_args(p):
        p.add_argument("--starts", type=int, default=64)
        p.add_argument("--seed", type=int, default=OptimizerConfig.seed)
        p.add_argument("--backend", choices=["numba", "scipy"], default="numba")
        p.add_argument("--facet", type=int, default=None, help="facet id (default: all loaded)")
        p.add_argument("--facet-file", default=None)

    p = sub.add_parser("state-info", help="closed-form Svetlichny maximum and concurrence")
    state_args(p)
    p.set_defaults(func=cmd_state_info)

    p = sub.add_parser("smp", help="run the swapping stage")
    state_args(p, family=False)
    p.add_argument("--outcomes", nargs=3, default=["psi-"] * 3,
                   choices=[o.value for o in BellOutcome])
    p.set_defaults(func=cmd_smp)

    p = sub.add_parser("maximize", help="maximize facet values over measurement angles")
    state_args(p)
    opt_args(p)
    p.add_argument("--filtered", action="store_true")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("threshold", help="bisect the violation threshold in one parameter")
    state_args(p)
    opt_args(p)
    p.add_argument("--param", required=True, choices=["theta1", "p1", "p2", "theta3", "p3"])
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--width", type=float, default=1e-4)
    p.add_argument("--filtered", action="store_true")
    p.set_defaults(func=cmd_threshold, facet=185)

    p = sub.add_parser("scan", help="classify every point of a parameter grid")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.add_argument("--jsonl", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("filters", help="locality under the best diagonal filters")
    state_args(p)
    opt_args(p)
    p.add_argument("--resolution", type=int, default=11)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("classify", help="revelation verdict for one parameter point")
    state_args(p, family=False)
    opt_args(p)
    p.add_argument("--filter-check", action="store_true")
    p.set_defaults(func=cmd_classify)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = ns.func(ns)
    except (BracketError, NullOutcome) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (GtnlError, ValueError, argparse.ArgumentTypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
