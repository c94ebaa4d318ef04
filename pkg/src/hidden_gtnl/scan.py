"""Revelation classification of parameter points and batch sweeps.

A point is classified by building the three initial states, checking their
locality, running the swapping stage and checking the final state. Closed
forms are used for the Svetlichny facet; any other facet goes through the
optimizer.
"""
from __future__ import annotations

import csv
import enum
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np
import yaml
from scipy.optimize import minimize

from .bellineq import (FacetInequality, closed_form_B, filtered_svetlichny_bound,
                       ns3_facet, read_facet_file, svetlichny_facet, svetlichny_max_xstate)
from .entangle import cgm_family, cgm_xstate
from .errors import BracketError, DegenerateOutcome, NullOutcome, ValidationError
from .measure import BellOutcome
from .optimize import (VIOLATION_MARGIN, OptimizerConfig, maximize_facet,
                       maximize_facet_filtered, violation_intervals, violation_threshold)
from .protocol import FilterParams, apply_filters, smp_prepare
from .states import (Family, StateFamilyParams, extract_x_params, make_family, make_rho1,
                     make_rho2, make_rho3, make_rho4_closed_form)

log = logging.getLogger(__name__)

SVETLICHNY_ID = 185
INITIAL = (Family.RHO1, Family.RHO2, Family.RHO3)
PSI_OUTCOMES = tuple(itertools.product((BellOutcome.PsiPlus, BellOutcome.PsiMinus), repeat=3))


class Verdict(enum.Enum):
    HiddenS2Revealed = "HiddenS2Revealed"
    HiddenNS2Revealed = "HiddenNS2Revealed"
    NoRevelation = "NoRevelation"
    InitialNotLocal = "InitialNotLocal"


REVEALED = (Verdict.HiddenS2Revealed, Verdict.HiddenNS2Revealed)


def decide_verdict(initial_svet: Sequence[float], initial_local: bool, final_svet: float,
                   final_violations: Sequence[int], margin: float = VIOLATION_MARGIN) -> Verdict:
    """Verdict from the numbers in a report row.

    ``initial_local`` means no loaded facet is violated by any initial state.
    """
    if any(v > 4 + margin for v in initial_svet):
        return Verdict.InitialNotLocal
    if final_svet > 4 + margin:
        return Verdict.HiddenS2Revealed
    if initial_local and final_violations:
        return Verdict.HiddenNS2Revealed
    return Verdict.NoRevelation


@dataclass
class InitialReport:
    family: str
    svetlichny: float
    cgm: float
    violated_raw: list
    violated_filtered: Optional[list] = None
    filtered_worst: Optional[float] = None


@dataclass
class FinalReport:
    B4: float
    svetlichny: float
    cgm: float
    sel_prob: float
    violated: list


@dataclass
class RevelationReport:
    params: StateFamilyParams
    initial: list
    final: FinalReport
    verdict: Verdict
    facet_set: str
    partial_coverage: bool

    @property
    def initial_local(self) -> bool:
        return not any(r.violated_raw for r in self.initial)

    @property
    def filtered_local(self) -> Optional[bool]:
        if any(r.violated_filtered is None for r in self.initial):
            return None
        return not any(r.violated_filtered for r in self.initial)

    def row(self) -> dict:
        t1, p1, p2, t3, p3 = self.params.as_tuple()
        b = [r.svetlichny for r in self.initial] + [self.final.B4]
        c = [r.cgm for r in self.initial] + [self.final.cgm]
        return {
            "theta1": t1, "p1": p1, "p2": p2, "theta3": t3, "p3": p3,
            "B1": b[0], "B2": b[1], "B3": b[2], "B4": b[3],
            "cgm1": c[0], "cgm2": c[1], "cgm3": c[2], "cgm4": c[3],
            "sel_prob": self.final.sel_prob,
            "initial_local": self.initial_local,
            "filtered_local": self.filtered_local,
            "final_svet": self.final.svetlichny,
            "facets_violated": ";".join(str(i) for i in self.final.violated),
            "verdict": self.verdict.value,
        }


CSV_FIELDS = ["theta1", "p1", "p2", "theta3", "p3", "B1", "B2", "B3", "B4",
              "cgm1", "cgm2", "cgm3", "cgm4", "sel_prob", "initial_local",
              "filtered_local", "final_svet", "facets_violated", "verdict"]


def verdict_from_row(row: dict) -> Verdict:
    """Recompute the verdict from a CSV/JSON row."""
    def flag(v):
        return v if isinstance(v, bool) else str(v).lower() == "true"
    fv = row["facets_violated"]
    ids = [int(s) for s in str(fv).split(";") if s] if fv not in ("", None) else []
    return decide_verdict([float(row[k]) for k in ("B1", "B2", "B3")],
                          flag(row["initial_local"]), float(row["final_svet"]), ids)


# --- filtered locality ----------------------------------------------------------------

def _filtered_bound(family: Family, params: StateFamilyParams, eps):
    eps = np.clip(eps, 0.0, 1.0)
    f = FilterParams(*eps)
    try:
        if family is Family.RHO1:
            return filtered_svetlichny_bound(params.theta1, params.p1, f)
        rho, _ = apply_filters(make_family(family, params), f)
        return svetlichny_max_xstate(extract_x_params(rho))
    except (NullOutcome, DegenerateOutcome):
        return None


def _filtered_value(family: Family, params: StateFamilyParams, eps) -> float:
    b = _filtered_bound(family, params, eps)
    return -math.inf if b is None else b.value


def sup_filtered_svetlichny(family, params: StateFamilyParams, resolution: int = 11,
                            refine: int = 2) -> tuple:
    """Supremum over diagonal filters of the closed-form Svetlichny maximum.

    A ``resolution``^3 grid over [0, 1]^3 is refined by bounded local search
    from the ``refine`` best cells of each branch, so a sine-branch ridge is
    not hidden behind product-like corners sitting at the diagonal value.
    Returns ``(value, FilterParams)``.
    """
    family = Family.parse(family)
    if family is Family.RHO4:
        raise ValidationError("filtered bounds are defined for the initial families only")
    axis = np.linspace(0.0, 1.0, resolution)
    cells = []
    for eps in itertools.product(axis, repeat=3):
        b = _filtered_bound(family, params, np.array(eps))
        if b is not None:
            cells.append((b.value, b.sine, b.diagonal, eps))
    if not cells:
        raise DegenerateOutcome("every filter setting annihilates the state")
    best = max(cells, key=lambda c: c[0])
    best_v, best_e = best[0], np.array(best[3])
    seeds = []
    for col in (1, 2):
        seeds += [c[3] for c in sorted(cells, key=lambda c: -c[col])[:refine]]
    for e0 in seeds:
        res = minimize(lambda e: -_filtered_value(family, params, e), np.array(e0),
                       method="L-BFGS-B", bounds=[(0.0, 1.0)] * 3,
                       options=dict(ftol=1e-15, gtol=1e-12))
        if -res.fun > best_v:
            best_v, best_e = -res.fun, np.clip(res.x, 0, 1)
    return float(best_v), FilterParams(*best_e)


_FAMILY_PARAM = {Family.RHO1: "p1", Family.RHO2: "p2", Family.RHO3: "p3"}


def svetlichny_threshold(family, params: StateFamilyParams = StateFamilyParams(),
                         filtered: bool = False, lo: float = 0.0, hi: float = 1.0,
                         width: float = 1e-6) -> Optional[float]:
    """Mixing weight of ``family`` above which the (filtered) Svetlichny maximum exceeds 4.

    Returns ``None`` when nothing in ``[lo, hi]`` violates, and the first
    crossing when there are several.
    """
    family = Family.parse(family)
    name = _FAMILY_PARAM.get(family)
    if name is None:
        raise ValidationError("thresholds are defined for the initial families only")

    def at(v):
        return StateFamilyParams(**{**asdict(params), name: v})

    if filtered:
        def objective(v):
            return sup_filtered_svetlichny(family, at(v))[0]
    else:
        def objective(v):
            return closed_form_B(family, at(v)).value
    # bracket the first crossing on a coarse grid, then bisect inside it
    grid = np.linspace(lo, hi, 21)
    flags = [objective(v) > 4 + VIOLATION_MARGIN for v in grid]
    if not any(flags):
        return None
    k = flags.index(True)
    if k == 0:
        return float(lo)
    return violation_threshold(lambda v: None, svetlichny_facet(), grid[k - 1], grid[k],
                               objective=objective, width=width)


def filtered_locality_check(family, params: StateFamilyParams, facets, cfg=OptimizerConfig(),
                            resolution: int = 11) -> tuple:
    """Whether the state stays below every facet bound under all diagonal filters.

    Returns ``(local, worst_excess, worst_facet_id)`` where the excess is the
    filtered maximum minus the bound.
    """
    family = Family.parse(family)
    worst, worst_id = -math.inf, None
    for f in facets:
        if f.id == SVETLICHNY_ID and family is not Family.RHO4:
            value, _ = sup_filtered_svetlichny(family, params, resolution)
        else:
            value = maximize_facet_filtered(make_family(family, params), f, cfg).value
        if value - f.bound > worst:
            worst, worst_id = value - f.bound, f.id
    return worst <= VIOLATION_MARGIN, float(worst), worst_id


# --- per-point classification ---------------------------------------------------------

def _violations(rho, facets, svet_value: float, cfg) -> list:
    out = []
    for f in facets:
        if f.id == SVETLICHNY_ID:
            value = svet_value
        else:
            value = maximize_facet(rho, f, cfg).value
        if value > f.bound + VIOLATION_MARGIN:
            out.append(f.id)
    return out


def _final_state(params: StateFamilyParams):
    """Simulated swapped state and the total psi+- post-selection probability."""
    t1, p1, p2, t3, p3 = params.as_tuple()
    r1, r2, r3 = make_rho1(t1, p1), make_rho2(p2), make_rho3(t3, p3)
    try:
        rho, prob = smp_prepare(r1, r2, r3)
    except NullOutcome:
        # p1 = 0 or p2 = 0: the swap never succeeds but the limiting state is
        # the same for every positive p1, p2
        return make_rho4_closed_form(t1, t3, p3), 0.0
    # all eight psi+- triples are equiprobable and give the same state
    return rho, len(PSI_OUTCOMES) * prob


def classify_point(params: StateFamilyParams, facets: Optional[Sequence[FacetInequality]] = None,
                   cfg: OptimizerConfig = OptimizerConfig(), filter_check: bool = False,
                   facet_set: Optional[str] = None, filter_resolution: int = 11) -> RevelationReport:
    if facets is None:
        facets = [svetlichny_facet()]
    facets = list(facets)
    ids = {f.id for f in facets}
    if facet_set is None:
        facet_set = "builtin:" + "+".join(str(i) for i in sorted(ids))
    partial = len(facets) < 185

    initial = []
    for fam in INITIAL:
        rho = make_family(fam, params)
        svet = closed_form_B(fam, params).value
        rep = InitialReport(fam.value, svet, cgm_family(fam, params),
                            _violations(rho, facets, svet, cfg))
        if filter_check:
            local, worst, _ = filtered_locality_check(fam, params, facets, cfg, filter_resolution)
            rep.filtered_worst = worst
            rep.violated_filtered = [] if local else [
                f.id for f in facets
                if not filtered_locality_check(fam, params, [f], cfg, filter_resolution)[0]
            ]
        initial.append(rep)

    rho4, sel_prob = _final_state(params)
    x = extract_x_params(rho4)
    final_svet = svetlichny_max_xstate(x).value
    B4 = closed_form_B(Family.RHO4, params).value
    final = FinalReport(B4, final_svet, cgm_xstate(x), sel_prob,
                        _violations(rho4, facets, final_svet, cfg))
    initial_local = not any(r.violated_raw for r in initial)
    verdict = decide_verdict([r.svetlichny for r in initial], initial_local,
                             final_svet, final.violated)
    return RevelationReport(params, initial, final, verdict, facet_set, partial)


def closed_form_verdict(params: StateFamilyParams) -> Verdict:
    """Svetlichny-only verdict from the closed-form maxima alone."""
    b = [closed_form_B(f, params).value for f in Family]
    svet_local = all(v <= 4 + VIOLATION_MARGIN for v in b[:3])
    return decide_verdict(b[:3], svet_local, b[3], [SVETLICHNY_ID] if b[3] > 4 + VIOLATION_MARGIN else [])


# --- scan specs and batch runs --------------------------------------------------------

PARAM_NAMES = ("theta1", "p1", "p2", "theta3", "p3")


def expand_grid(value) -> list:
    """A number, a list of numbers, or ``{start, stop, step}`` (inclusive) -> list."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra or not {"start", "stop", "step"} <= set(value):
            raise ValidationError(f"grid spec needs exactly start, stop, step; got {sorted(value)}")
        start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ValidationError(f"bad grid {value}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    raise ValidationError(f"cannot interpret grid {value!r}")


@dataclass
class ScanSpec:
    theta1: object = 0.1
    p1: object = 0.3
    p2: object = 0.5
    theta3: object = 0.144
    p3: object = field(default_factory=lambda: {"start": 0.0, "stop": 1.0, "step": 0.05})
    facet_source: Optional[str] = None
    builtin_facets: list = field(default_factory=lambda: [SVETLICHNY_ID])
    filter_check: bool = False
    optimizer: dict = field(default_factory=dict)
    output: str = "scan.csv"
    format: str = "csv"
    jsonl: bool = False
    workers: int = 1
    refine_edges: bool = True

    @classmethod
    def from_mapping(cls, doc: dict) -> "ScanSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ValidationError(f"unknown scan fields {sorted(unknown)}")
        spec = cls(**doc)
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path) -> "ScanSpec":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict):
            raise ValidationError("scan config must be a mapping")
        return cls.from_mapping(doc)

    def grids(self) -> dict:
        return {name: expand_grid(getattr(self, name)) for name in PARAM_NAMES}

    def points(self) -> list:
        g = self.grids()
        return [StateFamilyParams(*vals) for vals in itertools.product(*(g[n] for n in PARAM_NAMES))]

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(**self.optimizer)

    def facets(self) -> tuple:
        builtin = {3: ns3_facet, SVETLICHNY_ID: svetlichny_facet}
        if self.facet_source:
            loaded = read_facet_file(self.facet_source)
            return loaded, f"file:{os.path.basename(self.facet_source)}"
        try:
            chosen = [builtin[i]() for i in self.builtin_facets]
        except KeyError as e:
            raise ValidationError(f"no built-in facet with id {e.args[0]}") from None
        return chosen, "builtin:" + "+".join(str(i) for i in sorted(self.builtin_facets))

    def validate(self):
        g = self.grids()
        for name, vals in g.items():
            if not vals:
                raise ValidationError(f"empty grid for {name}")
        # constructs every point, raising on range violations
        StateFamilyParams(*(min(g[n]) for n in PARAM_NAMES))
        StateFamilyParams(*(max(g[n]) for n in PARAM_NAMES))
        if self.format not in ("csv",):
            raise ValidationError(f"unsupported output format {self.format!r}")
        self.optimizer_config()


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _classify_job(args):
    params, facets, cfg, filter_check, facet_set = args
    return classify_point(params, facets, cfg, filter_check, facet_set)


def _edge(lo_params, hi_params, name, facets, cfg, facet_set, width=1e-4):
    """Bisect the revelation boundary between two neighbouring grid points."""
    def revealed(v):
        p = StateFamilyParams(**{**asdict(lo_params), name: v})
        return classify_point(p, facets, cfg, False, facet_set).verdict in REVEALED
    lo, hi = getattr(lo_params, name), getattr(hi_params, name)
    want = revealed(hi)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if revealed(mid) == want:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def revelation_intervals(reports, spec: ScanSpec, facets, cfg, facet_set) -> list:
    """Revelation runs along each swept parameter, one entry per slice."""
    grids = spec.grids()
    out = []
    for name in PARAM_NAMES:
        if len(grids[name]) < 2:
            continue
        others = [n for n in PARAM_NAMES if n != name]
        slices = {}
        for r in reports:
            key = tuple(getattr(r.params, n) for n in others)
            slices.setdefault(key, []).append(r)
        for key, rs in slices.items():
            rs.sort(key=lambda r: getattr(r.params, name))
            xs = [getattr(r.params, name) for r in rs]
            runs = violation_intervals(xs, [r.verdict in REVEALED for r in rs])
            for a, b in runs:
                ia, ib = xs.index(a), xs.index(b)
                lo_edge, hi_edge = a, b
                if spec.refine_edges and ia > 0:
                    lo_edge = _edge(rs[ia - 1].params, rs[ia].params, name, facets, cfg, facet_set)
                if spec.refine_edges and ib < len(rs) - 1:
                    hi_edge = _edge(rs[ib].params, rs[ib + 1].params, name, facets, cfg, facet_set)
                out.append({"parameter": name, "fixed": dict(zip(others, key)),
                            "grid_run": [a, b], "interval": [lo_edge, hi_edge]})
    return out


def run_scan(spec: ScanSpec) -> dict:
    """Classify every grid point, write the CSV (and JSON lines), return a summary."""
    spec.validate()
    points = spec.points()
    facets, facet_set = spec.facets()
    cfg = spec.optimizer_config()
    jobs = [(p, facets, cfg, spec.filter_check, facet_set) for p in points]

    out_dir = os.path.dirname(os.path.abspath(spec.output))
    os.makedirs(out_dir, exist_ok=True)
    jsonl_path = os.path.splitext(spec.output)[0] + ".jsonl"
    reports = []
    with open(spec.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        jfh = open(jsonl_path, "w", encoding="utf-8") if spec.jsonl else None
        try:
            if spec.workers > 1:
                pool = ProcessPoolExecutor(max_workers=spec.workers)
                results = pool.map(_classify_job, jobs, chunksize=4)
            else:
                pool = None
                results = map(_classify_job, jobs)
            # map() yields in submission order, so rows follow grid order
            for rep in results:
                row = rep.row()
                writer.writerow({k: _fmt(v) for k, v in row.items()})
                fh.flush()
                if jfh:
                    jfh.write(json.dumps(row) + "\n")
                    jfh.flush()
                reports.append(rep)
            if pool:
                pool.shutdown()
        finally:
            if jfh:
                jfh.close()

    summary = {
        "points": len(reports),
        "facet_set": facet_set,
        "partial_coverage": len(facets) < 185,
        "verdicts": {v.value: sum(r.verdict is v for r in reports) for v in Verdict},
        "revelation_intervals": revelation_intervals(reports, spec, facets, cfg, facet_set),
    }
    with open(os.path.splitext(spec.output)[0] + ".summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
    log.info("scan finished: %d points, %s", len(reports), summary["verdicts"])
    return summary


# --- revelation range for a loaded facet set ------------------------------------------

def first_violation(rho, facets, cfg: OptimizerConfig = OptimizerConfig()) -> Optional[int]:
    """Id of the first facet the state violates, or ``None``. Stops at the first hit."""
    for f in facets:
        if f.id == SVETLICHNY_ID:
            try:
                value = svetlichny_max_xstate(extract_x_params(rho)).value
            except ValidationError:
                value = maximize_facet(rho, f, cfg).value
        else:
            value = maximize_facet(rho, f, cfg).value
        if value > f.bound + VIOLATION_MARGIN:
            return f.id
    return None


def _bisect_predicate(pred, lo: float, hi: float, width: float) -> float:
    if pred(lo) or not pred(hi):
        raise BracketError(f"predicate does not switch on between {lo} and {hi}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def ns_revelation_range(facets, theta1: float = 0.1, theta3: float = 0.3, p1: float = 0.5,
                        p2: float = 0.6, cfg: OptimizerConfig = OptimizerConfig(),
                        width: float = 1e-3) -> tuple:
    """Range of p3 where the swapped state violates a loaded facet while all three
    initial states violate none.

    The lower edge is where the final state starts violating, the upper edge
    where rho3 itself does. Both predicates are assumed monotone in p3.
    """
    facets = list(facets)
    for name, rho in (("rho1", make_rho1(theta1, p1)), ("rho2", make_rho2(p2))):
        fid = first_violation(rho, facets, cfg)
        if fid is not None:
            raise ValidationError(f"{name} already violates facet {fid}")

    def final_violates(p3):
        try:
            return first_violation(make_rho4_closed_form(theta1, theta3, p3), facets, cfg) is not None
        except DegenerateOutcome:
            return False

    def rho3_violates(p3):
        return first_violation(make_rho3(theta3, p3), facets, cfg) is not None

    lower = _bisect_predicate(final_violates, 0.0, 1.0, width)
    upper = _bisect_predicate(rho3_violates, 0.0, 1.0, width) if rho3_violates(1.0) else 1.0
    return lower, upper
