"""Facet inequalities in correlator form, the two built-in facets, and the
closed-form Svetlichny maxima of the state families.

A facet is ``sum_m coef_m <m> <= bound`` over the 26 correlator monomials
(one-, two- and three-party expectations of +-1 valued observables).
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import yaml

from .errors import (DegenerateOutcome, DuplicateId, MissingMonomial, ParseError,
                     ValidationError)
from .measure import CorrelatorTable, Monomial, monomial_index
from .protocol import FilterParams
from .qlin import TOL
from .states import Family, StateFamilyParams, XStateParams, extract_x_params, _require_rho4

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class FacetInequality:
    id: int
    bound: float
    terms: tuple  # ((Monomial, coef), ...)
    name: str = ""

    def __post_init__(self):
        terms = tuple((Monomial(*m), float(c)) for m, c in self.terms)
        if not terms:
            raise ValidationError(f"facet {self.id} has no terms")
        keys = [m for m, _ in terms]
        if len(set(keys)) != len(keys):
            raise ValidationError(f"facet {self.id} repeats a monomial")
        for m, c in terms:
            if all(i is None for i in m):
                raise ValidationError(f"facet {self.id}: empty monomial")
            if any(i not in (None, 0, 1) for i in m):
                raise ValidationError(f"facet {self.id}: bad input index in {tuple(m)}")
            if not math.isfinite(c):
                raise ValidationError(f"facet {self.id}: non-finite coefficient")
        if not math.isfinite(self.bound):
            raise ValidationError(f"facet {self.id}: non-finite bound")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "bound", float(self.bound))

    def coefficients(self) -> np.ndarray:
        """3x3x3 coefficient array aligned with :func:`measure.monomial_index`."""
        w = np.zeros((3, 3, 3))
        for m, c in self.terms:
            w[monomial_index(m)] = c
        return w

    def __str__(self):
        body = " ".join(f"{c:+g}{m}" for m, c in self.terms)
        return f"facet {self.id}: {body} <= {self.bound:g}"


def evaluate(f: FacetInequality, t: Mapping) -> float:
    total = 0.0
    for m, c in f.terms:
        try:
            total += c * t[m]
        except KeyError:
            raise MissingMonomial(f"correlator {m} required by facet {f.id} is missing") from None
    return total


def _mono(s: str) -> Monomial:
    """Parse shorthand like ``"x1y0"`` or ``"z1"``."""
    slots = {"x": None, "y": None, "z": None}
    for i in range(0, len(s), 2):
        slots[s[i]] = int(s[i + 1])
    return Monomial(slots["x"], slots["y"], slots["z"])


def _facet(id_, pairs, name="") -> FacetInequality:
    return FacetInequality(id_, 4.0, tuple((_mono(k), v) for k, v in pairs), name)


def svetlichny_facet() -> FacetInequality:
    return _facet(185, [
        ("x0y0z0", 1), ("x1y0z0", 1), ("x0y1z0", -1), ("x1y1z0", 1),
        ("x0y0z1", 1), ("x1y0z1", -1), ("x0y1z1", 1), ("x1y1z1", 1),
    ], "svetlichny")


def ns3_facet() -> FacetInequality:
    return _facet(3, [
        ("x0", -1), ("x1", -1), ("x0y0", -1), ("y1", -2), ("z0", -1),
        ("x1y0", 1), ("x0z0", -1), ("y0z0", 1), ("x1y0z0", 1), ("x0y1z0", -1),
        ("x1y1z0", 1), ("z1", -1), ("x1z1", 1), ("y0z1", -1), ("x0y0z1", -1),
        ("x0y1z1", 1), ("x1y1z1", 1),
    ], "ns3")


BUILTIN_FACETS = {3: ns3_facet, 185: svetlichny_facet}


# --- closed-form Svetlichny maxima -------------------------------------------------

class Branch(enum.Enum):
    SineBranch = "sine"
    DiagonalBranch = "diagonal"


@dataclass(frozen=True)
class ClosedFormBound:
    value: float
    branch: Branch
    sine: float
    diagonal: float

    @classmethod
    def of(cls, sine: float, diagonal: float) -> "ClosedFormBound":
        sine, diagonal = float(sine), float(diagonal)
        if sine >= diagonal:
            return cls(sine, Branch.SineBranch, sine, diagonal)
        return cls(diagonal, Branch.DiagonalBranch, sine, diagonal)


def svetlichny_max_xstate(x: XStateParams) -> ClosedFormBound:
    """Svetlichny maximum of an X state whose only coherence is <000|rho|111>.

    For such states the three-body correlation tensor is fixed by ``<zzz>``
    and by ``|gamma_1|``, and the maximum over projective settings is
    ``max(8 sqrt2 |gamma_1|, 4 |<zzz>|)``.
    """
    if max(abs(g) for g in x.gamma[1:]) > TOL.x_state:
        raise ValidationError("closed form needs the 000/111 coherence to be the only one")
    signs = np.array([(-1) ** bin(j).count("1") for j in range(8)])
    diag = np.array(list(x.a) + list(reversed(x.b)))
    zzz = float(signs @ diag)
    return ClosedFormBound.of(8 * SQRT2 * abs(x.gamma[0]), 4 * abs(zzz))


def closed_form_B(family, params: StateFamilyParams) -> ClosedFormBound:
    """Maximum Svetlichny value over projective measurements for one family."""
    family = Family.parse(family)
    t1, p1, p2, t3, p3 = params.as_tuple()
    if family is Family.RHO1:
        return ClosedFormBound.of(4 * SQRT2 * p1 * math.sin(2 * t1),
                                  4 * abs(1 - p1 - p1 * math.cos(2 * t1)))
    if family is Family.RHO2:
        return ClosedFormBound.of(4 * SQRT2 * p2, 4 * (1 - p2))
    if family is Family.RHO3:
        # <zzz> = -(1 - p3) - p3 cos 2t3
        return ClosedFormBound.of(4 * SQRT2 * p3 * math.sin(2 * t3),
                                  4 * abs(1 - p3 + p3 * math.cos(2 * t3)))
    norm = _require_rho4(t1, t3, p3)
    # <zzz> = (p3 sin^2 t3 - sin^2 t1) / norm; 1 - cos 2t1 written as 2 sin^2 t1 (no cancellation)
    return ClosedFormBound.of(
        2 * SQRT2 * p3 * math.sin(2 * t1) * math.sin(2 * t3) / norm,
        4 * abs(math.sin(t1) ** 2 - p3 * math.sin(t3) ** 2) / norm,
    )


def filtered_svetlichny_bound(theta1: float, p1: float, f: FilterParams) -> ClosedFormBound:
    """Svetlichny maximum of rho1 after the diagonal filters ``f``.

    The filters send ``|000> -> e1 e2 e3 |000>`` and ``|001> -> e1 e2 |001>``
    and leave ``|111>`` alone.
    """
    e1, e2, e3 = f.as_tuple()
    c2, s2 = math.cos(theta1) ** 2, math.sin(theta1) ** 2
    noise = (1 - p1) * (e1 * e2) ** 2
    coherent0 = p1 * (e1 * e2 * e3) ** 2 * c2
    norm = noise + coherent0 + p1 * s2
    if norm < TOL.null_probability:
        raise DegenerateOutcome(f"filter {f.as_tuple()} annihilates rho1")
    sine = 4 * SQRT2 * p1 * e1 * e2 * e3 * math.sin(2 * theta1) / norm
    diagonal = 4 * abs(coherent0 - p1 * s2 - noise) / norm
    return ClosedFormBound.of(sine, diagonal)


def filtered_family_bound(family, params: StateFamilyParams, f: FilterParams) -> ClosedFormBound:
    """Closed-form filtered Svetlichny maximum for any family (through X-state parameters)."""
    from .protocol import apply_filters
    from .states import make_family

    rho, _ = apply_filters(make_family(family, params), f)
    return svetlichny_max_xstate(extract_x_params(rho))


# --- facet files -------------------------------------------------------------------

_FACET_KEYS = {"id", "bound", "terms"}
_TERM_KEYS = {"x", "y", "z", "coef"}


def load_facets(source) -> list:
    """Parse a facet document (YAML or JSON text, or bytes) into facets.

    The document is a mapping with a single key ``facets``; each facet has
    ``id``, ``bound`` and ``terms``; each term has ``x``, ``y``, ``z`` (0, 1
    or null) and ``coef``.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"facet file is not UTF-8: {e}") from None
    try:
        doc = yaml.safe_load(source)
    except yaml.YAMLError as e:
        raise ParseError(f"facet file is not valid structured text: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("facet file must be a mapping with a 'facets' list")
    extra = set(doc) - {"facets"}
    if extra:
        raise ParseError(f"unknown top-level fields {sorted(extra)}")
    records = doc.get("facets")
    if records is None:
        records = []
    if not isinstance(records, list):
        raise ParseError("'facets' must be a list")

    out, seen = [], set()
    for i, rec in enumerate(records):
        where = f"facet record {i}"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: expected a mapping")
        if set(rec) != _FACET_KEYS:
            missing, unknown = _FACET_KEYS - set(rec), set(rec) - _FACET_KEYS
            raise ParseError(f"{where}: missing {sorted(missing)} unknown {sorted(unknown)}")
        fid = rec["id"]
        if not isinstance(fid, int) or isinstance(fid, bool):
            raise ParseError(f"{where}: id must be an integer")
        where = f"facet record {i} (id {fid})"
        if fid in seen:
            raise DuplicateId(f"{where}: duplicate id {fid}")
        seen.add(fid)
        if not isinstance(rec["terms"], list):
            raise ParseError(f"{where}: terms must be a list")
        terms = []
        for j, t in enumerate(rec["terms"]):
            if not isinstance(t, dict) or set(t) != _TERM_KEYS:
                raise ParseError(f"{where} term {j}: expected exactly the keys x, y, z, coef")
            slots = tuple(t[k] for k in "xyz")
            if any(s not in (None, 0, 1) or isinstance(s, bool) for s in slots):
                raise ParseError(f"{where} term {j}: slots must be 0, 1 or null")
            if all(s is None for s in slots):
                raise ParseError(f"{where} term {j}: at least one party must be present")
            if not isinstance(t["coef"], (int, float)) or isinstance(t["coef"], bool):
                raise ParseError(f"{where} term {j}: coef must be a number")
            terms.append((Monomial(*slots), float(t["coef"])))
        if not isinstance(rec["bound"], (int, float)) or isinstance(rec["bound"], bool):
            raise ParseError(f"{where}: bound must be a number")
        try:
            out.append(FacetInequality(fid, float(rec["bound"]), tuple(terms)))
        except ValidationError as e:
            raise ParseError(f"{where}: {e}") from None
    return out


def dump_facets(facets: Iterable[FacetInequality]) -> str:
    doc = {"facets": [
        {"id": f.id, "bound": f.bound,
         "terms": [{"x": m.x, "y": m.y, "z": m.z, "coef": c} for m, c in f.terms]}
        for f in facets
    ]}
    return json.dumps(doc, indent=1)


def read_facet_file(path) -> list:
    with open(path, "rb") as fh:
        return load_facets(fh.read())
