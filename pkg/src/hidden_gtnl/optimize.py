"""Multistart simplex maximization of facet functionals over measurement angles,
and bisection for violation thresholds in a state parameter.

The objective works on the 4x4x4 correlation tensor of the state, so one
evaluation is a few hundred flops. The simplex search is compiled with numba;
scipy's pure-Python Nelder-Mead is kept as a cross-check backend.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numba
import numpy as np
from scipy.optimize import minimize as _scipy_minimize
from scipy.stats import qmc

from .bellineq import FacetInequality
from .errors import BracketError, NonMonotoneWarning, NullOutcome, ValidationError
from .measure import MeasurementSetting, correlation_tensor
from .protocol import FilterParams

VIOLATION_MARGIN = 1e-7


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 64
    max_iterations: int = 2000
    xtol: float = 1e-8
    ftol: float = 1e-10
    seed: int = 20240611
    step: float = 0.6          # initial simplex edge (radians)
    restarts: int = 3          # fresh-simplex restarts from each local optimum
    backend: str = "numba"     # or "scipy"

    def __post_init__(self):
        if self.starts < 1:
            raise ValidationError("starts must be >= 1")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not (self.xtol > 0 and self.ftol > 0 and self.step > 0):
            raise ValidationError("tolerances and step must be positive")
        if self.backend not in ("numba", "scipy"):
            raise ValidationError(f"unknown backend {self.backend!r}")


@dataclass(frozen=True)
class OptResult:
    value: float
    setting: MeasurementSetting
    starts_converged: int
    violated: bool
    bound: float
    facet_id: int
    evaluations: int = 0
    filters: Optional[FilterParams] = None


# --- compiled objective ------------------------------------------------------------

@numba.njit(cache=True)
def _contract(t, w, x):
    # frames v[p, s, :] with s = 0 identity, s = 1, 2 the two inputs
    v = np.zeros((3, 3, 4))
    for p in range(3):
        v[p, 0, 0] = 1.0
        for s in range(2):
            th = x[4 * p + 2 * s]
            ph = x[4 * p + 2 * s + 1]
            st = math.sin(th)
            v[p, s + 1, 1] = st * math.cos(ph)
            v[p, s + 1, 2] = st * math.sin(ph)
            v[p, s + 1, 3] = math.cos(th)
    m1 = np.zeros((3, 4, 4))
    for a in range(3):
        for i in range(4):
            va = v[0, a, i]
            if va != 0.0:
                for j in range(4):
                    for k in range(4):
                        m1[a, j, k] += va * t[i, j, k]
    total = 0.0
    for a in range(3):
        for b in range(3):
            m2 = np.zeros(4)
            for j in range(4):
                vb = v[1, b, j]
                if vb != 0.0:
                    for k in range(4):
                        m2[k] += vb * m1[a, j, k]
            for c in range(3):
                wc = w[a, b, c]
                if wc != 0.0:
                    g = 0.0
                    for k in range(4):
                        g += v[2, c, k] * m2[k]
                    total += wc * g
    return total


@numba.njit(cache=True)
def _neg_value(x, t, w):
    return -_contract(t, w, x)


@numba.njit(cache=True)
def _eps_from(u):
    return 0.5 * (1.0 - math.cos(u))


@numba.njit(cache=True)
def _filtered_tensor(t, e1, e2, e3):
    ls = np.zeros((3, 4, 4))
    es = (e1, e2, e3)
    for p in range(3):
        e = es[p]
        e2_ = e * e
        ls[p, 0, 0] = 0.5 * (1 + e2_)
        ls[p, 0, 3] = 0.5 * (e2_ - 1)
        ls[p, 3, 0] = 0.5 * (e2_ - 1)
        ls[p, 3, 3] = 0.5 * (1 + e2_)
        ls[p, 1, 1] = e
        ls[p, 2, 2] = e
    out = np.zeros((4, 4, 4))
    for a in range(4):
        for b in range(4):
            for c in range(4):
                s = 0.0
                for i in range(4):
                    la = ls[0, a, i]
                    if la == 0.0:
                        continue
                    for j in range(4):
                        lb = ls[1, b, j]
                        if lb == 0.0:
                            continue
                        for k in range(4):
                            s += la * lb * ls[2, c, k] * t[i, j, k]
                out[a, b, c] = s
    return out


@numba.njit(cache=True)
def _neg_value_filtered(x, t, w):
    tf = _filtered_tensor(t, _eps_from(x[12]), _eps_from(x[13]), _eps_from(x[14]))
    norm = tf[0, 0, 0]
    if norm < 1e-12:
        return 1e6
    return -_contract(tf / norm, w, x[:12])


@numba.njit(cache=True)
def _nelder_mead(fun, x0, t, w, step, maxiter, xatol, fatol):
    """Adaptive Nelder-Mead (dimension-dependent coefficients) minimizing fun(x, t, w)."""
    n = x0.shape[0]
    rho = 1.0
    chi = 1.0 + 2.0 / n
    psi = 0.75 - 1.0 / (2.0 * n)
    sigma = 1.0 - 1.0 / n
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = x0
    for k in range(n):
        sim[k + 1] = x0
        sim[k + 1, k] += step
    nfev = 0
    for k in range(n + 1):
        fs[k] = fun(sim[k], t, w)
        nfev += 1
    order = np.argsort(fs)
    sim = sim[order]
    fs = fs[order]
    converged = False
    it = 0
    while it < maxiter:
        xspread = 0.0
        fspread = 0.0
        for k in range(1, n + 1):
            fspread = max(fspread, abs(fs[k] - fs[0]))
            for d in range(n):
                xspread = max(xspread, abs(sim[k, d] - sim[0, d]))
        if xspread <= xatol and fspread <= fatol:
            converged = True
            break
        it += 1
        xbar = np.zeros(n)
        for k in range(n):
            xbar += sim[k]
        xbar /= n
        xr = (1 + rho) * xbar - rho * sim[n]
        fxr = fun(xr, t, w)
        nfev += 1
        shrink = False
        if fxr < fs[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[n]
            fxe = fun(xe, t, w)
            nfev += 1
            if fxe < fxr:
                sim[n] = xe
                fs[n] = fxe
            else:
                sim[n] = xr
                fs[n] = fxr
        elif fxr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fxr
        elif fxr < fs[n]:
            xc = (1 + psi * rho) * xbar - psi * rho * sim[n]
            fxc = fun(xc, t, w)
            nfev += 1
            if fxc <= fxr:
                sim[n] = xc
                fs[n] = fxc
            else:
                shrink = True
        else:
            xcc = (1 - psi) * xbar + psi * sim[n]
            fxcc = fun(xcc, t, w)
            nfev += 1
            if fxcc < fs[n]:
                sim[n] = xcc
                fs[n] = fxcc
            else:
                shrink = True
        if shrink:
            for k in range(1, n + 1):
                sim[k] = sim[0] + sigma * (sim[k] - sim[0])
                fs[k] = fun(sim[k], t, w)
                nfev += 1
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
    return sim[0].copy(), fs[0], converged, nfev


@numba.njit(cache=True)
def _local_search(fun, x0, t, w, step, maxiter, xatol, fatol, restarts):
    x, f, conv, nfev = _nelder_mead(fun, x0, t, w, step, maxiter, xatol, fatol)
    s = step
    for _ in range(restarts):
        s *= 0.5
        x2, f2, conv2, n2 = _nelder_mead(fun, x, t, w, s, maxiter, xatol, fatol)
        nfev += n2
        if f2 < f - fatol:
            x, f, conv = x2, f2, conv2
        else:
            conv = conv or conv2
            if f2 < f:
                x, f = x2, f2
            break
    return x, f, conv, nfev


def _scipy_local(fun, x0, t, w, cfg: OptimizerConfig):
    res = _scipy_minimize(
        fun, x0, args=(t, w), method="Nelder-Mead",
        options=dict(maxiter=cfg.max_iterations, xatol=cfg.xtol, fatol=cfg.ftol, adaptive=True,
                     initial_simplex=np.vstack([x0, x0 + cfg.step * np.eye(len(x0))])),
    )
    return res.x, float(res.fun), bool(res.success), int(res.nfev)


# --- public API --------------------------------------------------------------------

def start_points(cfg: OptimizerConfig, dim: int = 12) -> np.ndarray:
    """Deterministic quasi-random start vectors in ``[0, 2 pi)^dim``."""
    return qmc.Halton(d=dim, scramble=True, seed=cfg.seed).random(cfg.starts) * 2 * np.pi


def _run(fun, t, w, starts, cfg: OptimizerConfig):
    best_x, best_f, n_conv, nfev = None, np.inf, 0, 0
    for x0 in starts:
        x0 = np.ascontiguousarray(x0, dtype=float)
        if cfg.backend == "numba":
            x, f, conv, n = _local_search(fun, x0, t, w, cfg.step, cfg.max_iterations,
                                          cfg.xtol, cfg.ftol, cfg.restarts)
        else:
            x, f, conv, n = _scipy_local(fun.py_func, x0, t, w, cfg)
        n_conv += bool(conv)
        nfev += n
        # strict '<' keeps the earliest start on ties
        if f < best_f:
            best_x, best_f = x, f
    return best_x, float(best_f), n_conv, nfev


def facet_value(rho_or_tensor, f: FacetInequality, setting) -> float:
    t = _as_tensor(rho_or_tensor)
    x = setting.as_array() if isinstance(setting, MeasurementSetting) else np.asarray(setting, float)
    return float(_contract(t, f.coefficients(), x))


def _as_tensor(rho_or_tensor) -> np.ndarray:
    a = np.asarray(rho_or_tensor)
    if a.shape == (4, 4, 4):
        return np.ascontiguousarray(a.real, dtype=float)
    if a.shape != (8, 8):
        raise ValidationError(f"expected a 3-qubit state, got shape {a.shape}")
    return np.ascontiguousarray(correlation_tensor(a))


def maximize_facet(rho, f: FacetInequality, cfg: OptimizerConfig = OptimizerConfig()) -> OptResult:
    """Largest facet value over projective settings, from ``cfg.starts`` starts."""
    t = _as_tensor(rho)
    w = f.coefficients()
    x, fval, n_conv, nfev = _run(_neg_value, t, w, start_points(cfg), cfg)
    value = -fval
    return OptResult(value, MeasurementSetting.from_array(x), n_conv,
                     value > f.bound + VIOLATION_MARGIN, f.bound, f.id, nfev)


def maximize_facet_filtered(rho, f: FacetInequality,
                            cfg: OptimizerConfig = OptimizerConfig()) -> OptResult:
    """Joint maximization over settings and diagonal filters ``diag(eps_j, 1)``.

    Filter strengths are searched through ``eps = (1 - cos u) / 2``. The
    unfiltered optimum is always one of the starts, so the result never
    falls below :func:`maximize_facet`.
    """
    t = _as_tensor(rho)
    w = f.coefficients()
    plain = maximize_facet(t, f, cfg)
    starts = start_points(cfg, dim=15)
    seed_start = np.concatenate([plain.setting.as_array(), [np.pi] * 3])
    starts = np.vstack([seed_start, starts])
    x, fval, n_conv, nfev = _run(_neg_value_filtered, t, w, starts, cfg)
    value = -fval
    if value < plain.value:
        return replace(plain, filters=FilterParams())
    eps = FilterParams(*(float(np.clip(_eps_from(u), 0.0, 1.0)) for u in x[12:]))
    return OptResult(value, MeasurementSetting.from_array(x[:12]), n_conv,
                     value > f.bound + VIOLATION_MARGIN, f.bound, f.id,
                     nfev + plain.evaluations, eps)


def violation_threshold(family_builder: Callable[[float], object], f: FacetInequality,
                        lo: float, hi: float, cfg: OptimizerConfig = OptimizerConfig(), *,
                        objective: Optional[Callable[[float], float]] = None,
                        width: float = 1e-4) -> float:
    """Bisect for the parameter where the maximal facet value crosses ``f.bound``.

    ``family_builder(t)`` returns the state at parameter ``t``. ``objective(t)``,
    when given, replaces the optimizer (e.g. a closed-form or filtered maximum).
    The lower endpoint must be non-violating and the upper one violating.
    """
    if objective is None:
        def objective(s):
            return maximize_facet(family_builder(s), f, cfg).value

    def excess(s):
        return objective(s) - f.bound - VIOLATION_MARGIN

    g_lo, g_hi = excess(lo), excess(hi)
    if not (g_lo <= 0 < g_hi):
        raise BracketError(
            f"[{lo}, {hi}] does not bracket a crossing (excess {g_lo:.3g} at lo, {g_hi:.3g} at hi)")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        g_mid = excess(mid)
        if g_mid < g_lo - 1e-9 or g_mid > g_hi + 1e-9:
            warnings.warn(NonMonotoneWarning(
                f"value at {mid:.6g} ({g_mid:.3g}) lies outside the bracket values"))
        if g_mid > 0:
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)


def violation_intervals(grid, violated) -> list:
    """Maximal runs of consecutive violating grid points, as (first, last) pairs."""
    runs, start, prev = [], None, None
    for s, v in zip(grid, violated):
        if v and start is None:
            start = s
        if not v and start is not None:
            runs.append((start, prev))
            start = None
        prev = s
    if start is not None:
        runs.append((start, prev))
    return runs


def scan_violation(family_builder, f: FacetInequality, grid, cfg: OptimizerConfig = OptimizerConfig(),
                   objective=None) -> list:
    """Range-scan fallback for non-monotone cases: violating runs on ``grid``."""
    flags = []
    for s in grid:
        try:
            val = objective(s) if objective else maximize_facet(family_builder(s), f, cfg).value
        except NullOutcome:
            flags.append(False)
            continue
        flags.append(val > f.bound + VIOLATION_MARGIN)
    return violation_intervals(list(grid), flags)
