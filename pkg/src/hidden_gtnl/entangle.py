"""Genuine multipartite concurrence (C_GM) for tripartite X states and pure states."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .qlin import TOL, partial_trace, projector
from .states import Family, StateFamilyParams, XStateParams, rho4_normalization, _require_rho4


def cgm_xstate(x: XStateParams) -> float:
    """``2 max_i {0, |gamma_i| - w_i}`` with ``w_i = sum_{j != i} sqrt(a_j b_j)``."""
    a = np.asarray(x.a)
    b = np.asarray(x.b)
    g = np.abs(np.asarray(x.gamma))
    root = np.sqrt(np.clip(a * b, 0, None))
    best = 0.0
    for i in range(4):
        w = root.sum() - root[i]
        best = max(best, g[i] - w)
    return float(min(2 * best, 1.0))


def cgm_pure(psi) -> float:
    """Minimum over the three 1|23 cuts of ``sqrt(2 (1 - purity))``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (8,):
        raise ValidationError("cgm_pure expects a 3-qubit state vector")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1) > TOL.trace:
        raise ValidationError(f"state vector norm^2 is {norm!r}")
    rho = projector(psi)
    vals = []
    for q in (1, 2, 3):
        # the purity of a single-qubit marginal equals that of its complement
        red = np.asarray(partial_trace(rho, [q]))
        purity = np.trace(red @ red).real
        vals.append(np.sqrt(max(0.0, 2 * (1 - purity))))
    return float(min(vals))


def cgm_family(family, params: StateFamilyParams) -> float:
    family = Family.parse(family)
    t1, p1, p2, t3, p3 = params.as_tuple()
    if family is Family.RHO1:
        return float(p1 * np.sin(2 * t1))
    if family is Family.RHO2:
        return float(p2)
    if family is Family.RHO3:
        return float(p3 * np.sin(2 * t3))
    _require_rho4(t1, t3, p3)
    return float(p3 * np.sin(2 * t1) * np.sin(2 * t3) / (2 * rho4_normalization(t1, t3, p3)))
