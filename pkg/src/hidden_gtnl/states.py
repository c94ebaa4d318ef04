"""The three initial state families, the swapped state and X-state parameters.

Basis order is lexicographic, ``|000>, |001>, ..., |111>``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOutcome, NotXState, ValidationError
from .qlin import TOL, DensityMatrix, ket, projector

GHZ = (ket("000") + ket("111")) / np.sqrt(2)


class Family(enum.Enum):
    RHO1 = "rho1"
    RHO2 = "rho2"
    RHO3 = "rho3"
    RHO4 = "rho4"

    @classmethod
    def parse(cls, s: "str | Family") -> "Family":
        if isinstance(s, Family):
            return s
        try:
            return cls(str(s).lower())
        except ValueError:
            raise ValidationError(f"unknown family {s!r}; expected one of rho1..rho4") from None


def _check_angle(name, t):
    if not (0.0 <= t <= np.pi / 4 + 1e-12):
        raise ValidationError(f"{name}={t} outside [0, pi/4]")


def _check_prob(name, p):
    if not (0.0 <= p <= 1.0):
        raise ValidationError(f"{name}={p} outside [0, 1]")


@dataclass(frozen=True)
class StateFamilyParams:
    theta1: float = 0.1
    p1: float = 0.5
    p2: float = 0.5
    theta3: float = 0.144
    p3: float = 0.5

    def __post_init__(self):
        _check_angle("theta1", self.theta1)
        _check_angle("theta3", self.theta3)
        for name in ("p1", "p2", "p3"):
            _check_prob(name, getattr(self, name))

    def as_tuple(self):
        return (self.theta1, self.p1, self.p2, self.theta3, self.p3)


def make_rho1(theta1: float, p1: float) -> DensityMatrix:
    """``p1 |psi_f><psi_f| + (1-p1)|001><001|`` with ``psi_f = cos t|000> + sin t|111>``."""
    _check_angle("theta1", theta1)
    _check_prob("p1", p1)
    psi = np.cos(theta1) * ket("000") + np.sin(theta1) * ket("111")
    return DensityMatrix(p1 * projector(psi) + (1 - p1) * projector(ket("001")))


def make_rho2(p2: float) -> DensityMatrix:
    """GHZ mixed with ``|010>``."""
    _check_prob("p2", p2)
    return DensityMatrix(p2 * projector(GHZ) + (1 - p2) * projector(ket("010")))


def make_rho3(theta3: float, p3: float) -> DensityMatrix:
    """``p3 |psi_l><psi_l| + (1-p3)|100><100|`` with ``psi_l = sin t|000> + cos t|111>``."""
    _check_angle("theta3", theta3)
    _check_prob("p3", p3)
    psi = np.sin(theta3) * ket("000") + np.cos(theta3) * ket("111")
    return DensityMatrix(p3 * projector(psi) + (1 - p3) * projector(ket("100")))


def rho4_normalization(theta1: float, theta3: float, p3: float) -> float:
    return np.sin(theta1) ** 2 + p3 * np.cos(2 * theta1) * np.sin(theta3) ** 2


def _require_rho4(theta1, theta3, p3) -> float:
    norm = rho4_normalization(theta1, theta3, p3)
    if norm < TOL.null_probability:
        raise DegenerateOutcome(
            f"rho4 normalization {norm:.3g} vanishes at theta1={theta1}, theta3={theta3}, p3={p3}"
        )
    return norm


def make_rho4_closed_form(theta1: float, theta3: float, p3: float) -> DensityMatrix:
    """State left after the swapping stage when every Bell outcome is psi+-."""
    _check_angle("theta1", theta1)
    _check_angle("theta3", theta3)
    _check_prob("p3", p3)
    norm = _require_rho4(theta1, theta3, p3)
    phi = (np.cos(theta1) * np.sin(theta3) * ket("000")
           + np.sin(theta1) * np.cos(theta3) * ket("111"))
    m = p3 * projector(phi) + (1 - p3) * np.sin(theta1) ** 2 * projector(ket("100"))
    return DensityMatrix(m / norm)


def make_family(family: "Family | str", params: StateFamilyParams) -> DensityMatrix:
    family = Family.parse(family)
    if family is Family.RHO1:
        return make_rho1(params.theta1, params.p1)
    if family is Family.RHO2:
        return make_rho2(params.p2)
    if family is Family.RHO3:
        return make_rho3(params.theta3, params.p3)
    return make_rho4_closed_form(params.theta1, params.theta3, params.p3)


@dataclass(frozen=True)
class XStateParams:
    """Diagonal weights ``a``, ``b`` and anti-diagonal coherences ``gamma``.

    Index j = 0..3 pairs basis state ``j`` with basis state ``7 - j``:
    ``a[j] = rho[j, j]``, ``b[j] = rho[7-j, 7-j]``, ``gamma[j] = rho[j, 7-j]``.
    """

    a: tuple
    b: tuple
    gamma: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        g = np.asarray(self.gamma, dtype=complex)
        if a.shape != (4,) or b.shape != (4,) or g.shape != (4,):
            raise ValidationError("X-state parameters need four entries each")
        if np.any(a < -TOL.psd) or np.any(b < -TOL.psd):
            raise ValidationError("X-state diagonal must be nonnegative")
        if abs(a.sum() + b.sum() - 1) > TOL.trace:
            raise ValidationError(f"X-state weights sum to {a.sum() + b.sum()!r}")
        if np.any(np.abs(g) > np.sqrt(np.clip(a * b, 0, None)) + TOL.psd):
            raise ValidationError("X-state coherence exceeds sqrt(a_j b_j)")
        object.__setattr__(self, "a", tuple(float(v) for v in a))
        object.__setattr__(self, "b", tuple(float(v) for v in b))
        object.__setattr__(self, "gamma", tuple(complex(v) for v in g))

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((8, 8), dtype=complex)
        for j in range(4):
            m[j, j] = self.a[j]
            m[7 - j, 7 - j] = self.b[j]
            m[j, 7 - j] = self.gamma[j]
            m[7 - j, j] = np.conj(self.gamma[j])
        return m


def make_x_state(x: XStateParams) -> DensityMatrix:
    return DensityMatrix(x.to_matrix())


_X_MASK = np.eye(8, dtype=bool) | np.fliplr(np.eye(8, dtype=bool))


def extract_x_params(rho) -> XStateParams:
    m = np.asarray(rho, dtype=complex)
    if m.shape != (8, 8):
        raise ValidationError(f"X-state extraction needs a 3-qubit state, got shape {m.shape}")
    off = np.abs(m[~_X_MASK])
    if off.size and off.max() >= TOL.x_state:
        raise NotXState(f"off-pattern entry of magnitude {off.max():.3g}")
    idx = np.arange(4)
    return XStateParams(
        a=m[idx, idx].real,
        b=m[7 - idx, 7 - idx].real,
        gamma=m[idx, 7 - idx],
    )
