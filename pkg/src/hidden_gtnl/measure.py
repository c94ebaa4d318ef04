"""Dichotomic spin observables, correlator tables and Bell-basis projectors."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, fields
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .errors import ValidationError
from .qlin import I2, PAULIS, SX, SY, SZ, ket, projector, tensor

TWO_PI = 2 * np.pi


def observable(theta: float, phi: float) -> np.ndarray:
    """``n . sigma`` for the unit vector with polar angle ``theta`` and azimuth ``phi``."""
    return (np.sin(theta) * np.cos(phi) * SX
            + np.sin(theta) * np.sin(phi) * SY
            + np.cos(theta) * SZ)


def bloch(theta, phi) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True)
class MeasurementSetting:
    """Polar/azimuthal angles of the six observables x0, x1, y0, y1, z0, z1."""

    thetaA0: float = 0.0
    phiA0: float = 0.0
    thetaA1: float = 0.0
    phiA1: float = 0.0
    alphaB0: float = 0.0
    betaB0: float = 0.0
    alphaB1: float = 0.0
    betaB1: float = 0.0
    zetaC0: float = 0.0
    etaC0: float = 0.0
    zetaC1: float = 0.0
    etaC1: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            if not np.isfinite(v):
                raise ValidationError(f"angle {f.name} is not finite")
            object.__setattr__(self, f.name, v % TWO_PI)

    @classmethod
    def from_array(cls, angles) -> "MeasurementSetting":
        angles = np.asarray(angles, dtype=float).ravel()
        if angles.size != 12:
            raise ValidationError(f"expected 12 angles, got {angles.size}")
        return cls(*angles)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    def angle_pairs(self):
        """``[[(theta, phi) for input 0, 1] for party A, B, C]``."""
        a = self.as_array().reshape(3, 2, 2)
        return [[tuple(a[p, i]) for i in range(2)] for p in range(3)]

    def observables(self):
        return [[observable(*ang) for ang in party] for party in self.angle_pairs()]


class Monomial(NamedTuple):
    """Input index of each party in a correlator, ``None`` when the party is absent."""

    x: Optional[int]
    y: Optional[int]
    z: Optional[int]

    def __str__(self):
        parts = [f"{name}{i}" for name, i in zip("xyz", self) if i is not None]
        return "<" + "".join(parts) + ">"


ALL_MONOMIALS = tuple(
    Monomial(*m)
    for m in itertools.product((None, 0, 1), repeat=3)
    if any(i is not None for i in m)
)
assert len(ALL_MONOMIALS) == 26


def monomial_index(m: Monomial) -> tuple:
    """Position in a 3x3x3 array where slot 0 is 'absent' and 1, 2 are inputs 0, 1."""
    return tuple(0 if i is None else i + 1 for i in m)


class CorrelatorTable(Mapping):
    """Read-only map from :class:`Monomial` to the expectation value."""

    def __init__(self, values: Mapping):
        self._values = {Monomial(*k): float(v) for k, v in values.items()}

    def __getitem__(self, key):
        return self._values[Monomial(*key)]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def as_array(self) -> np.ndarray:
        """3x3x3 array indexed by :func:`monomial_index`; entry [0,0,0] is 1."""
        g = np.zeros((3, 3, 3))
        g[0, 0, 0] = 1.0
        for k, v in self._values.items():
            g[monomial_index(k)] = v
        return g

    def __repr__(self):
        return f"CorrelatorTable({len(self)} monomials)"


def correlators(rho, m: MeasurementSetting) -> CorrelatorTable:
    """All 26 correlators, identity-padding absent parties."""
    r = np.asarray(rho, dtype=complex)
    if r.shape != (8, 8):
        raise ValidationError("correlators need a 3-qubit state")
    obs = [[I2] + pair for pair in m.observables()]
    out = {}
    for mono in ALL_MONOMIALS:
        ia, ib, ic = monomial_index(mono)
        op = tensor(obs[0][ia], obs[1][ib], obs[2][ic])
        out[mono] = np.trace(r @ op).real
    return CorrelatorTable(out)


_PAULI_BASIS = np.array([tensor(a, b, c) for a in PAULIS for b in PAULIS for c in PAULIS])


def correlation_tensor(rho) -> np.ndarray:
    """``T[i,j,k] = tr(rho sigma_i x sigma_j x sigma_k)`` with sigma_0 = identity."""
    r = np.asarray(rho, dtype=complex)
    return np.einsum("kab,ba->k", _PAULI_BASIS, r).real.reshape(4, 4, 4)


def party_frames(angles) -> np.ndarray:
    """Rows ``(1,0,0,0)``, ``(0, n_0)``, ``(0, n_1)`` for each party; shape (3, 3, 4)."""
    a = np.asarray(angles, dtype=float).reshape(3, 2, 2)
    v = np.zeros((3, 3, 4))
    v[:, 0, 0] = 1.0
    th, ph = a[..., 0], a[..., 1]
    v[:, 1:, 1] = np.sin(th) * np.cos(ph)
    v[:, 1:, 2] = np.sin(th) * np.sin(ph)
    v[:, 1:, 3] = np.cos(th)
    return v


def correlator_array(t: np.ndarray, angles) -> np.ndarray:
    """All correlators as a 3x3x3 array, contracted from a correlation tensor."""
    v = party_frames(angles)
    return np.einsum("ijk,ai,bj,ck->abc", t, v[0], v[1], v[2])


class BellOutcome(enum.Enum):
    PhiPlus = "phi+"
    PhiMinus = "phi-"
    PsiPlus = "psi+"
    PsiMinus = "psi-"


def bell_vector(outcome: BellOutcome) -> np.ndarray:
    s = 1 / np.sqrt(2)
    return {
        BellOutcome.PhiPlus: s * (ket("00") + ket("11")),
        BellOutcome.PhiMinus: s * (ket("00") - ket("11")),
        BellOutcome.PsiPlus: s * (ket("01") + ket("10")),
        BellOutcome.PsiMinus: s * (ket("01") - ket("10")),
    }[BellOutcome(outcome)]


def bell_projector(outcome: BellOutcome) -> np.ndarray:
    return projector(bell_vector(outcome))
