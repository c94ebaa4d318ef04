"""Preparation stage of the sequential measurement protocol and local filtering.

Three 3-qubit states are spread over three parties, each party Bell-measures
two of its three qubits, and the post-selected state on the three remaining
qubits is returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NullOutcome, ValidationError
from .measure import BellOutcome, bell_vector
from .qlin import TOL, DensityMatrix, conjugate, permute_qubits, tensor

# (state, particle) labels, both 1-based
Qubit = tuple


def _internal_index(q: Qubit) -> int:
    s, k = q
    return 3 * (s - 1) + (k - 1)


@dataclass(frozen=True)
class SmpWiring:
    """Who holds which qubit, which pair each party measures, which qubit it keeps.

    The default is the swapping chain used throughout the package: party 1
    measures (rho2^3, rho3^1), party 2 measures (rho1^2, rho2^1), party 3
    measures (rho1^3, rho2^2), and the kept qubits are rho1^1, rho3^2, rho3^3.
    """

    holdings: tuple = (
        ((1, 1), (2, 3), (3, 1)),
        ((1, 2), (2, 1), (3, 2)),
        ((1, 3), (2, 2), (3, 3)),
    )
    measured: tuple = (
        ((2, 3), (3, 1)),
        ((1, 2), (2, 1)),
        ((1, 3), (2, 2)),
    )
    kept: tuple = ((1, 1), (3, 2), (3, 3))

    def __post_init__(self):
        everything = [(s, k) for s in (1, 2, 3) for k in (1, 2, 3)]
        held = [q for party in self.holdings for q in party]
        if sorted(held) != everything:
            raise ValidationError("holdings must distribute all nine qubits exactly once")
        for p in range(3):
            pair, keep = self.measured[p], self.kept[p]
            if len(pair) != 2 or len(set(pair)) != 2:
                raise ValidationError(f"party {p + 1} must measure two distinct qubits")
            if sorted(list(pair) + [keep]) != sorted(self.holdings[p]):
                raise ValidationError(f"party {p + 1} must measure two and keep one of its own qubits")

    def order(self) -> list:
        """Internal qubit order: the three measured pairs, then the kept qubits."""
        q = [_internal_index(x) for pair in self.measured for x in pair]
        return q + [_internal_index(x) for x in self.kept]


DEFAULT_WIRING = SmpWiring()
PSI_MINUS_3 = (BellOutcome.PsiMinus,) * 3


def _swap_operands(rho1, rho2, rho3, wiring: SmpWiring):
    big = tensor(rho1, rho2, rho3)
    # order() lists old positions for each new slot
    return permute_qubits(big, wiring.order()).reshape(64, 8, 64, 8)


def _bell_triple(outcomes) -> np.ndarray:
    outcomes = tuple(BellOutcome(o) for o in outcomes)
    if len(outcomes) != 3:
        raise ValidationError("need one Bell outcome per party")
    return tensor(*(bell_vector(o) for o in outcomes))


def correct_phase(m: np.ndarray) -> np.ndarray:
    """Diagonal unitary on party 1's qubit making ``<000|rho|111>`` real and >= 0."""
    g = m[0, 7]
    if abs(g) < TOL.x_state:
        return m
    u = np.diag(np.kron([1, np.exp(1j * np.angle(g))], np.ones(4)))
    return u @ m @ u.conj().T


def smp_prepare(rho1, rho2, rho3, outcomes=PSI_MINUS_3,
                wiring: SmpWiring = DEFAULT_WIRING) -> tuple[DensityMatrix, float]:
    """Post-selected 3-qubit state on the kept qubits and the joint outcome probability."""
    t = _swap_operands(rho1, rho2, rho3, wiring)
    beta = _bell_triple(outcomes)
    # <beta| rho |beta> on the measured block, kept block left open
    out = np.einsum("a,aibj,b->ij", beta.conj(), t, beta)
    prob = float(np.trace(out).real)
    if prob < TOL.null_probability:
        raise NullOutcome(f"Bell outcomes {outcomes} occur with probability {prob:.3g}")
    out = correct_phase(out / prob)
    out = (out + out.conj().T) / 2
    return DensityMatrix.trusted(out), prob


def smp_outcome_distribution(rho1, rho2, rho3, wiring: SmpWiring = DEFAULT_WIRING) -> dict:
    """Probability of each of the 64 joint Bell outcomes, keyed by outcome triple."""
    t = _swap_operands(rho1, rho2, rho3, wiring)
    measured = np.einsum("aibi->ab", t)
    dist = {}
    for triple in itertools.product(BellOutcome, repeat=3):
        beta = _bell_triple(triple)
        dist[triple] = float((beta.conj() @ measured @ beta).real)
    return dist


@dataclass(frozen=True)
class FilterParams:
    """Diagonal filters ``diag(eps_j, 1)`` on each party."""

    eps1: float = 1.0
    eps2: float = 1.0
    eps3: float = 1.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps3"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)

    def as_tuple(self):
        return (self.eps1, self.eps2, self.eps3)

    def operator(self) -> np.ndarray:
        return tensor(*(np.diag([e, 1.0]) for e in self.as_tuple()))


def apply_filters(rho, f: FilterParams) -> tuple[DensityMatrix, float]:
    return conjugate(rho, f.operator())


def filter_transfer(eps: float) -> np.ndarray:
    """Action of ``diag(eps, 1)`` conjugation on one qubit's (I, X, Y, Z) components."""
    e2 = eps * eps
    return np.array([
        [(1 + e2) / 2, 0, 0, (e2 - 1) / 2],
        [0, eps, 0, 0],
        [0, 0, eps, 0],
        [(e2 - 1) / 2, 0, 0, (1 + e2) / 2],
    ])


def filter_correlation_tensor(t: np.ndarray, f: FilterParams) -> tuple[np.ndarray, float]:
    """Filtered and renormalized correlation tensor plus the success probability."""
    l1, l2, l3 = (filter_transfer(e) for e in f.as_tuple())
    out = np.einsum("ai,bj,ck,ijk->abc", l1, l2, l3, t)
    prob = float(out[0, 0, 0])
    if prob < TOL.null_probability:
        raise NullOutcome(f"filter {f} annihilates the state")
    return out / prob, prob
