"""Dense linear algebra on small qubit registers.

Qubit ordering is big-endian: qubit 1 is the leftmost tensor factor, so the
computational basis index of ``|q1 q2 ... qn>`` is the binary number
``q1 q2 ... qn``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import NullOutcome, ValidationError


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-9
    null_probability: float = 1e-14
    x_state: float = 1e-10


TOL = Tolerances()

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Immutable n-qubit density matrix.

    Construction validates Hermiticity, unit trace and positivity against
    :data:`TOL` unless ``check=False`` is passed through :meth:`trusted`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got {m.shape}")
        n = m.shape[0].bit_length() - 1
        if 2**n != m.shape[0] or n < 1:
            raise ValidationError(f"dimension {m.shape[0]} is not a power of two")
        object.__setattr__(self, "matrix", m)
        check_density(m)

    @classmethod
    def trusted(cls, matrix: np.ndarray) -> "DensityMatrix":
        """Wrap ``matrix`` without the eigenvalue check (hot paths)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(matrix))
        return obj

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def qubits(self) -> int:
        return self.dim.bit_length() - 1

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(qubits={self.qubits})"


def check_density(m: np.ndarray, tol: Tolerances = TOL) -> None:
    herm = np.max(np.abs(m - m.conj().T))
    if herm > tol.hermitian:
        raise ValidationError(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(m).real
    if abs(tr - 1) > tol.trace:
        raise ValidationError(f"trace {tr!r} differs from 1")
    lam = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    if lam < -tol.psd:
        raise ValidationError(f"not positive semidefinite (min eigenvalue {lam:.3g})")


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the operands, left to right."""
    if not ops:
        raise ValidationError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def ket(bits: str) -> np.ndarray:
    """Computational basis vector, e.g. ``ket("001")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def partial_trace(rho, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on the 1-based qubit indices ``keep``, in that order."""
    m = np.asarray(rho, dtype=complex)
    n = m.shape[0].bit_length() - 1
    keep = list(keep)
    if len(set(keep)) != len(keep):
        raise ValidationError(f"duplicate qubit indices in {keep}")
    for q in keep:
        if not 1 <= q <= n:
            raise ValidationError(f"qubit index {q} out of range 1..{n}")
    k = [q - 1 for q in keep]
    traced = [q for q in range(n) if q not in k]
    t = m.reshape((2,) * (2 * n))
    # bring kept row axes, traced row axes, kept col axes, traced col axes
    t = t.transpose(k + traced + [n + q for q in k] + [n + q for q in traced])
    dk, dt = 2 ** len(k), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return DensityMatrix.trusted(np.einsum("ajbj->ab", t))


def conjugate(rho, k: np.ndarray, tol: Tolerances = TOL) -> tuple[DensityMatrix, float]:
    """Apply ``K rho K^dagger`` and renormalize.

    Returns the normalized state and the trace before normalization, which is
    the success probability when ``K^dagger K <= I``.
    """
    m = np.asarray(rho, dtype=complex)
    k = np.asarray(k, dtype=complex)
    if k.shape != m.shape:
        raise ValidationError(f"operator shape {k.shape} does not match state {m.shape}")
    out = k @ m @ k.conj().T
    prob = float(np.trace(out).real)
    if prob < tol.null_probability:
        raise NullOutcome(f"post-selected event has probability {prob:.3g}")
    out = out / prob
    out = (out + out.conj().T) / 2
    return DensityMatrix.trusted(out), prob


def trace_distance(a, b) -> float:
    """Half the trace norm of ``a - b``."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return 0.5 * float(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2)).sum())


def permute_qubits(m: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator: new factor i is old ``order[i]`` (0-based)."""
    m = np.asarray(m)
    n = m.shape[0].bit_length() - 1
    order = list(order)
    t = m.reshape((2,) * (2 * n)).transpose(order + [n + q for q in order])
    return t.reshape(m.shape)
