"""Operator and state algebra on the ion ⊗ charge ⊗ motion Hilbert space.

The composite space is always ordered as (ion internal, charge, motion).
The first two factors are qubits, the last one is a truncated Fock space
of dimension ``fock_dim``.  Operators and states are plain numpy arrays;
the small dataclasses here only carry the bookkeeping needed to embed
single-factor operators and to track displacements analytically.

The exact displacement algebra uses the convention

    D(a) D(b) = exp(i Im(a conj(b))) D(a + b)

so that a closed loop a, b, -a, -b picks up ``2 Im(a conj(b))``, twice the
enclosed area in the complex alpha plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "DEFAULT_DIM_CAP",
    "DimensionError",
    "DisplacementRecord",
    "HilbertSpace",
    "LeakageError",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "build_ladder_ops",
    "coherent_state",
    "compose_displacements",
    "compose_many",
    "displacement_matrix",
    "embed",
    "fidelity",
    "fock_state",
    "leakage_population",
    "check_leakage",
    "matrix_exponential",
    "position_operator",
    "unitarity_error",
]

DEFAULT_DIM_CAP = 256
LEAKAGE_TOL = 1e-8

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

Factor = Literal["ion", "charge", "motion"]
_FACTOR_INDEX = {"ion": 0, "charge": 1, "motion": 2}


class DimensionError(ValueError):
    """Raised when operator or state dimensions do not match."""


class LeakageError(RuntimeError):
    """Raised when a state populates the top of the truncated Fock space."""


@dataclass(frozen=True)
class HilbertSpace:
    """Composite space ion internal (2) ⊗ charge (2) ⊗ motion (N).

    Parameters
    ----------
    fock_dim : int
        Motional truncation N.  Must be at least 2.
    """

    fock_dim: int = 64
    ion_internal_dim: int = 2
    charge_dim: int = 2

    def __post_init__(self) -> None:
        if self.ion_internal_dim != 2 or self.charge_dim != 2:
            raise DimensionError("ion and charge factors are always two-level")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise DimensionError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.ion_internal_dim, self.charge_dim, self.fock_dim)

    @property
    def dim(self) -> int:
        return 4 * self.fock_dim

    def factor_dim(self, factor: Factor) -> int:
        return self.dims[_FACTOR_INDEX[factor]]

    def basis_index(self, ion: int, charge: int, n: int) -> int:
        """Flat index of |ion, charge, n> with ion, charge in {0, 1}."""
        return (ion * self.charge_dim + charge) * self.fock_dim + n


def build_ladder_ops(space: HilbertSpace | int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators on the motional factor.

    Parameters
    ----------
    space : HilbertSpace or int
        Either a composite space (its ``fock_dim`` is used) or the
        truncation N directly.

    Returns
    -------
    a, adag : ndarray
        N x N matrices with ``a|n> = sqrt(n)|n-1>`` and ``adag = a^H``.
    """
    n = space.fock_dim if isinstance(space, HilbertSpace) else int(space)
    if n < 2:
        raise DimensionError(f"fock_dim must be >= 2, got {n}")
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def position_operator(fock_dim: int) -> np.ndarray:
    """Dimensionless position a + a^dagger (so that x = x0 (a + a^dagger))."""
    a, adag = build_ladder_ops(fock_dim)
    return a + adag


def embed(space: HilbertSpace, factor: Factor, op: np.ndarray) -> np.ndarray:
    """Tensor ``op`` on one factor with identities on the others."""
    if factor not in _FACTOR_INDEX:
        raise ValueError(f"unknown factor {factor!r}")
    op = np.asarray(op, dtype=complex)
    expected = space.factor_dim(factor)
    if op.shape != (expected, expected):
        raise DimensionError(
            f"{factor} operator must be {expected}x{expected}, got {op.shape}"
        )
    mats = [np.eye(d, dtype=complex) for d in space.dims]
    mats[_FACTOR_INDEX[factor]] = op
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def matrix_exponential(
    op: np.ndarray,
    scale: complex = 1.0,
    hermitian: bool = False,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> np.ndarray:
    """Compute ``exp(scale * op)``.

    Hermitian generators are exponentiated through their eigendecomposition,
    everything else through scipy's scaling-and-squaring Pade routine.

    Parameters
    ----------
    op : ndarray
        Square matrix.
    scale : complex
        Scalar multiplying ``op`` inside the exponential, e.g. ``-1j * t``.
    hermitian : bool
        Promise that ``op`` is hermitian.  Checked to 1e-12 in max norm.
    dim_cap : int
        Largest accepted dimension.
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {op.shape}")
    if op.shape[0] > dim_cap:
        raise DimensionError(f"dimension {op.shape[0]} exceeds cap {dim_cap}")
    if hermitian:
        skew = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
        if skew >= 1e-12 * max(1.0, np.max(np.abs(op))):
            raise ValueError(f"operator flagged hermitian but |A - A^H|_max = {skew:.3e}")
        evals, evecs = np.linalg.eigh(op)
        return (evecs * np.exp(scale * evals)) @ evecs.conj().T
    return scipy.linalg.expm(scale * op)


def unitarity_error(u: np.ndarray) -> float:
    """Max-norm of U^H U - I."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class DisplacementRecord:
    """Displacement D(alpha) times a global phase exp(i phase)."""

    alpha: complex = 0.0j
    phase: float = 0.0

    def rotated(self, angle: float) -> "DisplacementRecord":
        """Conjugation by free evolution: U0(t)^H D(a) U0(t) = D(a e^{i w t})."""
        return DisplacementRecord(self.alpha * np.exp(1j * angle), self.phase)


def compose_displacements(a: DisplacementRecord, b: DisplacementRecord) -> DisplacementRecord:
    """Product ``a * b`` (``b`` acts first) of two phased displacements."""
    extra = float(np.imag(a.alpha * np.conj(b.alpha)))
    return DisplacementRecord(a.alpha + b.alpha, a.phase + b.phase + extra)


def compose_many(records: Iterable[DisplacementRecord]) -> DisplacementRecord:
    """Compose records given in time order (first element acts first)."""
    total = DisplacementRecord()
    for rec in records:
        total = compose_displacements(rec, total)
    return total


def displacement_matrix(fock_dim: int, alpha: complex) -> np.ndarray:
    """Truncated matrix of exp(alpha a^dagger - conj(alpha) a)."""
    a, adag = build_ladder_ops(fock_dim)
    gen = alpha * adag - np.conj(alpha) * a
    # gen is anti-hermitian, so -i*gen is hermitian
    return matrix_exponential(1j * gen, -1j, hermitian=True, dim_cap=max(fock_dim, DEFAULT_DIM_CAP))


def fock_state(fock_dim: int, n: int) -> np.ndarray:
    if not 0 <= n < fock_dim:
        raise DimensionError(f"Fock level {n} outside truncation {fock_dim}")
    psi = np.zeros(fock_dim, dtype=complex)
    psi[n] = 1.0
    return psi


def coherent_state(fock_dim: int, alpha: complex) -> np.ndarray:
    """Truncated coherent state, renormalised after truncation."""
    n = np.arange(fock_dim)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    with np.errstate(divide="ignore"):
        log_mag = n * np.log(np.abs(alpha)) if alpha != 0 else np.where(n == 0, 0.0, -np.inf)
    amp = np.exp(log_mag - 0.5 * log_fact - 0.5 * abs(alpha) ** 2)
    psi = amp * np.exp(1j * n * np.angle(alpha)) if alpha != 0 else amp.astype(complex)
    return psi / np.linalg.norm(psi)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Pure-state fidelity |<a|b>|^2."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"state shapes differ: {a.shape} vs {b.shape}")
    val = abs(np.vdot(a, b)) ** 2
    return float(min(max(val, 0.0), 1.0))


def leakage_population(state: np.ndarray, fock_dim: int, levels: int = 2) -> float:
    """Population in the top ``levels`` Fock levels of a composite or motional state."""
    psi = np.asarray(state).reshape(-1, fock_dim)
    return float(np.sum(np.abs(psi[:, fock_dim - levels:]) ** 2))


def check_leakage(states: Sequence[np.ndarray] | np.ndarray, fock_dim: int, tol: float = LEAKAGE_TOL) -> float:
    """Return the worst leakage over ``states``; raise LeakageError above ``tol``."""
    arr = np.atleast_2d(np.asarray(states))
    worst = max(leakage_population(s, fock_dim) for s in arr)
    if worst >= tol:
        raise LeakageError(
            f"top-two Fock population {worst:.2e} exceeds {tol:.0e}; increase fock_dim"
        )
    return worst
