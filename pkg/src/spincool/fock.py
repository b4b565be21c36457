"""Truncated bosonic mode: ladder operators, displacements and oscillator states.

Operators are plain ``numpy`` complex arrays of shape ``(dim, dim)``. The
displacement operator is built from a cached eigendecomposition of the
Hermitian generator ``i(a^dag - a)`` and a number-phase rotation, so every
``displacement`` call is unitary to eigensolver precision on the truncated
space and ``D(x)D(y) = D(x + y)`` holds exactly for collinear amplitudes.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError, TruncationWarning

DEFAULT_DIM = 100
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGEN_TOL = 1e-10
TRUNCATION_LEVELS = 5
TRUNCATION_THRESHOLD = 1e-4


class LadderOps(NamedTuple):
    a: np.ndarray
    a_dag: np.ndarray
    number: np.ndarray
    q: np.ndarray
    p: np.ndarray


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= 2, got {dim}")
    return int(dim)


@lru_cache(maxsize=16)
def _ladder(dim):
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def ladder_ops(dim: int) -> LadderOps:
    """Return ``(a, a_dag, number, q, p)`` on a ``dim``-level Fock space.

    Quadratures follow ``q = (a + a_dag)/sqrt(2)`` and ``p = i(a_dag - a)/sqrt(2)``.
    """
    dim = _check_dim(dim)
    a = np.array(_ladder(dim))
    a_dag = a.conj().T
    number = np.diag(np.arange(dim, dtype=float)).astype(complex)
    q = (a + a_dag) / np.sqrt(2)
    p = 1j * (a_dag - a) / np.sqrt(2)
    return LadderOps(a, a_dag, number, q, p)


@lru_cache(maxsize=16)
def _generator_eigh(dim):
    # i(a^dag - a) is real-symmetric up to the factor i: Hermitian and purely imaginary
    a = _ladder(dim)
    h = 1j * (a.conj().T - a)
    w, v = np.linalg.eigh(h)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def displacement(beta: complex, dim: int) -> np.ndarray:
    """Matrix exponential of ``beta*a_dag - conj(beta)*a`` on the truncated space."""
    dim = _check_dim(dim)
    r = abs(beta)
    if r == 0.0:
        return np.eye(dim, dtype=complex)
    w, v = _generator_eigh(dim)
    core = (v * np.exp(-1j * r * w)) @ v.conj().T
    # D(r e^{i theta}) = e^{i theta n} D(r) e^{-i theta n}
    ph = np.exp(1j * np.angle(beta) * np.arange(dim))
    return ph[:, None] * core * ph.conj()[None, :]


def rotation(angle: float, dim: int) -> np.ndarray:
    """Diagonal of the free-evolution operator ``exp(-i angle a_dag a)``."""
    return np.exp(-1j * angle * np.arange(_check_dim(dim)))


@dataclass(frozen=True)
class OscillatorState:
    """Density matrix on a truncated Fock space.

    ``leakage`` is the probability mass that was discarded by truncation when the
    state was constructed (before renormalization).
    """

    rho: np.ndarray
    leakage: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def validate(self, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, eigen_tol=EIGEN_TOL):
        rho = self.rho
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidDimensionError(f"rho must be square, got shape {rho.shape}")
        _check_dim(rho.shape[0])
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > hermitian_tol:
            raise InvalidParameterError(f"rho is not Hermitian (deviation {herm:.3g})")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > trace_tol:
            raise InvalidParameterError(f"trace(rho) = {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lo < -eigen_tol:
            raise InvalidParameterError(f"rho has negative eigenvalue {lo:.3g}")
        if not 0.0 <= self.leakage <= 1.0:
            raise InvalidParameterError(f"leakage must lie in [0, 1], got {self.leakage}")
        return self


def pure_state(psi, leakage=0.0) -> OscillatorState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return OscillatorState(np.outer(psi, psi.conj()), leakage)


def fock_state(n: int, dim: int) -> OscillatorState:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidParameterError(f"number state {n} outside 0..{dim - 1}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return pure_state(psi)


def vacuum(dim: int) -> OscillatorState:
    return fock_state(0, dim)


def coherent_state(beta: complex, dim: int) -> OscillatorState:
    psi = displacement(beta, dim)[:, 0]
    return pure_state(psi)


def thermal_weights(n_occ: float, dim: int):
    """Truncated, renormalized geometric weights and the discarded tail mass."""
    dim = _check_dim(dim)
    if not n_occ >= 0:
        raise InvalidParameterError(f"thermal occupancy must be >= 0, got {n_occ}")
    if n_occ == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w, 0.0
    x = n_occ / (n_occ + 1.0)
    raw = (1.0 - x) * x ** np.arange(dim)
    kept = 1.0 - x**dim
    return raw / raw.sum(), float(1.0 - kept)


def thermal_state(n_occ: float, dim: int = DEFAULT_DIM) -> OscillatorState:
    w, leak = thermal_weights(n_occ, dim)
    return OscillatorState(np.diag(w).astype(complex), leak, {"n_occ": float(n_occ)})


def occupancy(state) -> float:
    """Mean phonon number ``Tr(rho a_dag a)``; accepts a state or a bare matrix."""
    rho = state.rho if isinstance(state, OscillatorState) else np.asarray(state)
    val = np.dot(np.diagonal(rho), np.arange(rho.shape[-1]))
    if abs(val.imag) > 1e-10:
        raise InvalidParameterError(f"occupancy has imaginary residue {val.imag:.3g}")
    return float(val.real)


def expectation(state, op) -> complex:
    rho = state.rho if isinstance(state, OscillatorState) else np.asarray(state)
    return complex(np.trace(rho @ op))


def top_population(rho, levels=TRUNCATION_LEVELS) -> float:
    """Population held in the top ``levels`` Fock levels of ``rho`` (or a stack of them)."""
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    return float(np.max(diag[..., -levels:].sum(axis=-1)))


def check_truncation(rho, threshold=TRUNCATION_THRESHOLD, levels=TRUNCATION_LEVELS, warn=True):
    """Return the top-level population; warn if it exceeds ``threshold``."""
    pop = top_population(rho, levels)
    if pop > threshold and warn:
        warnings.warn(
            f"top-{levels}-level population {pop:.3g} exceeds {threshold:g}; "
            "increase the Fock dimension",
            TruncationWarning,
            stacklevel=2,
        )
    return pop


def interior_deviation(m, target=None, margin=10) -> float:
    """Max-abs deviation of ``m`` from ``target`` (identity by default) on the
    upper-left ``dim - margin`` block."""
    k = m.shape[0] - margin
    if target is None:
        target = np.eye(m.shape[0])
    return float(np.max(np.abs(m[:k, :k] - target[:k, :k])))
