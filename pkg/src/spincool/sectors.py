"""Ensemble sectors and the conditional Kraus pair of one probe window.

The ensemble couples to the oscillator only through ``sum_j g_j S_j^z``, so the
joint dynamics are block diagonal in the ensemble's z-configurations. Configurations
that share the same displacement coefficient ``sum_j g_j s_j`` (and magnetization)
evolve identically and are grouped into one sector.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence, Union

import numpy as np

from . import fock
from .errors import CapacityError, InvalidParameterError
from .pulsekernel import PulseStage, magnus2_phase, segment_displacement

MAX_INHOMOGENEOUS_SPINS = 16
GROUP_RTOL = 1e-9


@dataclass(frozen=True)
class Sector:
    """A group of ensemble configurations with identical dynamics.

    ``coeff`` is the static coupling prefactor ``sum_j g_j s_j`` (``g(2k-N)/2`` in
    the homogeneous case), ``m`` the magnetization and ``prior`` the fraction
    of the ``2^N`` configurations in the group.
    """

    m: float
    coeff: float
    prior: float
    count: int
    k: Union[int, None] = None
    config: Union[tuple, None] = None

    @property
    def label(self) -> str:
        if self.k is not None:
            return f"k={self.k}"
        return "config=" + "".join("+" if s > 0 else "-" for s in self.config)


def homogeneous_sectors(n_spins: int, g: float) -> list:
    if n_spins < 0:
        raise InvalidParameterError(f"N must be >= 0, got {n_spins}")
    return [
        Sector(m=(2 * k - n_spins) / 2, coeff=g * (2 * k - n_spins) / 2,
               prior=comb(n_spins, k) / 2**n_spins, count=comb(n_spins, k), k=k)
        for k in range(n_spins + 1)
    ]


def inhomogeneous_sectors(couplings: Sequence[float]) -> list:
    """Enumerate all ``2^N`` configurations and group them by (coefficient, magnetization)."""
    g = np.asarray(couplings, dtype=float)
    n = len(g)
    if n > MAX_INHOMOGENEOUS_SPINS:
        raise CapacityError(f"inhomogeneous mode supports N <= {MAX_INHOMOGENEOUS_SPINS}, got {n}")
    scale = max(float(np.max(np.abs(g))) if n else 0.0, 1e-300)
    groups = []
    for spins in itertools.product((0.5, -0.5), repeat=n):
        s = np.array(spins)
        coeff = float(np.dot(g, s))
        m = float(s.sum())
        for grp in groups:
            if grp["m"] == m and abs(grp["coeff"] - coeff) <= GROUP_RTOL * scale:
                grp["count"] += 1
                break
        else:
            groups.append({"m": m, "coeff": coeff, "count": 1, "config": tuple(spins)})
    groups.sort(key=lambda d: (d["m"], d["coeff"]))
    return [
        Sector(m=d["m"], coeff=d["coeff"], prior=d["count"] / 2**n, count=d["count"], config=d["config"])
        for d in groups
    ]


def make_sectors(n_spins: int, couplings) -> list:
    """Homogeneous sectors for a scalar coupling, grouped configurations for a list."""
    if np.ndim(couplings) == 0:
        return homogeneous_sectors(n_spins, float(couplings))
    if len(couplings) != n_spins:
        raise InvalidParameterError(f"expected {n_spins} couplings, got {len(couplings)}")
    return inhomogeneous_sectors(couplings)


@dataclass
class SectorState:
    """Block-diagonal ensemble-oscillator state.

    ``weights[i]`` is the normalized probability of ``sectors[i]`` and ``rhos[i]``
    the normalized oscillator state conditioned on that sector.
    """

    sectors: list
    weights: np.ndarray
    rhos: np.ndarray
    leakage: float = 0.0

    @property
    def dim(self) -> int:
        return self.rhos.shape[-1]

    @property
    def n_spins(self) -> int:
        return int(round(2 * max(abs(s.m) for s in self.sectors)))

    def copy(self) -> "SectorState":
        return SectorState(list(self.sectors), self.weights.copy(), self.rhos.copy(), self.leakage)

    def magnetizations(self) -> np.ndarray:
        """Sorted distinct magnetization values ``-N/2 ... N/2``."""
        n = self.n_spins
        return (np.arange(n + 1) * 2 - n) / 2

    def probabilities(self) -> np.ndarray:
        """``P_m`` on the grid returned by ``magnetizations`` (groups summed per m)."""
        n = self.n_spins
        out = np.zeros(n + 1)
        for s, w in zip(self.sectors, self.weights):
            out[int(round(s.m + n / 2))] += w
        return out

    def occupancy(self) -> float:
        occ = np.real(np.einsum("sii,i->s", self.rhos, np.arange(self.dim)))
        return float(np.dot(self.weights, occ))

    def state(self, i) -> fock.OscillatorState:
        return fock.OscillatorState(self.rhos[i].copy(), self.leakage)


def initial_sectors(n_spins: int, n_occ: float, dim: int = fock.DEFAULT_DIM, couplings=10.0) -> SectorState:
    """Fully mixed ensemble times a truncated thermal oscillator."""
    if n_spins < 1:
        raise InvalidParameterError(f"N must be >= 1, got {n_spins}")
    sectors = make_sectors(n_spins, couplings)
    th = fock.thermal_state(n_occ, dim)
    weights = np.array([s.prior for s in sectors])
    rhos = np.repeat(th.rho[None, :, :], len(sectors), axis=0)
    return SectorState(sectors, weights, rhos, th.leakage)


@dataclass(frozen=True)
class KrausPair:
    v_plus: np.ndarray
    v_minus: np.ndarray
    sector: Sector

    def completeness_deviation(self, margin=10) -> float:
        s = self.v_plus.conj().T @ self.v_plus + self.v_minus.conj().T @ self.v_minus
        return fock.interior_deviation(s, margin=margin)


@dataclass(frozen=True)
class BranchData:
    """Displacements and second-order phases of the two probe branches."""

    beta_ens: complex
    beta_probe: complex
    phase_plus: float
    phase_minus: float


def branch_data(coeff: float, stage: PulseStage) -> BranchData:
    beta_ens = segment_displacement(stage, coeff, modulated=False)
    beta_probe = segment_displacement(stage, stage.g0 / 2, modulated=True)
    return BranchData(
        beta_ens,
        beta_probe,
        magnus2_phase(stage, coeff, stage.g0 / 2),
        magnus2_phase(stage, coeff, -stage.g0 / 2),
    )


def branch_unitaries(coeff: float, stage: PulseStage, dim: int):
    """Window propagators ``exp(i phi_pm) D(beta_ens +- beta_probe)`` for probe up/down."""
    b = branch_data(coeff, stage)
    u_plus = np.exp(1j * b.phase_plus) * fock.displacement(b.beta_ens + b.beta_probe, dim)
    u_minus = np.exp(1j * b.phase_minus) * fock.displacement(b.beta_ens - b.beta_probe, dim)
    return u_plus, u_minus


def kraus_pair(sector: Sector, stage: PulseStage, dim: int = fock.DEFAULT_DIM) -> KrausPair:
    """``V_pm = (U_up +- U_down) / 2`` for one sector over one window starting at t = 0."""
    u_plus, u_minus = branch_unitaries(sector.coeff, stage, dim)
    return KrausPair(0.5 * (u_plus + u_minus), 0.5 * (u_plus - u_minus), sector)
