"""Brute-force check of the sector construction.

Propagates the full probe x ensemble x oscillator space under the rotating-frame
Hamiltonian ``(g0 S0z + sum_j g_j Sjz)(a e^{-iwt} + a_dag e^{iwt})`` with a midpoint
rule, inserting exact probe sigma_x flips at the pulse times. The result is compared
block by block against ``exp(i phi) D(beta)`` assembled from the pulse kernel.

Spin basis: bit value 0 means spin up (S_z = +1/2); the probe is the most
significant bit. Full-space index = spin_index * dim + fock_level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import fock
from .errors import CapacityError, InvalidParameterError
from .pulsekernel import PulseStage, magnus2_phase, segment_displacement

MAX_TOTAL_DIM = 4096


def _spin_values(n_spins):
    n_states = 2 ** (n_spins + 1)
    bits = (np.arange(n_states)[:, None] >> np.arange(n_spins, -1, -1)[None, :]) & 1
    return 0.5 - bits  # column 0 is the probe


def _couplings(stage, n_spins):
    if stage.couplings:
        if len(stage.couplings) != n_spins:
            raise InvalidParameterError("coupling list length does not match N")
        return np.array(stage.couplings)
    return np.full(n_spins, float(stage.g))


def trotter_propagator(stage: PulseStage, n_spins: int, dim: int, steps_per_segment: int = 200,
                       t_start: float = 0.0) -> np.ndarray:
    """Time-ordered full-space propagator over one window starting at ``t_start``.

    For odd pulse counts a final probe flip is appended so the probe returns to
    its initial basis state (toggling frame).
    """
    n_states = 2 ** (n_spins + 1)
    total = n_states * dim
    if total > MAX_TOTAL_DIM:
        raise CapacityError(f"full space dimension {total} exceeds {MAX_TOTAL_DIM}")
    if steps_per_segment < 1:
        raise InvalidParameterError("steps_per_segment must be >= 1")
    spins = _spin_values(n_spins)
    c = stage.g0 * spins[:, 0] + spins[:, 1:] @ _couplings(stage, n_spins)
    a = fock.ladder_ops(dim).a
    ad = a.conj().T
    flip = np.arange(n_states) ^ (1 << n_spins)
    # u[s] holds the rows of the propagator that end in spin state s
    u = np.eye(total, dtype=complex).reshape(n_states, dim, total)
    h = stage.tau / steps_per_segment
    uniq, inv = np.unique(c, return_inverse=True)
    for seg in range(stage.n_segments):
        if seg > 0:
            u = u[flip]
        t_seg = t_start + seg * stage.tau
        for k in range(steps_per_segment):
            tm = t_seg + (k + 0.5) * h
            x = a * np.exp(-1j * stage.omega * tm) + ad * np.exp(1j * stage.omega * tm)
            steps = np.array([expm(-1j * cv * h * x) for cv in uniq])
            u = steps[inv] @ u
    if stage.n_pulses % 2 == 1:
        u = u[flip]
    return u.reshape(total, total)


def richardson_propagator(stage, n_spins, dim, steps_per_segment=100, t_start=0.0):
    """Second-order Richardson extrapolation of two midpoint-rule propagators."""
    coarse = trotter_propagator(stage, n_spins, dim, steps_per_segment, t_start)
    fine = trotter_propagator(stage, n_spins, dim, 2 * steps_per_segment, t_start)
    return (4 * fine - coarse) / 3


def sector_propagator(stage: PulseStage, n_spins: int, dim: int, phase_sign: float = 1.0,
                      t_start: float = 0.0) -> np.ndarray:
    """Block-diagonal propagator assembled from exact displacements and phases.

    ``phase_sign`` scales every second-order phase (``-1`` is the mutation used to
    show the comparison is sensitive to it).
    """
    spins = _spin_values(n_spins)
    g = _couplings(stage, n_spins)
    n_states = len(spins)
    out = np.zeros((n_states * dim, n_states * dim), dtype=complex)
    rot = np.exp(1j * stage.omega * t_start * np.arange(dim))
    for s in range(n_states):
        cs = float(spins[s, 1:] @ g)
        cp = stage.g0 * spins[s, 0]
        beta = segment_displacement(stage, cs, False) + segment_displacement(stage, cp, True)
        phi = magnus2_phase(stage, cs, cp)
        blk = np.exp(1j * phase_sign * phi) * fock.displacement(beta, dim)
        blk = rot[:, None] * blk * rot.conj()[None, :]
        out[s * dim:(s + 1) * dim, s * dim:(s + 1) * dim] = blk
    return out


@dataclass(frozen=True)
class Comparison:
    max_deviation: float
    block_deviations: np.ndarray
    off_block_leakage: float
    low_levels: int


def block_deviations(u_full, u_sector, n_spins, dim, low_levels=None):
    """Per spin block, the operator norm of the difference on inputs in the lowest
    ``low_levels`` Fock states (the truncation boundary is excluded)."""
    n_states = 2 ** (n_spins + 1)
    low = dim // 2 if low_levels is None else low_levels
    devs = np.empty(n_states)
    mask = np.ones((n_states * dim, n_states * dim), dtype=bool)
    for s in range(n_states):
        sl = slice(s * dim, (s + 1) * dim)
        devs[s] = np.linalg.norm(u_full[sl, sl][:, :low] - u_sector[sl, sl][:, :low], 2)
        mask[sl, sl] = False
    leak = float(np.max(np.abs(u_full[mask]))) if mask.any() else 0.0
    return devs, leak, low


def compare_sector_vs_full(stage: PulseStage, n_spins: int, dim: int, steps_per_segment: int = 100,
                           phase_sign: float = 1.0, richardson: bool = True, low_levels=None) -> Comparison:
    """Max block deviation between the brute-force and sector-analytic propagators."""
    if richardson:
        u_full = richardson_propagator(stage, n_spins, dim, steps_per_segment)
    else:
        u_full = trotter_propagator(stage, n_spins, dim, steps_per_segment)
    u_sec = sector_propagator(stage, n_spins, dim, phase_sign)
    devs, leak, low = block_deviations(u_full, u_sec, n_spins, dim, low_levels)
    return Comparison(float(devs.max()), devs, leak, low)
