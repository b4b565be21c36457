"""Approximate GKP codewords and phase-estimation state preparation.

Quadrature conventions: ``q = (a + a_dag)/sqrt(2)``, ``p = i(a_dag - a)/sqrt(2)``, so
``D(x)`` with real ``x`` shifts position by ``sqrt(2) x`` and ``D(i y)`` shifts
momentum by ``sqrt(2) y``. Stabilizers ``S_q = exp(-2i sqrt(pi) p) = D(sqrt(2 pi))``
and ``S_p = exp(2i sqrt(pi) q) = D(i sqrt(2 pi))``; the logical operators are the
half displacements ``Z_L = D(sqrt(pi/2))`` and ``X_L = D(i sqrt(pi/2))``.

One phase-estimation round with ancilla angle ``phi`` and outcome ``b`` applies
``K_b = (D(theta) + (-1)^b e^{i phi} D(-theta)) / 2``. On an eigenstate of ``D(2 theta)``
with eigenvalue ``e^{i chi}`` the outcome-0 probability is ``cos^2((chi - phi)/2)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import fock
from .errors import CapacityError, ImpossibleOutcomeError, InvalidParameterError, RegimeWarning
from .pulsekernel import PulseStage, segment_displacement

SQRT_PI = math.sqrt(math.pi)
GRID_POINTS = 64
CODEWORD_TAIL_TOL = 1e-6


class StabilizerOps(NamedTuple):
    s_q: np.ndarray
    s_p: np.ndarray
    x_l: np.ndarray
    z_l: np.ndarray


def stabilizer_ops(dim: int) -> StabilizerOps:
    if dim < 50:
        raise InvalidParameterError(f"stabilizer operators need dim >= 50, got {dim}")
    half = math.sqrt(math.pi / 2)
    z_l = fock.displacement(half, dim)
    x_l = fock.displacement(1j * half, dim)
    return StabilizerOps(
        s_q=fock.displacement(2 * half, dim),
        s_p=fock.displacement(2j * half, dim),
        x_l=x_l,
        z_l=z_l,
    )


def hermite_functions(n_max: int, q: np.ndarray) -> np.ndarray:
    """Normalized oscillator eigenfunctions ``psi_0 .. psi_{n_max-1}`` on the grid ``q``."""
    out = np.empty((n_max, len(q)))
    out[0] = math.pi ** -0.25 * np.exp(-q**2 / 2)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * q * out[0]
    for n in range(2, n_max):
        out[n] = math.sqrt(2.0 / n) * q * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def codeword_wavefunction(q: np.ndarray, delta: float, logical: int) -> np.ndarray:
    """Unnormalized position wavefunction of the approximate codeword (Gaussian peaks
    of width ``delta`` at ``(2s + logical) sqrt(pi)`` under a Gaussian envelope)."""
    smax = int(math.ceil((np.max(np.abs(q)) / SQRT_PI + 2) / 2)) + 1
    psi = np.zeros_like(q)
    for s in range(-smax, smax + 1):
        c = 2 * s + logical
        psi += np.exp(-0.5 * delta**2 * c**2 * math.pi) * np.exp(-((q - c * SQRT_PI) ** 2) / (2 * delta**2))
    return psi


@dataclass(frozen=True)
class GkpCodeword:
    delta: float
    logical: int
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def state(self) -> fock.OscillatorState:
        return fock.pure_state(self.amplitudes)


def _grid(delta, dim):
    extent = max(math.sqrt(2 * dim + 1) + 8.0, 6.0 / delta + 4.0)
    step = min(delta / 12, 0.02)
    return np.arange(-extent, extent + step, step), step


def approx_codeword(delta: float, logical: int, dim: int = 200) -> GkpCodeword:
    """Fock amplitudes of the approximate codeword by quadrature-grid projection."""
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta must lie in (0, 1], got {delta}")
    if logical not in (0, 1):
        raise InvalidParameterError("logical must be 0 or 1")
    q, step = _grid(delta, dim)
    psi = codeword_wavefunction(q, delta, logical)
    basis = hermite_functions(dim, q)
    amps = basis @ psi * step
    norm_grid = math.sqrt(np.sum(psi**2) * step)
    amps = amps / norm_grid
    tail = float(np.sum(amps[-5:] ** 2))
    captured = float(np.sum(amps**2))
    if tail > CODEWORD_TAIL_TOL or captured < 1 - 1e-4:
        raise CapacityError(f"dim={dim} truncates the codeword (top-5 population {tail:.2g}, "
                            f"captured {captured:.6f}); use a larger dim")
    amps = amps / np.linalg.norm(amps)
    return GkpCodeword(delta, logical, amps.astype(complex))


def grid_expectation_sq(delta: float, logical: int) -> float:
    """``<S_q>`` on the codeword evaluated directly on the position grid:
    ``int psi(q) psi(q - 2 sqrt(pi)) dq / int psi^2``."""
    q, step = _grid(delta, 200)
    psi = codeword_wavefunction(q, delta, logical)
    shifted = codeword_wavefunction(q - 2 * SQRT_PI, delta, logical)
    return float(np.sum(psi * shifted) / np.sum(psi**2))


def grid_overlap(delta: float) -> float:
    """``<0~|1~>`` for normalized codewords, evaluated on the position grid."""
    q, _ = _grid(delta, 200)
    p0 = codeword_wavefunction(q, delta, 0)
    p1 = codeword_wavefunction(q, delta, 1)
    return float(np.sum(p0 * p1) / math.sqrt(np.sum(p0**2) * np.sum(p1**2)))


def round_kraus(theta: complex, phi: float, outcome: int, dim: int) -> np.ndarray:
    sign = 1.0 if outcome == 0 else -1.0
    return 0.5 * (fock.displacement(theta, dim) + sign * np.exp(1j * phi) * fock.displacement(-theta, dim))


def outcome_probability(rho, theta, phi, outcome) -> float:
    k = round_kraus(theta, phi, outcome, rho.shape[0])
    return float(np.real(np.trace(k @ rho @ k.conj().T)))


def pe_round(state: fock.OscillatorState, theta: complex, phi: float, outcome: int,
             threshold: float = 1e-15):
    """Apply one phase-estimation round for a recorded outcome; returns ``(state, prob)``."""
    if outcome not in (0, 1):
        raise InvalidParameterError("outcome must be 0 or 1")
    k = round_kraus(theta, phi, outcome, state.dim)
    new = k @ state.rho @ k.conj().T
    prob = float(np.real(np.trace(new)))
    if prob < threshold:
        raise ImpossibleOutcomeError(f"outcome {outcome} has probability {prob:.3g}")
    new = new / prob
    return fock.OscillatorState(0.5 * (new + new.conj().T), state.leakage), prob


def stage_for_displacement(theta: float, quadrature: str, omega: float = 1200.0, n_pulses: int = 120) -> PulseStage:
    """Pulse stage whose probe-branch displacement has magnitude ``theta``.

    ``quadrature='position'`` uses ``epsilon = 0`` (real displacement);
    ``'momentum'`` uses ``epsilon = omega/(n+1)`` (predominantly imaginary). The
    probe coupling is scaled so that ``|beta_probe| = theta``.
    """
    if quadrature == "position":
        eps = 0.0
    elif quadrature == "momentum":
        eps = omega / (n_pulses + 1)
    else:
        raise InvalidParameterError(f"unknown quadrature {quadrature!r}")
    unit = PulseStage(omega=omega, g0=0.0, epsilon=eps, n_pulses=n_pulses)
    b = abs(segment_displacement(unit, 0.5, modulated=True))
    with warnings.catch_warnings():
        # the pulse-count recommendation concerns cooling, not encoding
        warnings.simplefilter("ignore", RegimeWarning)
        return PulseStage(omega=omega, g0=theta / b, epsilon=eps, n_pulses=n_pulses)


def probe_theta(stage: PulseStage) -> complex:
    return segment_displacement(stage, stage.g0 / 2, modulated=True)


class Posterior:
    """Bayesian eigenphase posterior on a uniform grid."""

    def __init__(self, points: int = GRID_POINTS):
        self.chi = 2 * np.pi * np.arange(points) / points
        self.w = np.full(points, 1.0 / points)

    @staticmethod
    def likelihood(chi, phi, outcome):
        c = np.cos((chi - phi) / 2) ** 2
        return c if outcome == 0 else 1 - c

    def update(self, phi, outcome):
        w = self.w * self.likelihood(self.chi, phi, outcome)
        s = w.sum()
        # a flat update keeps the prior when the grid cannot explain the outcome
        self.w = w / s if s > 0 else self.w

    def circular_variance(self, w=None):
        w = self.w if w is None else w
        return float(1 - abs(np.dot(w, np.exp(1j * self.chi))))

    def mean(self) -> float:
        return float(np.angle(np.dot(self.w, np.exp(1j * self.chi))))

    def best_phi(self, candidates):
        best, best_val = None, np.inf
        for phi in candidates:
            val = 0.0
            for b in (0, 1):
                lw = self.w * self.likelihood(self.chi, phi, b)
                pb = lw.sum()
                if pb > 0:
                    val += pb * self.circular_variance(lw / pb)
            if val < best_val - 1e-12:
                best, best_val = phi, val
        return best


@dataclass
class GkpRun:
    state: fock.OscillatorState
    sq: list = field(default_factory=list)
    z_l: list = field(default_factory=list)
    logical: list = field(default_factory=list)
    fidelity: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    phis: list = field(default_factory=list)
    estimates: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)


POLICIES = ("adaptive-bayes", "nonadaptive", "zero")


def _choose_phi(policy, posterior, r, candidates):
    if policy == "adaptive-bayes":
        return posterior.best_phi(candidates)
    if policy == "nonadaptive":
        return 0.0 if r % 2 == 0 else math.pi / 2
    if policy == "zero":
        return 0.0
    raise InvalidParameterError(f"unknown policy {policy!r}")


def corrected_fidelity(state: fock.OscillatorState, target: np.ndarray, chi_q: float, chi_l: float = 0.0) -> float:
    """Fidelity with ``target`` after the feed-forward displacement that moves the
    estimated eigenphases of ``S_q`` and the momentum logical back to zero."""
    # S_q eigenphase chi <-> momentum offset -chi/(2 sqrt(pi)); the momentum logical
    # e^{i sqrt(pi) q} eigenphase chi <-> position offset chi/sqrt(pi)
    chi_q = math.remainder(chi_q, 2 * math.pi)
    chi_l = math.remainder(chi_l, 2 * math.pi)
    dp = chi_q / (2 * SQRT_PI)
    dq = -chi_l / SQRT_PI
    corr = fock.displacement((dq + 1j * dp) / math.sqrt(2), state.dim)
    psi = corr.conj().T @ target
    return float(np.real(psi.conj() @ state.rho @ psi))


def encode_gkp(sq_rounds: int = 10, logical_rounds: int = 0, policy: str = "adaptive-bayes",
               seed: int = 0, dim: int = 200, omega: float = 1200.0, n_pulses: int = 120,
               delta: float = 0.3, phi_candidates: int = GRID_POINTS, track_fidelity: bool = True) -> GkpRun:
    """Prepare an approximate GKP state from vacuum by repeated phase estimation.

    ``sq_rounds`` estimate ``S_q`` with position-quadrature displacements
    (``epsilon = 0``); ``logical_rounds`` then estimate the momentum-quadrature
    logical ``e^{i sqrt(pi) q}`` (``epsilon = omega/(n+1)``). Outcomes are sampled
    from the exact round probabilities with ``numpy.random.default_rng(seed)``.
    """
    if policy not in POLICIES:
        raise InvalidParameterError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    rng = np.random.default_rng(seed)
    ops = stabilizer_ops(dim)
    state = fock.vacuum(dim)
    candidates = 2 * np.pi * np.arange(phi_candidates) / phi_candidates
    # each S_q round moves the comb by one half-cell, so its parity follows the round count
    targets = [approx_codeword(delta, b, dim).amplitudes for b in (0, 1)] if track_fidelity else None
    run = GkpRun(state)

    half = math.sqrt(math.pi / 2)
    theta_q = probe_theta(stage_for_displacement(half, "position", omega, n_pulses))
    # momentum logical: D(2 theta) = e^{i sqrt(pi) q}, |2 theta| = sqrt(pi/2)
    theta_l = probe_theta(stage_for_displacement(half / 2, "momentum", omega, n_pulses))
    logical_op = fock.displacement(2 * theta_l, dim)

    def snapshot(chi_q, chi_l, n_sq, n_l):
        run.sq.append(fock.expectation(state, ops.s_q))
        run.z_l.append(fock.expectation(state, ops.z_l))
        run.logical.append(fock.expectation(state, logical_op))
        # momentum rounds shift p by sqrt(pi)/2, which flips the S_q eigenphase by pi
        frame = (state.rho, chi_q + math.pi * n_l, chi_l, n_sq % 2)
        run.frames.append(frame)
        if track_fidelity:
            run.fidelity.append(corrected_fidelity(state, targets[frame[3]], frame[1], frame[2]))

    n_sq = n_l = 0
    chi_q = chi_l = 0.0
    snapshot(chi_q, chi_l, n_sq, n_l)
    for label, theta, rounds in (("sq", theta_q, sq_rounds), ("logical", theta_l, logical_rounds)):
        post = Posterior()
        for r in range(rounds):
            phi = _choose_phi(policy, post, r, candidates)
            p0 = outcome_probability(state.rho, theta, phi, 0)
            outcome = 0 if rng.random() < p0 else 1
            state, _ = pe_round(state, theta, phi, outcome)
            post.update(phi, outcome)
            run.outcomes.append((label, outcome))
            run.phis.append(float(phi))
            if label == "sq":
                chi_q = post.mean()
                n_sq += 1
            else:
                chi_l = post.mean()
                n_l += 1
            snapshot(chi_q, chi_l, n_sq, n_l)
        run.estimates[label] = post.mean() if rounds else None
    run.state = state
    return run


def best_fit_fidelity(run: GkpRun, index: int = -1, deltas=np.linspace(0.15, 0.8, 14)):
    """``(delta, fidelity)`` maximizing the corrected fidelity of snapshot ``index``."""
    rho, chi_q, chi_l, parity = run.frames[index]
    state = fock.OscillatorState(rho)
    best = (None, -1.0)
    for d in deltas:
        try:
            target = approx_codeword(float(d), parity, state.dim).amplitudes
        except CapacityError:
            continue
        f = corrected_fidelity(state, target, chi_q, chi_l)
        if f > best[1]:
            best = (float(d), f)
    return best
