"""Repeated post-selected probe projections.

Each projection applies, per sector, the unnormalized update
``rho -> (1 - eta) K+ rho K+^dag + eta K- rho K-^dag`` and multiplies the sector
weight by the trace of the result. ``K = R V`` where ``V`` is the window Kraus
pair and ``R = exp(-i w t a_dag a)`` carries the oscillator's free evolution
over the window: consecutive windows start at successively later absolute
times, and in the rotating frame that shift is exactly a number-phase rotation.
Passing ``free_evolution=False`` reuses the window-at-t=0 operators for every
projection instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import fock
from .errors import ExtinctionError, InvalidParameterError
from .pulsekernel import PulseStage
from .sectors import KrausPair, Sector, SectorState, initial_sectors, kraus_pair

EXTINCTION_THRESHOLD = 1e-15


@dataclass(frozen=True)
class ImperfectionConfig:
    """Readout error, coupling disorder and rate-equation inputs.

    ``eta`` is the probability that a '-' probe outcome is recorded as '+'.
    Couplings are taken from ``couplings`` when given, otherwise sampled from
    ``normal(coupling_mean, coupling_std)`` with ``coupling_seed``.
    """

    eta: float = 0.0
    couplings: Optional[tuple] = None
    coupling_mean: Optional[float] = None
    coupling_std: Optional[float] = None
    coupling_seed: Optional[int] = None
    t1_rates: Optional[tuple] = None

    def __post_init__(self):
        if not 0.0 <= self.eta <= 0.5:
            raise InvalidParameterError(f"readout error eta must lie in [0, 0.5], got {self.eta}")
        if self.couplings is not None:
            object.__setattr__(self, "couplings", tuple(float(x) for x in self.couplings))
        if self.coupling_std is not None and self.coupling_seed is None:
            raise InvalidParameterError("sampling couplings requires a seed")

    def resolve_couplings(self, n_spins: int, default_g: float):
        """Scalar ``default_g`` unless disorder is configured, else a per-spin tuple."""
        if self.couplings is not None:
            return self.couplings
        if self.coupling_std is not None:
            mean = default_g if self.coupling_mean is None else self.coupling_mean
            return sample_couplings(n_spins, mean, self.coupling_std, self.coupling_seed)
        return default_g


def sample_couplings(n_spins: int, mean: float, std: float, seed: int) -> tuple:
    rng = np.random.default_rng(seed)
    return tuple(float(x) for x in rng.normal(mean, std, size=n_spins))


@dataclass(frozen=True)
class TraceRecord:
    M: int
    probs: tuple
    occupancy_abs: float
    occupancy_rel: float
    step_success: float
    cum_success: float
    stage_index: int


@dataclass
class CoolingTrace:
    """Per-projection record of a cascade run.

    ``probs`` in each record are ``P_m`` for ``m = -N/2 ... N/2`` in that order.
    """

    n_spins: int
    records: list = field(default_factory=list)
    stage_boundaries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    log_cum_success: float = 0.0

    @property
    def magnetizations(self) -> np.ndarray:
        n = self.n_spins
        return (np.arange(n + 1) * 2 - n) / 2

    def probs(self) -> np.ndarray:
        return np.array([r.probs for r in self.records])

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def p(self, m: float) -> np.ndarray:
        """``P_m(M)`` over the whole trace."""
        i = int(round(m + self.n_spins / 2))
        return self.probs()[:, i]

    def p_polarized(self) -> np.ndarray:
        """Probability of the fully polarized sector ``m = +N/2``."""
        return self.probs()[:, -1]

    def p_extremal(self) -> np.ndarray:
        """Combined probability of both fully polarized sectors ``m = +-N/2``."""
        p = self.probs()
        return p[:, -1] + p[:, 0]

    def magnetization(self) -> np.ndarray:
        """Normalized magnetization ``<S^z> / (N/2)``."""
        return self.probs() @ self.magnetizations / (self.n_spins / 2)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def first_reaching(self, values, threshold) -> Optional[int]:
        """First projection index ``M`` at which ``values >= threshold``."""
        hits = np.nonzero(np.asarray(values) >= threshold)[0]
        return int(self.records[hits[0]].M) if len(hits) else None


@lru_cache(maxsize=512)
def _cached_pair(coeff, omega, g0, epsilon, n_pulses, dim):
    stage = PulseStage(omega=omega, g0=g0, epsilon=epsilon, n_pulses=n_pulses)
    pair = kraus_pair(Sector(m=0.0, coeff=coeff, prior=1.0, count=1), stage, dim)
    pair.v_plus.setflags(write=False)
    pair.v_minus.setflags(write=False)
    return pair


def stage_pairs(state: SectorState, stage: PulseStage) -> list:
    """Kraus pairs for every sector of ``state``; shared read-only across identical stages."""
    out = []
    for s in state.sectors:
        p = _cached_pair(float(s.coeff), float(stage.omega), float(stage.g0), float(stage.epsilon),
                         int(stage.n_pulses), state.dim)
        out.append(KrausPair(p.v_plus, p.v_minus, s))
    return out


def _stack(pairs, state, stage, free_evolution):
    if len(pairs) != len(state.sectors):
        raise InvalidParameterError("Kraus pairs do not cover every sector")
    kp = np.array([p.v_plus for p in pairs])
    km = np.array([p.v_minus for p in pairs])
    if free_evolution and stage is not None:
        r = fock.rotation(stage.omega * stage.duration, state.dim)
        kp = r[None, :, None] * kp
        km = r[None, :, None] * km
    return kp, km


def _apply(weights, rhos, kp, km, eta, threshold):
    upd = kp @ rhos @ np.conj(np.swapaxes(kp, -1, -2))
    if eta:
        upd = (1 - eta) * upd + eta * (km @ rhos @ np.conj(np.swapaxes(km, -1, -2)))
    tr = np.real(np.einsum("sii->s", upd))
    new_w = weights * tr
    total = float(new_w.sum())
    step = total / float(weights.sum())
    if not step >= threshold:
        raise ExtinctionError(f"post-selection success {step:.3g} below {threshold:g}")
    safe = np.where(tr > 0, tr, 1.0)
    rhos = upd / safe[:, None, None]
    rhos = 0.5 * (rhos + np.conj(np.swapaxes(rhos, -1, -2)))
    return new_w / total, rhos, step


def project_once(state: SectorState, pairs: Sequence[KrausPair], eta: float = 0.0,
                 stage: Optional[PulseStage] = None, free_evolution: bool = False,
                 threshold: float = EXTINCTION_THRESHOLD):
    """One post-selected projection; returns ``(new_state, step_success)``.

    With ``stage`` given and ``free_evolution`` set, the window's free rotation is
    applied after the Kraus operator.
    """
    kp, km = _stack(pairs, state, stage, free_evolution)
    w, rhos, step = _apply(state.weights, state.rhos, kp, km, eta, threshold)
    return SectorState(state.sectors, w, rhos, state.leakage), step


def _record(trace, state, m_index, step, cum, stage_index, occ0):
    occ = state.occupancy()
    trace.records.append(TraceRecord(
        M=m_index,
        probs=tuple(float(x) for x in state.probabilities()),
        occupancy_abs=occ,
        occupancy_rel=occ / occ0 if occ0 > 0 else float("nan"),
        step_success=float(step),
        cum_success=float(cum),
        stage_index=stage_index,
    ))


def run_cascade(stages: Sequence[PulseStage], initial: SectorState,
                imperfections: Optional[ImperfectionConfig] = None, *,
                free_evolution: bool = True, threshold: float = EXTINCTION_THRESHOLD,
                truncation_threshold: float = fock.TRUNCATION_THRESHOLD,
                return_state: bool = False):
    """Run every stage's ``m_projections`` projections and record a ``CoolingTrace``.

    The oscillator state carries over unchanged across stage boundaries; Kraus
    pairs are rebuilt per stage. Returns the trace, or ``(trace, final_state)``
    with ``return_state``.
    """
    if not stages:
        raise InvalidParameterError("at least one stage is required")
    imp = imperfections or ImperfectionConfig()
    state = initial.copy()
    trace = CoolingTrace(n_spins=state.n_spins)
    occ0 = state.occupancy()
    cum = 1.0
    _record(trace, state, 0, 1.0, cum, 0, occ0)
    pop = fock.top_population(state.rhos)
    if pop > truncation_threshold:
        trace.warnings.append(f"M=0: top-{fock.TRUNCATION_LEVELS}-level population {pop:.3g} "
                              f"(initial truncation leakage {state.leakage:.3g})")
    m_index = 0
    weights, rhos = state.weights, state.rhos
    for si, stage in enumerate(stages):
        trace.stage_boundaries.append(m_index)
        kp, km = _stack(stage_pairs(state, stage), state, stage, free_evolution)
        warned = False
        for _ in range(stage.m_projections):
            weights, rhos, step = _apply(weights, rhos, kp, km, imp.eta, threshold)
            m_index += 1
            cum *= step
            trace.log_cum_success += math.log(step)
            state = SectorState(state.sectors, weights, rhos, state.leakage)
            _record(trace, state, m_index, step, cum, si, occ0)
            if not warned:
                pop = fock.top_population(rhos)
                if pop > truncation_threshold:
                    trace.warnings.append(f"M={m_index}: top-{fock.TRUNCATION_LEVELS}-level population {pop:.3g}")
                    warned = True
    return (trace, state) if return_state else trace


def t1_steady_polarization(gamma_c: float, gamma_eq: float) -> float:
    """Rate-equation steady polarization ``gamma_c / (gamma_c + gamma_eq)``."""
    if not (gamma_c > 0 and gamma_eq > 0):
        raise InvalidParameterError("both rates must be positive")
    return gamma_c / (gamma_c + gamma_eq)


def simulate(omega, g0, g, n_spins, stages, n_occ=45.0, dim=fock.DEFAULT_DIM,
             imperfections=None, free_evolution=True, return_state=False):
    """Convenience wrapper: build the initial state from physical parameters and run.

    ``stages`` is a sequence of ``(epsilon, n_pulses, m_projections)`` tuples or
    ``PulseStage`` objects.
    """
    imp = imperfections or ImperfectionConfig()
    couplings = imp.resolve_couplings(n_spins, g)
    built = []
    for s in stages:
        if isinstance(s, PulseStage):
            built.append(s)
        else:
            eps, n, m = s
            built.append(PulseStage(omega=omega, g0=g0, g=couplings, epsilon=eps, n_pulses=n, m_projections=m))
    init = initial_sectors(n_spins, n_occ, dim, couplings)
    return run_cascade(built, init, imp, free_evolution=free_evolution, return_state=return_state)

