"""Pulse schedules and the exact conditional-displacement kernel.

Within one probe window the oscillator (rotating frame) sees the Hamiltonian
``c(t) (a e^{-i w t} + a_dag e^{i w t})`` with a piecewise-constant coefficient
``c(t) = c_static + c_modulated * f(t)`` and ``f`` the alternating sign set by
the inversion pulses. Because the commutator of the Hamiltonian at two times
is a c-number, the Magnus series stops at second order and the window
propagator is exactly ``exp(i phi) D(beta)``. ``beta`` and ``phi`` are
evaluated here segment by segment in closed form.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidParameterError, RegimeWarning

REGIME_RATIO = 0.1


@dataclass(frozen=True)
class PulseStage:
    """One cascade stage.

    All frequencies share one angular unit (kHz in the bundled configs); only
    ratios enter the dynamics. ``g`` is either a uniform ensemble coupling or a
    per-spin tuple.
    """

    omega: float
    g0: float
    g: Union[float, tuple] = 0.0
    epsilon: float = 0.0
    n_pulses: int = 0
    m_projections: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be positive, got {self.omega}")
        if self.n_pulses < 0 or int(self.n_pulses) != self.n_pulses:
            raise InvalidParameterError(f"n_pulses must be a nonnegative integer, got {self.n_pulses}")
        if self.m_projections < 0 or int(self.m_projections) != self.m_projections:
            raise InvalidParameterError(f"m_projections must be a nonnegative integer, got {self.m_projections}")
        if not isinstance(self.g, (int, float)):
            object.__setattr__(self, "g", tuple(float(x) for x in self.g))
        if self.epsilon >= self.omega:
            raise InvalidParameterError("epsilon must be smaller than omega (tau would be infinite or negative)")
        if not in_regime(self):
            warnings.warn(
                f"epsilon/omega = {self.epsilon / self.omega:.3g} violates the near-resonant "
                f"regime eps/omega << 1 (enforced as < {REGIME_RATIO})",
                RegimeWarning,
                stacklevel=3,
            )
        if self.g0 != 0 and self.n_pulses < round(self.omega / abs(self.g0)):
            warnings.warn(
                f"n_pulses={self.n_pulses} below the recommended omega/g0 = {round(self.omega / abs(self.g0))}",
                RegimeWarning,
                stacklevel=3,
            )

    @property
    def tau(self) -> float:
        return math.pi / (self.omega - self.epsilon)

    @property
    def n_segments(self) -> int:
        return self.n_pulses + 1

    @property
    def duration(self) -> float:
        return self.n_segments * self.tau

    @property
    def couplings(self) -> tuple:
        return self.g if isinstance(self.g, tuple) else ()


def in_regime(stage: PulseStage) -> bool:
    return abs(stage.epsilon) < REGIME_RATIO * stage.omega


@dataclass(frozen=True)
class ModulationProfile:
    boundaries: np.ndarray
    signs: np.ndarray


def modulation_profile(stage: PulseStage) -> ModulationProfile:
    """Segment boundaries ``0, tau, ..., (n+1) tau`` and signs ``(-1)^j``."""
    j = np.arange(stage.n_segments + 1)
    signs = np.where(np.arange(stage.n_segments) % 2 == 0, 1.0, -1.0)
    return ModulationProfile(j * stage.tau, signs)


def _segment_integrals(stage: PulseStage, t0: float = 0.0):
    # E_j = int_{seg j} e^{i w t} dt
    prof = modulation_profile(stage)
    e = np.exp(1j * stage.omega * (prof.boundaries + t0))
    return (e[1:] - e[:-1]) / (1j * stage.omega), prof.signs


def segment_displacement(stage: PulseStage, coeff: float, modulated: bool, t0: float = 0.0) -> complex:
    """Total displacement amplitude over one window.

    Returns ``beta = -i coeff sum_j s_j int_{seg j} e^{i w t} dt`` with
    ``s_j = (-1)^j`` when ``modulated`` and 1 otherwise. ``t0`` shifts the
    window start in absolute (rotating-frame) time.
    """
    if coeff == 0:
        return 0j
    e, s = _segment_integrals(stage, t0)
    if not modulated:
        s = np.ones_like(s)
    return complex(-1j * coeff * np.dot(s, e))


def magnus2_phase(stage: PulseStage, coeff_static: float, coeff_modulated: float) -> float:
    """Exact second-order phase ``phi`` of the window propagator ``exp(i phi) D(beta)``.

    ``phi = int_0^t dt' int_0^t' dt'' c(t') c(t'') sin(w (t' - t''))`` with
    ``c = coeff_static + coeff_modulated * f``. Shift-invariant in the window start.
    """
    w = stage.omega
    e, s = _segment_integrals(stage)
    c = coeff_static + coeff_modulated * s
    if not np.any(c):
        return 0.0
    length = stage.tau
    same = np.sum(c**2) * (w * length - math.sin(w * length)) / w**2
    ce = c * e
    prior = np.concatenate(([0.0], np.cumsum(np.conj(ce))[:-1]))
    cross = np.sum(np.imag(ce * prior))
    return float(same + cross)


def filter_function(stage: PulseStage, form: str = "discrete-sum") -> complex:
    """Diagnostic filter function of the pulse train.

    ``discrete-sum`` evaluates the finite alternating sum literally; ``closed-form``
    uses the geometric-series form in ``epsilon*tau`` and falls back to the sum
    when ``epsilon*tau`` is exactly zero. Compare ``|g0 F / (2 w)|`` against
    ``|segment_displacement(stage, g0/2, True)|``.
    """
    n = stage.n_pulses
    if not in_regime(stage):
        warnings.warn("filter function evaluated outside the near-resonant regime", RegimeWarning, stacklevel=2)
    if form == "closed-form":
        et = stage.epsilon * stage.tau
        if et == 0.0:
            form = "discrete-sum"
        else:
            t = stage.duration
            x = np.exp(1j * stage.epsilon * t)
            return complex(1 - x + 2 * (1 - x) / (np.exp(-1j * et) - 1))
    if form != "discrete-sum":
        raise InvalidParameterError(f"unknown filter form {form!r}")
    wt = stage.omega * stage.tau
    k = np.arange(1, n + 1)
    return complex(1 - (-1) ** (n + 1) * np.exp(-1j * (n + 1) * wt) + 2 * np.sum((-1.0) ** k * np.exp(-1j * k * wt)))


def fwhm(x: Sequence[float], y: Sequence[float]) -> float:
    """Full width at half maximum of the peak of ``y`` sampled on ``x`` (linear interpolation)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    half = y[i] / 2
    lo = i
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = i
    while hi < len(y) - 1 and y[hi] > half:
        hi += 1
    if y[lo] > half or y[hi] > half:
        raise InvalidParameterError("peak not bracketed by the sampled range")
    xl = np.interp(half, [y[lo], y[lo + 1]], [x[lo], x[lo + 1]])
    xr = np.interp(half, [y[hi], y[hi - 1]], [x[hi], x[hi - 1]])
    return float(xr - xl)


def window_rotation_angle(stage: PulseStage) -> float:
    """Free-evolution angle ``w * t`` accumulated by the oscillator over one window, mod 2 pi."""
    return float(math.fmod(stage.omega * stage.duration, 2 * math.pi))
