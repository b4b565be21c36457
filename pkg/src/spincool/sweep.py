"""Parameter scans and detuning optimization over cascade runs."""
from __future__ import annotations

import dataclasses
import itertools
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fock
from .cascade import ImperfectionConfig, simulate
from .errors import InvalidParameterError, RegimeWarning, SpincoolError
from .pulsekernel import REGIME_RATIO, PulseStage

AXIS_NAMES = ("epsilon", "n_spins", "m_projections", "n_pulses", "eta")
THREADS_ENV = "SPINCOOL_THREADS"
TIE_TOL = 1e-12


@dataclass(frozen=True)
class Axis:
    """Inclusive grid ``lo, lo + step, ..., <= hi``, or explicit ``values``."""

    name: str
    lo: float = 0.0
    hi: float = 0.0
    step: float = 1.0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise InvalidParameterError(f"unknown sweep axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.values is not None:
            if len(self.values) == 0:
                raise InvalidParameterError(f"axis {self.name!r} has no values")
            object.__setattr__(self, "values", tuple(self.values))
            return
        if not self.step > 0:
            raise InvalidParameterError(f"axis {self.name!r}: step must be positive")
        if self.hi < self.lo:
            raise InvalidParameterError(f"axis {self.name!r}: max {self.hi} < min {self.lo}")

    def points(self) -> tuple:
        if self.values is not None:
            return tuple(sorted(self.values))
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        # rounding keeps grid values free of accumulated float noise
        return tuple(round(self.lo + k * self.step, 12) for k in range(count))


@dataclass(frozen=True)
class SweepGrid:
    """Axes over ``epsilon``, ``n_spins``, ``m_projections``, ``n_pulses``, ``eta``
    on top of a base configuration; unset parameters come from the base."""

    axes: tuple
    omega: float = 1200.0
    g0: float = 10.0
    g: float = 10.0
    n_spins: int = 4
    epsilon: float = 0.0
    n_pulses: int = 120
    m_projections: int = 100
    eta: float = 0.0
    n_occ: float = 45.0
    dim: int = fock.DEFAULT_DIM
    threads: int = 1
    free_evolution: bool = True

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise InvalidParameterError("a sweep needs at least one axis")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise InvalidParameterError(f"duplicate sweep axes in {names}")
        if self.threads < 1:
            raise InvalidParameterError("threads must be >= 1")

    def points(self) -> list:
        """Parameter dicts in lexicographic order over the axes as listed."""
        names = [a.name for a in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(a.points() for a in self.axes))]


@dataclass(frozen=True)
class SweepRow:
    params: dict
    p_polarized: float = float("nan")
    p_extremal: float = float("nan")
    occupancy_abs: float = float("nan")
    occupancy_rel: float = float("nan")
    cum_success: float = float("nan")
    error: str = ""


def _run_point(grid: SweepGrid, params: dict) -> SweepRow:
    cfg = {k: getattr(grid, k) for k in AXIS_NAMES}
    cfg.update(params)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            trace = simulate(
                grid.omega, grid.g0, grid.g, int(cfg["n_spins"]),
                [(float(cfg["epsilon"]), int(cfg["n_pulses"]), int(cfg["m_projections"]))],
                n_occ=grid.n_occ, dim=grid.dim,
                imperfections=ImperfectionConfig(eta=float(cfg["eta"])),
                free_evolution=grid.free_evolution,
            )
    except SpincoolError as exc:
        return SweepRow(params, error=f"{type(exc).__name__}: {exc}")
    fin = trace.final
    return SweepRow(params, float(trace.p_polarized()[-1]), float(trace.p_extremal()[-1]),
                    fin.occupancy_abs, fin.occupancy_rel, fin.cum_success)


def _run_star(args):
    return _run_point(*args)


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise InvalidParameterError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    if n < 1:
        raise InvalidParameterError(f"{THREADS_ENV} must be >= 1")
    return n


def scan(grid: SweepGrid) -> list:
    """Run one cascade per grid point; rows come back in grid order whatever the
    worker count. Failing points are recorded with their error message."""
    pts = grid.points()
    if grid.threads == 1 or len(pts) == 1:
        return [_run_point(grid, p) for p in pts]
    with ProcessPoolExecutor(max_workers=min(grid.threads, len(pts))) as pool:
        # map preserves submission order
        return list(pool.map(_run_star, [(grid, p) for p in pts]))


def _window_points(lo, hi, step):
    return Axis("epsilon", lo, hi, step).points() if hi > lo else (lo,)


def optimize_detuning(base: PulseStage, n_spins: int, m_projections: int, window, coarse_step: float = 0.05,
                      refine_levels: int = 2, n_occ: float = 45.0, dim: int = fock.DEFAULT_DIM,
                      threads: int = 1, free_evolution: bool = True):
    """Grid search for the detuning maximizing ``P_{m=N/2}(M)``.

    A coarse scan of ``window`` is followed by ``refine_levels`` scans with a ten
    times finer step around the incumbent. Ties go to the smaller detuning.
    Returns ``(eps_star, p_star)``.
    """
    lo, hi = map(float, window)
    if hi < lo:
        raise InvalidParameterError(f"window upper bound {hi} below lower bound {lo}")
    if max(abs(lo), abs(hi)) >= REGIME_RATIO * base.omega:
        raise InvalidParameterError("detuning window leaves the near-resonant regime eps/omega << 1")
    g = base.g if not base.couplings else float(np.mean(base.couplings))
    seen = {}
    step = coarse_step
    centre_lo, centre_hi = lo, hi
    for _ in range(refine_levels + 1):
        grid = SweepGrid(
            axes=(Axis("epsilon", values=_window_points(centre_lo, centre_hi, step)),),
            omega=base.omega, g0=base.g0, g=g, n_spins=n_spins, n_pulses=base.n_pulses,
            m_projections=m_projections, n_occ=n_occ, dim=dim, threads=threads,
            free_evolution=free_evolution,
        )
        todo = [p for p in grid.points() if p["epsilon"] not in seen]
        if todo:
            rows = scan(dataclasses.replace(grid, axes=(Axis("epsilon", values=tuple(p["epsilon"] for p in todo)),)))
            for row in rows:
                seen[row.params["epsilon"]] = row.p_polarized
        # ascending order with a strict margin breaks ties (to rounding) toward smaller eps
        best_eps, best_p = None, -math.inf
        for eps in sorted(seen):
            if seen[eps] > best_p + TIE_TOL:
                best_eps, best_p = eps, seen[eps]
        if hi == lo:
            break
        centre_lo = max(lo, best_eps - step)
        centre_hi = min(hi, best_eps + step)
        step /= 10
    return best_eps, best_p

