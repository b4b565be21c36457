"""Run configuration: a flat ``key = value`` format with section blocks.

Top-level keys come first. ``[stage]`` blocks may repeat and each describes one
cascade stage; ``[sweep]``, ``[gkp]`` and ``[oracle]`` may appear once. Lines
starting with ``#`` and trailing ``# ...`` comments are ignored. Frequencies are
in kHz by convention; only their ratios enter the dynamics.

Example::

    mode = cool
    omega = 1200
    g0 = 10
    g = 10
    N = 4

    [stage]
    epsilon = 1.1
    n_pulses = 120
    m_projections = 200
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from . import fock
from .errors import ConfigError
from .pulsekernel import REGIME_RATIO

MODES = ("cool", "sweep", "gkp", "oracle-check")
SECTIONS = ("stage", "sweep", "gkp", "oracle")


@dataclass(frozen=True)
class StageSpec:
    epsilon: float
    n_pulses: int
    m_projections: int


@dataclass(frozen=True)
class GkpSpec:
    sq_rounds: int = 10
    logical_rounds: int = 0
    policy: str = "adaptive-bayes"
    delta: float = 0.3
    n_pulses: int = 120


@dataclass(frozen=True)
class OracleSpec:
    steps_per_segment: int = 100
    tolerance: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    mode: str = "cool"
    omega: float = 1200.0
    g0: float = 10.0
    g: object = 10.0
    n_spins: int = 4
    n_occ: float = 45.0
    dim: int = fock.DEFAULT_DIM
    stages: tuple = ()
    eta: float = 0.0
    coupling_std: Optional[float] = None
    t1_rates: Optional[tuple] = None
    seed: Optional[int] = None
    free_evolution: bool = True
    sweep_axes: tuple = ()
    threads: Optional[int] = None
    gkp: GkpSpec = field(default_factory=GkpSpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _parse_floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_axis(text):
    # "lo:hi:step" or "v1, v2, ..."
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3:
            raise ValueError("range axes take the form min:max:step")
        return ("range",) + tuple(parts)
    return ("values",) + _parse_floats(text)


TOP_KEYS = {
    "mode": str, "omega": float, "g0": float, "g": _parse_floats, "N": _parse_int,
    "n_occ": float, "dim": _parse_int, "eta": float, "coupling_std": float,
    "t1_rates": _parse_floats, "seed": _parse_int, "free_evolution": _parse_bool,
    "threads": _parse_int,
}
SECTION_KEYS = {
    "stage": {"epsilon": float, "n_pulses": _parse_int, "m_projections": _parse_int},
    "sweep": {name: _parse_axis for name in ("epsilon", "n_spins", "m_projections", "n_pulses", "eta")},
    "gkp": {"sq_rounds": _parse_int, "logical_rounds": _parse_int, "policy": str, "delta": float,
            "n_pulses": _parse_int},
    "oracle": {"steps_per_segment": _parse_int, "tolerance": float},
}


def _tokenize(text):
    """Yield ``(section_index, section, key, value, line_no)``; sections are numbered."""
    section, index = None, -1
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line=no)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=no)
            index += 1
            yield index, section, None, None, no
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=no)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=no)
        yield index, section, key, value, no


def parse_config(text: str, seed: Optional[int] = None) -> RunConfig:
    """Parse and validate a configuration document.

    Unknown keys, malformed values and constraint violations raise
    ``ConfigError`` naming the key and line. A ``seed`` argument overrides the
    document's seed before validation.
    """
    top, top_lines = {}, {}
    blocks = []
    seen_sections = set()
    for index, section, key, value, no in _tokenize(text):
        if key is None:
            if section != "stage" and section in seen_sections:
                raise ConfigError(f"section [{section}] may appear only once", line=no)
            seen_sections.add(section)
            blocks.append((section, {}, {}, no))
            continue
        table = TOP_KEYS if section is None else SECTION_KEYS[section]
        if key not in table:
            where = "top level" if section is None else f"[{section}]"
            raise ConfigError(f"unknown key at {where}", key=key, line=no)
        target, lines = (top, top_lines) if section is None else blocks[index][1:3]
        if key in target:
            raise ConfigError("duplicate key", key=key, line=no)
        try:
            target[key] = table[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", key=key, line=no) from None
        lines[key] = no
    if seed is not None:
        top["seed"] = seed
    return _build(top, top_lines, blocks)


def _require(values, lines, key, section_line=None):
    if key not in values:
        raise ConfigError("missing required key", key=key, line=section_line)
    return values[key]


def _build(top, lines, blocks):
    def line(key):
        return lines.get(key)

    mode = top.get("mode", "cool")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}", key="mode", line=line("mode"))
    omega = _require(top, lines, "omega")
    g0 = _require(top, lines, "g0")
    g = _require(top, lines, "g")
    n_spins = _require(top, lines, "N")
    for key, value in (("omega", omega), ("g0", g0)):
        if not value > 0:
            raise ConfigError("frequencies must be positive", key=key, line=line(key))
    if any(x <= 0 for x in g):
        raise ConfigError("frequencies must be positive", key="g", line=line("g"))
    if n_spins < 1:
        raise ConfigError("N must be >= 1", key="N", line=line("N"))
    if len(g) == 1:
        g = g[0]
    elif len(g) != n_spins:
        raise ConfigError(f"expected 1 or N={n_spins} couplings, got {len(g)}", key="g", line=line("g"))
    dim = top.get("dim", fock.DEFAULT_DIM)
    if dim < 2:
        raise ConfigError("dim must be >= 2", key="dim", line=line("dim"))
    n_occ = top.get("n_occ", 45.0)
    if n_occ < 0:
        raise ConfigError("n_occ must be >= 0", key="n_occ", line=line("n_occ"))
    eta = top.get("eta", 0.0)
    if not 0 <= eta <= 0.5:
        raise ConfigError("eta must lie in [0, 0.5]", key="eta", line=line("eta"))
    std = top.get("coupling_std")
    if std is not None and std < 0:
        raise ConfigError("coupling_std must be >= 0", key="coupling_std", line=line("coupling_std"))
    t1 = top.get("t1_rates")
    if t1 is not None and (len(t1) != 2 or min(t1) <= 0):
        raise ConfigError("t1_rates takes two positive rates", key="t1_rates", line=line("t1_rates"))
    threads = top.get("threads")
    if threads is not None and threads < 1:
        raise ConfigError("threads must be >= 1", key="threads", line=line("threads"))

    stages, axes = [], []
    gkp_spec, oracle_spec = GkpSpec(), OracleSpec()
    for section, values, vlines, head in blocks:
        if section == "stage":
            eps = values.get("epsilon", 0.0)
            n = _require(values, vlines, "n_pulses", head)
            m = values.get("m_projections", 1)
            _check_regime(eps, omega, vlines.get("epsilon", head))
            if n < 0 or m < 0:
                bad = "n_pulses" if n < 0 else "m_projections"
                raise ConfigError("must be >= 0", key=bad, line=vlines[bad])
            stages.append(StageSpec(float(eps), n, m))
        elif section == "sweep":
            for name, spec in values.items():
                if spec[0] == "range":
                    lo, hi, step = spec[1:]
                    if not step > 0 or hi < lo:
                        raise ConfigError("range needs step > 0 and max >= min", key=name, line=vlines[name])
                elif not spec[1:]:
                    raise ConfigError("empty value list", key=name, line=vlines[name])
                if name == "epsilon":
                    edge = spec[2] if spec[0] == "range" else max(spec[1:], key=abs)
                    _check_regime(edge, omega, vlines[name])
                axes.append((name,) + spec)
        elif section == "gkp":
            gkp_spec = dataclasses.replace(gkp_spec, **values)
            if gkp_spec.policy not in ("adaptive-bayes", "nonadaptive", "zero"):
                raise ConfigError("unknown policy", key="policy", line=vlines.get("policy"))
            if not 0 < gkp_spec.delta <= 1:
                raise ConfigError("delta must lie in (0, 1]", key="delta", line=vlines.get("delta"))
        elif section == "oracle":
            oracle_spec = dataclasses.replace(oracle_spec, **values)

    if mode in ("cool", "oracle-check", "sweep") and not stages:
        raise ConfigError(f"mode {mode} needs at least one [stage] block")
    if mode == "sweep" and not axes:
        raise ConfigError("mode sweep needs a [sweep] block with at least one axis")
    stochastic = std is not None or mode == "gkp"
    seed = top.get("seed")
    if stochastic and seed is None:
        raise ConfigError("a seed is required when couplings are sampled or outcomes drawn", key="seed")
    return RunConfig(
        mode=mode, omega=float(omega), g0=float(g0), g=g, n_spins=n_spins, n_occ=float(n_occ), dim=dim,
        stages=tuple(stages), eta=float(eta), coupling_std=std, t1_rates=t1, seed=seed,
        free_evolution=top.get("free_evolution", True), sweep_axes=tuple(axes), threads=threads,
        gkp=gkp_spec, oracle=oracle_spec,
    )


def _check_regime(eps, omega, line):
    if abs(eps) >= REGIME_RATIO * omega:
        raise ConfigError(
            f"epsilon/omega = {eps / omega:.3g} violates the near-resonant condition eps/omega << 1 "
            f"(enforced as |eps|/omega < {REGIME_RATIO})",
            key="epsilon", line=line,
        )


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(render_config(cfg)) == cfg``."""
    out = [f"mode = {cfg.mode}", f"omega = {_fmt(cfg.omega)}", f"g0 = {_fmt(cfg.g0)}",
           f"g = {_fmt(cfg.g)}", f"N = {cfg.n_spins}", f"n_occ = {_fmt(cfg.n_occ)}", f"dim = {cfg.dim}",
           f"eta = {_fmt(cfg.eta)}", f"free_evolution = {_fmt(cfg.free_evolution)}"]
    for key in ("coupling_std", "t1_rates", "seed", "threads"):
        value = getattr(cfg, key)
        if value is not None:
            out.append(f"{key} = {_fmt(value)}")
    for st in cfg.stages:
        out += ["", "[stage]", f"epsilon = {_fmt(st.epsilon)}", f"n_pulses = {st.n_pulses}",
                f"m_projections = {st.m_projections}"]
    if cfg.sweep_axes:
        out += ["", "[sweep]"]
        for name, kind, *vals in cfg.sweep_axes:
            sep = ":" if kind == "range" else ", "
            out.append(f"{name} = {sep.join(repr(float(v)) for v in vals)}")
    if cfg.mode == "gkp" or cfg.gkp != GkpSpec():
        out += ["", "[gkp]"] + [f"{f.name} = {_fmt(getattr(cfg.gkp, f.name))}" for f in dataclasses.fields(GkpSpec)]
    if cfg.mode == "oracle-check" or cfg.oracle != OracleSpec():
        out += ["", "[oracle]"] + [f"{f.name} = {_fmt(getattr(cfg.oracle, f.name))}"
                                   for f in dataclasses.fields(OracleSpec)]
    return "\n".join(out) + "\n"
