"""Command-line front end.

Subcommands ``cool``, ``sweep``, ``gkp`` and ``oracle-check`` each take a
configuration file (see ``spincool.config``) and write their outputs plus a
``manifest.json`` and the resolved configuration into ``--out``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .cascade import ImperfectionConfig, simulate, t1_steady_polarization
from .config import RunConfig, parse_config, render_config
from .errors import CapacityError, ConfigError, ExtinctionError, SpincoolError
from .pulsekernel import PulseStage
from .serialize import FORMATS, emit_table, emit_trace
from .sweep import THREADS_ENV, Axis, SweepGrid, default_threads, scan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EXTINCTION = 3
EXIT_CAPACITY = 4
EXIT_FAILURE = 5
EXIT_CHECK_FAILED = 6


def _scalar_g(cfg):
    return cfg.g if isinstance(cfg.g, float) else sum(cfg.g) / len(cfg.g)


def _imperfections(cfg: RunConfig) -> ImperfectionConfig:
    if cfg.coupling_std is not None:
        return ImperfectionConfig(eta=cfg.eta, coupling_mean=_scalar_g(cfg), coupling_std=cfg.coupling_std,
                                  coupling_seed=cfg.seed, t1_rates=cfg.t1_rates)
    couplings = cfg.g if isinstance(cfg.g, tuple) else None
    return ImperfectionConfig(eta=cfg.eta, couplings=couplings, t1_rates=cfg.t1_rates)


def run_cool(cfg: RunConfig, fmt: str):
    trace = simulate(cfg.omega, cfg.g0, _scalar_g(cfg), cfg.n_spins,
                     [(s.epsilon, s.n_pulses, s.m_projections) for s in cfg.stages],
                     n_occ=cfg.n_occ, dim=cfg.dim, imperfections=_imperfections(cfg),
                     free_evolution=cfg.free_evolution)
    outputs = {f"trace.{fmt}": emit_trace(trace, fmt)}
    summary = {"final_p_polarized": trace.p_polarized()[-1], "final_occupancy_rel": trace.final.occupancy_rel,
               "cum_success": trace.final.cum_success, "warnings": trace.warnings}
    if cfg.t1_rates is not None:
        summary["t1_steady_polarization"] = t1_steady_polarization(*cfg.t1_rates)
    return outputs, summary


def _axes(cfg):
    out = []
    for name, kind, *vals in cfg.sweep_axes:
        if kind == "range":
            out.append(Axis(name, vals[0], vals[1], vals[2]))
        else:
            out.append(Axis(name, values=tuple(vals)))
    return tuple(out)


def run_sweep(cfg: RunConfig, fmt: str, threads: int):
    st = cfg.stages[0]
    grid = SweepGrid(axes=_axes(cfg), omega=cfg.omega, g0=cfg.g0, g=_scalar_g(cfg), n_spins=cfg.n_spins,
                     epsilon=st.epsilon, n_pulses=st.n_pulses, m_projections=st.m_projections, eta=cfg.eta,
                     n_occ=cfg.n_occ, dim=cfg.dim, threads=threads, free_evolution=cfg.free_evolution)
    rows = scan(grid)
    names = [a.name for a in grid.axes]
    cols = names + ["p_polarized", "p_extremal", "occupancy_abs", "occupancy_rel", "cum_success", "error"]
    table = [[r.params[n] for n in names] + [r.p_polarized, r.p_extremal, r.occupancy_abs, r.occupancy_rel,
                                             r.cum_success, r.error] for r in rows]
    failed = sum(1 for r in rows if r.error)
    return {f"sweep.{fmt}": emit_table(cols, table, fmt)}, {"points": len(rows), "failed": failed}


def run_gkp(cfg: RunConfig, fmt: str):
    from .gkp import best_fit_fidelity, encode_gkp

    spec = cfg.gkp
    run = encode_gkp(spec.sq_rounds, spec.logical_rounds, spec.policy, cfg.seed, dim=cfg.dim, omega=cfg.omega,
                     n_pulses=spec.n_pulses, delta=spec.delta)
    cols = ["round", "stage", "phi", "outcome", "sq_re", "sq_im", "z_l_re", "z_l_im", "logical_re",
            "logical_im", "fidelity"]
    rows = []
    for i, (sq, zl, lg, fid) in enumerate(zip(run.sq, run.z_l, run.logical, run.fidelity)):
        label, outcome = run.outcomes[i - 1] if i else ("init", -1)
        phi = run.phis[i - 1] if i else 0.0
        rows.append([i, label, phi, outcome, sq.real, sq.imag, zl.real, zl.imag, lg.real, lg.imag, fid])
    delta, fid = best_fit_fidelity(run)
    return {f"gkp.{fmt}": emit_table(cols, rows, fmt)}, {"best_fit_delta": delta, "best_fit_fidelity": fid,
                                                         "final_abs_sq": abs(run.sq[-1])}


def run_oracle(cfg: RunConfig, fmt: str):
    from .oracle import compare_sector_vs_full

    st = cfg.stages[0]
    stage = PulseStage(omega=cfg.omega, g0=cfg.g0, g=cfg.g, epsilon=st.epsilon, n_pulses=st.n_pulses)
    steps = cfg.oracle.steps_per_segment
    good = compare_sector_vs_full(stage, cfg.n_spins, cfg.dim, steps)
    bad = compare_sector_vs_full(stage, cfg.n_spins, cfg.dim, steps, phase_sign=-1.0)
    passed = good.max_deviation <= cfg.oracle.tolerance and bad.max_deviation > 1e-3
    cols = ["check", "max_deviation", "off_block_leakage"]
    rows = [["sector", good.max_deviation, good.off_block_leakage],
            ["mutated_phase", bad.max_deviation, bad.off_block_leakage]]
    return {f"oracle.{fmt}": emit_table(cols, rows, fmt)}, {"passed": passed, "max_deviation": good.max_deviation,
                                                             "mutated_deviation": bad.max_deviation}


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def write_outputs(out_dir: Path, cfg: RunConfig, outputs: dict, fmt: str, summary: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in outputs.items():
        (out_dir / name).write_bytes(data)
    (out_dir / "config.resolved.cfg").write_bytes(render_config(cfg).encode("utf-8"))
    manifest = {
        "version": __version__,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "format": fmt,
        "config": _jsonable(cfg),
        "config_text": render_config(cfg),
        "outputs": sorted(outputs),
    }
    (out_dir / "manifest.json").write_bytes((json.dumps(manifest, indent=1, sort_keys=True) + "\n").encode("utf-8"))
    (out_dir / "summary.json").write_bytes(
        (json.dumps(_jsonable(summary), indent=1, sort_keys=True) + "\n").encode("utf-8"))


def load_config(path: str, seed=None) -> RunConfig:
    """Read a config file, or the configuration embedded in a run manifest."""
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        try:
            text = json.loads(text)["config_text"]
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{path} is not a run manifest: {exc}") from None
    return parse_config(text, seed=seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spincool", description="Measurement-based cooling simulations.")
    parser.add_argument("--version", action="version", version=f"spincool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("cool", "sweep", "gkp", "oracle-check"):
        p = sub.add_parser(name)
        p.add_argument("config", help="configuration file or manifest.json of an earlier run")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--seed", type=int, default=None, help="overrides the configured seed")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker processes for sweeps (default: ${THREADS_ENV} or 1)")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda *a: None) if args.quiet else (lambda *a: print(*a, file=sys.stderr))
    try:
        cfg = load_config(args.config, seed=args.seed)
        if cfg.mode != args.command:
            cfg = dataclasses.replace(cfg, mode=args.command)
        if args.command == "gkp" and cfg.seed is None:
            raise ConfigError("a seed is required for gkp runs", key="seed")
        if args.command == "sweep" and not cfg.sweep_axes:
            raise ConfigError("sweep needs a [sweep] block with at least one axis")
        threads = args.threads or cfg.threads or default_threads()
        if threads < 1:
            raise ConfigError("threads must be >= 1", key="threads")
        with warnings.catch_warnings():
            if args.quiet:
                warnings.simplefilter("ignore")
            if args.command == "cool":
                outputs, summary = run_cool(cfg, args.format)
            elif args.command == "sweep":
                outputs, summary = run_sweep(cfg, args.format, threads)
            elif args.command == "gkp":
                outputs, summary = run_gkp(cfg, args.format)
            else:
                outputs, summary = run_oracle(cfg, args.format)
        write_outputs(Path(args.out), cfg, outputs, args.format, summary)
        log(json.dumps(_jsonable(summary), sort_keys=True))
        if args.command == "oracle-check" and not summary["passed"]:
            return EXIT_CHECK_FAILED
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExtinctionError as exc:
        print(f"extinction: {exc}", file=sys.stderr)
        return EXIT_EXTINCTION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (SpincoolError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
