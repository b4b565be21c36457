"""Readout error and coupling disorder at g/omega = 0.01, eps/g = 0.15, n = 100.

Run:
    python3 scripts/fig7_imperfections.py --projections 400
"""
import argparse
import warnings
from pathlib import Path

from spincool.cascade import ImperfectionConfig, simulate, t1_steady_polarization
from spincool.errors import RegimeWarning
from spincool.serialize import emit_trace

OMEGA, G, EPS, N_PULSES = 1000.0, 10.0, 1.5, 100


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--projections", type=int, default=400)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--std", type=float, default=G / 2, help="coupling standard deviation")
    parser.add_argument("--out", default="results/fig7")
    args = parser.parse_args()
    warnings.simplefilter("ignore", RegimeWarning)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    stages = [(EPS, N_PULSES, args.projections)]
    runs = {f"eta{eta:g}": ImperfectionConfig(eta=eta) for eta in (0.0, 0.1, 0.25, 0.5)}
    runs["disorder"] = ImperfectionConfig(coupling_mean=G, coupling_std=args.std, coupling_seed=args.seed)
    for name, imp in runs.items():
        trace = simulate(OMEGA, G, G, 4, stages, imperfections=imp)
        (out / f"trace_{name}.csv").write_bytes(emit_trace(trace))
        print(f"{name}: final P_(m=2) = {trace.p_polarized()[-1]:.4g}, max = {trace.p_polarized().max():.4g}")
    print(f"rate-equation limit for gamma_c/gamma_eq = 10: {t1_steady_polarization(10.0, 1.0):.4f}")


if __name__ == "__main__":
    main()
