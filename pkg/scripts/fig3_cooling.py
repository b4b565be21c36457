"""Cascade traces for N = 4 at several detunings (fig. 3b style curves).

Run:
    python3 scripts/fig3_cooling.py --eps 1.1 2.5 3.0 --out results/fig3
"""
import argparse
import warnings
from pathlib import Path

from spincool.cascade import simulate
from spincool.errors import RegimeWarning
from spincool.serialize import emit_trace


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--eps", type=float, nargs="+", default=[2.5])
    parser.add_argument("--n-spins", type=int, default=4)
    parser.add_argument("--projections", type=int, default=100)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--out", default="results/fig3")
    args = parser.parse_args()
    warnings.simplefilter("ignore", RegimeWarning)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for eps in args.eps:
        trace = simulate(1200.0, 10.0, 10.0, args.n_spins, [(eps, 120, args.projections)], dim=args.dim)
        (out / f"trace_eps{eps:g}.csv").write_bytes(emit_trace(trace))
        fin = trace.final
        print(f"eps = {eps:g}: P_(m=N/2) = {trace.p_polarized()[-1]:.4g}, "
              f"P_(+-N/2) = {trace.p_extremal()[-1]:.4g}, occupancy_rel = {fin.occupancy_rel:.4g}")


if __name__ == "__main__":
    main()
