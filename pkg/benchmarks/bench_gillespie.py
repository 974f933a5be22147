"""Throughput comparison of the compiled and pure-Python jump kernels.

Runs the same ensembles on each available backend, checks the event
arrays agree bit for bit (both consume one Philox stream in the same
order), and reports events per second and the speedup.

Usage: python benchmarks/bench_gillespie.py [--repeat N]
"""

import argparse
import time

import numpy as np

from qndsim._kernels import available_backends
from qndsim.system import SystemParams
from qndsim.trajectories import ensemble

WORKLOADS = {
    # heavily populated bottom rows, two-phonon sideband geometry
    "sideband": dict(
        params=dict(
            omega_m_hz=800.0, kappa_hz=400.0, delta_hz=1600.0,
            g1_hz=280.0, g2_hz=150.0, gamma_m_hz=200.0,
            nbar_th=0.005, nbar_photon=1.0,
        ),
        n0=0, t_final=57.5, count=20,
    ),
    # resonant drive, thermal mixing across a handful of states
    "resonant": dict(
        params=dict(
            omega_m_hz=2e9, kappa_hz=500e6, delta_hz=0.0,
            g1_hz=50e3, g2_hz=100e3, gamma_m_hz=1e3,
            nbar_th=0.25, nbar_photon=100.0,
        ),
        n0=0, t_final=0.25, count=64,
    ),
}


def run(backend: str, spec: dict, seed_base: int = 1000):
    params = SystemParams.from_frequencies(**spec["params"])
    t0 = time.perf_counter()
    stats = ensemble(
        params, spec["n0"], spec["t_final"], spec["count"],
        seed_base=seed_base, backend=backend,
    )
    wall = time.perf_counter() - t0
    return stats, wall


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3,
                    help="timing repetitions per backend (best is kept)")
    args = ap.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled kernel unavailable; timing the fallback only")

    for name, spec in WORKLOADS.items():
        results = {}
        for backend in backends:
            best = np.inf
            for _ in range(args.repeat):
                stats, wall = run(backend, spec)
                best = min(best, wall)
            results[backend] = (stats, best)
            events = int(stats.counts.sum())
            print(f"{name:>9s} | {backend:>6s} | {events:8d} events | "
                  f"{best:7.3f} s | {events / best:10.0f} events/s")
        if len(results) == 2:
            sc, wc = results["cython"]
            sp, wp = results["python"]
            agree = np.array_equal(sc.counts, sp.counts) and np.array_equal(
                sc.time_in_state, sp.time_in_state
            )
            print(f"{name:>9s} | outputs identical: {agree} | "
                  f"speedup x{wp / wc:.1f}")


if __name__ == "__main__":
    main()
