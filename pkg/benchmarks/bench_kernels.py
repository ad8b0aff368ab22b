"""Compare the numba-compiled kernels with the same code run as plain Python.

Usage::

    python3 benchmarks/bench_kernels.py            # both modes, side by side
    python3 benchmarks/bench_kernels.py --single   # current mode only (JSON)

The comparison runs each mode in a fresh interpreter, because the choice
between compiled and pure-Python kernels is made once, at import time, from
the SCREWON_NO_JIT environment variable.  Compilation happens in a warm-up
call that is not timed.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _workloads():
    from screwon.classical import characteristic_time, integrate_darboux
    from screwon.core import ModelParams
    from screwon.elliptic import ellip_Pi
    from screwon.radial import RadialProblem, shoot_eigenvalues
    from screwon.wkb import action, effective_minimum

    p = ModelParams(lam=1.0, k=1.0, p_z=0.3, l=1)
    e0 = effective_minimum(p)
    energies = e0 + np.geomspace(1e-2, 1e4, 400)
    zs = np.linspace(0.0, 0.99, 500)

    def elliptic():
        return sum(ellip_Pi(0.3, z) for z in zs)

    def wkb_action():
        return sum(action(p, e) for e in energies)

    def dopri5():
        T = 5 * characteristic_time(p)
        return integrate_darboux(np.array([0.7, -0.2, 0.1, 0.3, 0.4, 0.5]), p, T, tol=1e-8).steps

    rp = RadialProblem.from_params(p)

    def shooting():
        return float(shoot_eigenvalues(rp, 3)[-1])

    return {"elliptic_Pi x500": elliptic, "wkb_action x400": wkb_action,
            "dopri5 5 periods": dopri5, "shooting 3 levels": shooting}


def run_single(repeat: int) -> dict:
    from screwon import JIT_ENABLED

    out = {"jit": JIT_ENABLED, "timings": {}}
    for name, fn in _workloads().items():
        fn()  # warm-up (compiles when jit is on)
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["timings"][name] = best
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--single", action="store_true", help="time the current mode and print JSON")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if args.single:
        print(json.dumps(run_single(args.repeat)))
        return 0

    results = {}
    for label, flag in (("jit", "0"), ("python", "1")):
        env = dict(os.environ, SCREWON_NO_JIT=flag)
        proc = subprocess.run([sys.executable, __file__, "--single", "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])["timings"]

    print(f"{'kernel':<22}{'jit [s]':>12}{'python [s]':>14}{'speedup':>10}")
    for name in results["jit"]:
        tj, tp = results["jit"][name], results["python"][name]
        print(f"{name:<22}{tj:>12.4f}{tp:>14.4f}{tp / tj:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
