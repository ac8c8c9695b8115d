"""Compare the compiled and numpy kernel backends.

Kernel micro-benchmarks call both modules directly. The end-to-end Monte
Carlo benchmark runs each backend in a subprocess, since the backend is fixed
at import time (``QDCAVITY_PURE_PYTHON=1`` forces the fallback).

    python3 benchmarks/bench_kernels.py [--repeat 2000] [--trials 300]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qdcavity import _pykernels
from qdcavity.cavity import cavity_gate
from qdcavity.quantum import HADAMARD

try:
    from qdcavity import _kernels
except ImportError:
    _kernels = None

SESSION_SNIPPET = """
import time
from qdcavity.adversary import AttackModel
from qdcavity.analysis import run_experiment
from qdcavity.kernels import BACKEND
from qdcavity.protocol import ProtocolConfig
cfg = ProtocolConfig(n_message_pairs=4, first_check_samples=8, second_check_samples=8, error_threshold=1.0)
t = time.perf_counter()
run_experiment(cfg, AttackModel("entangle_measure", theta=0.6), trials={trials}, rng_seed=1)
print(BACKEND, time.perf_counter() - t)
"""


def random_state(n, rng):
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return psi / np.linalg.norm(psi)


def bench_module(mod, n, repeat, rng):
    psi = random_state(n, rng)
    h = np.ascontiguousarray(HADAMARD)
    g = np.ascontiguousarray(cavity_gate())
    targets = np.array([0, n - 1], dtype=np.int_)
    cases = {
        "apply_1q": lambda: mod.apply_1q(psi, h, n, n // 2),
        "apply_2q": lambda: mod.apply_2q(psi, g, n, 0, n - 1),
        "marginal_probs": lambda: mod.marginal_probs(psi, n, targets),
        "collapse": lambda: mod.collapse(psi.copy(), n, targets, 1),
    }
    return {k: min(timeit.repeat(f, number=repeat, repeat=3)) / repeat for k, f in cases.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=300)
    args = ap.parse_args()

    if _kernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'atoms':>6}{'python us':>12}{'cython us':>12}{'speedup':>9}")
    for n in (2, 4, 6):
        py = bench_module(_pykernels, n, args.repeat, rng)
        cy = bench_module(_kernels, n, args.repeat, rng) if _kernels else None
        for name, t in py.items():
            if cy:
                print(f"{name:<16}{n:>6}{t * 1e6:>12.2f}{cy[name] * 1e6:>12.2f}{t / cy[name]:>8.1f}x")
            else:
                print(f"{name:<16}{n:>6}{t * 1e6:>12.2f}{'-':>12}{'-':>9}")

    print(f"\nMonte Carlo sessions ({args.trials} trials, N=4, entangle-measure)")
    for force in ("1", "0"):
        env = dict(os.environ, QDCAVITY_PURE_PYTHON=force)
        out = subprocess.run([sys.executable, "-c", SESSION_SNIPPET.format(trials=args.trials)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:<8}{float(out[1]):8.2f} s")


if __name__ == "__main__":
    main()
