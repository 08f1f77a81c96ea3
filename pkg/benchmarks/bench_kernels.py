"""Compiled vs pure-Python kernel timings on representative integrations.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from rcekit import kernels
from rcekit.cases import make_bessel, make_mathieu
from rcekit.odeengine import integrate_polar, integrate_rce, integrate_state
from rcekit.reduction import GeneralRiccati, companion, reduce


def _cases():
    const = reduce(GeneralRiccati("-1", "0", "4+cos(t)"))
    bessel = reduce(make_bessel(5))
    mathieu = companion(make_mathieu(1.0, 1.0))
    t_rce = np.linspace(0.0, 20.0, 2001)
    t_pol = np.linspace(100.0, 0.5, 2001)
    t_st = np.linspace(0.0, 12 * math.pi, 2001)
    return {
        "rce with escapes": lambda b: integrate_rce(const, -3.0, t_rce, tol=1e-12, backend=b),
        "polar back-propagation": lambda b: integrate_polar(bessel, complex(-0.005, 1.0), t_pol,
                                                            tol=1e-12, backend=b),
        "state transition 2x2": lambda b: integrate_state(mathieu, t_st, tol=1e-12, backend=b),
    }


def _best(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    have = kernels.get_backend("compiled") is not None
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'case':<26}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, fn in _cases().items():
        tp = _best(lambda: fn("python"), args.repeat)
        if have:
            tc = _best(lambda: fn("compiled"), args.repeat)
            print(f"{name:<26}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}x")
        else:
            print(f"{name:<26}{tp:>12.4f}{'n/a':>14}{'':>10}")


if __name__ == "__main__":
    main()
