"""Compare the compiled and the numpy IPF kernels.

Usage::

    python benchmarks/bench_ipf.py [--repeats 5]

Fits a few hierarchical models to random tables with both backends,
checks that the fitted values agree and prints the median wall time per
fit.  Without the compiled extension only the numpy timings are shown.
"""

import argparse
import statistics
import time

import numpy as np

import catinfo.loglinear as ll
from catinfo import kernels
from catinfo.loglinear import ModelFormula, ipf_fit
from catinfo.table import from_array

CASES = [
    ("2x2x2 no-three-way", (2, 2, 2), "XYZ", [("X", "Y"), ("X", "Z"), ("Y", "Z")]),
    ("7 binary, 6 generators", (2,) * 7, "CMGSDHA", [("A", "C", "S"), ("A", "D", "G"), ("A", "H", "S"),
                                                     ("D", "H", "S"), ("G", "M"), ("M", "S")]),
    ("4x4x4x4 all pairs", (4,) * 4, "WXYZ", [(a, b) for i, a in enumerate("WXYZ") for b in "WXYZ"[i + 1:]]),
    ("3^6 all triples in a ring", (3,) * 6, "ABCDEF", [tuple("ABCDEF"[(i + k) % 6] for k in range(3)) for i in range(6)]),
]


def _time(table, formula, repeats):
    times = []
    fit = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        fit = ipf_fit(table, formula, tol=1e-10, max_iter=5000)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), fit


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    compiled = kernels.ipf_loop if kernels.BACKEND == "cython" else None
    print(f"compiled kernel available: {compiled is not None}")
    print(f"{'case':<28} {'cells':>6} {'cycles':>6} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for label, shape, names, gens in CASES:
        table = from_array(rng.integers(1, 60, size=shape), list(names))
        formula = ModelFormula(tuple(gens))
        ll.ipf_loop = kernels.python_ipf_loop
        t_py, fit_py = _time(table, formula, args.repeats)
        if compiled is not None:
            ll.ipf_loop = compiled
            t_c, fit_c = _time(table, formula, args.repeats)
            diff = float(np.max(np.abs(fit_py.fitted.counts - fit_c.fitted.counts)))
            print(f"{label:<28} {table.n_cells:6d} {fit_py.iterations:6d} {1e3 * t_py:10.3f} {1e3 * t_c:10.3f} "
                  f"{t_py / t_c:8.1f} {diff:11.2e}")
        else:
            print(f"{label:<28} {table.n_cells:6d} {fit_py.iterations:6d} {1e3 * t_py:10.3f} {'-':>10} {'-':>8} {'-':>11}")
    ll.ipf_loop = kernels.ipf_loop


if __name__ == "__main__":
    main()
