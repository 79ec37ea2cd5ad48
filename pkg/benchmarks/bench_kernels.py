"""Compare the numba loop kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--dims 4 4] [--sector 4 4] [--repeat 5]

Both implementations are imported directly, so the ``FLOQFLUX_NUMBA`` flag
does not matter here. Outputs must agree before timings are reported.
"""
import argparse
import time

import numpy as np

from floqflux import kernels
from floqflux._accel import HAVE_NUMBA
from floqflux.hamiltonians import nnn_terms
from floqflux.model import ModelSpec


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", nargs=2, type=int, default=[4, 4])
    ap.add_argument("--sector", nargs="+", type=int, default=[4, 4])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    m = ModelSpec(Lx=args.dims[0], Ly=args.dims[1], phi=np.pi / 2, sector=tuple(args.sector))
    states = m.basis.states
    src, dst, ctrl, coef = (np.ascontiguousarray(a) for a in nnn_terms(m.gauge, m.J_par, m.J_perp, m.Omega))
    src, dst, ctrl = (a.astype(np.int64) for a in (src, dst, ctrl))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=states.size) + 1j * rng.normal(size=states.size)
    psi /= np.linalg.norm(psi)
    pairs = np.array([(i, j) for i in range(m.lattice.nsites) for j in range(m.lattice.nsites)])
    ps, pd = pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)

    cases = {
        "hop_coo": (lambda: kernels._hop_coo_loop(states, src, dst, ctrl, coef),
                    lambda: kernels._hop_coo_numpy(states, src, dst, ctrl, coef)),
        "hop_expect": (lambda: kernels._hop_expect_loop(states, psi, ps, pd),
                       lambda: kernels._hop_expect_numpy(states, psi, ps, pd)),
        "occupations": (lambda: kernels._occupations_loop(states, m.lattice.nsites),
                        lambda: kernels._occupations_numpy(states, m.lattice.nsites)),
    }
    print(f"dim={states.size} terms={src.size} numba={'on' if HAVE_NUMBA else 'off'}")
    print(f"{'kernel':<12} {'loop [ms]':>10} {'numpy [ms]':>11} {'speedup':>8}")
    for name, (loop, vec) in cases.items():
        loop()  # compile
        tl, a = best_of(loop, args.repeat)
        tv, b = best_of(vec, args.repeat)
        if name == "hop_coo":
            # same entries, possibly different order
            ka = np.lexsort((a[1], a[0]))
            kb = np.lexsort((b[1], b[0]))
            assert np.array_equal(a[0][ka], b[0][kb]) and np.allclose(a[2][ka], b[2][kb])
        else:
            assert np.allclose(a, b, atol=1e-12)
        print(f"{name:<12} {tl * 1e3:>10.2f} {tv * 1e3:>11.2f} {tv / tl:>8.1f}x")


if __name__ == "__main__":
    main()
