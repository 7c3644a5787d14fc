"""Compare the jitted and pure-numpy transport kernels.

Both flavours live in ``adiascat._kernels`` with identical signatures;
the package picks one at import time (``ADIASCAT_NO_NUMBA=1`` forces
numpy).  This script imports both explicitly, checks they agree, and
times them on propagation-sized workloads.

    python3 benchmarks/bench_kernels.py [--repeats 3] [--sizes 1024,4096]
"""

import argparse
import time

import numpy as np

from adiascat import _kernels as K

BUMP_ARGS = (K.KIND_BUMP, 1.0, 0.0, 1.0, 0.0)


def _best_of(fn, args, repeats):
    fn(*args)  # warm-up; first numba call compiles
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def _phase_case(n):
    x = np.linspace(-96.0, 96.0, n, endpoint=False)
    nsteps = n // 4
    amps = np.array([0.8, 0.3])
    centers = np.array([0.35, -1.0])
    widths = np.array([1.0, 0.7])
    return (x, 40.0, 4.0, nsteps, amps, centers, widths,
            *BUMP_ARGS, 0.1, 8.0)


def _unitary_case(n):
    x = np.linspace(-96.0, 96.0, n, endpoint=False)
    nsteps = n // 4
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
    mats = np.stack([0.7 * sx, 0.5 * sz])
    centers = np.array([-0.4, 0.5])
    widths = np.array([0.9, 1.1])
    return (x, 40.0, 4.0, nsteps, mats, centers, widths,
            *BUMP_ARGS, 0.1, 8.0)


def _product_case(steps):
    rng = np.random.default_rng(5)
    a = rng.normal(size=(steps, 4, 4)) + 1j * rng.normal(size=(steps, 4, 4))
    ks = 0.5 * (a + np.conj(np.transpose(a, (0, 2, 1))))
    return (ks, 1e-3)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--sizes", default="1024,4096",
                    help="comma-separated grid sizes")
    ap.add_argument("--product-steps", type=int, default=4096)
    args = ap.parse_args()
    sizes = [int(v) for v in args.sizes.split(",")]

    cases = []
    for n in sizes:
        cases.append((f"characteristic_phase   n={n}",
                      K.characteristic_phase_numpy,
                      K.characteristic_phase_numba, _phase_case(n)))
        cases.append((f"characteristic_unitary n={n}",
                      K.characteristic_unitary_numpy,
                      K.characteristic_unitary_numba, _unitary_case(n)))
    cases.append((f"unitary_product     steps={args.product_steps}",
                  K.unitary_product_numpy, K.unitary_product_numba,
                  _product_case(args.product_steps)))

    if not K.HAS_NUMBA:
        print("numba unavailable (or ADIASCAT_NO_NUMBA=1): "
              "timing the numpy flavour only")
    print(f"package default backend: {K.backend_name()}")
    header = f"{'kernel':38s} {'numpy':>11s} {'numba':>11s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, fn_np, fn_nb, case in cases:
        ms_np = _best_of(fn_np, case, args.repeats)
        if fn_nb is None:
            print(f"{name:38s} {ms_np:9.2f}ms {'-':>11s} {'-':>8s}")
            continue
        gap = float(np.max(np.abs(fn_np(*case) - fn_nb(*case))))
        if gap > 1e-12:
            raise SystemExit(f"flavours disagree on {name}: {gap:.2e}")
        ms_nb = _best_of(fn_nb, case, args.repeats)
        print(f"{name:38s} {ms_np:9.2f}ms {ms_nb:9.2f}ms "
              f"{ms_np / ms_nb:7.1f}x")


if __name__ == "__main__":
    main()
