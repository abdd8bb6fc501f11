"""Compare the compiled jet kernel with the numpy fallback.

Times the raw truncated product and an end-to-end curvature evaluation on each
backend, and checks that both give the same numbers.

    python3 benchmarks/bench_kernels.py --points 200 --repeat 5
"""

import argparse
import time

import numpy as np

from fourframes import curvature as C
from fourframes import jets as J
from fourframes import models as M


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def raw_product(npts, order, seed):
    rng = np.random.default_rng(seed)
    n = J.ncoef(order)
    a = J.Jet(rng.standard_normal((npts, 4, 4, n)))
    b = J.Jet(rng.standard_normal((npts, 4, 4, n)))
    return lambda: J.einsum("ij,jk->ik", a, b).coeffs


def curvature_run(npts, seed):
    inst = M.build("gibbons-hawking", {"potential": "point"})
    rng = np.random.default_rng(seed)
    box = inst.chart.inset(0.05)
    pts = box.lo + rng.random((npts, 4)) * (box.hi - box.lo)

    def run():
        sample = J.Sample(pts, J.DEFAULT_ORDER, inst.metric.domain)
        return C.Geometry(inst.metric, sample).riemann.value

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--order", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = ["numpy"]
    try:
        J.set_backend("compiled")
        backends.insert(0, "compiled")
    except ImportError:
        print("compiled kernel not built; timing numpy only")

    cases = {
        "einsum ij,jk->ik": lambda: raw_product(args.points, args.order, args.seed),
        "riemann (GH point)": lambda: curvature_run(args.points, args.seed),
    }
    print(f"{'case':<22}{'backend':<10}{'best [ms]':>12}")
    for name, make in cases.items():
        results = {}
        for be in backends:
            J.set_backend(be)
            dt, out = best_of(make(), args.repeat)
            results[be] = (dt, np.asarray(out))
            print(f"{name:<22}{be:<10}{dt * 1e3:>12.2f}")
        if len(results) == 2:
            (tc, oc), (tn, on) = results["compiled"], results["numpy"]
            diff = np.abs(oc - on).max() / max(1.0, np.abs(on).max())
            print(f"{'':<22}speedup {tn / tc:5.1f}x, max rel diff {diff:.1e}")


if __name__ == "__main__":
    main()
