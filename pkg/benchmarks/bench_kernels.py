"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 128 256] [--repeat 50]

Prints microseconds per call for every kernel and backend, the speed-up, and
the cost of one full first-order step on an Allen-Cahn grid with each backend.
"""

import argparse
import importlib
import timeit

import numpy as np

from esisav import _kernels_py


def _backends():
    out = {"python": _kernels_py}
    try:
        out["cython"] = importlib.import_module("esisav._kernels")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    return out


def _cases(n, rng):
    phi = rng.standard_normal((n, n))
    fh = rng.standard_normal((n, n // 2 + 1)) + 1j * rng.standard_normal((n, n // 2 + 1))
    sym = rng.random((n, n // 2 + 1))
    denom = 1.0 + sym
    return {
        "cubic_derivative": lambda k: k.cubic_derivative(phi, 1.0, 1.0),
        "quartic_sum": lambda k: k.quartic_sum(phi, 1.0, 1.0, 0.25),
        "spectral_quadratic": lambda k: k.spectral_quadratic(sym, fh),
        "implicit_update": lambda k: k.implicit_update(fh, fh, sym, -0.1, denom),
    }


def _step_time(name, n, repeat):
    from esisav import allen_cahn, kernels, make_grid, steppers

    previous = kernels.set_backend(name)
    try:
        g = make_grid(n, n, 2 * np.pi, 2 * np.pi)
        x, y = g.mesh
        model = allen_cahn(g, 0.1)
        state = steppers.initial_state(model, 0.1 * np.cos(x) * np.cos(y), 0.01)
        state = steppers.startup(state, model, "first_order")
        return min(timeit.repeat(lambda: steppers.step_first_order(state, model), number=repeat, repeat=3)) / repeat
    finally:
        kernels.set_backend(previous)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[128, 256])
    p.add_argument("--repeat", type=int, default=50)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = _backends()
    for n in args.sizes:
        print(f"grid {n}x{n}")
        for name, fn in _cases(n, rng).items():
            times = {b: min(timeit.repeat(lambda: fn(k), number=args.repeat, repeat=3)) / args.repeat
                     for b, k in backends.items()}
            line = "  ".join(f"{b}={t * 1e6:9.1f}us" for b, t in times.items())
            speed = f"  speed-up {times['python'] / times['cython']:.2f}x" if "cython" in times else ""
            print(f"  {name:<20}{line}{speed}")
        steps = {b: _step_time(b, n, max(1, args.repeat // 5)) for b in backends}
        line = "  ".join(f"{b}={t * 1e3:7.3f}ms" for b, t in steps.items())
        print(f"  {'first-order step':<20}{line}")


if __name__ == "__main__":
    main()
