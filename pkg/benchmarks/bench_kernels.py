#!/usr/bin/env python3
"""Benchmark the compiled tick kernels against the pure-Python twin.

Usage: python3 benchmarks/bench_kernels.py [iterations]
"""

import random
import sys
import timeit

from instrex.kernels import _pure

try:
    from instrex.kernels import _core
except ImportError:
    _core = None


def make_args(rng):
    pose = [rng.uniform(-500, 500) for _ in range(3)] + \
           [rng.uniform(-179, 180) for _ in range(3)]
    delta = [rng.uniform(-5, 5) for _ in range(6)]
    axis = _pure.axis_vector(0.0, rng.uniform(-180, 180))
    return (*pose, *delta, rng.uniform(-3, 3), *axis, 5.0, 2.0,
            0.0, -axis[1], axis[0], 0.0)


def bench(label, fn, arg_sets, number):
    def loop():
        for args in arg_sets:
            fn(*args)

    best = min(timeit.repeat(loop, number=number, repeat=5))
    per_call_us = best / (number * len(arg_sets)) * 1e6
    print(f"{label:28s} {per_call_us:8.3f} us/call")
    return per_call_us


def main():
    number = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    rng = random.Random(0)
    arg_sets = [make_args(rng) for _ in range(100)]
    err_args = [(a[0], a[1], a[2], a[3], a[4],
                 a[6], a[7], a[8], a[9], a[10]) for a in arg_sets]

    print(f"{number * 100} calls per function, best of 5 repeats\n")
    py_step = bench("step_pose (python)", _pure.step_pose, arg_sets, number)
    py_err = bench("alignment_error (python)", _pure.alignment_error,
                   err_args, number)
    if _core is None:
        print("\ncompiled kernel not built; nothing to compare")
        return
    cy_step = bench("step_pose (cython)", _core.step_pose, arg_sets, number)
    cy_err = bench("alignment_error (cython)", _core.alignment_error,
                   err_args, number)
    print(f"\nspeedup: step_pose x{py_step / cy_step:.1f}, "
          f"alignment_error x{py_err / cy_err:.1f}")

    mismatches = sum(
        _core.step_pose(*a) != _pure.step_pose(*a) for a in arg_sets)
    print(f"bit-identical outputs: {'yes' if mismatches == 0 else 'NO'}")


if __name__ == "__main__":
    main()
