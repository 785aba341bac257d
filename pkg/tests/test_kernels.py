"""Backend equivalence: the compiled kernels must match the pure-Python
twin bit for bit."""

import math
import random

import pytest

from instrex.kernels import _pure

try:
    from instrex.kernels import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None,
                                reason="compiled kernel not built")


def test_norm_angle_range():
    rng = random.Random(1)
    for _ in range(1000):
        a = rng.uniform(-2000, 2000)
        n = _pure.norm_angle(a)
        assert -180 < n <= 180
        assert math.isclose(math.cos(math.radians(a)),
                            math.cos(math.radians(n)), abs_tol=1e-9)
    assert _pure.norm_angle(-180.0) == 180.0
    assert _pure.norm_angle(180.0) == 180.0


def test_axis_vector_unit():
    rng = random.Random(2)
    for _ in range(200):
        v = _pure.axis_vector(rng.uniform(-180, 180), rng.uniform(-180, 180))
        assert math.isclose(sum(c * c for c in v), 1.0, abs_tol=1e-12)


@needs_core
def test_backends_bit_identical():
    rng = random.Random(3)
    for _ in range(2000):
        pose = [rng.uniform(-500, 500) for _ in range(3)] + \
               [rng.uniform(-179, 180) for _ in range(3)]
        delta = [rng.uniform(-20, 20) for _ in range(6)]
        feed = rng.uniform(-10, 10)
        yaw = rng.uniform(-180, 180)
        axis = _pure.axis_vector(0.0, yaw)
        args = (*pose, *delta, feed, *axis, 5.0, 2.0, 1.0, -axis[1], axis[0], 0.0)
        assert _core.step_pose(*args) == _pure.step_pose(*args)

        tip = [rng.uniform(-100, 100) for _ in range(3)] + \
              [rng.uniform(-30, 30) for _ in range(2)]
        tgt = [rng.uniform(-100, 100) for _ in range(3)] + \
              [rng.uniform(-30, 30) for _ in range(2)]
        assert _core.alignment_error(*tip, *tgt) == _pure.alignment_error(*tip, *tgt)
        assert (_core.axial_depth(*tip[:3], *tgt[:3], *axis)
                == _pure.axial_depth(*tip[:3], *tgt[:3], *axis))


@needs_core
def test_norm_angle_backends_agree():
    rng = random.Random(4)
    for _ in range(2000):
        a = rng.uniform(-3000, 3000)
        assert _core.norm_angle(a) == _pure.norm_angle(a)
