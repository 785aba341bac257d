"""Backend selection for the per-tick kernels.

The compiled extension is preferred when present; set INSTREX_PURE_PY=1
to force the pure-Python twin. Both backends produce bit-identical
results (see tests/test_kernels.py and benchmarks/bench_kernels.py).
"""

import os

if os.environ.get("INSTREX_PURE_PY"):
    from . import _pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
norm_angle = _impl.norm_angle
axis_vector = _impl.axis_vector
step_pose = _impl.step_pose
alignment_error = _impl.alignment_error
axial_depth = _impl.axial_depth

__all__ = [
    "BACKEND",
    "norm_angle",
    "axis_vector",
    "step_pose",
    "alignment_error",
    "axial_depth",
]
