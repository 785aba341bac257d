# cython: language_level=3, boundscheck=False, cdivision=True
"""Cython tick kernels — compiled twin of instrex.kernels._pure.

Arithmetic matches the pure module operation-for-operation so both
backends produce bit-identical floats (built with -ffp-contract=off).
"""

from libc.math cimport sqrt, sin, cos, acos, fmod, pi

BACKEND = "cython"

cdef double _DEG = pi / 180.0


cdef inline double _norm_angle(double a) noexcept:
    a = fmod(a, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def norm_angle(double a):
    """Normalize an angle in degrees to (-180, 180]."""
    return _norm_angle(a)


def axis_vector(double pitch, double yaw):
    """Unit direction of the +x axis after pitch (about y) then yaw (about z)."""
    cdef double p = pitch * _DEG
    cdef double y = yaw * _DEG
    cdef double cp = cos(p)
    return (cp * cos(y), cp * sin(y), -sin(p))


def step_pose(
    double x, double y, double z, double pitch, double yaw, double roll,
    double dx, double dy, double dz, double dpitch, double dyaw, double droll,
    double feed, double ax, double ay, double az,
    double max_step_mm, double max_rot_deg,
    double slip_mm, double bx, double by, double bz,
):
    """Apply one clamped command to a pose; returns the new 6-tuple."""
    cdef double tx = dx + feed * ax
    cdef double ty = dy + feed * ay
    cdef double tz = dz + feed * az
    cdef double tn = sqrt(tx * tx + ty * ty + tz * tz)
    cdef double s
    if tn > max_step_mm and tn > 0.0:
        s = max_step_mm / tn
        tx *= s
        ty *= s
        tz *= s
    cdef double rp = dpitch
    cdef double ry = dyaw
    cdef double rr = droll
    cdef double rn = sqrt(rp * rp + ry * ry + rr * rr)
    if rn > max_rot_deg and rn > 0.0:
        s = max_rot_deg / rn
        rp *= s
        ry *= s
        rr *= s
    return (
        x + tx + slip_mm * bx,
        y + ty + slip_mm * by,
        z + tz + slip_mm * bz,
        _norm_angle(pitch + rp),
        _norm_angle(yaw + ry),
        _norm_angle(roll + rr),
    )


def alignment_error(
    double tx, double ty, double tz, double tpitch, double tyaw,
    double gx, double gy, double gz, double gpitch, double gyaw,
):
    """(lateral offset mm, tilt deg) of a tip pose against a target axis."""
    cdef double gp = gpitch * _DEG
    cdef double gy_ = gyaw * _DEG
    cdef double cp = cos(gp)
    cdef double ax = cp * cos(gy_)
    cdef double ay = cp * sin(gy_)
    cdef double az = -sin(gp)
    cdef double dx = tx - gx
    cdef double dy = ty - gy
    cdef double dz = tz - gz
    cdef double d_ax = dx * ax + dy * ay + dz * az
    cdef double lx = dx - d_ax * ax
    cdef double ly = dy - d_ax * ay
    cdef double lz = dz - d_ax * az
    cdef double trans = sqrt(lx * lx + ly * ly + lz * lz)
    cdef double tp = tpitch * _DEG
    cdef double tyw = tyaw * _DEG
    cdef double tcp = cos(tp)
    cdef double bx = tcp * cos(tyw)
    cdef double by = tcp * sin(tyw)
    cdef double bz = -sin(tp)
    cdef double dot = bx * ax + by * ay + bz * az
    if dot > 1.0:
        dot = 1.0
    elif dot < -1.0:
        dot = -1.0
    cdef double tilt = acos(dot) / _DEG
    return trans, tilt


def axial_depth(
    double tx, double ty, double tz,
    double gx, double gy, double gz,
    double ax, double ay, double az,
):
    """Signed travel of the tip past the bay mouth, along the bay axis."""
    return (tx - gx) * ax + (ty - gy) * ay + (tz - gz) * az
