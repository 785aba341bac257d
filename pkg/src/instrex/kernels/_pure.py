"""Pure-Python tick kernels.

These are the hot per-tick float routines; `instrex.kernels._core` is a
Cython twin with identical arithmetic (same operation order, so results
are bit-identical between backends).
"""

import math

BACKEND = "python"

_DEG = math.pi / 180.0


def norm_angle(a):
    """Normalize an angle in degrees to (-180, 180]."""
    a = math.fmod(a, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


def axis_vector(pitch, yaw):
    """Unit direction of the +x axis after pitch (about y) then yaw (about z)."""
    p = pitch * _DEG
    y = yaw * _DEG
    cp = math.cos(p)
    return (cp * math.cos(y), cp * math.sin(y), -math.sin(p))


def step_pose(
    x, y, z, pitch, yaw, roll,
    dx, dy, dz, dpitch, dyaw, droll,
    feed, ax, ay, az,
    max_step_mm, max_rot_deg,
    slip_mm, bx, by, bz,
):
    """Apply one clamped command to a pose; returns the new 6-tuple.

    feed is projected onto the (ax, ay, az) axis before clamping; the
    slip bias (slip_mm along (bx, by, bz)) is added after clamping.
    """
    tx = dx + feed * ax
    ty = dy + feed * ay
    tz = dz + feed * az
    tn = math.sqrt(tx * tx + ty * ty + tz * tz)
    if tn > max_step_mm and tn > 0.0:
        s = max_step_mm / tn
        tx *= s
        ty *= s
        tz *= s
    rp = dpitch
    ry = dyaw
    rr = droll
    rn = math.sqrt(rp * rp + ry * ry + rr * rr)
    if rn > max_rot_deg and rn > 0.0:
        s = max_rot_deg / rn
        rp *= s
        ry *= s
        rr *= s
    return (
        x + tx + slip_mm * bx,
        y + ty + slip_mm * by,
        z + tz + slip_mm * bz,
        norm_angle(pitch + rp),
        norm_angle(yaw + ry),
        norm_angle(roll + rr),
    )


def alignment_error(
    tx, ty, tz, tpitch, tyaw,
    gx, gy, gz, gpitch, gyaw,
):
    """(lateral offset mm, tilt deg) of a tip pose against a target axis.

    Lateral offset is the Euclidean distance in the plane perpendicular
    to the target axis; tilt is the angle between the two axis directions.
    """
    ax, ay, az = axis_vector(gpitch, gyaw)
    dx = tx - gx
    dy = ty - gy
    dz = tz - gz
    d_ax = dx * ax + dy * ay + dz * az
    lx = dx - d_ax * ax
    ly = dy - d_ax * ay
    lz = dz - d_ax * az
    trans = math.sqrt(lx * lx + ly * ly + lz * lz)
    bx, by, bz = axis_vector(tpitch, tyaw)
    dot = bx * ax + by * ay + bz * az
    if dot > 1.0:
        dot = 1.0
    elif dot < -1.0:
        dot = -1.0
    tilt = math.acos(dot) / _DEG
    return trans, tilt


def axial_depth(tx, ty, tz, gx, gy, gz, ax, ay, az):
    """Signed travel of the tip past the bay mouth, along the bay axis."""
    return (tx - gx) * ax + (ty - gy) * ay + (tz - gz) * az
