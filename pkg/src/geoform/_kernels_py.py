"""Pure-Python geodesic kernels for paraboloid surfaces.

Fallback for ``_kernels``; same arithmetic order so both backends agree to
rounding.
"""


def paraboloid_rhs(q1, q2, v1, v2, a, c1, c2):
    f1 = 2.0 * a * (q1 - c1)
    f2 = 2.0 * a * (q2 - c2)
    s = 2.0 * a * (v1 * v1 + v2 * v2) / (1.0 + f1 * f1 + f2 * f2)
    return (v1, v2, -f1 * s, -f2 * s)


def paraboloid_step(q1, q2, v1, v2, a, c1, c2, h):
    hh = 0.5 * h
    k1 = paraboloid_rhs(q1, q2, v1, v2, a, c1, c2)
    k2 = paraboloid_rhs(q1 + hh * k1[0], q2 + hh * k1[1], v1 + hh * k1[2], v2 + hh * k1[3],
                        a, c1, c2)
    k3 = paraboloid_rhs(q1 + hh * k2[0], q2 + hh * k2[1], v1 + hh * k2[2], v2 + hh * k2[3],
                        a, c1, c2)
    k4 = paraboloid_rhs(q1 + h * k3[0], q2 + h * k3[1], v1 + h * k3[2], v2 + h * k3[3],
                        a, c1, c2)
    w = h / 6.0
    return (
        q1 + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        q2 + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        v1 + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        v2 + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    )


def paraboloid_shoot(q1, q2, v1, v2, a, c1, c2, length, h, xmin, xmax, ymin, ymax):
    """Integrate for parameter ``length``; returns (q1, q2, v1, v2, exited)."""
    n = int(length / h)
    rest = length - n * h
    exited = False
    for _ in range(n):
        q1, q2, v1, v2 = paraboloid_step(q1, q2, v1, v2, a, c1, c2, h)
        if q1 < xmin or q1 > xmax or q2 < ymin or q2 > ymax:
            exited = True
    if rest > 0.0:
        q1, q2, v1, v2 = paraboloid_step(q1, q2, v1, v2, a, c1, c2, rest)
        if q1 < xmin or q1 > xmax or q2 < ymin or q2 > ymax:
            exited = True
    return (q1, q2, v1, v2, exited)
