# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled geodesic kernels for paraboloid surfaces.

Mirrors ``_kernels_py`` operation for operation; keep the two in sync.
"""


cdef inline void _rhs(double q1, double q2, double v1, double v2,
                      double a, double c1, double c2,
                      double* out) nogil:
    cdef double f1 = 2.0 * a * (q1 - c1)
    cdef double f2 = 2.0 * a * (q2 - c2)
    cdef double s = 2.0 * a * (v1 * v1 + v2 * v2) / (1.0 + f1 * f1 + f2 * f2)
    out[0] = v1
    out[1] = v2
    out[2] = -f1 * s
    out[3] = -f2 * s


cdef inline void _step(double* y, double a, double c1, double c2, double h) nogil:
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double hh = 0.5 * h
    cdef int i
    _rhs(y[0], y[1], y[2], y[3], a, c1, c2, k1)
    _rhs(y[0] + hh * k1[0], y[1] + hh * k1[1], y[2] + hh * k1[2], y[3] + hh * k1[3],
         a, c1, c2, k2)
    _rhs(y[0] + hh * k2[0], y[1] + hh * k2[1], y[2] + hh * k2[2], y[3] + hh * k2[3],
         a, c1, c2, k3)
    _rhs(y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2], y[3] + h * k3[3],
         a, c1, c2, k4)
    for i in range(4):
        y[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def paraboloid_rhs(double q1, double q2, double v1, double v2,
                   double a, double c1, double c2):
    cdef double out[4]
    _rhs(q1, q2, v1, v2, a, c1, c2, out)
    return (out[0], out[1], out[2], out[3])


def paraboloid_step(double q1, double q2, double v1, double v2,
                    double a, double c1, double c2, double h):
    cdef double y[4]
    y[0] = q1
    y[1] = q2
    y[2] = v1
    y[3] = v2
    _step(y, a, c1, c2, h)
    return (y[0], y[1], y[2], y[3])


def paraboloid_shoot(double q1, double q2, double v1, double v2,
                     double a, double c1, double c2,
                     double length, double h,
                     double xmin, double xmax, double ymin, double ymax):
    """Integrate for parameter ``length``; returns (q1, q2, v1, v2, exited)."""
    cdef double y[4]
    cdef long n = <long>(length / h)
    cdef long i
    cdef double rest = length - n * h
    cdef bint exited = False
    y[0] = q1
    y[1] = q2
    y[2] = v1
    y[3] = v2
    with nogil:
        for i in range(n):
            _step(y, a, c1, c2, h)
            if y[0] < xmin or y[0] > xmax or y[1] < ymin or y[1] > ymax:
                exited = True
        if rest > 0.0:
            _step(y, a, c1, c2, rest)
            if y[0] < xmin or y[0] > xmax or y[1] < ymin or y[1] > ymax:
                exited = True
    return (y[0], y[1], y[2], y[3], exited)
