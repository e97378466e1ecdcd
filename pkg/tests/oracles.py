"""Independent reference computations shared by the tests.

Nothing here calls the package's integrators: geodesics are solved with
scipy's adaptive RK45 from Christoffel symbols obtained by finite differences
of the metric.
"""
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar


def paraboloid_grad(q, a=0.001, c=(89.0, 89.0)):
    return np.array([2 * a * (q[0] - c[0]), 2 * a * (q[1] - c[1])])


def metric(q, a=0.001, c=(89.0, 89.0)):
    f = paraboloid_grad(q, a, c)
    return np.eye(2) + np.outer(f, f)


def christoffel(q, a=0.001, c=(89.0, 89.0), h=1e-5):
    """Levi-Civita symbols from central differences of the metric."""
    dg = np.zeros((2, 2, 2))  # dg[k] = d g / d q_k
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        dg[k] = (metric(q + e, a, c) - metric(q - e, a, c)) / (2 * h)
    ginv = np.linalg.inv(metric(q, a, c))
    gam = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                gam[k, i, j] = 0.5 * sum(ginv[k, m] * (dg[j][m, i] + dg[i][m, j] - dg[m][i, j])
                                         for m in range(2))
    return gam


def geodesic_ivp(q0, v0, length, a=0.001, c=(89.0, 89.0)):
    """Dense geodesic solution on ``[0, length]`` starting at unit g-speed."""
    v0 = np.asarray(v0, float)
    v0 = v0 / math.sqrt(v0 @ metric(q0, a, c) @ v0)

    def rhs(_, y):
        gam = christoffel(y[:2], a, c)
        v = y[2:]
        return np.concatenate([v, -np.einsum("kij,i,j->k", gam, v, v)])

    return solve_ivp(rhs, (0.0, length), np.concatenate([q0, v0]), rtol=1e-11, atol=1e-12,
                     dense_output=True)


def orthogonal_left(q, heading, a=0.001, c=(89.0, 89.0)):
    """Unit normal to ``heading`` by Gram-Schmidt against the metric, left side."""
    g = metric(q, a, c)
    hd = np.asarray(heading, float)
    # start from the Euclidean left normal, remove the g-component along hd
    w = np.array([-hd[1], hd[0]])
    w = w - (w @ g @ hd) / (hd @ g @ hd) * hd
    return w / math.sqrt(w @ g @ w)


def orthogonal_distance(leader_q, leader_v, target, side, lo=0.0, hi=64.0):
    """Arc length along the g-orthogonal geodesic where it passes closest to ``target``.

    Returns ``(arc_length, miss_distance)``.
    """
    n = orthogonal_left(leader_q, leader_v)
    if side == "right":
        n = -n
    sol = geodesic_ivp(np.asarray(leader_q, float), n, hi)
    miss = lambda s: float(np.linalg.norm(sol.sol(s)[:2] - target))
    res = minimize_scalar(miss, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x), float(res.fun)
