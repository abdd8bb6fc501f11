"""Finite-difference oracles that only use order-0 values of the metric."""

import numpy as np

from fourframes import jets as J


def metric_values(metric, points):
    """Plain metric matrices at ``points`` (no derivatives used)."""
    return metric.at(J.Sample(np.atleast_2d(points), 1)).value


def fd_christoffel(metric, p, h):
    """Christoffel symbols ``gam[k, i, j]`` from central differences of ``g``."""
    p = np.asarray(p, dtype=float)
    shifts = np.concatenate([p + h * np.eye(4), p - h * np.eye(4), p[None]])
    vals = metric_values(metric, shifts)
    dg = (vals[:4] - vals[4:8]) / (2 * h)  # dg[c, a, b] = d_c g_ab
    lower = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - np.einsum("lij->lij", dg))
    return np.einsum("kl,lij->kij", np.linalg.inv(vals[-1]), lower)


def fd_riemann(metric, p, h=2e-4):
    """``Rc[i, j, a, b] = g(R(d_i, d_j) d_a, d_b)`` from nested central differences.

    ``R(X, Y) = -[D_X, D_Y] + D_[X, Y]``, so the round sphere has positive scalar curvature.
    """
    p = np.asarray(p, dtype=float)
    gam = fd_christoffel(metric, p, h)
    dgam = np.stack([(fd_christoffel(metric, p + h * e, h) - fd_christoffel(metric, p - h * e, h)) / (2 * h) for e in np.eye(4)])
    # dgam[i, k, j, a] = d_i gam^k_ja ; commutator [D_i, D_j] d_a = R^k_aij d_k
    comm = (
        np.einsum("ikja->kaij", dgam)
        - np.einsum("jkia->kaij", dgam)
        + np.einsum("kil,lja->kaij", gam, gam)
        - np.einsum("kjl,lia->kaij", gam, gam)
    )
    g = metric_values(metric, p)[0]
    return -np.einsum("kaij,kb->ijab", comm, g)


def central_gradient(fn, p, h=1e-5):
    p = np.asarray(p, dtype=float)
    return np.array([(fn(p + h * e) - fn(p - h * e)) / (2 * h) for e in np.eye(4)])
