"""Shared independent oracles for the test suite.

These deliberately avoid the library's own solution paths: finite
differences for derivative checks, dense grid searches (with local
refinement) for scalar subproblems.
"""

import numpy as np
import pytest

from saddlekit.linalg import vector_norm


def fd_gradient(fun, z, h=1e-6):
    """Central-difference gradient."""
    z = np.asarray(z, dtype=float)
    g = np.zeros_like(z)
    for i in range(z.shape[0]):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (fun(z + e) - fun(z - e)) / (2 * h)
    return g


def fd_jacobian(vec_fun, z, h=1e-6):
    """Central-difference Jacobian of a vector field."""
    z = np.asarray(z, dtype=float)
    f0 = np.asarray(vec_fun(z))
    J = np.zeros((f0.shape[0], z.shape[0]))
    for i in range(z.shape[0]):
        e = np.zeros_like(z)
        e[i] = h
        J[:, i] = (np.asarray(vec_fun(z + e)) - np.asarray(vec_fun(z - e))) / (2 * h)
    return J


def secular_grid_oracle(F0, J, gamma, lam_hi=10.0, rounds=6, n=2001):
    """Dense grid search for lam = (gamma/2)||s(lam)|| with s solving
    (J + lam I)s = -F0; refined around the best grid point."""
    lo, hi = 0.0, lam_hi
    best = None
    for _ in range(rounds):
        lams = np.linspace(lo, hi, n)
        vals = []
        for lam in lams:
            try:
                s = np.linalg.solve(J + lam * np.eye(J.shape[0]), -F0)
            except np.linalg.LinAlgError:
                vals.append(np.inf)
                continue
            vals.append(abs(0.5 * gamma * vector_norm(s) - lam))
        k = int(np.argmin(vals))
        step = (hi - lo) / (n - 1)
        lo, hi = max(0.0, lams[k] - step), lams[k] + step
    lam = 0.5 * (lo + hi)
    s = np.linalg.solve(J + lam * np.eye(J.shape[0]), -F0)
    return lam, s


def cubic_prox_1d_oracle(w_obj, center_obj, gamma, xbar, lo, hi, rounds=8, n=4001):
    """Dense-grid minimizer of (w/3)|x - c|^3 + (gamma/3)|x - xbar|^3."""

    def fun(x):
        return (w_obj / 3.0) * abs(x - center_obj) ** 3 + (gamma / 3.0) * abs(
            x - xbar
        ) ** 3

    for _ in range(rounds):
        xs = np.linspace(lo, hi, n)
        vals = [fun(x) for x in xs]
        k = int(np.argmin(vals))
        step = (hi - lo) / (n - 1)
        lo, hi = xs[k] - step, xs[k] + step
    return 0.5 * (lo + hi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
