"""Minimal dense linear algebra for the cubic-Newton subproblems.

The Jacobian of the saddle operator is non-symmetric, so the shifted
solves use LU with partial pivoting rather than a symmetric
factorization. Sizes stay small (n <= 200); correctness beats speed,
with hand-rolled fast paths for n in {1, 2} since those dominate the
benchmark workloads.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SingularSystem

PIVOT_TOL = 1e-14
RESIDUAL_FACTOR = 1e-10


def vector_norm(v: np.ndarray) -> float:
    """Euclidean norm (underflow-safe)."""
    n = v.shape[0]
    if n == 1:
        return abs(float(v[0]))
    if n == 2:
        return math.hypot(float(v[0]), float(v[1]))
    r = float(math.sqrt(float(np.dot(v, v))))
    if r == 0.0 and np.any(v):
        m = float(np.abs(v).max())
        w = v / m
        return m * float(math.sqrt(float(np.dot(w, w))))
    return r


def solve_shifted(J: np.ndarray, lam: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (J + lam*I) s = rhs by partial-pivot LU.

    Raises SingularSystem when a pivot magnitude falls below 1e-14 or the
    back-substituted residual exceeds 1e-10 * (1 + ||rhs||) even after one
    refinement pass.
    """
    n = rhs.shape[0]
    if J.shape != (n, n):
        raise SingularSystem(f"matrix shape {J.shape} does not match rhs dim {n}")

    if n == 1:
        a = float(J[0, 0]) + lam
        if abs(a) < PIVOT_TOL:
            raise SingularSystem("1x1 pivot below threshold")
        return np.array([float(rhs[0]) / a])

    if n == 2:
        a = float(J[0, 0]) + lam
        b = float(J[0, 1])
        c = float(J[1, 0])
        d = float(J[1, 1]) + lam
        # Partial pivoting on the first column; second pivot is det/pivot.
        p1 = max(abs(a), abs(c))
        if p1 < PIVOT_TOL:
            raise SingularSystem("2x2 first pivot below threshold")
        det = a * d - b * c
        if abs(det) / p1 < PIVOT_TOL:
            raise SingularSystem("2x2 second pivot below threshold")
        r0 = float(rhs[0])
        r1 = float(rhs[1])
        return np.array([(d * r0 - b * r1) / det, (a * r1 - c * r0) / det])

    A = J + lam * np.eye(n)
    s = _lu_solve(A, np.asarray(rhs, dtype=float))

    resid = vector_norm(A @ s - rhs)
    bound = RESIDUAL_FACTOR * (1.0 + vector_norm(rhs))
    if resid > bound:
        # One step of iterative refinement before giving up.
        s = s + _lu_solve(A, rhs - A @ s)
        resid = vector_norm(A @ s - rhs)
        if resid > bound:
            raise SingularSystem(
                f"solve residual {resid:.3e} exceeds bound {bound:.3e}"
            )
    return s


def _lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    U = A.astype(float, copy=True)
    x = b.astype(float, copy=True)
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(U[k:, k])))
        if abs(U[p, k]) < PIVOT_TOL:
            raise SingularSystem(f"pivot {abs(U[p, k]):.3e} below threshold at column {k}")
        if p != k:
            U[[k, p]] = U[[p, k]]
            x[[k, p]] = x[[p, k]]
        mult = U[k + 1 :, k] / U[k, k]
        U[k + 1 :, k:] -= np.outer(mult, U[k, k:])
        x[k + 1 :] -= mult * x[k]
    if abs(U[n - 1, n - 1]) < PIVOT_TOL:
        raise SingularSystem("last pivot below threshold")
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - np.dot(U[k, k + 1 :], x[k + 1 :])) / U[k, k]
    return x


def spectral_norm_upper(M: np.ndarray) -> float:
    """Cheap upper bound on the spectral norm (Frobenius)."""
    return float(np.sqrt(np.sum(M * M)))
