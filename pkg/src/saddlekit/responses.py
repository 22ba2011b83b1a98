"""Best responses and inexact value/gradient oracles for the primal
function Phi(x) = max_y f(x,y) and its penalized relatives.

A best response reduces to a closed form when the slice is linear
(bilinear family, or zero cubic weight on that block); otherwise the
slice is uniformly convex/concave and a restarted solver drives the
iterate within the required distance. By Lipschitzness, value accuracy
delta needs distance delta/L and gradient accuracy needs delta/ell.
"""

from __future__ import annotations

import math

import numpy as np

from .aipe import solve_uc_min
from .domains import Ball, Box, FreeBall
from .errors import NoConvergence
from .ledger import OracleLedger
from .linalg import vector_norm
from .npe import NpeConfig, npe_restart
from .operators import OperatorView, x_slice_field, y_slice_field
from .problems import SaddleProblem


def _linear_argmax(dom, g: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Maximize <g, p> over a ball or box; flat directions keep the start."""
    if isinstance(dom, Ball):
        n = vector_norm(g)
        if n == 0:
            return dom.project(start)
        return dom.center + dom.radius * g / n
    if isinstance(dom, Box):
        start_c = dom.project(start)
        return np.where(g > 0, dom.upper, np.where(g < 0, dom.lower, start_c))
    if isinstance(dom, FreeBall):
        if vector_norm(g) == 0:
            return np.array(start, copy=True)
        raise NoConvergence("linear objective unbounded on a free block")
    raise NoConvergence(f"no linear argmax for domain {type(dom).__name__}")


def _solve_field_to_distance(
    field: OperatorView,
    z0: np.ndarray,
    dist_target: float,
    method: str,
    m: int = 1,
    crn_tol: float = 1e-10,
) -> np.ndarray:
    if field.mu <= 0:
        raise NoConvergence("slice solve needs a positive uniform modulus")
    if method in ("anpe", "alen"):
        rep = solve_uc_min(
            field,
            z0,
            dist_target,
            engine="lazy" if method == "alen" else "exact",
            m=m,
            crn_tol=crn_tol,
        )
        return rep.z_out
    # Restarted cubic-Newton extragradient on the slice VI.
    d0 = field.domain.diameter()
    S = max(1, math.ceil(math.log2(max(d0 / max(dist_target, 1e-300), 2.0))))
    gamma = 2.0 * max(field.rho, 1e-12)
    cfg = NpeConfig(gamma=gamma, S=S, m=m, crn_tol=crn_tol)
    rep = npe_restart(field, z0, cfg)
    return rep.z_out


def solve_y_slice(
    problem: SaddleProblem,
    x0: np.ndarray,
    dist_target: float,
    ledger: OracleLedger,
    *,
    y_start: np.ndarray | None = None,
    method: str = "npe",
    m: int = 1,
    crn_tol: float = 1e-10,
) -> np.ndarray:
    """y with ||y - argmax_y f(x0, .)|| <= dist_target."""
    start = y_start if y_start is not None else problem.dom_y.project(np.zeros(problem.dy))
    if problem.mu_y == 0.0:
        # In the synthetic families a zero modulus means the slice is
        # linear in y, so the best response is closed-form.
        ledger.charge_grad()
        g = problem.grad(x0, start)[1]
        return _linear_argmax(problem.dom_y, g, start)
    field = y_slice_field(problem, x0, ledger)
    return _solve_field_to_distance(field, start, dist_target, method, m, crn_tol)


def solve_x_slice(
    problem: SaddleProblem,
    y0: np.ndarray,
    dist_target: float,
    ledger: OracleLedger,
    *,
    x_start: np.ndarray | None = None,
    method: str = "npe",
    m: int = 1,
    center: np.ndarray | None = None,
    weight: float = 0.0,
    crn_tol: float = 1e-10,
) -> np.ndarray:
    """x with ||x - argmin_x [f(x, y0) + (weight/3)||x-center||^3]|| <= dist_target."""
    start = x_start if x_start is not None else problem.dom_x.project(np.zeros(problem.dx))
    if problem.mu_x == 0.0 and weight == 0.0:
        ledger.charge_grad()
        g = problem.grad(start, y0)[0]
        return _linear_argmax(problem.dom_x, -g, start)
    field = x_slice_field(problem, y0, ledger, center=center, weight=weight)
    return _solve_field_to_distance(field, start, dist_target, method, m, crn_tol)


def inexact_value_Phi(
    problem: SaddleProblem,
    x: np.ndarray,
    delta: float,
    ledger: OracleLedger | None = None,
    *,
    method: str = "npe",
    y_start: np.ndarray | None = None,
) -> float:
    """f(x, yhat) within delta of Phi(x) = max_y f(x, y)."""
    ledger = ledger if ledger is not None else OracleLedger()
    dist = delta / max(problem.L, 1e-12)
    yhat = solve_y_slice(problem, x, dist, ledger, y_start=y_start, method=method)
    ledger.charge_value()
    return float(problem.value(x, yhat))


def inexact_grad_Phi(
    problem: SaddleProblem,
    x: np.ndarray,
    delta: float,
    ledger: OracleLedger | None = None,
    *,
    method: str = "npe",
    y_start: np.ndarray | None = None,
) -> np.ndarray:
    """grad_x f(x, yhat) within delta of the primal gradient (Danskin)."""
    ledger = ledger if ledger is not None else OracleLedger()
    dist = delta / max(problem.ell, 1e-12)
    yhat = solve_y_slice(problem, x, dist, ledger, y_start=y_start, method=method)
    ledger.charge_grad()
    return problem.grad(x, yhat)[0]


def best_response_y(
    problem: SaddleProblem,
    xhat: np.ndarray,
    tol: float,
    ledger: OracleLedger | None = None,
    *,
    y_start: np.ndarray | None = None,
) -> np.ndarray:
    """yhat with f(xhat, yhat) >= Phi(xhat) - tol."""
    ledger = ledger if ledger is not None else OracleLedger()
    dist = tol / max(problem.L, 1e-12)
    return solve_y_slice(problem, xhat, dist, ledger, y_start=y_start)


def best_response_x(
    problem: SaddleProblem,
    yhat: np.ndarray,
    tol: float,
    ledger: OracleLedger | None = None,
    *,
    x_start: np.ndarray | None = None,
) -> np.ndarray:
    """xhat with f(xhat, yhat) <= min_x f(x, yhat) + tol."""
    ledger = ledger if ledger is not None else OracleLedger()
    dist = tol / max(problem.L, 1e-12)
    return solve_x_slice(problem, yhat, dist, ledger, x_start=x_start)
