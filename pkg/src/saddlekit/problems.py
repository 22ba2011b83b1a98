"""Minimax problem instances and the synthetic test-problem suite.

A ``SaddleProblem`` bundles the objective oracles (value, gradient,
Hessian blocks) with smoothness constants and feasible domains. The
``mu_x``/``mu_y`` fields store the order-3 uniform convexity/concavity
moduli: the cubic function (w/3)*||v||^3 contributes modulus w/2 and a
Hessian-Lipschitz increment of 2*w.

Synthetic families:

* ``bilinear``:        f = x'Ay + b'x + c'y over balls (rho = 0)
* ``cubic_coupled``:   f = (wx/3)||x-x*||^3 + (x-x*)'A(y-y*) - (wy/3)||y-y*||^3
* ``quartic_coupled``: cubic_coupled plus (1/4) sum_i (a_i'(x-x*))^4

All families place the saddle point interior to the domains and build
the gradient field to vanish there, so distance to the solution is
measurable without solving the problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .domains import Ball, Box, Domain, FreeBall, ProductDomain
from .errors import BadParams
from .linalg import vector_norm


@dataclass(frozen=True)
class PairPoint:
    """A point z = (x, y) in the product space, block structure kept."""

    x: np.ndarray
    y: np.ndarray

    def concat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @staticmethod
    def from_concat(z: np.ndarray, dx: int) -> "PairPoint":
        return PairPoint(z[:dx].copy(), z[dx:].copy())

    @property
    def dims(self) -> tuple[int, int]:
        return self.x.shape[0], self.y.shape[0]


GradPair = tuple[np.ndarray, np.ndarray]
HessBlocks = tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class SaddleProblem:
    value: Callable[[np.ndarray, np.ndarray], float]
    grad: Callable[[np.ndarray, np.ndarray], GradPair]
    hess: Callable[[np.ndarray, np.ndarray], HessBlocks]
    L: float
    ell: float
    rho: float
    mu_x: float
    mu_y: float
    dom_x: Domain
    dom_y: Domain
    known_saddle: PairPoint | None = None
    family: str = "custom"
    meta: dict = field(default_factory=dict)

    @property
    def dx(self) -> int:
        return self.dom_x.dim

    @property
    def dy(self) -> int:
        return self.dom_y.dim

    def product_domain(self) -> ProductDomain:
        return ProductDomain(self.dom_x, self.dom_y)

    @property
    def mu(self) -> float:
        return min(self.mu_x, self.mu_y)


def _cubic_value(w: float, v: np.ndarray) -> float:
    return (w / 3.0) * vector_norm(v) ** 3


def _cubic_grad(w: float, v: np.ndarray) -> np.ndarray:
    return (w * vector_norm(v)) * v


def _cubic_hess(w: float, v: np.ndarray) -> np.ndarray:
    # Hessian of (w/3)||v||^3; the removable singularity at v = 0 is
    # filled with its continuous limit, the zero matrix.
    n = v.shape[0]
    r = vector_norm(v)
    if r == 0.0:
        return np.zeros((n, n))
    if n == 1:
        return np.array([[2.0 * w * r]])
    if n == 2:
        a = float(v[0])
        b = float(v[1])
        c = w / r
        out = np.empty((2, 2))
        out[0, 0] = w * r + c * a * a
        out[0, 1] = out[1, 0] = c * a * b
        out[1, 1] = w * r + c * b * b
        return out
    return w * (r * np.eye(n) + np.outer(v, v) / r)


def _sup_norm(dom: Domain) -> float:
    """sup of ||p|| over the domain."""
    return dom.sup_distance(np.zeros(dom.dim))


def make_test_problem(
    family: str,
    dims: tuple[int, int],
    seed: int,
    *,
    mu_x: float = 1.0,
    mu_y: float = 1.0,
    coupling: float = 1.0,
    radius: float = 1.0,
    saddle_offset: float = 0.3,
    n_quartic: int | None = None,
    quartic_scale: float = 1.0,
    box_domains: bool = False,
    x_star: np.ndarray | None = None,
    y_star: np.ndarray | None = None,
    A: np.ndarray | None = None,
    free_domains: bool = False,
) -> SaddleProblem:
    """Build a synthetic instance with exact constants and known saddle.

    ``mu_x``/``mu_y`` are the cubic-term weights of the coupled families
    (the uniform-convexity moduli recorded on the problem are half of
    them). ``radius`` controls both domains; the saddle is placed at
    ``saddle_offset * radius`` from the centers unless given explicitly.
    """
    dx, dy = dims
    if radius <= 0:
        raise BadParams("radius must be positive")
    if mu_x < 0 or mu_y < 0:
        raise BadParams("cubic weights must be nonnegative")
    if family not in ("bilinear", "cubic_coupled", "quartic_coupled"):
        raise BadParams(f"unknown family {family!r}")

    rng = np.random.default_rng(seed)
    if free_domains:
        dom_x: Domain = FreeBall(np.zeros(dx), radius)
        dom_y: Domain = FreeBall(np.zeros(dy), radius)
    elif box_domains:
        dom_x = Box(-radius * np.ones(dx), radius * np.ones(dx))
        dom_y = Box(-radius * np.ones(dy), radius * np.ones(dy))
    else:
        dom_x = Ball(np.zeros(dx), radius)
        dom_y = Ball(np.zeros(dy), radius)

    def interior_point(d: int) -> np.ndarray:
        v = rng.standard_normal(d)
        n = vector_norm(v)
        if n == 0:
            return np.zeros(d)
        return v * (saddle_offset * radius / n)

    if A is None:
        A = coupling * rng.standard_normal((dx, dy)) / np.sqrt(max(dx, dy))
    else:
        A = np.asarray(A, dtype=float)
    norm_A = float(np.linalg.norm(A, 2)) if np.any(A) else 0.0

    if x_star is None:
        x_star = interior_point(dx)
    if y_star is None:
        y_star = interior_point(dy)

    if family == "bilinear":
        b = -A @ y_star
        c = -A.T @ x_star

        def value(x, y):
            return float(x @ A @ y + b @ x + c @ y)

        def grad(x, y):
            return A @ y + b, A.T @ x + c

        def hess(x, y):
            return (
                np.zeros((dx, dx)),
                A,
                A.T,
                np.zeros((dy, dy)),
            )

        ymax = _sup_norm(dom_y)
        xmax = _sup_norm(dom_x)
        Lx = norm_A * ymax + vector_norm(b)
        Ly = norm_A * xmax + vector_norm(c)
        return SaddleProblem(
            value=value,
            grad=grad,
            hess=hess,
            L=float(np.hypot(Lx, Ly)),
            ell=norm_A,
            rho=0.0,
            mu_x=0.0,
            mu_y=0.0,
            dom_x=dom_x,
            dom_y=dom_y,
            known_saddle=PairPoint(x_star, y_star),
            family="bilinear",
            meta={"A": A, "b": b, "c": c},
        )

    Rx = dom_x.sup_distance(x_star)
    Ry = dom_y.sup_distance(y_star)

    if family == "quartic_coupled":
        nq = n_quartic if n_quartic is not None else dx
        dirs = rng.standard_normal((nq, dx))
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-12)
        dirs *= quartic_scale
    else:
        dirs = np.zeros((0, dx))

    def value(x, y):
        vx = x - x_star
        vy = y - y_star
        out = (
            _cubic_value(mu_x, vx)
            + float(vx @ A @ vy)
            - _cubic_value(mu_y, vy)
        )
        if dirs.shape[0]:
            out += 0.25 * float(np.sum((dirs @ vx) ** 4))
        return out

    def grad(x, y):
        vx = x - x_star
        vy = y - y_star
        gx = _cubic_grad(mu_x, vx) + A @ vy
        gy = A.T @ vx - _cubic_grad(mu_y, vy)
        if dirs.shape[0]:
            gx = gx + (dirs.T @ (dirs @ vx) ** 3)
        return gx, gy

    def hess(x, y):
        vx = x - x_star
        vy = y - y_star
        hxx = _cubic_hess(mu_x, vx)
        hyy = -_cubic_hess(mu_y, vy)
        if dirs.shape[0]:
            t = dirs @ vx
            hxx = hxx + 3.0 * (dirs.T * (t**2)) @ dirs
        return hxx, A, A.T, hyy

    dir_norms = np.linalg.norm(dirs, axis=1) if dirs.shape[0] else np.zeros(0)
    rho_quartic = 6.0 * float(np.sum(dir_norms**4)) * Rx
    ell_quartic = 3.0 * float(np.sum(dir_norms**4)) * Rx**2
    L_quartic = float(np.sum(dir_norms**4)) * Rx**3

    Lx = mu_x * Rx**2 + norm_A * Ry + L_quartic
    Ly = mu_y * Ry**2 + norm_A * Rx
    return SaddleProblem(
        value=value,
        grad=grad,
        hess=hess,
        L=float(np.hypot(Lx, Ly)),
        ell=2.0 * max(mu_x * Rx, mu_y * Ry) + norm_A + ell_quartic,
        rho=2.0 * max(mu_x, mu_y) + rho_quartic,
        mu_x=mu_x / 2.0,
        mu_y=mu_y / 2.0,
        dom_x=dom_x,
        dom_y=dom_y,
        known_saddle=PairPoint(x_star, y_star),
        family=family,
        meta={"A": A, "x_star": x_star, "y_star": y_star, "dirs": dirs},
    )


def quadratic_saddle(
    dims: tuple[int, int],
    seed: int,
    *,
    mu_quad: float = 1.0,
    coupling: float = 1.0,
    radius: float = 4.0,
) -> SaddleProblem:
    """Strongly monotone quadratic saddle with a known interior solution.

    f = 0.5 x'Px - 0.5 y'Qy + x'By plus linear terms chosen so the
    gradient field vanishes at a seeded z*. Unconstrained (FreeBall
    domains); rho = 0 exactly.
    """
    dx, dy = dims
    rng = np.random.default_rng(seed)
    Gx = rng.standard_normal((dx, dx))
    Gy = rng.standard_normal((dy, dy))
    P = mu_quad * np.eye(dx) + Gx @ Gx.T / dx
    Q = mu_quad * np.eye(dy) + Gy @ Gy.T / dy
    B = coupling * rng.standard_normal((dx, dy)) / np.sqrt(max(dx, dy))
    x_star = rng.standard_normal(dx) * 0.3 * radius
    y_star = rng.standard_normal(dy) * 0.3 * radius
    b = -(P @ x_star + B @ y_star)
    c = Q @ y_star - B.T @ x_star

    def value(x, y):
        return float(0.5 * x @ P @ x - 0.5 * y @ Q @ y + x @ B @ y + b @ x + c @ y)

    def grad(x, y):
        return P @ x + B @ y + b, -Q @ y + B.T @ x + c

    def hess(x, y):
        return P, B, B.T, -Q

    J = np.block([[P, B], [-B.T, Q]])
    ell = float(np.linalg.norm(J, 2))
    sup = radius * np.sqrt(dx + dy) + vector_norm(x_star) + vector_norm(y_star)
    return SaddleProblem(
        value=value,
        grad=grad,
        hess=hess,
        L=ell * sup + vector_norm(b) + vector_norm(c),
        ell=ell,
        rho=0.0,
        mu_x=0.0,
        mu_y=0.0,
        dom_x=FreeBall(np.zeros(dx), radius),
        dom_y=FreeBall(np.zeros(dy), radius),
        known_saddle=PairPoint(x_star, y_star),
        family="quadratic",
        meta={"P": P, "Q": Q, "B": B},
    )


def with_cubic_penalty(
    problem: SaddleProblem,
    *,
    x_center: np.ndarray | None = None,
    x_weight: float = 0.0,
    y_center: np.ndarray | None = None,
    y_weight: float = 0.0,
) -> SaddleProblem:
    """Add (wx/3)||x-cx||^3 - (wy/3)||y-cy||^3 and refresh constants.

    The increments follow the cubic function's properties: each weight w
    adds w/2 to the corresponding uniform modulus and 2w to the
    Hessian-Lipschitz constant.
    """
    if x_weight < 0 or y_weight < 0:
        raise BadParams("penalty weights must be nonnegative")
    if x_weight > 0 and x_center is None:
        raise BadParams("x penalty needs a center")
    if y_weight > 0 and y_center is None:
        raise BadParams("y penalty needs a center")
    if x_weight == 0 and y_weight == 0:
        return problem

    base_value, base_grad, base_hess = problem.value, problem.grad, problem.hess
    cx = x_center if x_center is not None else np.zeros(problem.dx)
    cy = y_center if y_center is not None else np.zeros(problem.dy)
    wx, wy = float(x_weight), float(y_weight)

    def value(x, y):
        out = base_value(x, y)
        if wx:
            out += _cubic_value(wx, x - cx)
        if wy:
            out -= _cubic_value(wy, y - cy)
        return out

    def grad(x, y):
        gx, gy = base_grad(x, y)
        if wx:
            gx = gx + _cubic_grad(wx, x - cx)
        if wy:
            gy = gy - _cubic_grad(wy, y - cy)
        return gx, gy

    def hess(x, y):
        hxx, hxy, hyx, hyy = base_hess(x, y)
        if wx:
            hxx = hxx + _cubic_hess(wx, x - cx)
        if wy:
            hyy = hyy - _cubic_hess(wy, y - cy)
        return hxx, hxy, hyx, hyy

    Rx = problem.dom_x.sup_distance(cx) if wx else 0.0
    Ry = problem.dom_y.sup_distance(cy) if wy else 0.0
    return replace(
        problem,
        value=value,
        grad=grad,
        hess=hess,
        L=problem.L + wx * Rx**2 + wy * Ry**2,
        ell=problem.ell + 2.0 * max(wx * Rx, wy * Ry),
        rho=problem.rho + 2.0 * max(wx, wy),
        mu_x=problem.mu_x + wx / 2.0,
        mu_y=problem.mu_y + wy / 2.0,
        known_saddle=None,
        family="penalized",
        meta={**problem.meta, "base_family": problem.family},
    )
