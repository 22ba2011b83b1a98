"""Operator views: ledger-charged access to F(z) and its Jacobian.

The solvers only ever see this interface, so the same NPE/LEN/AIPE code
runs on the full saddle operator, on one-variable slices, and on
explicit convex objectives. A view owns a jacobian snapshot cache used
by the lazy oracle: re-reading the cached snapshot does not charge
``n_hess``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .domains import Domain, ProductDomain
from .errors import NonFiniteValue
from .ledger import OracleLedger
from .problems import SaddleProblem


def _check_finite(v: np.ndarray, what: str) -> np.ndarray:
    if v.ndim == 1 and v.shape[0] <= 2:
        # Scalar checks beat the ufunc reduction at these sizes.
        if not math.isfinite(float(v[0])) or (
            v.shape[0] == 2 and not math.isfinite(float(v[1]))
        ):
            raise NonFiniteValue(f"{what} returned a non-finite value")
        return v
    if not np.all(np.isfinite(v)):
        raise NonFiniteValue(f"{what} returned a non-finite value")
    return v


class OperatorView:
    """Monotone vector field F with Jacobian access and call accounting.

    Parameters
    ----------
    f : callable(z) -> vector
    jf : callable(z) -> matrix
    domain : feasible set for z
    ell : Lipschitz constant of F
    rho : Lipschitz constant of the Jacobian
    mu : order-3 uniform monotonicity modulus (0 for plain monotone)
    ledger : shared OracleLedger
    fun : optional callable(z) -> float when F is a gradient field
    """

    def __init__(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        jf: Callable[[np.ndarray], np.ndarray],
        domain,
        ell: float,
        rho: float,
        mu: float,
        ledger: OracleLedger,
        fun: Callable[[np.ndarray], float] | None = None,
    ):
        self._f = f
        self._jf = jf
        self.domain = domain
        self.ell = float(ell)
        self.rho = float(rho)
        self.mu = float(mu)
        self.ledger = ledger
        self._fun = fun
        self._snap_point: np.ndarray | None = None
        self._snap_jac: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.domain.dim

    def F(self, z: np.ndarray) -> np.ndarray:
        self.ledger.charge_grad()
        return _check_finite(self._f(z), "operator")

    def JF(self, z: np.ndarray) -> np.ndarray:
        self.ledger.charge_hess()
        return _check_finite(self._jf(z), "jacobian")

    def value(self, z: np.ndarray) -> float:
        if self._fun is None:
            raise NonFiniteValue("view has no scalar objective")
        self.ledger.charge_value()
        out = float(self._fun(z))
        if not np.isfinite(out):
            raise NonFiniteValue("objective returned a non-finite value")
        return out

    @property
    def has_value(self) -> bool:
        return self._fun is not None

    # Lazy snapshot machinery -------------------------------------------------

    def start_snapshot_sequence(self) -> None:
        self._snap_point = None
        self._snap_jac = None
        self.ledger.charge_snapshot_seq()

    def jacobian_snapshot(self, point: np.ndarray) -> np.ndarray:
        """Jacobian at ``point``, reusing the cache on identical points."""
        if self._snap_point is not None and np.array_equal(self._snap_point, point):
            return self._snap_jac
        jac = self.JF(point)
        self._snap_point = np.array(point, copy=True)
        self._snap_jac = jac
        return jac


def saddle_operator(problem: SaddleProblem, ledger: OracleLedger) -> OperatorView:
    """F(z) = (grad_x f, -grad_y f) over X x Y with the Jacobian assembled
    as [[Hxx, Hxy], [-Hyx, -Hyy]]."""
    dx = problem.dx
    dim = problem.dx + problem.dy

    def f(z):
        gx, gy = problem.grad(z[:dx], z[dx:])
        out = np.empty(dim)
        out[:dx] = gx
        out[dx:] = -gy
        return out

    def jf(z):
        hxx, hxy, hyx, hyy = problem.hess(z[:dx], z[dx:])
        out = np.empty((dim, dim))
        out[:dx, :dx] = hxx
        out[:dx, dx:] = hxy
        out[dx:, :dx] = -hyx
        out[dx:, dx:] = -hyy
        return out

    return OperatorView(
        f,
        jf,
        ProductDomain(problem.dom_x, problem.dom_y),
        ell=problem.ell,
        rho=problem.rho,
        mu=problem.mu,
        ledger=ledger,
    )


def eval_F(view: OperatorView, z) -> np.ndarray:
    """Operator evaluation; accepts a PairPoint or a concatenated array."""
    arr = z if isinstance(z, np.ndarray) else z.concat()
    return view.F(arr)


def y_slice_field(
    problem: SaddleProblem,
    x0: np.ndarray,
    ledger: OracleLedger,
    *,
    center: np.ndarray | None = None,
    weight: float = 0.0,
) -> OperatorView:
    """Gradient field of q(y) = -f(x0, y) + (weight/3)||y - center||^3.

    Minimizing q maximizes the y-slice; the optional cubic term realizes
    proximal subproblems in y.
    """
    from .problems import _cubic_grad, _cubic_hess, _cubic_value

    def fun(y):
        out = -problem.value(x0, y)
        if weight:
            out += _cubic_value(weight, y - center)
        return out

    def f(y):
        g = -problem.grad(x0, y)[1]
        if weight:
            g = g + _cubic_grad(weight, y - center)
        return g

    def jf(y):
        h = -problem.hess(x0, y)[3]
        if weight:
            h = h + _cubic_hess(weight, y - center)
        return h

    Ry = problem.dom_y.sup_distance(center) if weight else 0.0
    return OperatorView(
        f,
        jf,
        problem.dom_y,
        ell=problem.ell + 2.0 * weight * Ry,
        rho=problem.rho + 2.0 * weight,
        mu=problem.mu_y + weight / 2.0,
        ledger=ledger,
        fun=fun,
    )


def x_slice_field(
    problem: SaddleProblem,
    y0: np.ndarray,
    ledger: OracleLedger,
    *,
    center: np.ndarray | None = None,
    weight: float = 0.0,
) -> OperatorView:
    """Gradient field of h(x) = f(x, y0) + (weight/3)||x - center||^3."""
    from .problems import _cubic_grad, _cubic_hess, _cubic_value

    def fun(x):
        out = problem.value(x, y0)
        if weight:
            out += _cubic_value(weight, x - center)
        return out

    def f(x):
        g = problem.grad(x, y0)[0]
        if weight:
            g = g + _cubic_grad(weight, x - center)
        return g

    def jf(x):
        h = problem.hess(x, y0)[0]
        if weight:
            h = h + _cubic_hess(weight, x - center)
        return h

    Rx = problem.dom_x.sup_distance(center) if weight else 0.0
    return OperatorView(
        f,
        jf,
        problem.dom_x,
        ell=problem.ell + 2.0 * weight * Rx,
        rho=problem.rho + 2.0 * weight,
        mu=problem.mu_x + weight / 2.0,
        ledger=ledger,
        fun=fun,
    )


def gradient_field(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    hess: Callable[[np.ndarray], np.ndarray],
    domain,
    *,
    ell: float,
    rho: float,
    mu: float,
    ledger: OracleLedger,
) -> OperatorView:
    """View for an explicit convex objective h with full oracles."""
    return OperatorView(grad, hess, domain, ell=ell, rho=rho, mu=mu, ledger=ledger, fun=fun)
