"""Triple-loop accelerated minimax solver and its parameter scheduler.

Structure of one run on a uniformly-convex-uniformly-concave problem:

* outer loop:  restarted accelerated scheme minimizing the primal
  function Phi(x) = max_y f(x, y), with proximal oracle ``iprox_phi``;
* middle loop: inside each Phi-prox, a restarted accelerated scheme
  maximizing Psi(y; xb) = min_x [f(x,y) + (gamma/3)||x - xb||^3], with
  proximal oracle ``iprox_psi``;
* inner loop:  inside each Psi-prox, a linearly convergent saddle
  engine (restarted cubic-Newton extragradient, eager or lazy) on
  f + (gamma/3)||x - xb||^3 - (gamma/3)||y - yb||^3, followed by one
  extragradient polish step.

Plain convex-concave problems are handled by ``regularize`` first,
which adds the cubic terms with weights eps/(2*Dx^3), eps/(2*Dy^3) so
an eps/3-solution of the surrogate is an eps-solution of the original.

Zeroth/first-order oracles for Phi and Psi come from best responses;
each prox call stores its inner best response so the accelerated loops
read value/gradient at the just-returned point without a second solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .aipe import AipeConfig, InexactOracleBundle, aipe_restart, solve_uc_min
from .crn import ProxCertificate, eg_step
from .errors import BadParams
from .ledger import OracleLedger
from .linalg import vector_norm
from .npe import (
    STATUS_BUDGET,
    STATUS_CONVERGED,
    NpeConfig,
    SolverReport,
    lazy_npe_restart,
    npe_restart,
)
from .operators import saddle_operator, x_slice_field
from .problems import PairPoint, SaddleProblem, with_cubic_penalty


@dataclass(frozen=True)
class SurrogateProblem:
    """A cubic-regularized view of a base problem."""

    kind: str  # "regularized" | "g_fixed_xbar" | "h_fixed_xbar_ybar"
    base: SaddleProblem
    problem: SaddleProblem
    x_center: np.ndarray | None = None
    y_center: np.ndarray | None = None
    x_weight: float = 0.0
    y_weight: float = 0.0


def regularize(problem: SaddleProblem, z0: PairPoint, eps: float) -> SurrogateProblem:
    """Uniformly-convex-concave surrogate with weights eps/(2*D^3).

    An eps/3-solution of the surrogate is an eps-solution of the base
    problem; the surrogate deviates from the base by at most eps/3
    anywhere on the domain.
    """
    if eps <= 0:
        raise BadParams("eps must be positive")
    dx_diam = problem.dom_x.diameter()
    dy_diam = problem.dom_y.diameter()
    if not (math.isfinite(dx_diam) and math.isfinite(dy_diam)):
        raise BadParams("regularization needs finite diameters")
    wx = eps / (2.0 * dx_diam**3)
    wy = eps / (2.0 * dy_diam**3)
    surr = with_cubic_penalty(
        problem, x_center=z0.x, x_weight=wx, y_center=z0.y, y_weight=wy
    )
    return SurrogateProblem(
        kind="regularized",
        base=problem,
        problem=surr,
        x_center=z0.x,
        y_center=z0.y,
        x_weight=wx,
        y_weight=wy,
    )


def g_surrogate(problem: SaddleProblem, xbar: np.ndarray, gamma: float) -> SurrogateProblem:
    surr = with_cubic_penalty(problem, x_center=xbar, x_weight=gamma)
    return SurrogateProblem("g_fixed_xbar", problem, surr, x_center=xbar, x_weight=gamma)


def h_surrogate(
    problem: SaddleProblem, xbar: np.ndarray, ybar: np.ndarray, gamma: float
) -> SurrogateProblem:
    surr = with_cubic_penalty(
        problem, x_center=xbar, x_weight=gamma, y_center=ybar, y_weight=gamma
    )
    return SurrogateProblem(
        "h_fixed_xbar_ybar", problem, surr, xbar, ybar, gamma, gamma
    )


@dataclass(frozen=True)
class FrameworkConfig:
    gamma: float
    m: int = 1
    zeta1: float = 1e-5
    zeta2: float = 1e-7
    zeta3: float = 1e-9
    delta: float = 1e-12
    delta_mode: str = "practical"
    saddle_engine: str = "npe-restart"  # or "len-restart"
    min_engine: str = "anpe"  # or "alen"
    budget: int | None = 1_000_000
    crn_tol: float = 1e-10
    # Scheduled moduli; None means use the problem's own fields. The
    # convex-concave reduction pipeline sets these to eps/(4*D^3).
    mu_x_sched: float | None = None
    mu_y_sched: float | None = None
    T_out: int | None = None
    T_mid: int | None = None


def _prox_x_residual_bound(ell, rho, D, gamma, mu_y, zeta2) -> float:
    """Scheduled residual of the Phi-prox certificate at precision zeta2."""
    c1 = ell + 2.0 * gamma * D
    c2 = ell + 2.0 * rho * D
    half = max(gamma / 2.0, 1e-300)
    mu_y = max(mu_y, 1e-300)
    t1 = 6.0 * c1 * zeta2
    t2 = c2 * math.sqrt(ell / mu_y) / half**0.25 * t1**0.25
    t3 = c2 * zeta2
    t4 = c2 * math.sqrt(ell / mu_y) * c1**0.25 / half**0.25 * math.sqrt(zeta2)
    return t1 + t2 + t3 + t4


def _prox_xy_residual_bound(ell, gamma, D, zeta3) -> float:
    """Scheduled residual of the Psi-prox certificate at precision zeta3."""
    c = ell + 2.0 * gamma * D
    half = max(gamma / 2.0, 1e-300)
    t1 = 6.0 * c * zeta3
    t2 = c / math.sqrt(half) * math.sqrt(t1)
    t3 = c**1.5 / half**0.75 * t1**0.25
    return t1 + t2 + t3


def schedule_params(
    problem: SaddleProblem,
    eps: float,
    mode: str = "practical",
    engine: str = "npe",
    m: int = 1,
    budget: int | None = 1_000_000,
) -> FrameworkConfig:
    """Instantiate the framework parameters for a target accuracy.

    The proximal regularization is gamma = rho for the eager engine and
    gamma = rho / sqrt(m) for the lazy one. Practical mode cascades the
    loop precisions by two decades per level from zeta1 = 1e-2 * eps;
    theory mode derives them from the explicit certificate residual
    chains, with every term held to a quarter of the target.
    """
    if eps <= 0:
        raise BadParams("eps must be positive")
    if engine not in ("npe", "len"):
        raise BadParams(f"unknown engine {engine!r}")
    if mode not in ("practical", "theory"):
        raise BadParams(f"unknown mode {mode!r}")
    gamma = problem.rho if engine == "npe" else problem.rho / math.sqrt(m)
    if gamma <= 0:
        raise BadParams("framework needs rho > 0")
    D = max(problem.dom_x.diameter(), problem.dom_y.diameter())
    scale = max(1.0, problem.L * D)

    if mode == "practical":
        zeta1 = 1e-2 * eps
        zeta2 = 1e-2 * zeta1
        zeta3 = 1e-2 * zeta2
        delta = 1e-12 * scale
    else:
        ell, rho = problem.ell, problem.rho
        mu_x = max(problem.mu_x, 1e-300)
        mu_y = max(problem.mu_y, 1e-300)
        zeta1 = mu_y * eps**2 / (147.0 * ell**3 * D**2)
        delta = mu_x * zeta1**4 / (144.0 * D**2)
        c1 = ell + 2.0 * gamma * D
        c2 = ell + 2.0 * rho * D
        half = gamma / 2.0
        q = delta / 4.0
        zeta2 = min(
            delta / (24.0 * c1),
            q**4 * mu_y**2 * half / (c2**4 * ell**2 * 6.0 * c1),
            delta / (4.0 * c2),
            (q * math.sqrt(mu_y / ell) * half**0.25 / (c2 * c1**0.25)) ** 2,
        )
        delta2 = mu_y * zeta2**4 / (144.0 * D**2)
        q2 = delta2 / 4.0
        zeta3 = min(
            delta2 / (24.0 * c1),
            q2**2 * half / (6.0 * c1**3),
            q2**4 * half**3 / (6.0 * c1**7),
        )
    return FrameworkConfig(
        gamma=gamma,
        m=m,
        zeta1=zeta1,
        zeta2=zeta2,
        zeta3=zeta3,
        delta=delta,
        delta_mode=mode,
        saddle_engine="npe-restart" if engine == "npe" else "len-restart",
        min_engine="anpe" if engine == "npe" else "alen",
        budget=budget,
    )


class _Memo:
    """Small FIFO memo of (value, grad) oracle outputs keyed by point."""

    def __init__(self, cap: int = 64):
        self.cap = cap
        self.data: dict[bytes, tuple[float, np.ndarray]] = {}

    def put(self, point: np.ndarray, value: float, grad: np.ndarray) -> None:
        if len(self.data) >= self.cap:
            self.data.pop(next(iter(self.data)))
        self.data[point.tobytes()] = (value, grad)

    def get(self, point: np.ndarray):
        return self.data.get(point.tobytes())


class _FrameworkState:
    """Shared ledger, warm starts, and oracle memos for one run."""

    def __init__(self, problem: SaddleProblem, cfg: FrameworkConfig):
        self.problem = problem
        self.cfg = cfg
        self.ledger = OracleLedger(crn_budget=cfg.budget)
        self.phi_memo = _Memo()
        self.warm_y: np.ndarray | None = None
        self.warm_h: np.ndarray | None = None
        self.n_prox_phi = 0
        self.n_prox_psi = 0

    # Base-problem oracle access with accounting -------------------------

    def f_value(self, x, y) -> float:
        self.ledger.charge_value()
        return float(self.problem.value(x, y))

    def f_grad(self, x, y):
        self.ledger.charge_grad()
        return self.problem.grad(x, y)

    def min_engine_kind(self) -> str:
        return "lazy" if self.cfg.min_engine == "alen" else "exact"


def iprox_psi(
    problem: SaddleProblem,
    xbar: np.ndarray,
    ybar: np.ndarray,
    gamma: float,
    cfg: FrameworkConfig,
    state: _FrameworkState | None = None,
) -> ProxCertificate:
    """(delta, gamma)-proximal oracle for the dual objective at ybar.

    Solves the doubly penalized saddle subproblem with the configured
    saddle engine to distance zeta3, polishes with one extragradient
    step, and returns the y-block certificate (sign convention: the
    certificate is for -Psi, the function the middle loop minimizes).
    The companion x-block is attached for value/gradient reuse.
    """
    state = state if state is not None else _FrameworkState(problem, cfg)
    ledger = state.ledger
    hp = with_cubic_penalty(
        problem, x_center=xbar, x_weight=gamma, y_center=ybar, y_weight=gamma
    )
    view = saddle_operator(hp, ledger)
    dom = view.domain

    z0 = np.concatenate([xbar, ybar])
    if state.warm_h is not None:
        z0 = dom.project(state.warm_h)

    if cfg.saddle_engine == "len-restart":
        gamma_sad = cfg.m * hp.rho
        runner = lazy_npe_restart
    else:
        gamma_sad = 2.0 * hp.rho
        runner = npe_restart
    S = max(1, math.ceil(math.log2(max(dom.diameter() / max(cfg.zeta3, 1e-300), 2.0))))
    # The doubly penalized subproblem is (gamma/2)-uniformly monotone,
    # so a cubic-Newton step no longer than zeta3/4 certifies a distance
    # within zeta3 (quadratic residual-to-distance conversion).
    stat = max(cfg.zeta3 / 4.0, 1e-13 * dom.diameter())
    ncfg = NpeConfig(
        gamma=gamma_sad,
        S=S,
        m=cfg.m,
        crn_tol=cfg.crn_tol,
        stationarity_tol=stat,
        move_target=cfg.zeta3 / 4.0,
    )
    rep = runner(view, z0, ncfg)

    eg = eg_step(view, rep.z_out, 0.5 / hp.ell)
    dx = problem.dx
    x_out, y_out = eg.z1[:dx], eg.z1[dx:]
    v_out = eg.c1[dx:]
    state.warm_h = eg.z1
    state.n_prox_psi += 1

    D = max(problem.dom_x.diameter(), problem.dom_y.diameter())
    return ProxCertificate(
        z=y_out,
        u=v_out,
        lam=gamma * vector_norm(y_out - ybar),
        residual=_prox_xy_residual_bound(problem.ell, gamma, D, cfg.zeta3),
        interior=bool(np.all(np.abs(v_out) < 1e-14)),
        meta={"xhat": x_out},
    )


def iprox_phi(
    problem: SaddleProblem,
    xbar: np.ndarray,
    gamma: float,
    cfg: FrameworkConfig,
    state: _FrameworkState | None = None,
) -> ProxCertificate:
    """(delta, gamma)-proximal oracle for the primal objective at xbar.

    Middle loop: accelerated maximization of Psi(.; xbar) to zeta2 with
    ``iprox_psi`` as proximal oracle. Then the configured minimization
    engine solves min_x f(x, yhat) + (gamma/3)||x - xbar||^3 to zeta2,
    and one extragradient step on its gradient field produces the
    certificate. The matching best response yhat rides along so the
    outer loop's value/gradient oracles at the prox point are free.
    """
    state = state if state is not None else _FrameworkState(problem, cfg)
    ledger = state.ledger
    dom_y = problem.dom_y

    psi_memo = _Memo()

    def psi_value_grad(y: np.ndarray) -> tuple[float, np.ndarray]:
        hit = psi_memo.get(y)
        if hit is not None:
            return hit
        x_start = state.warm_h[: problem.dx] if state.warm_h is not None else xbar
        xhat_y = _solve_g_xmin(problem, y, xbar, gamma, cfg, state, x_start, cfg.zeta3)
        val, grad = _psi_oracle_outputs(problem, xhat_y, y, xbar, gamma, state)
        psi_memo.put(y, val, grad)
        return val, grad

    def psi_prox(ybar: np.ndarray) -> ProxCertificate:
        cert = iprox_psi(problem, xbar, ybar, gamma, cfg, state)
        val, grad = _psi_oracle_outputs(problem, cert.meta["xhat"], cert.z, xbar, gamma, state)
        psi_memo.put(cert.z, val, grad)
        return cert

    mid_bundle = InexactOracleBundle(
        prox=psi_prox,
        value=lambda y: psi_value_grad(y)[0],
        grad=lambda y: psi_value_grad(y)[1],
        domain=dom_y,
        delta=problem.L * cfg.zeta3 + cfg.delta,
        ledger=ledger,
    )
    mu_y = cfg.mu_y_sched if cfg.mu_y_sched is not None else problem.mu_y
    T_mid = cfg.T_mid or _stage_len(gamma, mu_y)
    S_mid = max(1, math.ceil(math.log2(max(dom_y.diameter() / max(cfg.zeta2, 1e-300), 2.0))))
    y0 = state.warm_y if state.warm_y is not None else dom_y.project(np.zeros(problem.dy))
    mid = aipe_restart(
        mid_bundle,
        dom_y.project(y0),
        AipeConfig(gamma=gamma, T=T_mid, S=S_mid, move_target=cfg.zeta2 / 4.0),
    )
    yhat = mid.z_out
    state.warm_y = yhat

    # Minimization stage in x on the penalized slice.
    x_start = state.warm_h[: problem.dx] if state.warm_h is not None else xbar
    xhat = _solve_g_xmin(problem, yhat, xbar, gamma, cfg, state, x_start, cfg.zeta2)

    xfield = x_slice_field(problem, yhat, ledger, center=xbar, weight=gamma)
    eg = eg_step(xfield, xhat, 0.5 / xfield.ell)
    x_out, u_out = eg.z1, eg.c1
    state.n_prox_phi += 1

    # Companion outputs for the outer loop's Phi oracles at x_out.
    ledger.charge_value()
    ledger.charge_grad()
    phi_val = float(problem.value(x_out, yhat))
    phi_grad = problem.grad(x_out, yhat)[0]
    state.phi_memo.put(x_out, phi_val, phi_grad)

    D = max(problem.dom_x.diameter(), problem.dom_y.diameter())
    return ProxCertificate(
        z=x_out,
        u=u_out,
        lam=gamma * vector_norm(x_out - xbar),
        residual=_prox_x_residual_bound(
            problem.ell, problem.rho, D, gamma, problem.mu_y, cfg.zeta2
        ),
        interior=bool(np.all(np.abs(u_out) < 1e-14)),
        meta={"yhat": yhat},
    )


def _psi_oracle_outputs(problem, xhat, y, xbar, gamma, state):
    """Value and gradient of -Psi(.; xbar) at y given the inner solution."""
    from .problems import _cubic_value

    val = -(state.f_value(xhat, y) + _cubic_value(gamma, xhat - xbar))
    grad = -state.f_grad(xhat, y)[1]
    return val, grad


def _solve_g_xmin(problem, y, xbar, gamma, cfg, state, x_start, dist_target):
    """min_x f(x, y) + (gamma/3)||x - xbar||^3 to a distance target."""
    xfield = x_slice_field(problem, y, state.ledger, center=xbar, weight=gamma)
    rep = solve_uc_min(
        xfield,
        problem.dom_x.project(x_start),
        dist_target,
        engine=state.min_engine_kind(),
        m=cfg.m,
        crn_tol=cfg.crn_tol,
    )
    return rep.z_out


def _stage_len(gamma: float, mu: float) -> int:
    if mu <= 0:
        raise BadParams("stage length needs a positive modulus")
    return max(1, math.ceil(constants.AIPE_STAGE_C * (gamma / mu) ** (2.0 / 7.0)))


def minimax_aipe(
    problem: SaddleProblem,
    z0: PairPoint,
    cfg: FrameworkConfig,
) -> SolverReport:
    """Full accelerated run on a uniformly-convex-concave problem.

    Returns a report whose ledger covers every nested oracle call. Apply
    ``regularize`` first for plain convex-concave inputs.
    """
    state = _FrameworkState(problem, cfg)
    ledger = state.ledger
    gamma = cfg.gamma
    dom_x = problem.dom_x

    slice_method = "alen" if state.min_engine_kind() == "lazy" else "anpe"

    def phi_value_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        hit = state.phi_memo.get(x)
        if hit is not None:
            return hit
        from .responses import solve_y_slice

        yhat = solve_y_slice(
            problem,
            x,
            cfg.zeta2,
            ledger,
            y_start=state.warm_y,
            method=slice_method,
            m=cfg.m,
            crn_tol=cfg.crn_tol,
        )
        ledger.charge_value()
        ledger.charge_grad()
        val = float(problem.value(x, yhat))
        grad = problem.grad(x, yhat)[0]
        state.phi_memo.put(x, val, grad)
        return val, grad

    outer_bundle = InexactOracleBundle(
        prox=lambda xbar: iprox_phi(problem, xbar, gamma, cfg, state),
        value=lambda x: phi_value_grad(x)[0],
        grad=lambda x: phi_value_grad(x)[1],
        domain=dom_x,
        delta=problem.L * cfg.zeta2 + cfg.delta,
        ledger=ledger,
    )
    mu_x = cfg.mu_x_sched if cfg.mu_x_sched is not None else problem.mu_x
    T_out = cfg.T_out or _stage_len(gamma, mu_x)
    S_out = max(
        1, math.ceil(math.log2(max(dom_x.diameter() / max(cfg.zeta1, 1e-300), 2.0)))
    )
    x_init = dom_x.project(np.asarray(z0.x, dtype=float))
    outer = aipe_restart(
        outer_bundle,
        x_init,
        AipeConfig(gamma=gamma, T=T_out, S=S_out, move_target=cfg.zeta1 / 4.0),
    )
    xhat = outer.z_out

    # Best response in y at the primal solution, then one EG polish step.
    from .responses import solve_y_slice

    yhat = solve_y_slice(
        problem,
        xhat,
        cfg.zeta1,
        ledger,
        y_start=state.warm_y,
        method=slice_method,
        m=cfg.m,
        crn_tol=cfg.crn_tol,
    )
    zview = saddle_operator(problem, ledger)
    eg = eg_step(zview, np.concatenate([xhat, yhat]), 0.5 / problem.ell)

    status = STATUS_BUDGET if ledger.exhausted() else STATUS_CONVERGED
    return SolverReport(
        z_out=eg.z1,
        status=status,
        ledger=ledger.snapshot(),
        meta={
            "outer_status": outer.status,
            "n_prox_phi": state.n_prox_phi,
            "n_prox_psi": state.n_prox_psi,
            "T_out": T_out,
            "S_out": S_out,
        },
    )
