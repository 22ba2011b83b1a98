"""Accelerated inexact proximal extragradient (search-free) minimizer.

One iteration solves the coefficient equation A_t + a' = 2*lam'*a'^2,
forms the extrapolated query, calls the inexact proximal oracle, and
either accepts the prox point (halving the bracket multiplier lam') or
interpolates and doubles lam'. The dual sequence v_t takes a projected
step against the inexact gradient plus the certified normal element.
The output is the best candidate among all z_t and prox points under
the inexact zeroth-order oracle, first-encountered ties kept.

``aipe_restart`` chains stages, each halving the distance to the
minimizer of a uniformly convex objective once the stage length reaches
the calibrated threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import constants
from .crn import ProxCertificate, crn_prox, lazy_crn_prox
from .errors import BadParams, NoProgress
from .linalg import vector_norm
from .npe import STATUS_BUDGET, STATUS_CONVERGED, STATUS_STATIONARY
from .operators import OperatorView


@dataclass(frozen=True)
class InexactOracleBundle:
    """Oracle set consumed by AIPE: a (delta, gamma)-proximal oracle plus
    delta-accurate value and gradient oracles over a common domain."""

    prox: Callable[[np.ndarray], ProxCertificate]
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    domain: object
    delta: float = 0.0
    ledger: object = None


@dataclass(frozen=True)
class AipeConfig:
    gamma: float
    T: int | None = None
    S: int = 1
    mu: float | None = None
    lambda_floor: float | None = None
    record_trace: bool = False
    # Restart stages stop once a stage moves the iterate by no more
    # than this (movement <= target/4 certifies distance <= target/2
    # under the calibrated per-stage halving).
    move_target: float | None = None

    def stage_length(self) -> int:
        if self.T is not None:
            return self.T
        if self.mu is None or self.mu <= 0:
            raise BadParams("stage length needs T or a positive mu")
        return max(1, math.ceil(constants.AIPE_RESTART_C * (self.gamma / self.mu) ** (2.0 / 7.0)))


@dataclass(frozen=True)
class AipeTraceRow:
    t: int
    A_prev: float
    a_prime: float
    A_prime: float
    lam: float
    lam_prime: float
    branch: str
    gamma_interp: float | None
    a: float
    A_next: float
    lam_prime_next: float
    zbar: np.ndarray
    ztil: np.ndarray
    z_prev: np.ndarray
    z_next: np.ndarray
    v_prev: np.ndarray
    v_next: np.ndarray


@dataclass(frozen=True)
class AipeReport:
    z_out: np.ndarray
    value_out: float
    status: str
    floored: bool
    trace: tuple = ()
    meta: dict = field(default_factory=dict)


def solve_coefficient(A: float, lam_prime: float) -> float:
    """Positive root of A + a = 2 * lam_prime * a**2."""
    if lam_prime <= 0:
        raise BadParams("lam_prime must be positive")
    return (1.0 + math.sqrt(1.0 + 8.0 * lam_prime * A)) / (4.0 * lam_prime)


def aipe(bundle: InexactOracleBundle, z0: np.ndarray, cfg: AipeConfig) -> AipeReport:
    """One stage of the accelerated scheme (T iterations)."""
    dom = bundle.domain
    gamma = cfg.gamma
    T = cfg.stage_length()
    floor = (
        cfg.lambda_floor
        if cfg.lambda_floor is not None
        else 1e-12 * gamma * dom.diameter()
    )

    z = np.array(z0, dtype=float)
    v = z.copy()
    A = 0.0

    best_val = bundle.value(z)
    best = z

    cert = bundle.prox(z)
    ztil, u = cert.z, cert.u
    lam = gamma * vector_norm(ztil - z)
    lam_p = lam

    if lam <= floor:
        # The prox already fixes the start point: nothing to accelerate.
        val = bundle.value(ztil)
        if val < best_val:
            best_val, best = val, ztil
        return AipeReport(best, best_val, STATUS_STATIONARY, True, meta={"iters": 0})

    trace: list[AipeTraceRow] = []
    status = STATUS_CONVERGED
    floored = False

    for t in range(T):
        if bundle.ledger is not None and bundle.ledger.exhausted():
            status = STATUS_BUDGET
            break
        if not (1e-280 < lam_p < 1e280):
            raise NoProgress(f"bracket multiplier left machine range: {lam_p}")

        a_p = solve_coefficient(A, lam_p)
        A_p = A + a_p
        zbar = (A / A_p) * z + (a_p / A_p) * v

        if t > 0:
            cert = bundle.prox(zbar)
            ztil, u = cert.z, cert.u
            lam = gamma * vector_norm(ztil - zbar)

        if lam <= lam_p:
            branch = "accept"
            gamma_interp = None
            a = a_p
            A_next = A_p
            z_next = ztil
            lam_p_next = 0.5 * lam_p
        else:
            branch = "reject"
            gamma_interp = lam_p / lam
            a = gamma_interp * a_p
            A_next = A + a
            z_next = ((1.0 - gamma_interp) * A / A_next) * z + (
                gamma_interp * A_p / A_next
            ) * ztil
            lam_p_next = 2.0 * lam_p

        g = bundle.grad(ztil)
        v_next = dom.project(v - a * (g + u))

        val_til = bundle.value(ztil)
        if val_til < best_val:
            best_val, best = val_til, ztil
        if branch == "accept":
            val_next = val_til
        else:
            val_next = bundle.value(z_next)
            if val_next < best_val:
                best_val, best = val_next, z_next

        if cfg.record_trace:
            trace.append(
                AipeTraceRow(
                    t=t,
                    A_prev=A,
                    a_prime=a_p,
                    A_prime=A_p,
                    lam=lam,
                    lam_prime=lam_p,
                    branch=branch,
                    gamma_interp=gamma_interp,
                    a=a,
                    A_next=A_next,
                    lam_prime_next=lam_p_next,
                    zbar=zbar,
                    ztil=ztil,
                    z_prev=z,
                    z_next=z_next,
                    v_prev=v,
                    v_next=v_next,
                )
            )

        z, A, v, lam_p = z_next, A_next, v_next, lam_p_next

        if t > 0 and lam <= floor:
            # Prox fixed point reached mid-run; later iterations cannot
            # improve the candidate set.
            status = STATUS_STATIONARY
            floored = True
            break

    return AipeReport(
        z_out=best,
        value_out=best_val,
        status=status,
        floored=floored,
        trace=tuple(trace),
        meta={"iters": len(trace) if cfg.record_trace else T, "A_final": A},
    )


def aipe_restart(bundle: InexactOracleBundle, z0: np.ndarray, cfg: AipeConfig) -> AipeReport:
    """S chained stages, warm-started; stops once a stage bottoms out."""
    z = np.array(z0, dtype=float)
    stages: list[dict] = []
    trace: list = []
    status = STATUS_CONVERGED
    floored = False
    report = None
    for s in range(cfg.S):
        report = aipe(bundle, z, cfg)
        stages.append(
            {
                "stage": s,
                "z_in": z,
                "z_out": report.z_out,
                "value_out": report.value_out,
                "status": report.status,
            }
        )
        if cfg.record_trace:
            trace.extend(report.trace)
        moved = vector_norm(report.z_out - z)
        z = report.z_out
        if report.floored:
            floored = True
            status = STATUS_STATIONARY
            break
        if report.status == STATUS_BUDGET:
            status = STATUS_BUDGET
            break
        if cfg.move_target is not None and moved <= cfg.move_target:
            break
    value_out = report.value_out if report is not None else bundle.value(z)
    return AipeReport(
        z_out=z,
        value_out=value_out,
        status=status,
        floored=floored,
        trace=tuple(trace),
        meta={"stages": stages},
    )


def exact_bundle(view: OperatorView, gamma_prox: float, tol: float = 1e-10) -> InexactOracleBundle:
    """Bundle for an explicit objective: CRN prox, exact value/gradient."""
    return InexactOracleBundle(
        prox=crn_prox(view, gamma_prox, tol),
        value=view.value,
        grad=view.F,
        domain=view.domain,
        delta=0.0,
        ledger=view.ledger,
    )


def lazy_bundle(
    view: OperatorView, gamma_prox: float, m: int, tol: float = 1e-10
) -> InexactOracleBundle:
    """Exact bundle with the Jacobian snapshot refreshed every m prox calls."""
    return InexactOracleBundle(
        prox=lazy_crn_prox(view, gamma_prox, m, tol),
        value=view.value,
        grad=view.F,
        domain=view.domain,
        delta=0.0,
        ledger=view.ledger,
    )


def solve_uc_min(
    view: OperatorView,
    z0: np.ndarray,
    dist_target: float,
    *,
    engine: str = "exact",
    m: int = 1,
    crn_tol: float = 1e-10,
    d0: float | None = None,
    T: int | None = None,
) -> AipeReport:
    """Minimize a uniformly convex objective to a distance target.

    Restarted accelerated scheme with the CRN oracle as the exact
    proximal oracle (regularization 2*rho, so a (0, rho)-proximal
    oracle) or its lazy variant.
    """
    gamma_prox = max(view.rho, 1e-12)
    if engine == "lazy" and m > 1:
        bundle = lazy_bundle(view, gamma_prox, m, crn_tol)
    else:
        bundle = exact_bundle(view, gamma_prox, crn_tol)
    d_start = d0 if d0 is not None else view.domain.diameter()
    S = max(1, math.ceil(math.log2(max(d_start / max(dist_target, 1e-300), 2.0))))
    cfg = AipeConfig(
        gamma=gamma_prox, T=T, mu=view.mu, S=S, move_target=dist_target / 4.0
    )
    return aipe_restart(bundle, z0, cfg)
