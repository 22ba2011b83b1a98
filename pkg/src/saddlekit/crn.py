"""Cubic-regularized Newton oracle and the extragradient step.

``crn_step`` solves the regularized linearized variational inequality

    <F(zb) + J(z - zb) + (gamma/2)||z - zb||(z - zb), z' - z> >= -tol ||z' - z||

for all feasible z'. When the unconstrained solution is feasible it is
found by a scalar root search on the shift lambda of the secular
equation lambda = (gamma/2)||s(lambda)||, with s(lambda) solving
(J + lambda I) s = -F(zb). Otherwise an inner extragradient loop runs
on the (monotone) model operator until the VI residual is within tol.

The certificate multiplier is lam = (gamma/2)||z - zb||, so a CRN call
with regularization 2*g acts as a (tol, g)-proximal oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadStepSize, NoConvergence, SingularSystem
from .linalg import solve_shifted, spectral_norm_upper, vector_norm
from .operators import OperatorView

INNER_EG_CAP = 100_000
BRACKET_CAP = 400


@dataclass
class ProxCertificate:
    """Output of a proximal/CRN oracle.

    ``u`` is the certified normal-cone element (zero at interior
    points), ``lam`` the induced multiplier, ``residual`` the achieved
    model residual. ``meta`` carries solver companions (e.g. the inner
    best response) used by callers for caching.
    """

    z: np.ndarray
    u: np.ndarray
    lam: float
    residual: float
    interior: bool = True
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EgResult:
    z1: np.ndarray
    c1: np.ndarray
    z_half: np.ndarray


def eg_step(view: OperatorView, z0: np.ndarray, eta: float, dom=None) -> EgResult:
    """One extragradient update; returns the point and its certified
    normal element c1 = (z0 - z1)/eta - F(z_half)."""
    if not 0.0 < eta < 1.0 / view.ell:
        raise BadStepSize(f"eta={eta} outside (0, 1/ell) with ell={view.ell}")
    dom = dom if dom is not None else view.domain
    f0 = view.F(z0)
    z_half = dom.project(z0 - eta * f0)
    f_half = view.F(z_half)
    z1 = dom.project(z0 - eta * f_half)
    c1 = (z0 - z1) / eta - f_half
    view.ledger.charge_eg()
    return EgResult(z1=z1, c1=c1, z_half=z_half)


def crn_step(
    view: OperatorView, zbar: np.ndarray, gamma: float, tol: float = 1e-10
) -> ProxCertificate:
    """Cubic-Newton oracle at query zbar with regularization gamma."""
    fz = view.F(zbar)
    jac = view.JF(zbar)
    view.ledger.charge_crn()
    return _solve_cubic_model(view.domain, zbar, fz, jac, gamma, tol)


def lazy_crn_step(
    view: OperatorView,
    zbar: np.ndarray,
    zsnapshot: np.ndarray,
    gamma: float,
    tol: float = 1e-10,
) -> ProxCertificate:
    """CRN oracle with the Jacobian frozen at the snapshot point.

    ``n_hess`` is charged only when the snapshot differs from the cached
    one; ``n_crn`` and ``n_grad`` are charged on every call.
    """
    fz = view.F(zbar)
    jac = view.jacobian_snapshot(zsnapshot)
    view.ledger.charge_crn()
    return _solve_cubic_model(view.domain, zbar, fz, jac, gamma, tol)


def _solve_cubic_model(domain, zbar, fz, jac, gamma, tol) -> ProxCertificate:
    nf = vector_norm(fz)
    if nf <= tol:
        # Query already solves the model VI (fixed point of the oracle).
        return ProxCertificate(
            z=np.array(zbar, copy=True),
            u=np.zeros_like(zbar),
            lam=0.0,
            residual=nf,
        )

    try:
        s, resid = _secular_root(jac, fz, gamma, tol, tol)
    except (SingularSystem, NoConvergence):
        s = None
        resid = math.inf

    if s is not None:
        z_cand = zbar + s
        if domain.contains(z_cand):
            return ProxCertificate(
                z=z_cand,
                u=np.zeros_like(zbar),
                lam=0.5 * gamma * vector_norm(s),
                residual=resid,
            )

    return _model_eg(domain, zbar, fz, jac, gamma, tol, warm=s)


def _secular_root(jac, fz, gamma, tol_eff, tol):
    """Root of psi(lam) = (gamma/2)||s(lam)|| - lam by guarded secant/bisection.

    Stops when |psi| * ||s|| <= tol_eff, which equals the model residual
    at the certificate multiplier (gamma/2)||s||. Dimensions 1 and 2 run
    on scalar arithmetic (same formulas as the solver fast paths).
    """
    rhs = -fz
    n = fz.shape[0]

    if n == 1:
        j00 = float(jac[0, 0])
        r0 = float(rhs[0])

        def evaluate(lam):
            a = j00 + lam
            if abs(a) < 1e-14:
                raise SingularSystem("1x1 pivot below threshold")
            s0 = r0 / a
            ns = abs(s0)
            return np.array([s0]), ns, 0.5 * gamma * ns - lam

    elif n == 2:
        j00, j01 = float(jac[0, 0]), float(jac[0, 1])
        j10, j11 = float(jac[1, 0]), float(jac[1, 1])
        r0, r1 = float(rhs[0]), float(rhs[1])

        def evaluate(lam):
            a = j00 + lam
            d = j11 + lam
            p1 = max(abs(a), abs(j10))
            if p1 < 1e-14:
                raise SingularSystem("2x2 first pivot below threshold")
            det = a * d - j01 * j10
            if abs(det) / p1 < 1e-14:
                raise SingularSystem("2x2 second pivot below threshold")
            s0 = (d * r0 - j01 * r1) / det
            s1 = (a * r1 - j10 * r0) / det
            ns = math.sqrt(s0 * s0 + s1 * s1)
            return np.array([s0, s1]), ns, 0.5 * gamma * ns - lam

    else:

        def evaluate(lam):
            s = solve_shifted(jac, lam, rhs)
            ns = vector_norm(s)
            return s, ns, 0.5 * gamma * ns - lam

    lam_lo = 0.0
    try:
        s, ns, psi = evaluate(0.0)
        if abs(psi) * ns <= tol_eff:
            return s, abs(psi) * ns
        lam_hi = max(0.5 * gamma * ns, 1e-300)
        psi_lo = psi
    except SingularSystem:
        # Monotone Jacobians are nonsingular for lam > 0; bracket upward
        # from a unit-length shift (lambda carries units of gamma).
        lam_hi = max(gamma, 1e-300)
        psi_lo = math.inf

    s_hi, ns_hi, psi_hi = evaluate(lam_hi)
    doublings = 0
    while psi_hi > 0:
        if abs(psi_hi) * ns_hi <= tol_eff:
            return s_hi, abs(psi_hi) * ns_hi
        lam_lo, psi_lo = lam_hi, psi_hi
        lam_hi *= 2.0
        doublings += 1
        if doublings > BRACKET_CAP or not math.isfinite(lam_hi):
            raise NoConvergence("secular bracketing failed")
        s_hi, ns_hi, psi_hi = evaluate(lam_hi)
    if abs(psi_hi) * ns_hi <= tol_eff:
        return s_hi, abs(psi_hi) * ns_hi

    cap = 10 * max(1, math.ceil(math.log2(1.0 / min(tol, 0.5))))
    prev = (lam_hi, psi_hi)
    curr = (lam_lo, psi_lo) if math.isfinite(psi_lo) else (lam_hi / 2.0, None)
    for _ in range(cap):
        lam_mid = None
        if (
            curr[1] is not None
            and prev[1] is not None
            and math.isfinite(curr[1])
            and math.isfinite(prev[1])
            and curr[1] != prev[1]
        ):
            # Secant proposal, accepted only strictly inside the bracket.
            cand = curr[0] - curr[1] * (prev[0] - curr[0]) / (prev[1] - curr[1])
            if lam_lo < cand < lam_hi:
                lam_mid = cand
        if lam_mid is None:
            lam_mid = 0.5 * (lam_lo + lam_hi)
        s, ns, psi = evaluate(lam_mid)
        if abs(psi) * ns <= tol_eff:
            return s, abs(psi) * ns
        prev, curr = curr, (lam_mid, psi)
        if psi > 0:
            lam_lo = lam_mid
        else:
            lam_hi = lam_mid
    raise NoConvergence("secular bisection hit its iteration cap")


def _model_eg(domain, zbar, fz, jac, gamma, tol_eff, warm=None) -> ProxCertificate:
    """Extragradient on the linearized cubic model over the domain.

    The model operator is monotone (monotone linearization plus the
    gradient of a convex cubic), so projected EG converges; iteration is
    capped at 1e5.
    """

    def model(z):
        d = z - zbar
        return fz + jac @ d + 0.5 * gamma * vector_norm(d) * d

    ell_model = spectral_norm_upper(jac) + gamma * domain.sup_distance(zbar)
    eta = 0.5 / max(ell_model, 1e-12)

    w = domain.project(zbar + warm) if warm is not None else domain.project(zbar)
    best = None
    for _ in range(INNER_EG_CAP):
        w_half = domain.project(w - eta * model(w))
        w1 = domain.project(w - eta * model(w_half))
        c1 = (w - w1) / eta - model(w_half)
        resid = vector_norm(model(w1) + c1)
        if best is None or resid < best[0]:
            best = (resid, w1, c1)
        if resid <= tol_eff:
            return ProxCertificate(
                z=w1,
                u=c1,
                lam=0.5 * gamma * vector_norm(w1 - zbar),
                residual=resid,
                interior=False,
            )
        w = w1
    raise NoConvergence(
        f"inner EG stalled at residual {best[0]:.3e} (target {tol_eff:.3e})"
    )


def crn_prox(view: OperatorView, gamma_prox: float, tol: float = 1e-10):
    """A (tol, gamma_prox)-proximal oracle backed by CRN(. , 2*gamma_prox)."""

    def prox(zbar: np.ndarray) -> ProxCertificate:
        return crn_step(view, zbar, 2.0 * gamma_prox, tol)

    return prox


def lazy_crn_prox(view: OperatorView, gamma_prox: float, m: int, tol: float = 1e-10):
    """Lazy proximal oracle: the Jacobian snapshot refreshes every m calls."""
    view.start_snapshot_sequence()
    state = {"count": 0, "snap": None}

    def prox(zbar: np.ndarray) -> ProxCertificate:
        if state["count"] % m == 0:
            state["snap"] = np.array(zbar, copy=True)
        state["count"] += 1
        return lazy_crn_step(view, zbar, state["snap"], 2.0 * gamma_prox, tol)

    return prox
