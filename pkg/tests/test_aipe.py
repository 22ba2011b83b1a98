import numpy as np
import pytest

from saddlekit.aipe import (
    AipeConfig,
    InexactOracleBundle,
    aipe,
    aipe_restart,
    exact_bundle,
    solve_coefficient,
)
from saddlekit.crn import ProxCertificate
from saddlekit.domains import Ball
from saddlekit.errors import BadParams
from saddlekit.ledger import OracleLedger
from saddlekit.linalg import vector_norm
from saddlekit.operators import gradient_field
from saddlekit.problems import _cubic_grad, _cubic_hess, _cubic_value


def cubic_field(center, weight=1.0, radius=5.0, ledger=None):
    """Gradient field of (weight/3)||z - center||^3 over a ball."""
    center = np.asarray(center, dtype=float)
    dom = Ball(np.zeros(center.shape[0]), radius)
    return gradient_field(
        lambda z: _cubic_value(weight, z - center),
        lambda z: _cubic_grad(weight, z - center),
        lambda z: _cubic_hess(weight, z - center),
        dom,
        ell=2.0 * weight * dom.sup_distance(center),
        rho=2.0 * weight,
        mu=weight / 2.0,
        ledger=ledger if ledger is not None else OracleLedger(),
    )


def quadratic_field(dim=2, radius=10.0, ledger=None):
    dom = Ball(np.zeros(dim), radius)
    return gradient_field(
        lambda z: 0.5 * float(z @ z),
        lambda z: z.copy(),
        lambda z: np.eye(dim),
        dom,
        ell=1.0,
        rho=1e-12,
        mu=0.0,
        ledger=ledger if ledger is not None else OracleLedger(),
    )


def test_solve_coefficient_examples():
    assert solve_coefficient(0.0, 1.0) == pytest.approx(0.5)
    assert solve_coefficient(1.0, 1.0) == pytest.approx(1.0)
    a = solve_coefficient(3.0, 0.5)
    assert a == pytest.approx(2.302776, abs=1e-6)
    assert abs(3.0 + a - 2 * 0.5 * a * a) <= 1e-12 * max(1.0, a)
    with pytest.raises(BadParams):
        solve_coefficient(1.0, 0.0)


def test_fixed_point_exits_on_floor():
    c = np.array([0.3, -0.7])
    field = cubic_field(c)
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-12)
    rep = aipe(bundle, c.copy(), AipeConfig(gamma=2.0, T=10))
    assert rep.floored
    assert np.allclose(rep.z_out, c)


def test_quadratic_value_drop():
    field = quadratic_field()
    bundle = exact_bundle(field, gamma_prox=1.0, tol=1e-12)
    z0 = np.array([1.0, 0.0])
    rep = aipe(bundle, z0, AipeConfig(gamma=1.0, T=5))
    assert rep.value_out < 0.5 * 1e-3  # h(z0) = 1/2


def test_cubic_stage_halves_distance():
    field = cubic_field(np.zeros(2))
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-12)
    z0 = np.array([1.0, 0.0])
    cfg = AipeConfig(gamma=2.0, mu=0.5)  # T from the calibrated schedule
    rep = aipe(bundle, z0, cfg)
    assert vector_norm(rep.z_out) <= 0.5


def test_reject_branch_bookkeeping():
    # A prox stub that always jumps far from the query forces lam > lam'
    # after the first iteration, exercising the doubling branch.
    dom = Ball(np.zeros(2), 50.0)
    offset = np.array([7.0, 0.0])

    def stub_prox(zbar):
        z = zbar + offset
        return ProxCertificate(z=z, u=np.zeros(2), lam=0.0, residual=0.0)

    bundle = InexactOracleBundle(
        prox=stub_prox,
        value=lambda z: 0.5 * float(z @ z),
        grad=lambda z: z.copy(),
        domain=dom,
    )
    cfg = AipeConfig(gamma=1.0, T=4, record_trace=True)
    rep = aipe(bundle, np.array([1.0, 1.0]), cfg)
    rejects = [r for r in rep.trace if r.branch == "reject"]
    assert rejects, "stub should force at least one reject branch"
    for r in rep.trace:
        assert abs(r.A_next - (r.A_prev + r.a)) <= 1e-12 * max(1.0, r.A_next)
        if r.branch == "reject":
            assert r.gamma_interp == pytest.approx(r.lam_prime / r.lam, rel=1e-12)
            assert r.lam_prime_next == 2.0 * r.lam_prime
            # Interpolation identity of the combined point.
            recon = ((1 - r.gamma_interp) * r.A_prev / r.A_next) * r.z_prev + (
                r.gamma_interp * r.A_prime / r.A_next
            ) * r.ztil
            assert np.allclose(recon, r.z_next, atol=1e-12)
        else:
            assert r.lam_prime_next == 0.5 * r.lam_prime


def test_trace_invariants_real_run():
    field = cubic_field(np.array([0.2, -0.1]))
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-12)
    cfg = AipeConfig(gamma=2.0, T=8, record_trace=True)
    rep = aipe(bundle, np.array([1.2, 0.5]), cfg)
    assert rep.trace
    for r in rep.trace:
        # Coefficient equation for the tentative weight.
        lhs = r.A_prev + r.a_prime
        assert lhs == pytest.approx(2 * r.lam_prime * r.a_prime**2, rel=1e-12)
        # Multiplier recomputed from the recorded points.
        assert r.lam == pytest.approx(
            cfg.gamma * vector_norm(r.ztil - r.zbar), rel=1e-12, abs=1e-300
        )
        assert r.lam_prime_next / r.lam_prime in (0.5, 2.0)
        if r.branch == "accept":
            assert r.A_next == pytest.approx(2 * r.lam_prime * r.a**2, rel=1e-12)


def test_best_candidate_output():
    field = cubic_field(np.array([0.2, -0.1]))
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-12)
    cfg = AipeConfig(gamma=2.0, T=6, record_trace=True)
    z0 = np.array([1.0, 0.4])
    rep = aipe(bundle, z0, cfg)
    h = lambda z: _cubic_value(1.0, z - np.array([0.2, -0.1]))
    candidates = [z0] + [r.ztil for r in rep.trace] + [r.z_next for r in rep.trace]
    for z in candidates:
        assert h(rep.z_out) <= h(z) + 1e-12


def test_monotone_potential_with_exact_oracles():
    # A_t (h(z_t) - h*) + 0.5 ||v_t - z*||^2 <= ||z0 - z*||^2 along the run.
    center = np.array([0.2, -0.1])
    field = cubic_field(center)
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-13)
    cfg = AipeConfig(gamma=2.0, T=10, record_trace=True)
    z0 = np.array([1.0, 0.4])
    rep = aipe(bundle, z0, cfg)
    h = lambda z: _cubic_value(1.0, z - center)
    bound = vector_norm(z0 - center) ** 2 * (1 + 1e-9)
    for r in rep.trace:
        potential = r.A_next * h(r.z_next) + 0.5 * vector_norm(r.v_next - center) ** 2
        assert potential <= bound


def test_gradient_dominance_sandwich(rng):
    # For (1/3)||z||^3 with modulus 1/2:
    # (2/(3 sqrt(mu))) ||grad||^{3/2} >= h - h* >= (mu/3) ||z||^3.
    mu = 0.5
    for _ in range(200):
        z = rng.standard_normal(3) * rng.uniform(0.1, 3.0)
        r = vector_norm(z)
        h = r**3 / 3.0
        gnorm = r**2
        assert (2.0 / (3.0 * np.sqrt(mu))) * gnorm**1.5 >= h - 1e-9
        assert h >= (mu / 3.0) * r**3 - 1e-9


def test_restart_zero_stages():
    field = cubic_field(np.zeros(2))
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-12)
    z0 = np.array([0.7, 0.1])
    rep = aipe_restart(bundle, z0, AipeConfig(gamma=2.0, T=3, S=0))
    assert np.array_equal(rep.z_out, z0)


def test_restart_reaches_tiny_distance():
    c = np.array([0.25, -0.4])
    field = cubic_field(c)
    bundle = exact_bundle(field, gamma_prox=2.0, tol=1e-13)
    z0 = c + np.array([1.0, 0.0])
    rep = aipe_restart(bundle, z0, AipeConfig(gamma=2.0, mu=0.5, S=20))
    assert vector_norm(rep.z_out - c) <= 2.0 * 2.0**-20
