import math

import numpy as np
import pytest

from saddlekit.gap import duality_gap
from saddlekit.ledger import OracleLedger
from saddlekit.linalg import vector_norm
from saddlekit.npe import (
    STATUS_STATIONARY,
    NpeConfig,
    lazy_npe,
    lazy_npe_restart,
    npe,
    npe_restart,
)
from saddlekit.operators import saddle_operator
from saddlekit.problems import PairPoint, make_test_problem


def _cubic(seed=0, dims=(2, 2), radius=1.5, **kw):
    return make_test_problem("cubic_coupled", dims, seed=seed, radius=radius, **kw)


def _start_at_distance(prob, dist, seed=1):
    rng = np.random.default_rng(seed)
    z_star = prob.known_saddle.concat()
    u = rng.standard_normal(z_star.shape[0])
    z0 = z_star + u * (dist / vector_norm(u))
    assert prob.product_domain().contains(z0)
    return z0


def test_npe_stationary_at_saddle():
    prob = _cubic(mu_x=1.0, mu_y=1.0)
    view = saddle_operator(prob, OracleLedger())
    rep = npe(view, prob.known_saddle.concat(), NpeConfig(gamma=2 * prob.rho, T=10))
    assert rep.status == STATUS_STATIONARY
    assert np.allclose(rep.z_out, prob.known_saddle.concat())


def test_npe_single_iteration_composition():
    # f = x*y from (1,1) with gamma=2: the CRN point is (0,1), the step
    # size 1/(2*gamma*1) = 1/4, and the update lands at (0.75, 1).
    prob = make_test_problem(
        "bilinear",
        (1, 1),
        seed=0,
        A=np.array([[1.0]]),
        x_star=np.zeros(1),
        y_star=np.zeros(1),
        radius=10.0,
        free_domains=True,
    )
    view = saddle_operator(prob, OracleLedger())
    rep = npe(view, np.array([1.0, 1.0]), NpeConfig(gamma=2.0, T=1, record_trace=True))
    row = rep.trace[0]
    assert np.allclose(row.z_half, [0.0, 1.0], atol=1e-9)
    assert row.eta == pytest.approx(0.25, rel=1e-9)
    assert np.allclose(row.z_next, [0.75, 1.0], atol=1e-8)
    assert np.allclose(rep.z_out, [0.0, 1.0], atol=1e-9)  # single-point average


def test_npe_gap_decreases_with_T():
    prob = make_test_problem(
        "bilinear",
        (1, 1),
        seed=0,
        A=np.array([[1.0]]),
        x_star=np.zeros(1),
        y_star=np.zeros(1),
        radius=1.0,
    )
    z0 = np.array([1.0, 1.0])
    gaps = {}
    for T in (8, 64):
        view = saddle_operator(prob, OracleLedger())
        rep = npe(view, prob.product_domain().project(z0), NpeConfig(gamma=1.0, T=T))
        gaps[T] = duality_gap(prob, rep.z_out, tol=1e-12).gap
    assert gaps[64] < gaps[8] / 8


def test_npe_trace_identities():
    prob = _cubic(seed=2, mu_x=1.0, mu_y=1.0)
    view = saddle_operator(prob, OracleLedger())
    z0 = _start_at_distance(prob, 0.8)
    cfg = NpeConfig(gamma=2 * prob.rho, T=25, record_trace=True)
    rep = npe(view, z0, cfg)
    dom = prob.product_domain()
    weighted = np.zeros_like(z0)
    eta_sum = 0.0
    for row in rep.trace:
        if not math.isfinite(row.eta):
            continue
        weighted += row.eta * row.z_half
        eta_sum += row.eta
        assert dom.contains(row.z_half, slack=1e-12)
        assert dom.contains(row.z_next, slack=1e-12)
    if eta_sum > 0:
        assert np.allclose(rep.z_out, weighted / eta_sum, atol=1e-12)


def test_npe_eta_formula_from_trace():
    prob = _cubic(seed=3, mu_x=1.0, mu_y=1.0)
    view = saddle_operator(prob, OracleLedger())
    z0 = _start_at_distance(prob, 0.7)
    rep = npe(view, z0, NpeConfig(gamma=2 * prob.rho, T=15, record_trace=True))
    z = z0
    for row in rep.trace:
        if not math.isfinite(row.eta):
            break
        step = vector_norm(z - row.z_half)
        assert abs(row.eta * 2 * (2 * prob.rho) * step - 1.0) <= 1e-12
        z = row.z_next


def test_npe_restart_trivial_cases():
    prob = _cubic(seed=4, mu_x=1.0, mu_y=1.0)
    view = saddle_operator(prob, OracleLedger())
    z_star = prob.known_saddle.concat()
    rep = npe_restart(view, z_star, NpeConfig(gamma=2 * prob.rho, S=3))
    assert rep.status == STATUS_STATIONARY
    assert np.allclose(rep.z_out, z_star)

    led = OracleLedger()
    view = saddle_operator(prob, led)
    z0 = _start_at_distance(prob, 0.5)
    rep = npe_restart(view, z0, NpeConfig(gamma=2 * prob.rho, S=0))
    assert np.array_equal(rep.z_out, z0)
    assert led.n_crn == 0


def test_npe_restart_contraction():
    prob = _cubic(seed=5, mu_x=1.0, mu_y=1.0)
    z_star = prob.known_saddle.concat()
    z = _start_at_distance(prob, 1.0)
    cfg = NpeConfig(gamma=2 * prob.rho, S=1)
    for _ in range(6):
        d_in = vector_norm(z - z_star)
        if d_in < 1e-9:
            break
        view = saddle_operator(prob, OracleLedger())
        z = npe_restart(view, z, cfg).z_out
        assert vector_norm(z - z_star) <= 0.5 * d_in


def test_lazy_m1_matches_eager_bitwise():
    prob = _cubic(seed=6, mu_x=1.0, mu_y=1.0)
    z0 = _start_at_distance(prob, 0.9)
    cfg = NpeConfig(gamma=2 * prob.rho, T=12, m=1, record_trace=True)
    r1 = npe(saddle_operator(prob, OracleLedger()), z0, cfg)
    r2 = lazy_npe(saddle_operator(prob, OracleLedger()), z0, cfg)
    assert len(r1.trace) == len(r2.trace)
    for a, b in zip(r1.trace, r2.trace):
        assert np.array_equal(a.z_half, b.z_half)
        assert np.array_equal(a.z_next, b.z_next)
        assert a.eta == b.eta
    assert np.array_equal(r1.z_out, r2.z_out)


def test_lazy_bilinear_any_m_matches_eager():
    prob = make_test_problem("bilinear", (2, 2), seed=7, radius=1.0)
    z0 = prob.product_domain().project(np.array([0.5, -0.4, 0.3, 0.6]))
    cfg = NpeConfig(gamma=1.0, T=10, m=4, record_trace=True)
    r_lazy = lazy_npe(saddle_operator(prob, OracleLedger()), z0, cfg)
    r_eager = npe(
        saddle_operator(prob, OracleLedger()),
        z0,
        NpeConfig(gamma=1.0, T=10, m=1, record_trace=True),
    )
    for a, b in zip(r_lazy.trace, r_eager.trace):
        assert np.allclose(a.z_half, b.z_half, atol=1e-14)
        assert np.allclose(a.z_next, b.z_next, atol=1e-14)


def test_lazy_hessian_count():
    prob = _cubic(seed=8, mu_x=1.0, mu_y=1.0)
    led = OracleLedger()
    view = saddle_operator(prob, led)
    z0 = _start_at_distance(prob, 1.0)
    rep = lazy_npe(view, z0, NpeConfig(gamma=2 * prob.rho, T=12, m=4))
    assert rep.meta["executed"] == 12
    assert led.n_hess == 3  # ceil(12 / 4)


def test_lazy_restart_m1_matches_restart():
    prob = _cubic(seed=9, mu_x=1.0, mu_y=1.0)
    z0 = _start_at_distance(prob, 0.8)
    cfg = NpeConfig(gamma=2 * prob.rho, S=3, m=1, record_trace=True)
    r1 = npe_restart(saddle_operator(prob, OracleLedger()), z0, cfg)
    r2 = lazy_npe_restart(saddle_operator(prob, OracleLedger()), z0, cfg)
    assert np.array_equal(r1.z_out, r2.z_out)
    assert len(r1.trace) == len(r2.trace)


def test_lazy_restart_contraction_and_hess_ledger():
    prob = _cubic(seed=10, mu_x=1.0, mu_y=1.0)
    z_star = prob.known_saddle.concat()
    m = 4
    gamma = m * prob.rho
    cfg = NpeConfig(gamma=gamma, m=m, S=1)
    T = cfg.epoch_length(prob.mu)
    z = _start_at_distance(prob, 1.0)
    for _ in range(4):
        d_in = vector_norm(z - z_star)
        if d_in < 1e-9:
            break
        led = OracleLedger()
        view = saddle_operator(prob, led)
        rep = lazy_npe(view, z, cfg)
        executed = rep.meta["executed"] if rep.status != STATUS_STATIONARY else max(
            rep.meta["executed"], 1
        )
        assert led.n_hess == math.ceil(max(executed, 1) / m)
        z = rep.z_out
        assert vector_norm(z - z_star) <= 0.5 * d_in
    assert T >= m  # schedule covers at least one snapshot period
