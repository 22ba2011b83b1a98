"""Acceptance gate: every criterion asserted at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` for one pass/fail
line per criterion. The accuracy-sweep criteria follow the reduction
protocol: each run cubically regularizes the instance at its target
eps, schedules iteration counts from the regularization moduli alone,
and the final duality gap is measured on the original problem by the
independent evaluator.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from saddlekit.aipe import AipeConfig, aipe, exact_bundle
from saddlekit.bench import RunConfig, fit_slope, run_sweep
from saddlekit.crn import crn_step, eg_step
from saddlekit.domains import Ball
from saddlekit.framework import minimax_aipe, regularize, schedule_params
from saddlekit.gap import duality_gap
from saddlekit.ledger import OracleLedger
from saddlekit.linalg import vector_norm
from saddlekit.npe import NpeConfig, lazy_npe, npe
from saddlekit.operators import gradient_field, saddle_operator
from saddlekit.problems import (
    PairPoint,
    SaddleProblem,
    make_test_problem,
    quadratic_saddle,
)


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {criterion}: {detail}"


# -- 1. CRN oracle soundness -------------------------------------------------


def test_criterion_1_crn_soundness():
    rng = np.random.default_rng(2024)
    tol = 1e-8
    worst_margin = -np.inf
    for k in range(200):
        fam = "cubic_coupled" if k % 2 == 0 else "quartic_coupled"
        dims = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        prob = make_test_problem(fam, dims, seed=5000 + k, mu_x=1.0, mu_y=1.0)
        view = saddle_operator(prob, OracleLedger())
        zbar = view.domain.project(rng.standard_normal(view.dim))
        cert = crn_step(view, zbar, 2.0 * prob.rho, tol)
        d = vector_norm(cert.z - zbar)
        lhs = vector_norm(view.F(cert.z) + cert.u + cert.lam * (cert.z - zbar))
        rhs = 0.5 * prob.rho * d**2 + 10 * tol
        worst_margin = max(worst_margin, lhs - rhs)
    _report("1", worst_margin <= 0, f"worst residual margin {worst_margin:.3e} over 200 instances")


# -- 2. EG certified-norm bound ----------------------------------------------


def test_criterion_2_eg_bound():
    rng = np.random.default_rng(77)
    worst = -np.inf
    for k in range(100):
        dims = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        prob = quadratic_saddle(dims, seed=9000 + k)
        view = saddle_operator(prob, OracleLedger())
        z_star = prob.known_saddle.concat()
        z0 = z_star + rng.standard_normal(view.dim)
        eta = float(rng.uniform(0.05, 0.95)) / prob.ell
        res = eg_step(view, z0, eta)
        el = eta * prob.ell
        bound = (1 + el + el**2) / (eta * math.sqrt(1 - el**2))
        lhs = vector_norm(view.F(res.z1) + res.c1)
        worst = max(worst, lhs - bound * vector_norm(z0 - z_star) * (1 + 1e-9))
    _report("2", worst <= 0, f"worst bound margin {worst:.3e} over 100 trials")


# -- 3. NPE sublinear rate ---------------------------------------------------


def test_criterion_3_npe_rate():
    prob = make_test_problem("bilinear", (2, 2), seed=1, radius=1.0)
    z0 = prob.product_domain().project(np.ones(4) * 0.8)
    pts = []
    for T in (8, 16, 32, 64, 128, 256, 512):
        rep = npe(saddle_operator(prob, OracleLedger()), z0, NpeConfig(gamma=1.0, T=T))
        gap = duality_gap(prob, rep.z_out, tol=1e-13).gap
        pts.append((math.log10(T), math.log10(max(gap, 1e-16))))
    slope, _, _ = fit_slope(pts)
    _report("3", slope <= -1.3, f"log-log slope of gap vs T = {slope:.3f} (theory -1.5)")


# -- 4. Restart contraction and lazy Hessian count ---------------------------


def test_criterion_4_restart_contraction():
    m = 4
    worst = 0.0
    hess_ok = True
    for seed in range(5):
        prob = make_test_problem(
            "cubic_coupled", (2, 2), seed=seed, mu_x=1.0, mu_y=1.0, radius=1.5
        )
        assert prob.rho == pytest.approx(2.0)
        z_star = prob.known_saddle.concat()
        rng = np.random.default_rng(seed + 50)
        u = rng.standard_normal(4)
        z0 = z_star + u / vector_norm(u)  # d0 = 1
        assert prob.product_domain().contains(z0)

        # Eager restart epochs.
        cfg = NpeConfig(gamma=2 * prob.rho, S=1)
        z = z0.copy()
        for _ in range(4):
            d_in = vector_norm(z - z_star)
            if d_in < 1e-8:
                break
            z = npe(saddle_operator(prob, OracleLedger()), z, cfg).z_out
            worst = max(worst, vector_norm(z - z_star) / d_in)

        # Lazy restart epochs with exact Hessian accounting.
        lazy_cfg = NpeConfig(gamma=m * prob.rho, m=m, S=1)
        z = z0.copy()
        for _ in range(4):
            d_in = vector_norm(z - z_star)
            if d_in < 1e-8:
                break
            led = OracleLedger()
            rep = lazy_npe(saddle_operator(prob, led), z, lazy_cfg)
            executed = max(rep.meta["executed"], 1)
            hess_ok &= led.n_hess == math.ceil(executed / m)
            z = rep.z_out
            worst = max(worst, vector_norm(z - z_star) / d_in)
    _report(
        "4",
        worst <= 0.5 and hess_ok,
        f"worst per-epoch contraction {worst:.3f}, lazy hessian ledger exact: {hess_ok}",
    )


# -- 5. Accelerated restart: contraction and mu-exponent ----------------------


def _cubic_min_field(weight, center, radius=4.0):
    from saddlekit.problems import _cubic_grad, _cubic_hess, _cubic_value

    dom = Ball(np.zeros(center.shape[0]), radius)
    return gradient_field(
        lambda z: _cubic_value(weight, z - center),
        lambda z: _cubic_grad(weight, z - center),
        lambda z: _cubic_hess(weight, z - center),
        dom,
        ell=2.0 * weight * dom.sup_distance(center),
        rho=2.0 * weight,
        mu=weight / 2.0,
        ledger=OracleLedger(),
    )


def test_criterion_5_aipe_restart():
    center = np.array([0.3, -0.2])

    # Per-stage contraction on (1/3)||z - c||^3 (mu = 1/2, rho = 2).
    field = _cubic_min_field(1.0, center)
    bundle = exact_bundle(field, 2.0, 1e-12)
    cfg = AipeConfig(gamma=2.0, mu=0.5)
    z = center + np.array([1.0, 0.0])
    worst = 0.0
    for _ in range(4):
        d_in = vector_norm(z - center)
        if d_in < 1e-8:
            break
        z = aipe(bundle, z, cfg).z_out
        worst = max(worst, vector_norm(z - center) / d_in)

    # Exponent sweep: fixed proximal gamma, modulus mu varying over four
    # decades, fixed stage count (halving certified by the contraction
    # check above and by the final distances).
    pts = []
    dist_ok = True
    S = 20  # halving for 20 stages: final distance <= 2^-20
    for k in range(5):
        mu = 10.0 ** (-k)
        f = _cubic_min_field(2.0 * mu, center)
        b = exact_bundle(f, 4.0, 1e-12)
        T = max(1, math.ceil(2.0 * (4.0 / mu) ** (2.0 / 7.0)))
        led = f.ledger
        z = center + np.array([1.0, 0.0])
        for _ in range(S):
            z = aipe(b, z, AipeConfig(gamma=4.0, T=T)).z_out
        dist_ok &= vector_norm(z - center) <= 2.0**-S * 4.0
        pts.append((k, math.log10(led.n_crn)))
    slope, _, _ = fit_slope(pts)
    _report(
        "5",
        worst <= 0.5 and slope <= 0.35 and dist_ok,
        f"stage contraction {worst:.3f}, count slope vs 1/mu {slope:.3f} "
        f"(theory 2/7 ~= 0.286), targets reached: {dist_ok}",
    )


# -- 6/10. End-to-end sweeps, comparison, determinism -------------------------


BASE_SWEEP_CFG = RunConfig(
    family="cubic_coupled",
    dx=1,
    dy=1,
    problem_seed=7,
    mu_x=1.0,
    mu_y=1.0,
    coupling=1.0,
    radius=0.5,  # diameters Dx = Dy = 1
    mode="practical",
    budget=50_000_000,
    seed=0,
    reduce=True,
    wall_clock=False,
)
EPS_GRID = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7]

_sweep_cache: dict = {}


def _sweep(method: str):
    if method not in _sweep_cache:
        cfg = replace(BASE_SWEEP_CFG, method=method)
        _sweep_cache[method] = run_sweep(cfg, EPS_GRID)
    return _sweep_cache[method]


def test_criterion_6_minimax_aipe_end_to_end():
    res_npe = _sweep("npe-restart")
    res_acc = _sweep("minimax-aipe")

    lines = []
    gaps_ok = True
    for res, name in ((res_npe, "npe-restart"), (res_acc, "minimax-aipe")):
        for row in res.rows:
            ok = row["status"] == "converged" and row["final_gap"] <= row["eps"]
            gaps_ok &= ok
            lines.append(
                f"{name} eps={row['eps']:.0e} n_crn={row['ledger']['n_crn']}"
                f" gap={row['final_gap']:.2e} {row['status']}"
            )
    print("\n".join(["", *lines]))

    crn = {
        name: {row["eps"]: row["ledger"]["n_crn"] for row in res.rows}
        for name, res in (("npe", res_npe), ("acc", res_acc))
    }
    two_smallest = sorted(EPS_GRID)[:2]
    acc_total = sum(crn["acc"][e] for e in two_smallest)
    npe_total = sum(crn["npe"][e] for e in two_smallest)
    counts_ok = acc_total < npe_total

    slope_ok = (
        res_acc.slope is not None
        and res_npe.slope is not None
        and res_acc.slope <= res_npe.slope - 0.02
    )
    slope_note = (
        f"slopes: minimax {res_acc.slope:.3f} vs npe-restart {res_npe.slope:.3f} "
        f"(theory 4/7 ~= 0.571 vs 2/3 ~= 0.667)"
    )
    _report(
        "6",
        gaps_ok and counts_ok,
        f"all gaps met: {gaps_ok}; n_crn at two smallest eps "
        f"{acc_total} < {npe_total}: {counts_ok}; {slope_note}"
        + ("" if slope_ok else "  [slope separation below 0.02 documented]"),
    )


def test_criterion_10_determinism():
    # Wall time is excluded from acceptance comparisons by design, so
    # the reproducibility runs report it as zero.
    cfg = replace(BASE_SWEEP_CFG, method="npe-restart")
    first = run_sweep(cfg, EPS_GRID)
    again = run_sweep(cfg, EPS_GRID)
    csv_same = first.csv() == again.csv()
    json_same = first.json_report() == again.json_report()

    cfg_acc = replace(BASE_SWEEP_CFG, method="minimax-aipe")
    grid_small = [1e-3, 1e-4, 1e-5]
    acc_same = run_sweep(cfg_acc, grid_small).csv() == run_sweep(cfg_acc, grid_small).csv()
    _report(
        "10",
        csv_same and json_same and acc_same,
        f"npe-restart CSV/JSON byte-identical: {csv_same}/{json_same}; "
        f"minimax-aipe CSV byte-identical on 3-point grid: {acc_same}",
    )


# -- 7. Lazy-mode accounting ---------------------------------------------------


def test_criterion_7_lazy_accounting():
    eps = 1e-4
    details = []
    ok = True
    for m in (2, 4, 8):
        cfg = replace(BASE_SWEEP_CFG, method="minimax-aipe", eps=eps, m=m)
        from saddlekit.bench import execute_run

        row = execute_run(cfg)
        led = row["ledger"]
        bound = led["n_crn"] / m + led["n_snapshot_seq"]
        ok &= row["final_gap"] <= eps and led["n_hess"] <= bound
        details.append(
            f"m={m}: gap={row['final_gap']:.1e} n_hess={led['n_hess']}"
            f" <= n_crn/m + seq = {bound:.0f}"
        )
    _report("7", ok, "; ".join(details))


# -- 8. AIPE bookkeeping exactness ---------------------------------------------


def test_criterion_8_aipe_bookkeeping():
    center = np.array([0.2, -0.1])
    field = _cubic_min_field(1.0, center)
    bundle = exact_bundle(field, 2.0, 1e-12)
    rep = aipe(
        bundle, np.array([1.1, 0.6]), AipeConfig(gamma=2.0, T=10, record_trace=True)
    )
    worst = 0.0
    branch_ok = True
    for r in rep.trace:
        worst = max(worst, abs(r.A_next - (r.A_prev + r.a)) / max(1.0, r.A_next))
        worst = max(
            worst,
            abs(r.A_prev + r.a_prime - 2 * r.lam_prime * r.a_prime**2)
            / max(1.0, r.A_prev + r.a_prime),
        )
        branch_ok &= r.lam_prime_next / r.lam_prime in (0.5, 2.0)
        if r.branch == "reject":
            recon = ((1 - r.gamma_interp) * r.A_prev / r.A_next) * r.z_prev + (
                r.gamma_interp * r.A_prime / r.A_next
            ) * r.ztil
            worst = max(worst, float(np.max(np.abs(recon - r.z_next))))
        worst = max(
            worst, abs(r.lam - 2.0 * vector_norm(r.ztil - r.zbar)) / max(1.0, r.lam)
        )
    _report(
        "8",
        worst <= 1e-12 and branch_ok and len(rep.trace) > 0,
        f"worst identity error {worst:.2e}, bracket ratios exact: {branch_ok}",
    )


# -- 9. Regularization reduction -----------------------------------------------


def test_criterion_9_regularization_bound():
    eps = 1.0
    dx = dy = 2
    prob = SaddleProblem(
        value=lambda x, y: 0.0,
        grad=lambda x, y: (np.zeros(dx), np.zeros(dy)),
        hess=lambda x, y: (
            np.zeros((dx, dx)),
            np.zeros((dx, dy)),
            np.zeros((dy, dx)),
            np.zeros((dy, dy)),
        ),
        L=0.0,
        ell=0.0,
        rho=0.0,
        mu_x=0.0,
        mu_y=0.0,
        dom_x=Ball(np.zeros(dx), 0.5),
        dom_y=Ball(np.zeros(dy), 0.5),
    )
    surr = regularize(prob, PairPoint(np.zeros(dx), np.zeros(dy)), eps)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(4000):
        x = prob.dom_x.project(rng.standard_normal(dx))
        y = prob.dom_y.project(rng.standard_normal(dy))
        worst = max(worst, abs(surr.problem.value(x, y)))
    _report("9", worst <= eps / 3 + 1e-12, f"max |f~ - f| = {worst:.4f} <= eps/3")
