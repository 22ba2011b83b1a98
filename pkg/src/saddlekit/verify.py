"""Self-contained property suites runnable from the CLI.

Each suite prints one PASS/FAIL line per check and returns overall
success. These mirror the core invariants (the pytest suite is the
authoritative gate); they exist so a deployed install can sanity-check
itself without a test harness.
"""

from __future__ import annotations

import numpy as np

from .aipe import AipeConfig, aipe, exact_bundle, solve_coefficient
from .crn import crn_step, eg_step, lazy_crn_step
from .domains import Ball, Box
from .gap import duality_gap
from .ledger import OracleLedger
from .linalg import solve_shifted, vector_norm
from .operators import gradient_field, saddle_operator
from .problems import make_test_problem, quadratic_saddle


def _check(name: str, ok: bool, detail: str = "") -> bool:
    tag = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[{tag}] {name}{suffix}")
    return ok


def suite_linalg() -> bool:
    rng = np.random.default_rng(0)
    ok = True
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 17))
        G = rng.standard_normal((n, n))
        J = G - G.T + np.eye(n) * rng.uniform(0.1, 2.0)  # monotone
        rhs = rng.standard_normal(n)
        lam = float(rng.uniform(0.0, 2.0))
        s = solve_shifted(J, lam, rhs)
        resid = vector_norm((J + lam * np.eye(n)) @ s - rhs)
        worst = max(worst, resid / (1.0 + vector_norm(rhs)))
    ok &= _check("shifted solve residual", worst <= 1e-10, f"worst {worst:.2e}")

    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        a, b = rng.standard_normal(n), rng.standard_normal(n)
        tri = vector_norm(a + b) - (vector_norm(a) + vector_norm(b))
        hom = abs(vector_norm(2.5 * a) - 2.5 * vector_norm(a))
        worst = max(worst, tri, hom)
    ok &= _check("norm triangle/homogeneity", worst <= 1e-12, f"worst {worst:.2e}")
    return ok


def suite_domains() -> bool:
    rng = np.random.default_rng(1)
    doms = [
        Ball(rng.standard_normal(3), 1.5),
        Box(-np.ones(4), np.array([1.0, 2.0, 0.5, 3.0])),
    ]
    ok = True
    worst_idem, worst_exp = 0.0, 0.0
    for dom in doms:
        for _ in range(1000):
            p = rng.standard_normal(dom.dim) * 3
            q = rng.standard_normal(dom.dim) * 3
            pp = dom.project(p)
            worst_idem = max(worst_idem, vector_norm(dom.project(pp) - pp))
            d_proj = vector_norm(dom.project(p) - dom.project(q))
            worst_exp = max(worst_exp, d_proj - vector_norm(p - q))
    ok &= _check("projection idempotent", worst_idem <= 1e-14, f"worst {worst_idem:.2e}")
    ok &= _check("projection non-expansive", worst_exp <= 1e-12, f"worst {worst_exp:.2e}")
    return ok


def suite_oracles() -> bool:
    rng = np.random.default_rng(2)
    ok = True

    # CRN proximal property at gamma = 2*rho.
    worst = -1e300
    for k in range(100):
        fam = "cubic_coupled" if k % 2 == 0 else "quartic_coupled"
        dims = (int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        prob = make_test_problem(fam, dims, seed=1000 + k, mu_x=1.0, mu_y=1.0)
        view = saddle_operator(prob, OracleLedger())
        zbar = view.domain.project(rng.standard_normal(view.dim))
        tol = 1e-8
        cert = crn_step(view, zbar, 2.0 * prob.rho, tol)
        lhs = vector_norm(view.F(cert.z) + cert.u + cert.lam * (cert.z - zbar))
        rhs = 0.5 * prob.rho * vector_norm(cert.z - zbar) ** 2 + 10 * tol
        worst = max(worst, lhs - rhs)
    ok &= _check("CRN proximal residual", worst <= 0, f"worst margin {worst:.2e}")

    # EG certified-norm bound on quadratic saddles.
    worst = -1e300
    for k in range(100):
        prob = quadratic_saddle((2, 2), seed=2000 + k)
        view = saddle_operator(prob, OracleLedger())
        z0 = prob.known_saddle.concat() + rng.standard_normal(4)
        eta = 0.5 / prob.ell
        res = eg_step(view, z0, eta)
        el = eta * prob.ell
        bound = (1 + el + el**2) / (eta * np.sqrt(1 - el**2))
        lhs = vector_norm(view.F(res.z1) + res.c1)
        dist = vector_norm(z0 - prob.known_saddle.concat())
        worst = max(worst, lhs - bound * dist * (1 + 1e-9))
    ok &= _check("EG certified norm", worst <= 0, f"worst margin {worst:.2e}")

    # Lazy ledger accounting.
    prob = make_test_problem("cubic_coupled", (2, 2), seed=3)
    led = OracleLedger()
    view = saddle_operator(prob, led)
    z = view.domain.project(rng.standard_normal(view.dim))
    snap = z.copy()
    view.start_snapshot_sequence()
    for _ in range(5):
        lazy_crn_step(view, z, snap, 2.0 * prob.rho, 1e-8)
        z = view.domain.project(z + 0.01 * rng.standard_normal(view.dim))
    ok &= _check("lazy snapshot n_hess", led.n_hess == 1, f"n_hess={led.n_hess}")
    return ok


def suite_solvers() -> bool:
    ok = True

    # Coefficient equation.
    a = solve_coefficient(3.0, 0.5)
    ok &= _check("coefficient root", abs(3.0 + a - 2 * 0.5 * a * a) <= 1e-12 * max(a, 1))

    # One accelerated stage on a quadratic.
    led = OracleLedger()
    dom = Ball(np.zeros(2), 10.0)
    field = gradient_field(
        lambda z: 0.5 * float(z @ z),
        lambda z: z,
        lambda z: np.eye(2),
        dom,
        ell=1.0,
        rho=1e-9,
        mu=0.0,
        ledger=led,
    )
    bundle = exact_bundle(field, 1.0, 1e-12)
    rep = aipe(bundle, np.array([1.0, 0.0]), AipeConfig(gamma=1.0, T=5))
    ok &= _check("AIPE quadratic decrease", rep.value_out < 0.5 * 1e-3)

    # Gap at a known saddle.
    prob = make_test_problem("bilinear", (2, 2), seed=5)
    gm = duality_gap(prob, prob.known_saddle, tol=1e-10)
    ok &= _check("gap at saddle", gm.gap <= 2e-10, f"gap={gm.gap:.2e}")
    return ok


SUITES = {
    "linalg": suite_linalg,
    "domains": suite_domains,
    "oracles": suite_oracles,
    "solvers": suite_solvers,
}


def run_suite(name: str) -> bool:
    if name == "all":
        results = [fn() for fn in SUITES.values()]
        return all(results)
    if name not in SUITES:
        print(f"unknown suite {name!r}; available: {sorted(SUITES)} or 'all'")
        return False
    return SUITES[name]()
