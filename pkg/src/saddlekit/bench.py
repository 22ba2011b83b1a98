"""Benchmark harness: configured runs, sweeps, and slope fits.

A run solves one synthetic instance to a target accuracy and records
the oracle ledger plus an independently measured duality gap. A sweep
repeats the run over an accuracy grid and fits the log-log slope of
CRN calls against 1/eps, the quantity the complexity theory predicts.

Methods follow the convex-concave reduction protocol by default: the
instance is cubically regularized at each eps (weights eps/(2*D^3)),
the solver schedules its iteration counts from the regularization
moduli alone, and the gap is measured on the original problem at the
end. Runs are deterministic for a fixed seed; wall time is reported but
never used in any comparison.
"""

from __future__ import annotations

import configparser
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import constants
from .aipe import solve_uc_min
from .errors import BadParams, ConfigError, DegenerateFit, SlopeNeedsThreePoints
from .framework import FrameworkConfig, minimax_aipe, regularize, schedule_params
from .gap import duality_gap
from .ledger import OracleLedger
from .linalg import vector_norm
from .npe import (
    STATUS_BUDGET,
    STATUS_CONVERGED,
    NpeConfig,
    lazy_npe,
    lazy_npe_restart,
    npe,
    npe_restart,
)
from .operators import saddle_operator, x_slice_field
from .problems import PairPoint, make_test_problem

SCHEMA_VERSION = 1
METHODS = ("npe", "npe-restart", "len", "len-restart", "aipe-restart", "minimax-aipe")
CSV_COLUMNS = ("eps", "n_crn", "n_hess", "n_grad", "n_eg", "wall_ms", "final_gap", "status")


@dataclass(frozen=True)
class RunConfig:
    family: str = "cubic_coupled"
    dx: int = 1
    dy: int = 1
    problem_seed: int = 7
    mu_x: float = 1.0
    mu_y: float = 1.0
    coupling: float = 1.0
    radius: float = 0.5
    method: str = "npe-restart"
    eps: float = 1e-4
    mode: str = "practical"
    m: int = 1
    budget: int = 1_000_000
    seed: int = 0
    reduce: bool = True
    checkpoints: tuple[int, ...] = ()
    wall_clock: bool = True
    gap_tol: float = 0.0  # 0 means auto: min(1e-10, 1e-3 * eps)
    out: str = ""

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.mode not in ("practical", "theory"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        if self.m < 1:
            raise ConfigError("m must be >= 1")

    # INI round trip ------------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["problem"] = {
            "family": self.family,
            "dx": str(self.dx),
            "dy": str(self.dy),
            "seed": str(self.problem_seed),
            "mu_x": repr(self.mu_x),
            "mu_y": repr(self.mu_y),
            "coupling": repr(self.coupling),
            "radius": repr(self.radius),
        }
        cp["run"] = {
            "method": self.method,
            "eps": repr(self.eps),
            "mode": self.mode,
            "m": str(self.m),
            "budget": str(self.budget),
            "seed": str(self.seed),
            "reduce": str(self.reduce).lower(),
            "checkpoints": ",".join(str(c) for c in self.checkpoints),
            "wall_clock": str(self.wall_clock).lower(),
            "gap_tol": repr(self.gap_tol),
        }
        cp["output"] = {"out": self.out}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @staticmethod
    def from_ini(text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
            prob = cp["problem"]
            run = cp["run"]
            out = cp["output"]["out"] if cp.has_section("output") else ""
            ckpt_raw = run.get("checkpoints", "").strip()
            checkpoints = (
                tuple(int(v) for v in ckpt_raw.split(",") if v.strip())
                if ckpt_raw
                else ()
            )
            cfg = RunConfig(
                family=prob.get("family", "cubic_coupled"),
                dx=prob.getint("dx", 1),
                dy=prob.getint("dy", 1),
                problem_seed=prob.getint("seed", 7),
                mu_x=prob.getfloat("mu_x", 1.0),
                mu_y=prob.getfloat("mu_y", 1.0),
                coupling=prob.getfloat("coupling", 1.0),
                radius=prob.getfloat("radius", 0.5),
                method=run.get("method", "npe-restart"),
                eps=run.getfloat("eps", 1e-4),
                mode=run.get("mode", "practical"),
                m=run.getint("m", 1),
                budget=run.getint("budget", 1_000_000),
                seed=run.getint("seed", 0),
                reduce=run.getboolean("reduce", True),
                checkpoints=checkpoints,
                wall_clock=run.getboolean("wall_clock", True),
                gap_tol=run.getfloat("gap_tol", 0.0),
                out=out,
            )
        except (KeyError, ValueError, configparser.Error) as exc:
            raise ConfigError(f"bad config file: {exc}") from exc
        cfg.validate()
        return cfg


def build_problem(cfg: RunConfig):
    return make_test_problem(
        cfg.family,
        (cfg.dx, cfg.dy),
        cfg.problem_seed,
        mu_x=cfg.mu_x,
        mu_y=cfg.mu_y,
        coupling=cfg.coupling,
        radius=cfg.radius,
    )


def start_point(problem, seed: int) -> PairPoint:
    """Seeded feasible start at a reproducible distance from the saddle."""
    rng = np.random.default_rng(seed)
    saddle = problem.known_saddle
    if saddle is None:
        return PairPoint(
            problem.dom_x.project(rng.standard_normal(problem.dx)),
            problem.dom_y.project(rng.standard_normal(problem.dy)),
        )

    def push(dom, p):
        u = rng.standard_normal(p.shape[0])
        n = vector_norm(u)
        if n == 0:
            return p
        room = 0.9 * (dom.diameter() / 2.0 - vector_norm(p - getattr(dom, "center", p)))
        return dom.project(p + u * (max(room, 0.1 * dom.diameter() / 2.0) / n))

    return PairPoint(push(problem.dom_x, saddle.x), push(problem.dom_y, saddle.y))


def _reduced_setup(problem, cfg: RunConfig):
    """Apply the convex-concave reduction when requested.

    Returns (surrogate problem, scheduled modulus per block). The
    schedule deliberately ignores any uniform convexity the instance
    happens to have: the pipeline treats it as convex-concave, which is
    what the complexity claims quantify over.
    """
    if not cfg.reduce:
        if problem.mu <= 0:
            raise ConfigError("reduce=false needs a uniformly convex-concave instance")
        return problem, problem.mu_x, problem.mu_y
    center = PairPoint(
        problem.dom_x.project(np.zeros(problem.dx)),
        problem.dom_y.project(np.zeros(problem.dy)),
    )
    surr = regularize(problem, center, cfg.eps)
    return surr.problem, surr.x_weight / 2.0, surr.y_weight / 2.0


def execute_run(cfg: RunConfig, problem=None) -> dict:
    """Run one configured solve and return the report dictionary."""
    cfg.validate()
    problem = problem if problem is not None else build_problem(cfg)
    z0 = start_point(problem, cfg.seed)
    gap_tol = cfg.gap_tol if cfg.gap_tol > 0 else min(1e-10, 1e-3 * cfg.eps)

    t0 = time.perf_counter()
    if cfg.method == "minimax-aipe":
        report = _run_framework(problem, cfg, z0)
    elif cfg.method in ("npe-restart", "len-restart"):
        report = _run_restart(problem, cfg, z0)
    elif cfg.method in ("npe", "len"):
        report = _run_plain_npe(problem, cfg, z0, gap_tol)
    elif cfg.method == "aipe-restart":
        report = _run_aipe_min(problem, cfg, z0)
    else:  # pragma: no cover - validate() guards this
        raise ConfigError(f"unknown method {cfg.method!r}")
    wall_ms = (time.perf_counter() - t0) * 1000.0 if cfg.wall_clock else 0.0

    gm = duality_gap(problem, report.z_out, gap_tol)
    # Row status: a run converged when the independently measured gap
    # meets the target, whatever terminal state the solver reported.
    if report.status == STATUS_BUDGET:
        status = STATUS_BUDGET
    elif gm.gap <= cfg.eps:
        status = STATUS_CONVERGED
    else:
        status = "target_missed"

    led = report.ledger
    return {
        "schema_version": SCHEMA_VERSION,
        "config": _config_dict(cfg),
        "status": status,
        "ledger": led.as_dict(),
        "final_gap": float(gm.gap),
        "raw_gap": float(gm.raw_gap),
        "z_out": [float(v) for v in np.asarray(report.z_out).ravel()],
        "wall_ms": wall_ms,
        "meta": _plain(report.meta),
    }


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["checkpoints"] = list(cfg.checkpoints)
    return d


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.ravel()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _run_framework(problem, cfg: RunConfig, z0: PairPoint):
    surr, mu_x_sched, mu_y_sched = _reduced_setup(problem, cfg)
    engine = "len" if cfg.m > 1 else "npe"
    fcfg = schedule_params(surr, cfg.eps, cfg.mode, engine, cfg.m, cfg.budget)
    fcfg = replace(fcfg, mu_x_sched=mu_x_sched, mu_y_sched=mu_y_sched)
    return minimax_aipe(surr, z0, fcfg)


def _run_restart(problem, cfg: RunConfig, z0: PairPoint):
    surr, mu_x_sched, mu_y_sched = _reduced_setup(problem, cfg)
    mu_sched = min(mu_x_sched, mu_y_sched)
    lazy = cfg.method == "len-restart"
    gamma = cfg.m * surr.rho if lazy else 2.0 * surr.rho
    base = (gamma / mu_sched) ** (2.0 / 3.0)
    if lazy:
        T = max(1, math.ceil(constants.LAZY_NPE_RESTART_C * (cfg.m + base)))
    else:
        T = max(1, math.ceil(constants.NPE_RESTART_C * base))
    dist_target = cfg.eps / (6.0 * max(surr.L, 1.0))
    d0 = surr.product_domain().diameter()
    S = max(1, math.ceil(math.log2(max(d0 / dist_target, 2.0))))
    ledger = OracleLedger(crn_budget=cfg.budget)
    view = saddle_operator(surr, ledger)
    ncfg = NpeConfig(gamma=gamma, T=T, S=S, m=cfg.m, move_target=dist_target / 4.0)
    runner = lazy_npe_restart if lazy else npe_restart
    return runner(view, z0.concat(), ncfg)


def _run_plain_npe(problem, cfg: RunConfig, z0: PairPoint, gap_tol: float):
    """Sublinear mode: double T until the measured gap meets eps."""
    gamma = 2.0 * problem.rho if problem.rho > 0 else 1.0
    d0 = problem.product_domain().diameter()
    T = max(8, math.ceil((gamma * d0**3 / cfg.eps) ** (2.0 / 3.0)))
    ledger = OracleLedger(crn_budget=cfg.budget)
    view = saddle_operator(problem, ledger)
    report = None
    while True:
        ncfg = NpeConfig(gamma=gamma, T=T, m=cfg.m)
        runner = lazy_npe if cfg.method == "len" else npe
        report = runner(view, z0.concat(), ncfg)
        if report.status == STATUS_BUDGET:
            return report
        gap = duality_gap(problem, report.z_out, gap_tol).gap
        if gap <= cfg.eps or report.status != STATUS_CONVERGED:
            return report
        if ledger.exhausted():
            return replace(report, status=STATUS_BUDGET)
        T *= 2


def _run_aipe_min(problem, cfg: RunConfig, z0: PairPoint):
    """Accelerated minimization benchmark on a decoupled instance.

    The saddle of a decoupled objective factorizes into independent
    slice problems, so two restarted accelerated minimizations (one per
    block) solve it; coupled instances are rejected.
    """
    A = problem.meta.get("A")
    if A is None or np.any(A):
        raise ConfigError("aipe-restart needs a decoupled instance (coupling = 0)")
    if min(problem.mu_x, problem.mu_y) <= 0:
        raise ConfigError("aipe-restart needs uniformly convex-concave slices")
    ledger = OracleLedger(crn_budget=cfg.budget)
    dist_target = cfg.eps / (4.0 * max(problem.L, 1.0))
    x_field = x_slice_field(problem, z0.y, ledger)
    rep_x = solve_uc_min(x_field, z0.x, dist_target)
    from .operators import y_slice_field

    y_field = y_slice_field(problem, rep_x.z_out, ledger)
    rep_y = solve_uc_min(y_field, z0.y, dist_target)
    from .npe import SolverReport

    status = STATUS_BUDGET if ledger.exhausted() else STATUS_CONVERGED
    return SolverReport(
        z_out=np.concatenate([rep_x.z_out, rep_y.z_out]),
        status=status,
        ledger=ledger.snapshot(),
        meta={"x_meta": rep_x.meta, "y_meta": rep_y.meta},
    )


# Sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[dict, ...]
    slope: float | None
    intercept: float | None
    ci_halfwidth: float | None
    config: RunConfig
    eps_grid: tuple[float, ...] = ()

    def csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for row in self.rows:
            lines.append(
                ",".join(
                    [
                        repr(float(row["eps"])),
                        str(row["ledger"]["n_crn"]),
                        str(row["ledger"]["n_hess"]),
                        str(row["ledger"]["n_grad"]),
                        str(row["ledger"]["n_eg"]),
                        repr(float(row["wall_ms"])),
                        repr(float(row["final_gap"])),
                        row["status"],
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def json_report(self) -> str:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": _config_dict(self.config),
            "eps_grid": [float(e) for e in self.eps_grid],
            "rows": self.rows,
            "slope": self.slope,
            "intercept": self.intercept,
            "ci_halfwidth": self.ci_halfwidth,
        }
        return json.dumps(payload, sort_keys=True, indent=1)


def fit_slope(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """OLS slope/intercept/95%-CI half-width over (x, y) pairs in log10 space."""
    if len(points) < 3:
        raise SlopeNeedsThreePoints(f"need >= 3 points, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    xm, ym = xs.mean(), ys.mean()
    sxx = float(np.sum((xs - xm) ** 2))
    if sxx == 0.0:
        raise DegenerateFit("identical abscissae")
    slope = float(np.sum((xs - xm) * (ys - ym)) / sxx)
    intercept = ym - slope * xm
    resid = ys - (intercept + slope * xs)
    dof = len(points) - 2
    sigma2 = float(np.sum(resid**2) / dof) if dof > 0 else 0.0
    se = math.sqrt(sigma2 / sxx)
    return slope, float(intercept), 1.96 * se


def run_sweep(cfg: RunConfig, eps_grid: list[float]) -> SweepResult:
    """One row per eps (descending); slope fit of log10 n_crn vs log10(1/eps)."""
    if len(eps_grid) < 3:
        raise SlopeNeedsThreePoints("sweep needs at least 3 grid points")
    grid = sorted(set(float(e) for e in eps_grid), reverse=True)
    problem = build_problem(cfg)
    rows = []
    for i, eps in enumerate(grid):
        row_cfg = replace(cfg, eps=eps, seed=cfg.seed + i)
        try:
            row = execute_run(row_cfg, problem)
        except Exception as exc:  # row marked failed, sweep continues
            row = {
                "schema_version": SCHEMA_VERSION,
                "config": _config_dict(row_cfg),
                "status": f"failed:{type(exc).__name__}",
                "ledger": OracleLedger().as_dict(),
                "final_gap": float("nan"),
                "raw_gap": float("nan"),
                "z_out": [],
                "wall_ms": 0.0,
                "meta": {},
            }
        row["eps"] = eps
        rows.append(row)

    ok = [r for r in rows if not str(r["status"]).startswith("failed")]
    slope = intercept = ci = None
    if len(ok) >= 3:
        pts = [
            (math.log10(1.0 / r["eps"]), math.log10(max(r["ledger"]["n_crn"], 1)))
            for r in ok
        ]
        slope, intercept, ci = fit_slope(pts)
    return SweepResult(
        rows=tuple(rows),
        slope=slope,
        intercept=intercept,
        ci_halfwidth=ci,
        config=cfg,
        eps_grid=tuple(grid),
    )


def parse_eps_grid(spec: str) -> list[float]:
    """Parse '1e-3:1e-7:log5' or a comma-separated list of values."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3 or not parts[2].startswith("log"):
            raise ConfigError(f"bad eps grid spec {spec!r}")
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2][3:])
        if n < 2:
            raise ConfigError("grid needs at least 2 points")
        return list(np.logspace(math.log10(lo), math.log10(hi), n))
    return [float(v) for v in spec.split(",") if v.strip()]
