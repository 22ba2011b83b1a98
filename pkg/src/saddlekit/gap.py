"""Independent duality-gap measurement.

Gap(x, y) = max_y' f(x, y') - min_x' f(x', y). The two inner solves run
on their own ledger so measurement never contaminates a solver's
reported complexity. The reported gap is clamped at zero; the raw value
(>= -2*tol by construction) is kept alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ledger import OracleLedger
from .problems import PairPoint, SaddleProblem
from .responses import best_response_x, best_response_y


@dataclass(frozen=True)
class GapMeasurement:
    gap: float
    raw_gap: float
    x_best: np.ndarray
    y_best: np.ndarray
    inner_tol: float
    eval_ledger: OracleLedger


def duality_gap(
    problem: SaddleProblem,
    zhat,
    tol: float = 1e-10,
    ledger: OracleLedger | None = None,
) -> GapMeasurement:
    """Measure the duality gap at zhat with both inner solves to tol."""
    eval_ledger = ledger if ledger is not None else OracleLedger()
    if isinstance(zhat, PairPoint):
        xhat, yhat = zhat.x, zhat.y
    else:
        z = np.asarray(zhat, dtype=float)
        xhat, yhat = z[: problem.dx], z[problem.dx :]

    y_best = best_response_y(problem, xhat, tol, eval_ledger, y_start=yhat)
    x_best = best_response_x(problem, yhat, tol, eval_ledger, x_start=xhat)
    eval_ledger.charge_value(2)
    raw = float(problem.value(xhat, y_best) - problem.value(x_best, yhat))
    return GapMeasurement(
        gap=max(raw, 0.0),
        raw_gap=raw,
        x_best=x_best,
        y_best=y_best,
        inner_tol=tol,
        eval_ledger=eval_ledger,
    )
