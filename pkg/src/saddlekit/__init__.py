"""Second-order convex-concave minimax optimization with oracle accounting.

Solvers: cubic-Newton proximal extragradient (eager and lazy-Hessian
variants, plain and restarted), the search-free accelerated inexact
proximal extragradient minimizer, and the triple-loop accelerated
minimax framework built on top of them. A benchmark CLI reproduces the
complexity-exponent behaviour at desk scale via oracle-call counting
and log-log slope fits.
"""

from .aipe import (
    AipeConfig,
    AipeReport,
    InexactOracleBundle,
    aipe,
    aipe_restart,
    exact_bundle,
    lazy_bundle,
    solve_coefficient,
    solve_uc_min,
)
from .crn import EgResult, ProxCertificate, crn_prox, crn_step, eg_step, lazy_crn_prox, lazy_crn_step
from .domains import Ball, Box, FreeBall, ProductDomain, project
from .errors import (
    BadParams,
    BadStepSize,
    ConfigError,
    DegenerateFit,
    DimensionMismatch,
    NoConvergence,
    NonFiniteValue,
    NoProgress,
    SaddlekitError,
    SingularSystem,
    SlopeNeedsThreePoints,
)
from .framework import (
    FrameworkConfig,
    SurrogateProblem,
    g_surrogate,
    h_surrogate,
    iprox_phi,
    iprox_psi,
    minimax_aipe,
    regularize,
    schedule_params,
)
from .gap import GapMeasurement, duality_gap
from .ledger import OracleLedger
from .linalg import solve_shifted, vector_norm
from .npe import (
    NpeConfig,
    SolverReport,
    lazy_npe,
    lazy_npe_restart,
    npe,
    npe_restart,
)
from .operators import (
    OperatorView,
    eval_F,
    gradient_field,
    saddle_operator,
    x_slice_field,
    y_slice_field,
)
from .problems import (
    PairPoint,
    SaddleProblem,
    make_test_problem,
    quadratic_saddle,
    with_cubic_penalty,
)
from .responses import (
    best_response_x,
    best_response_y,
    inexact_grad_Phi,
    inexact_value_Phi,
)

__version__ = "0.1.0"
