"""Frozen calibration constants for the restart schedules.

The convergence theory fixes the exponents of the per-epoch iteration
counts but not their constants. Each constant below was calibrated by
``saddlekit.calibration``: starting from 1.0 and doubling until the
measured per-epoch (or per-stage) contractionon the fixed seeded
calibration instances dropped below the target ratio, then frozen
here. ``python -m saddlekit.calibration`` reproduces them.
"""

# T = ceil(NPE_RESTART_C * (gamma/mu)^(2/3)) per epoch of the restarted
# cubic-Newton extragradient method; certifies contraction <= 1/2.
NPE_RESTART_C = 2.0

# T = ceil(LAZY_NPE_RESTART_C * (m + (gamma/mu)^(2/3))) per epoch of the
# lazy-Hessian variant; certifies contraction <= 1/2.
LAZY_NPE_RESTART_C = 1.0

# T = ceil(AIPE_RESTART_C * (gamma/mu)^(2/7)) per stage of the restarted
# accelerated scheme; certifies contraction <= 1/2 across condition
# ratios up to ~1e6 (used by the standalone uniformly convex minimizer).
AIPE_RESTART_C = 2.0

# Stage length used by the triple-loop framework's outer and middle
# accelerated loops. Certifies the weaker contraction <= 4/5, which is
# exactly what the movement-based stage exit needs (movement <= zeta/4
# with ratio r <= 4/5 certifies distance <= (r/(1-r)) * zeta/4 = zeta);
# the shorter stages make the nested loops far cheaper.
AIPE_STAGE_C = 1.0
