"""Level-strategyproof aggregation of probability distributions over ordered grades."""

__version__ = "0.1.0"

from .aggregators import (
    Method,
    aggregate,
    dominated_fastpath,
    grading_curve_aggregate,
    maxmin_level,
    mean_aggregate,
    median_level,
    mu_w,
    order_cumulative,
    proportional_cumulative,
    rational_weights_median,
    weighted_proportional,
)
from .axioms import (
    AuditReport,
    InstanceSpace,
    Utility,
    Witness,
    audit_certainty,
    audit_l1_prob_sp,
    audit_level_sp,
    audit_lr_cdf_sp,
    audit_plausibility,
    audit_proportionality,
    audit_w_axioms,
    find_manipulation,
    replay,
)
from .errors import *  # noqa: F401,F403
from .phantoms import (
    Curve,
    GradingCurve,
    PhantomSystem,
    dictator_phantoms,
    is_certainty_preserving,
    is_plausibility_preserving,
    is_weak_diversity,
    order_phantoms,
    phantoms_from_grading_curve,
    phantoms_from_weights,
    proportional_phantoms,
    validate,
)
from .scale import Cdf, OutcomeScale, Pmf, Profile, cdf_distance, dominates, quantile
from .voting import Election, majority_value, mj_compare, mju_tally, partial_sp_ranking_check, referendum
