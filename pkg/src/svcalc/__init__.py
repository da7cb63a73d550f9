"""Numerical metric calculus for set-valued functions of one real variable."""

from svcalc.approximant import (
    ErrorCurve,
    LocalLinearApproximant,
    OrderFit,
    alpha_probe,
    approximant_anchored,
    approximant_eval,
    build_approximant,
    error_curve,
    fit_order,
)
from svcalc.calculus import (
    DerivativeField,
    HLadder,
    anchored_dd,
    derivative_union,
    full_dd,
    one_sided_derivative,
    uniform_deviation,
)
from svcalc.set_core import (
    CompactSet,
    MetricPairSet,
    Tolerances,
    dist_point_set,
    hausdorff_direct,
    hausdorff_via_pairs,
    metric_chains,
    metric_difference,
    metric_linear_combination,
    metric_pairs,
    proj_point_set,
    scale_translate,
    set_norm,
)
from svcalc.svf import SetValuedFunction, eval, eval_aligned, gallery

__version__ = "0.1.0"
