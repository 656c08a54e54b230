"""Clark measures of rational inner functions on the polydisc and the 2x2 matrix ball."""
from .coarea import LevelSetSample, integrate_coarea, trace_level_set
from .density import (
    GramSystem,
    ObstructionVerdict,
    RjFunction,
    build_rj,
    gram_residual,
    lemma_lower_bound_test,
    obstruction_detect,
    rj_ray_bound_check,
)
from .measure import (
    FiberMeasure,
    SampledClarkMeasure,
    assemble_matrix_ball,
    assemble_polydisc,
    disintegration_check,
    fiber_clark_measure,
    poisson_check,
)
from .poly import MultiPoly, UniPoly
from .rif import MATRIX_BALL, POLYDISC, NotInnerError, RationalInnerFn
from .roots import approx_gcd, content_in_variable, roots_on_circle

__all__ = [
    "FiberMeasure",
    "GramSystem",
    "LevelSetSample",
    "MATRIX_BALL",
    "MultiPoly",
    "NotInnerError",
    "ObstructionVerdict",
    "POLYDISC",
    "RationalInnerFn",
    "RjFunction",
    "SampledClarkMeasure",
    "UniPoly",
    "approx_gcd",
    "assemble_matrix_ball",
    "assemble_polydisc",
    "build_rj",
    "content_in_variable",
    "disintegration_check",
    "fiber_clark_measure",
    "gram_residual",
    "integrate_coarea",
    "lemma_lower_bound_test",
    "obstruction_detect",
    "poisson_check",
    "rj_ray_bound_check",
    "roots_on_circle",
    "trace_level_set",
]
