"""Wilson divided-difference calculus, Wilson series and Wiman-Valiron diagnostics."""
from .combinatorics import central_factorial_t, leibniz_c, maclaurin_to_wilson_matrix, wilson_to_maclaurin_matrix
from .difference_equations import (
    NewtonPolygon,
    WilsonDifferenceEquation,
    counterexample_equation,
    equation_residual,
    newton_polygon,
)
from .errors import (
    DegenerateNodeError,
    EvaluationError,
    GrowthGateWarning,
    PoleError,
    PreconditionError,
    SpecParseError,
    TruncationError,
    WilsonError,
)
from .numerics import DEFAULT_BITS, PrecisionPolicy, max_modulus, sqrt_w
from .operators import FunctionHandle, apply_aw, apply_dw, apply_dw_iterated, apply_word, cooper_dw_n, leibniz_dw_n
from .scan import run_wv_scan
from .series import EntireFunctionSpec, WilsonSeries, eval_wilson, expand_wilson, growth_gate, tau_eval
from .wiman_valiron import (
    make_schedule,
    mu_nu,
    order_from_coeffs,
    order_from_nu,
    tail_check,
    wv_estimate_check,
    wv_main_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
