"""Exact computations for knots presented as surgery on special string links
in the solid torus: winding matrices, Alexander polynomials, the wheels line
and the formal Gaussian gluing behind the rational loop expansion."""

from loopline.algebra import (
    LaurentPoly,
    RatFunc,
    T,
    bar,
    det_laurent,
    invert_ratfunc_matrix,
    normalize_alexander,
    parse_laurent,
    signature_at_1,
)
from loopline.diagrams import (
    DiagramSeries,
    JacobiDiagram,
    canonical_form,
    chord,
    exp_truncated,
    log_truncated,
    pair_glue,
    translate,
    union_product,
    wheel,
)
from loopline.errors import LooplineError
from loopline.integration import (
    IntegrableElement,
    LoopExpansion,
    decompose_integrable,
    fg_integrate,
    fg_integrate_threaded,
    lmo_integrate_n,
    surgery_assemble,
    wheels_line_check,
)
from loopline.presentation import (
    Presentation,
    apply_move,
    cover_linking_oracle,
    epsilon,
    linking_matrix,
    parse_presentation,
    validate_special,
    winding_matrix,
)
from loopline.series import PowerSeries, b2n, expand_label, thr_d, wh_prime_coeffs
from loopline.wheels import WheelPolynomial

__version__ = "0.1.0"


def fig8_path() -> str:
    """Path of the bundled figure-eight presentation."""
    from importlib.resources import files

    return str(files("loopline") / "data" / "fig8.sl")
