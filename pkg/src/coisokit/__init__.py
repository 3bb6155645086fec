"""coiso-kit: exact symbolic and numeric calculus for coisotropic deformations.

Everything is immutable after construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from .coeff_ring import (
    ChartSpec,
    RingElement,
    Scalar,
    eval_point,
    make_chart,
    partial_derivative,
    ring_mul,
    taylor_shift,
)
from .errors import (
    ChartMismatchError,
    CoisoKitError,
    DegenerateBivectorError,
    DimensionMismatchError,
    DomainBoundError,
    FibreDependenceError,
    JetOrderError,
    NonAffineFibreError,
    NonInvertibleScalarError,
    NotClosedError,
    NotCoisotropicError,
    NotPoissonError,
    NotVerticalError,
    PencilError,
    PeriodicCoordinateError,
    PresymplecticError,
    ScenarioError,
    TruncationCapError,
    UnknownCoordinateError,
)
from .forms import (
    DifferentialForm,
    SubbundleSpec,
    de_rham_d,
    fibrewise_degree_classify,
    interior_product,
    is_in_omega_le,
    leaf_subbundle,
    leafwise_d,
    leafwise_sharp_inverse,
    leafwise_sharp_star,
    linear_fibre_change,
    musical_inverse,
    pullback_zero_section,
    restrict_to_subbundle,
    sharp_star,
    sharp_star_inverse,
)
from .linfty import (
    CoisoAlgebra,
    CoisotropyResult,
    ConvergenceRow,
    ConvergenceTable,
    TwistedElement,
    coiso_algebra_from_form,
    coisotropic_brackets,
    coisotropy_check_numeric,
    higher_jacobi_verify,
    kuranishi_rep,
    lambda_n,
    make_coiso_algebra,
    mc_partial_table,
    mc_series_exact,
    pushforward_oracle_numeric,
    sample_grid,
    twisted_brackets,
    twisted_lambda,
    twisted_mc,
)
from .multivector import (
    MultiVectorField,
    VerticalSection,
    as_vertical,
    exp_ad,
    fibre_translate_pushforward,
    projection_P,
    schouten_bracket,
    sharp_contract,
)
from .obstruction import (
    ObstructionReport,
    TorusExample,
    beta_of,
    build_T4_example,
    fibre_torus_integral,
    obstructedness_certificate,
)
from .symplectic_model import (
    AffinePencil,
    GotayModel,
    PresymplecticData,
    gotay_local_model,
    invert_affine_pencil,
    parse_pencil_text,
    pencil_product_defect,
    symplectic_to_poisson,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
