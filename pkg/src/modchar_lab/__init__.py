"""Numerical laboratory for partial sums of completely multiplicative
functions that agree with a Dirichlet character off a finite prime set.

The package exposes five layers: character arithmetic, sieved partial
sums, Dirichlet-series evaluation by two independent routes, exact torus
orbit and discrepancy machinery, and the quantitative pipeline that ties
them together.
"""
__version__ = "0.1.0"

from .characters import (
    DirichletCharacter,
    RationalPhase,
    conductor,
    conjugate_character,
    enumerate_characters,
    eval_char,
    gauss_sum,
    parity,
)
from .errors import (
    CapabilityError,
    CompositeModulusKeyError,
    ConvergenceError,
    DomainError,
    ModcharError,
    NonPrimitiveBaseError,
    PhaseCollisionError,
    PoleError,
    PrecisionError,
    ResourceLimitError,
    ValidationError,
    exit_code_for,
)
from .lfunction import (
    BoundedValue,
    EvalSettings,
    fe_check,
    functional_equation_residual,
    hurwitz_zeta,
    hurwitz_zeta_vec,
    l_function,
    l_function_vec,
    l_lemma1_check,
    root_number,
)
from .modchar import (
    ModifiedCharacter,
    PartialSumTrace,
    eval_f,
    exponents,
    growth_record,
    make_modified,
    partial_sums,
)
from .series import (
    EulerFactors,
    PoleLocation,
    F_euler,
    F_integral,
    euler_factors,
    euler_factors_at_spike,
    nearest_pole,
    poles_of_inverse_Ef,
)
from .torus import (
    DiscrepancyReport,
    ExpSumResult,
    TorusConfig,
    TorusPoint,
    baker_profile,
    box_hits,
    count_Q,
    default_c_d,
    discrepancy_decay_fit,
    et_bound,
    exact_star_discrepancy,
    exp_sum,
    orbit_point,
)
from .analysis import (
    MomentResult,
    PlancherelReport,
    SpikeReport,
    gamma_moment,
    moment_accumulate,
    omega_fit,
    plancherel_check,
    plancherel_lhs,
    plancherel_rhs,
    spike_scan,
)
from .reports import FitReport, power_law_fit
