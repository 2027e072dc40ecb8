"""Grand Lebesgue Space norms, L_p moduli of convexity and convexity checks."""
from .measure import (
    FunctionBatch,
    LyapunovCheck,
    MeasurePartition,
    SimpleFunction,
    ess_sup,
    format_function,
    lp_norm,
    lyapunov_monotone,
    parse_function,
    read_function,
    write_function,
)
from .optimize import BatchOptResult, ScalarOptResult, batch_extremize, scalar_extremize
from .psi import (
    Constant,
    EndpointSingular,
    Extremal,
    Natural,
    PowerRoot,
    PsiSpec,
    Tabulated,
    btheta_matched_psi,
    btheta_norm,
    natural_psi,
    parse_psi,
    psi_eval,
)
from .norms import GLSpace, batch_gls_norm, batch_kappa, batch_theta, gls_norm, kappa, theta
from .sampling import PairBatch, random_function, sample_ball_pairs
from .convexity import (
    LpSpace,
    MocResult,
    PreconditionError,
    WcocBound,
    WcocCheck,
    delta_closed_form,
    delta_implicit_root,
    delta_lp,
    delta_lp_exact,
    delta_lp_lower_bound,
    empirical_moc,
    example1_check,
    example2_check,
    refined_triangle_check,
    wcoc_bound_thm21,
    wcoc_bound_thm31,
)
from .campaign import CampaignConfig, VerificationReport, run_campaign, sweep_subgaussian

__version__ = "0.1.0"
