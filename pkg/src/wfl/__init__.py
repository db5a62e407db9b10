"""wfl: friction from wiggly elastic bristles.

Tools for computing dry-friction coefficients generated by microscale
surface corrugation acting on elastic bristle contacts, for solving the
associated quasistatic (rate-independent) and viscous evolutions, and for
checking trajectories against energy-dissipation certificates.
"""

from .convergence import (
    StripDiagnostics,
    SweepReport,
    run_sweep,
    strip_diagnostics,
)
from .errors import (
    ConfigError,
    DegenerateProfileError,
    GeometryError,
    InadmissibleModelError,
    InadmissibleSlopeFactorError,
    InvalidInitialStateError,
    InvalidScaleError,
    InversionFailureError,
    ParameterDomainError,
    ScaleValidityError,
    SolverError,
    StiffnessFailureError,
    SweepError,
    WflError,
    ZeroTensionError,
)
from .limit_solver import (
    LimitSystem,
    LoadingProgram,
    Ramp,
    SinusoidLoading,
    SmoothedPiecewiseLinear,
    Trajectory,
    default_grid,
    dissipation_limit,
    elastic_strip,
    solve_limit,
)
from .models import (
    AdmissibilityCondition,
    AdmissibilityReport,
    AngularBristle,
    BristleModel,
    FrictionCoefficients,
    PerceivedProfile,
    SlantedBristle,
    VerticalBristle,
    axial_tension,
    coefficients,
    epsilon_limit,
    invert_contact_map,
    mu_from_omega,
    nap_coefficients,
    perceived_extrema,
    perceived_profile,
    validate,
    wiggly_energy,
    wiggly_force,
)
from .profiles import (
    DerivativeExtrema,
    FourierTerm,
    SurfaceProfile,
    derivative_extrema,
    eval_profile,
    scaled_profile,
)
from .variational import (
    CertificateReport,
    ElasticInterval,
    LimitWithK,
    ViscousQuadratic,
    contact_set_member,
    de_giorgi_certificate,
    fenchel_residual,
    k_of_xi,
    legendre_conjugate_limit,
    legendre_conjugate_numeric,
    limit_density,
)
from .viscous_solver import (
    IntegratorConfig,
    ViscousTrajectory,
    WigglySystem,
    energy_balance_residual,
    integrate,
)

__version__ = "0.1.0"
