"""Spin-1/2 propagators in time-dependent magnetic fields.

Exact propagation (adaptive commutator-free Magnus stepping), the
adiabatic rotating-frame approximation with its first-order polar-angle
correction, the exact angle equations, the complex-frequency oscillator
diagnostic and Rosen-Zener scenario runners.
"""
from .adiabatic import (
    AdiabaticResult,
    PrecessionAngles,
    adiabatic_angles,
    assemble,
    gamma_correction_profile,
    propagate_adiabatic,
    propagate_adiabatic_trajectory,
)
from .angles import AngleTrajectory, extract_angles, integrate_angles
from .errors import (
    AdiaspinError,
    BranchTrackingError,
    ConfigError,
    DegenerateFieldError,
    FieldRangeError,
    GimbalError,
    InvalidInputError,
    MisuseError,
    NumericError,
    QuadratureError,
    SingularFrameError,
    StiffnessError,
)
from .exact import (
    IntegratorConfig,
    propagate,
    propagate_fixed,
    propagate_trajectory,
    propagate_xi_eta,
)
from .experiments import (
    ScenarioReport,
    SweepSpec,
    claims_report,
    run_case_i,
    run_case_ii,
    run_rosen_zener,
)
from .fields import (
    Constant,
    FieldModel,
    FieldSample,
    Relabeled,
    Rotating,
    RosenZener,
    Sampled,
    Sum,
    derivative_check,
    field_from_config,
    load_field_config,
    relabel_axes,
)
from .frame import (
    FrameState,
    beta_integral,
    frame_states,
    nu_gamma0,
    omega_and_Omega_sq,
    phi_dot,
    unwrapped_phi,
)
from .observables import FlipConvention, bloch_vector, compare, flip_probability
from .oscillator import OscillatorTrace, build_trace
from .su2 import (
    CayleyKlein,
    Spinor,
    Su2,
    apply,
    compose,
    fidelity_error,
    from_cayley_klein,
    rot_z,
    to_cayley_klein,
)

__version__ = "0.1.0"
