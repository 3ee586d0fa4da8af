"""Complex exotic oscillator toolkit.

Dynamics of the harmonic oscillator with position-dependent mass continued
to a complex phase space: exact Hamiltonian/constraint evaluation,
adaptive trajectory integration with conservation audit, constrained
initial conditions, orbit classification (closure, PT symmetry), parameter
scans for abrupt trajectory-character changes, and a numeric Poisson
bracket engine for the constraint algebra.
"""

from .model import (
    Params,
    State1D,
    StateND,
    EnergyPair,
    eval_complex_oracle,
    eval_complex_oracle_nd,
    eval_H,
    eval_G,
    eval_rhs,
    eval_real_EO,
    eval_real_EO_rhs,
    eval_H_nd,
    eval_G_nd,
    eval_rhs_nd,
    angular_momentum,
)
from .integrator import IntegratorConfig, Trajectory, integrate, integrate_real_eo, resample
from .initcond import (
    ICResult,
    ICRequest,
    RadicandNegative,
    OutOfDomain,
    NoConvergence,
    SingularJacobian,
    ic_family_A,
    ic_family_B,
    ic_solve,
    portrait_momentum,
)
from .analysis import (
    Classification,
    ScanResult,
    detect_closure,
    classify_pt,
    classify_trajectory,
    ep_scan,
    rotate_quarter,
)
from .brackets import Observable, poisson_bracket, verify_algebra

__version__ = "0.1.0"
