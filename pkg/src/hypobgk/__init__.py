"""Certified decay rates for a linear BGK model with uncertain collisions.

The package turns a periodic linear BGK equation with an uncertain,
z-dependent collision frequency into a finite Fourier-Hermite mode
system, constructs Lyapunov certificates that guarantee exponential
decay of a twisted entropy uniformly over the uncertainty range, evolves
mode stacks and their z-sensitivities exactly in time, and checks the
observed decay against the certified envelopes.
"""

from __future__ import annotations

from .errors import (
    CertificateError,
    ConfigError,
    DataError,
    DomainError,
    HypoBGKError,
    InvalidModelError,
    NotCertifiableError,
    NumericError,
    UsageError,
)
from .spectral import (
    HermiteVec,
    ModeLattice,
    MomentTriple,
    OperatorSet,
    assemble_generator,
    build_operators,
    gauss_hermite_halfweight,
    hermite_functions,
    hermite_polynomials,
    moments_of,
    synthesize,
)
from .lyapunov import (
    ALPHA_CAP,
    TWIST_GAIN,
    Certificate,
    TransformMatrix,
    alpha_limit,
    alpha_max,
    build_reduced_block,
    build_transform,
    certify,
    minor_det3,
    minor_det4,
    minor_det5,
    rate_block,
    transform_bounds,
    transform_eigenvalues,
    verify_grid,
    verify_inequality,
)
from .state import CONSERVED_TOL, StateStack, random_stack
from .models import (
    CollisionFrequencyModel,
    InitialDataSpec,
    affine_model,
    constant_model,
    polynomial_model,
    project_initial,
    sigma_bounds,
    sigma_eval,
    taylor_bound,
    trig_model,
)
from .propagation import (
    ExactPropagator,
    augmented_generator,
    evolve_exact,
    evolve_reference,
    trajectory,
)
from .analysis import (
    DecayReport,
    EntropyValue,
    affine_derivative_envelope,
    affine_uniform_envelope,
    build_transforms,
    check_envelope,
    entropy,
    entropy_envelope,
    entropy_series,
    gronwall_cascade,
    gronwall_chain,
    taylor_derivative_envelope,
    uniform_level_bound,
)

__version__ = "0.1.0"
