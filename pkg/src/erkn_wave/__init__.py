"""One-stage explicit ERKN integrators for semidiscrete semilinear wave equations."""
from .integrators import (
    ErknScheme,
    NonFiniteStateError,
    erkn_step,
    exact_linear_flow,
    get_scheme,
    phi,
    register_scheme,
    scheme_registry,
)
from .problem import (
    ExplicitFourier,
    SeededRandom,
    SemidiscreteProblem,
    make_fd_problem,
    make_initial_state,
    make_spectral_problem,
)
from .spectral import (
    FourierState,
    FrequencySet,
    WeightRule,
    discrete_convolution,
    from_collocation,
    nonlinearity,
    pair_norm,
    sobolev_norm,
    to_collocation,
)

__version__ = "0.1.0"
