"""Sequential Bayesian social learning with diverse agents.

Monte Carlo and exact analysis of agents that each combine a private
signal, the decisions of their predecessors and a heterogeneous
preference/prior term, with a focus on when herding (information
cascades) can occur.
"""
from .belief_engine import (
    BeliefEngine,
    PublicBelief,
    decide,
    initial_tau,
    is_cascade,
    make_belief_engine,
    response_prob,
    update_tau,
)
from .diversity_models import (
    AtomNoise,
    Composed,
    Degenerate,
    GaussianNoise,
    atom_noise,
    composed,
    gaussian_noise,
    sample_xi,
    xi_distribution,
)
from .errors import ConfigurationError, ResourceError, UnsupportedModelError
from .exact_oracle import (
    TauStateGraph,
    build_tau_graph,
    exact_learning_curve,
    markov_absorption_accuracy,
    markov_transient_curve,
)
from .prob_core import (
    Atoms,
    Gaussian,
    GaussianMixture,
    Grid,
    convolve_with_noise,
    essential_bounds,
    mid_cdf,
    std_normal_cdf,
)
from .signal_models import (
    BinarySymmetric,
    FiniteAlphabet,
    SymmetricGaussian,
    llr_distribution,
    make_binary_symmetric,
    make_finite_alphabet,
    make_symmetric_gaussian,
    sample_llr,
)
from .simulator import (
    LearningCurve,
    RunConfig,
    TrajectoryRecord,
    counterfactual_cascade_check,
    estimate_learning_curve,
    run_realization,
)

__version__ = "0.1.0"
