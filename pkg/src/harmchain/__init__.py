"""Entanglement of Gaussian states of harmonic oscillator chains."""

from .chain import (
    ChainSpec,
    CovariancePair,
    Topology,
    build_potential,
    classical_correlations,
    covariance,
    ground_covariance,
    ground_energy,
    thermal_covariance,
)
from .errors import (
    ConvergenceError,
    DomainError,
    HarmChainError,
    NumericalError,
    UnstableChainError,
    ValidationError,
)
from .linalg import EigenDecomposition, circulant_eigenvalues, eigh_symmetric, matrix_function
from .negativity import (
    Definiteness,
    GroupSelection,
    NegativityResult,
    bisection,
    bisection_bound,
    chain_negativity,
    classify_vpp_f,
    coupling_closed_form,
    even_odd,
    even_odd_negativity,
    even_odd_rate,
    log_negativity,
    log_negativity_oracle,
    nn_closed_form,
    q_spectrum,
    reduce,
)

__version__ = "0.1.0"
