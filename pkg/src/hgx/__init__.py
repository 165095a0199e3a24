"""Hypergraph convolutional networks with over-smoothing diagnostics.

The package builds normalized hypergraph smoothing operators, trains
residual-and-identity-mapped convolution stacks (plus the plain, linearized,
and graph-free baselines) with exact analytical gradients, and numerically
verifies the spectral theory behind over-smoothing: stationary limits of
repeated smoothing, Dirichlet-energy contraction, and the expressiveness of
polynomial filters.
"""

from .data import HyperDataset, SyntheticSpec, generate_synthetic, load_dataset, save_dataset
from .errors import ConfigError, DatasetError, HgxError, VerificationError
from .hypergraph import (
    DegreeVectors,
    Hypergraph,
    build_hypergraph,
    degree_vectors,
    incidence_matrix,
    is_connected,
    laplacian,
    propagation_matrix,
    transition_matrix,
)
from .linalg import (
    Rng,
    elementwise_activation,
    max_singular_value,
    row_softmax,
    spmm,
    symmetric_eigen,
    to_csr,
)
from .nn import (
    AdamState,
    ModelConfig,
    ModelParams,
    adam_step,
    beta_schedule,
    cross_entropy_masked,
    deep_hgcn_layer,
    hgnn_layer,
    init_params,
    load_checkpoint,
    model_backward,
    model_forward,
    save_checkpoint,
    shgcn_forward,
)
from .spectral import (
    EnergyTrace,
    PolynomialFilter,
    apply_gain_recursion,
    apply_polynomial_filter,
    dirichlet_energy,
    dirichlet_energy_sum,
    energy_contraction_check,
    filter_gains,
    min_nonzero_eigenvalue,
    power_smooth,
    smoothing_limit,
    stationary_propagation,
    stationary_transition,
)
from .train import SweepReport, TrainReport, depth_sweep, energy_probe, evaluate, train
from .verify import CHECK_NAMES, CheckResult, run_verification

__version__ = "0.1.0"
