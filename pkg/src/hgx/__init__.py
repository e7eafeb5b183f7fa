"""Random walks, Laplacians and spectral convolution models on generalized hypergraphs."""

from .edvw import (
    FeatureTable,
    ProteinChain,
    concat_modalities,
    knn_gaussian_hypergraph,
    protein_hypergraph,
)
from .equiv import (
    CliqueGraph,
    ConditionReport,
    check_equivalence_conditions,
    clique_graph,
    clique_walk_matrix,
)
from .errors import FormatError, NotEquivalentError, NumericalError, ValidationError
from .hypergraph import (
    DegreeProfile,
    GeneralizedHypergraph,
    RhoSpec,
    StructureReport,
    build_hypergraph,
    degree_profile,
    validate,
)
from .models import ModelParams, forward, init_params, propagation_operator, readout_mean_pool
from .partition import CutReport, cut_objective, cut_sweep
from .spectral import (
    DiffusionTrace,
    LaplacianBundle,
    SpectrumReport,
    convergence_bound_check,
    convergence_bound_check_all,
    digraph_laplacian,
    oversmoothing_energy,
    rayleigh_quotient,
    renormalized_operator,
    spectrum,
    unified_laplacian,
)
from .train import TrainConfig, gradient_check, train
from .walk import (
    StationaryDistribution,
    TransitionMatrix,
    is_reversible,
    stationary_distribution,
    step_distribution,
    transition_matrix,
    transition_matrix_nonlazy,
    two_step_oracle,
)

__version__ = "0.1.0"
