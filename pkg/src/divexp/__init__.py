"""Exact information projections and expected Kullback-Leibler divergences
under Dirichlet priors, validated by deterministic Monte Carlo."""

from .core import (
    DirichletPrior,
    KlResult,
    Partition,
    Pmf,
    ReferenceMeasure,
    StateSpace,
    aggregate_prior,
    entropy,
    kl_divergence,
    marginal_concentration,
    marginal_pmf,
)
from .errors import (
    DivexpError,
    EstimationError,
    NumericDomainError,
    SchemaError,
    ValidationError,
)
from .expectations import (
    ExpectationResult,
    PairDivergenceExpectation,
    asymptotic_eval,
    expected_div_decomposable,
    expected_div_disjoint_mixture,
    expected_div_from_prior,
    expected_div_pair,
    expected_div_partition,
    expected_div_to_point,
    expected_div_uniform,
    expected_entropy,
    expected_marginal_entropy,
    expected_multi_information,
    subsimplex_volume_bound,
)
from .mc import (
    BipartitionFamily,
    ExperimentRow,
    FieldGrid,
    McEstimate,
    SampleStream,
    dirichlet_density,
    enumerate_bipartitions,
    estimate_expected_divergence,
    estimate_union_divergence,
    experiment_rows_to_csv,
    experiment_union_partitions,
    fast_min_bipartition,
    sample_dirichlet,
    simplex_field,
)
from .models import (
    CylinderBlock,
    Decomposable,
    DisjointMixture,
    FixedPoint,
    Independence,
    JunctionTree,
    ModelSpec,
    PartitionModel,
    ProjectionResult,
    Uniform,
    UnionOfPartitions,
    ValidationIssue,
    batch_divergence,
    divergence_from_decomposable,
    divergence_from_disjoint_mixture,
    divergence_from_partition_model,
    divergence_from_union,
    independence_junction_tree,
    junction_tree_from_facets,
    max_divergence_partition_model,
    model_from_json,
    model_to_json,
    multi_information,
    random_member,
    validate_junction_tree,
)
from .special import EULER_GAMMA, digamma, euler_gamma, harmonic_int, harmonic_real, log_gamma

__version__ = "0.1.0"

__all__ = [
    "BipartitionFamily", "CylinderBlock", "Decomposable", "DirichletPrior",
    "DisjointMixture", "DivexpError", "EstimationError", "EULER_GAMMA",
    "ExpectationResult", "ExperimentRow", "FieldGrid", "FixedPoint", "Independence",
    "JunctionTree", "KlResult", "McEstimate", "ModelSpec", "NumericDomainError",
    "PairDivergenceExpectation", "Partition", "PartitionModel", "Pmf",
    "ProjectionResult", "ReferenceMeasure", "SampleStream", "SchemaError",
    "StateSpace", "Uniform", "UnionOfPartitions", "ValidationError",
    "ValidationIssue", "aggregate_prior", "asymptotic_eval", "batch_divergence",
    "digamma", "dirichlet_density", "divergence_from_decomposable",
    "divergence_from_disjoint_mixture", "divergence_from_partition_model",
    "divergence_from_union", "entropy", "enumerate_bipartitions",
    "estimate_expected_divergence", "estimate_union_divergence", "euler_gamma",
    "expected_div_decomposable", "expected_div_disjoint_mixture",
    "expected_div_from_prior", "expected_div_pair", "expected_div_partition",
    "expected_div_to_point", "expected_div_uniform", "expected_entropy",
    "expected_marginal_entropy", "expected_multi_information",
    "experiment_rows_to_csv", "experiment_union_partitions",
    "fast_min_bipartition", "harmonic_int",
    "harmonic_real", "independence_junction_tree", "junction_tree_from_facets",
    "kl_divergence", "log_gamma", "marginal_concentration", "marginal_pmf",
    "max_divergence_partition_model", "model_from_json", "model_to_json",
    "multi_information", "random_member", "sample_dirichlet", "simplex_field",
    "subsimplex_volume_bound", "validate_junction_tree",
]
