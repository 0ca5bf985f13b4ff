"""Decision procedures; every FAILS verdict carries a checkable witness."""

from .partitions import (
    DEFAULT_CONFIG,
    Decision,
    SearchConfig,
    SparkResult,
    Verdict,
    analyze,
    certify_counterexample,
    certify_norm_counterexample,
    complement_property,
    failing_partitions,
    lift_capacity,
    lifting_number,
    norm_retrieval,
    overcomplete_cp,
    phase_retrieval,
    rows_full_spark,
    spark,
    validate_partition,
)
from .projections import (
    certify_orthogonal_witness,
    complement_projections,
    parseval_partition_experiment,
    projection_nr,
    projection_pr,
)
from .riesz import RieszResult, riesz_bound

__all__ = [
    "DEFAULT_CONFIG",
    "Decision",
    "SearchConfig",
    "SparkResult",
    "Verdict",
    "analyze",
    "certify_counterexample",
    "certify_norm_counterexample",
    "complement_property",
    "failing_partitions",
    "lift_capacity",
    "lifting_number",
    "norm_retrieval",
    "overcomplete_cp",
    "phase_retrieval",
    "rows_full_spark",
    "spark",
    "validate_partition",
    "certify_orthogonal_witness",
    "complement_projections",
    "parseval_partition_experiment",
    "projection_nr",
    "projection_pr",
    "RieszResult",
    "riesz_bound",
]
