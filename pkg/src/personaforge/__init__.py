"""Subspace-clustering workbench for persona development from sparse VAS data."""

from .dataset import (
    CategoricalTable,
    CategoricalVariable,
    Dimension,
    Subject,
    VasDataSet,
    bin_to_categories,
    export_csv,
    ingest_csv,
)
from .doc import (
    DocParams,
    DocRunResult,
    SubspaceCluster,
    WEstimate,
    beta_for_set_size,
    check_cluster,
    cluster_membership,
    discrimination_set_size,
    doc_for_target,
    doc_full_coverage,
    estimate_w,
    induce_subspace,
    inner_trial_count,
    min_cluster_size,
    quality,
)
from .errors import DatasetError, ForgeError, NoClusterFound, NoSharedDims, ParameterError
from .synthesis import (
    Dendrogram,
    PersonaDim,
    ProtoPersona,
    SimilarityMatrix,
    build_dendrogram,
    cluster_mean_vector,
    cut_dendrogram,
    describe,
    drop_redundant,
    merge_clusters,
    radar_data,
    report_markdown,
    shared_dims,
    similarity,
    similarity_matrix,
)
from .correspondence import (
    CooccurrenceTable,
    PerceptualMap,
    cooccurrence,
    correspondence_analysis,
    mca,
    variable_axis_correlation,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
