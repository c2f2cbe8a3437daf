"""Economic complexity indices and their spectral-clustering substrate."""

from .embedding import (
    Embedding,
    correspondence_coordinates,
    diffusion_coordinates,
    diffusion_distance_direct,
    diffusion_distance_matrix,
    diffusion_kernel,
    kernel_pca_coordinates,
)
from .errors import (
    ComplexityError,
    DataError,
    DegenerateMarginError,
    DegenerateSpectrumError,
    ParseError,
    RejectedRecordsError,
    SolverError,
    TooDegenerateError,
)
from .graph_partition import (
    EigengapReport,
    Partition,
    brute_force_min_ncut,
    cut_value,
    eigengap,
    fiedler,
    min_ncut_ties,
    ncut_value,
    normalized_laplacian,
    partition_from_scores,
    rayleigh_quotient,
    volume,
)
from .incidence import (
    IncidenceMatrix,
    PruneReport,
    ScoreMatrix,
    binarize,
    compute_lq,
    compute_rca,
    compute_rca_pop,
    compute_scores,
    prune,
)
from .ingestion import (
    CovariateTable,
    RawBipartitePanel,
    ValidationReport,
    parse_covariate,
    parse_panel,
    read_covariate,
    read_panel,
)
from .spectral_core import (
    ComplexityScores,
    DegenerateSpectrumWarning,
    DiagonalFactors,
    ReflectionsTrace,
    RowStochasticMatrix,
    SpectrumResult,
    SymmetricSimilarity,
    build_mhat,
    build_mtilde,
    build_similarity,
    eci,
    eigenpairs,
    method_of_reflections,
    pci,
    standardize,
)
from .stats import pearson, spearman

__version__ = "0.1.0"
