"""Variogram-based dynamic clustering of spatially dependent functional data."""

from ._geoclust import (
    BasisSystem,
    ClusteringResult,
    EmpiricalVariogram,
    FitResult,
    FunctionalDataset,
    GeoclustError,
    LagStructure,
    VariogramModel,
    __version__,
    build_basis,
    build_lag_structure,
    centered_variogram,
    dc_cluster,
    detrend,
    empirical_trace_variogram,
    eval_model,
    fit_model,
    gram_matrix,
    l2_distance_sq,
    make_benchmark,
    make_dataset,
    practical_range,
    rand_index,
    select_basis_dimension,
    select_family,
    select_k,
    smooth_series,
    spatial_cov,
    temporal_cov,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
