"""Estimation-based uncertainty relations: momentum as an estimate made from position."""

from .grid import Field1D, Field2D, Grid1D, Grid2D, GridError, derivative, integrate
from .preparation import (BipartitePreparation, GaussianSpec, PhaseUndefinedError, Preparation,
                          PreparationError, build_gaussian, build_product, build_superposition,
                          load_preparation, save_preparation, wave_function)
from .estimation import ErrorModel, XiDistribution, error_field, estimator, weak_unbiasedness
from .uncertainty import (ModelInconsistencyError, UncertaintyReport, analyze, hk_relation,
                          modified_hk, quantum_oracle, schrodinger_robertson)
from .sampler import SamplingError, factorizability_statistic, sample_bipartite, sample_shots
from .audit import AuditError, IndependenceReport, audit

__all__ = [
    "Field1D", "Field2D", "Grid1D", "Grid2D", "GridError", "derivative", "integrate",
    "BipartitePreparation", "GaussianSpec", "PhaseUndefinedError", "Preparation",
    "PreparationError", "build_gaussian", "build_product", "build_superposition",
    "load_preparation", "save_preparation", "wave_function",
    "ErrorModel", "XiDistribution", "error_field", "estimator", "weak_unbiasedness",
    "ModelInconsistencyError", "UncertaintyReport", "analyze", "hk_relation", "modified_hk",
    "quantum_oracle", "schrodinger_robertson",
    "SamplingError", "factorizability_statistic", "sample_bipartite", "sample_shots",
    "AuditError", "IndependenceReport", "audit",
]
