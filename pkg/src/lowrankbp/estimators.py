"""Scikit-learn style estimators wrapping the functional core, so the
recovery pipeline composes with the wider ecosystem (get_params, clone,
Pipeline)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_matrix
from .basis_pursuit import recover
from .core import Subspace
from .pipeline import PipelineConfig, recover_dataset
from .recovery import recover_subspace


class BasisPursuitDenoiser(TransformerMixin, BaseEstimator):
    """Denoise rows against a known or learned subspace by l1 projection.

    When ``subspace`` is given, ``fit`` only records it; otherwise the
    subspace is recovered from the (corrupted) training data.
    """

    def __init__(self, subspace: Subspace | None = None):
        self.subspace = subspace

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        if self.subspace is not None:
            self.subspace_ = self.subspace
        else:
            self.subspace_ = recover_subspace(X).recovered
        return self

    def transform(self, X):
        check_is_fitted(self, "subspace_")
        X = as_matrix(X, "X")
        out = np.empty_like(X)
        for i in range(X.shape[0]):
            out[i] = recover(self.subspace_, X[i]).estimate
        return out


class RobustSubspaceEstimator(BaseEstimator):
    """Learn the span of the noise directions (plus the mean direction) from
    coordinate-corrupted samples."""

    def __init__(self, consensus_iterations: int = 200, match_tol: float = 1e-6):
        self.consensus_iterations = consensus_iterations
        self.match_tol = match_tol

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        result = recover_subspace(
            X, iterations=self.consensus_iterations, tol=self.match_tol
        )
        self.subspace_ = result.recovered
        self.pivot_set_ = result.pivot_set
        self.anchor_ = result.anchor
        self.complement_vectors_ = result.complement_vectors
        return self


class RobustDatasetRecovery(TransformerMixin, BaseEstimator):
    """End-to-end recovery: learn the subspace on fit, then clip to the
    median window and denoise each row on transform."""

    def __init__(
        self,
        truncation_radius_multiplier: float = 3.0,
        coord_bound: float | None = None,
        mean_method: str = "mean",
        subspace: Subspace | None = None,
    ):
        self.truncation_radius_multiplier = truncation_radius_multiplier
        self.coord_bound = coord_bound
        self.mean_method = mean_method
        self.subspace = subspace

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        if self.subspace is not None:
            self.subspace_ = self.subspace
        else:
            self.subspace_ = recover_subspace(X).recovered
        return self

    def transform(self, X):
        check_is_fitted(self, "subspace_")
        X = as_matrix(X, "X")
        config = PipelineConfig(
            truncation_radius_multiplier=self.truncation_radius_multiplier,
            subspace_override=self.subspace_,
            mean_method=self.mean_method,
        )
        report = recover_dataset(X, config, coord_bound=self.coord_bound)
        self.mean_estimate_ = report.mean_estimate
        self.clip_radius_ = report.clip_radius
        return report.estimates
