"""scikit-learn style wrappers around the functional core."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .spectral import circle_average, sample_spectral
from .thick import EmpiricalMeasure, alpha_energy, box_dimension, exponent_fit_counts


class CircleAverageTransformer(TransformerMixin, BaseEstimator):
    """Map points ``(x, y)`` to circle averages of one sampled truncated field."""

    def __init__(self, radius=0.05, cutoff=256, seed=0):
        self.radius = radius
        self.cutoff = cutoff
        self.seed = seed

    def fit(self, X, y=None):
        check_array(X, ensure_min_features=2)
        self.field_ = sample_spectral(self.cutoff, self.seed)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "field_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 features (x, y), got {X.shape[1]}")
        return np.asarray(circle_average(self.field_, X, self.radius)).reshape(-1, 1)


class HighPointExponent(RegressorMixin, BaseEstimator):
    """Power-law fit ``mean count ~ exp(intercept) N^slope``.

    ``X`` is a single column of grid sizes (one row per field), ``y`` the
    high-point counts.
    """

    def fit(self, X, y):
        X = check_array(X)
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[1] != 1 or len(y) != X.shape[0]:
            raise ValueError("X must be one column of grid sizes matching y")
        ns = np.unique(X[:, 0])
        fit = exponent_fit_counts(ns, [y[X[:, 0] == n] for n in ns])
        self.slope_, self.stderr_, self.intercept_ = fit.slope, fit.stderr, fit.intercept
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        X = check_array(X)
        return np.exp(self.intercept_) * X[:, 0] ** self.slope_

    def score(self, X, y, sample_weight=None):
        # R^2 in log space, where the fit is linear
        check_is_fitted(self, "slope_")
        pred = np.log(self.predict(X))
        obs = np.log(np.asarray(y, dtype=float))
        ss_res = np.sum((obs - pred) ** 2)
        ss_tot = np.sum((obs - obs.mean()) ** 2)
        return float(1 - ss_res / ss_tot) if ss_tot > 0 else 1.0


class BoxCountingDimension(BaseEstimator):
    """Box-counting slope of a planar point set."""

    def __init__(self, scales=(0.25, 0.125, 0.0625)):
        self.scales = scales

    def fit(self, X, y=None):
        X = check_array(X)
        fit = box_dimension(X, self.scales)
        self.dimension_, self.stderr_ = fit.slope, fit.stderr
        self.n_features_in_ = 2
        return self


class AlphaEnergy(BaseEstimator):
    """Alpha-energy of the weighted atoms ``X`` (uniform weights by default)."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X)
        if sample_weight is None:
            sample_weight = np.full(X.shape[0], 1.0 / X.shape[0])
        self.measure_ = EmpiricalMeasure(X, sample_weight)
        self.energy_ = alpha_energy(self.measure_, self.alpha)
        self.n_features_in_ = 2
        return self
