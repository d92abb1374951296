"""Scikit-learn compatible estimators over the solver and feature modules."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .data import one_hot
from .features import apply_feature_map, sample_feature_map
from .solver import SolverSpec, fit_coefficients
from .validation import as_matrix, check_design_targets, check_labels


class LeastSquaresRegressor(RegressorMixin, BaseEstimator):
    """Linear least squares without intercept, solved by one of the spectral
    or gradient-descent engines.

    Parameters
    ----------
    method : {"min-norm-svd", "ridge", "gd-closed-form", "gd-iterative"}
    ridge_lambda : float, default=0.0
    rank_tol : float, default=1e-10
    step_size : float, default=0.1
    num_steps : int, default=0
    schedule : {"constant", "inverse-sqrt"}, default="constant"
    schedule_period : int, default=512
    relative_step : bool, default=False
        Interpret ``step_size`` in units of ``1 / s_max**2``.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features, n_outputs)
    n_features_in_ : int
    """

    def __init__(
        self,
        method="min-norm-svd",
        ridge_lambda=0.0,
        rank_tol=1e-10,
        step_size=0.1,
        num_steps=0,
        schedule="constant",
        schedule_period=512,
        relative_step=False,
    ):
        self.method = method
        self.ridge_lambda = ridge_lambda
        self.rank_tol = rank_tol
        self.step_size = step_size
        self.num_steps = num_steps
        self.schedule = schedule
        self.schedule_period = schedule_period
        self.relative_step = relative_step

    def solver_spec(self) -> SolverSpec:
        return SolverSpec(**self.get_params())

    def fit(self, X, y):
        spec = self.solver_spec()
        X, Y = check_design_targets(X, y)
        self._single_output = np.ndim(y) == 1
        self.n_features_in_ = X.shape[1]
        self.coef_ = fit_coefficients(X, Y, spec)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        pred = as_matrix(X, "X") @ self.coef_
        return pred[:, 0] if self._single_output else pred


class RandomFeatureClassifier(ClassifierMixin, BaseEstimator):
    """Two-layer model: frozen random Fourier features, output layer fit by
    least squares on one-hot targets. Predicts the argmax class, ties going
    to the lowest index.

    Parameters
    ----------
    n_features : int, default=100
    variance : float or None, default=None
    mode : {"cosine", "complex-pair"}, default="cosine"
    scale : float or None, default=None
    n_classes : int or None, default=None
        Number of classes; inferred as ``max(y) + 1`` when ``None``.
    solver : SolverSpec or None, default=None
        ``None`` means the minimum-norm solution.
    random_state : int, default=0
        Seed for the feature map.
    """

    def __init__(
        self,
        n_features=100,
        variance=None,
        mode="cosine",
        scale=None,
        n_classes=None,
        solver=None,
        random_state=0,
    ):
        self.n_features = n_features
        self.variance = variance
        self.mode = mode
        self.scale = scale
        self.n_classes = n_classes
        self.solver = solver
        self.random_state = random_state

    def fit(self, X, y):
        X = as_matrix(X, "X")
        y = check_labels(y)
        n_classes = int(y.max()) + 1 if self.n_classes is None else int(self.n_classes)
        self.classes_ = np.arange(n_classes)
        self.n_features_in_ = X.shape[1]
        self.feature_map_ = sample_feature_map(
            X.shape[1], self.n_features, self.variance, self.mode, self.random_state, self.scale
        )
        spec = self.solver if self.solver is not None else SolverSpec()
        phi = apply_feature_map(self.feature_map_, X)
        self.coef_ = fit_coefficients(phi, one_hot(y, n_classes), spec)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return apply_feature_map(self.feature_map_, X) @ self.coef_

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)
