"""scikit-learn compatible front end for the TV least-squares solvers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baselines import condat_vu_solve, fpif_solve
from .problems import ProblemInstance
from .solvers import fixed_point_certificate, lstv_solve

__all__ = ["BoxTVRegression"]

_SOLVERS = {"fpihf": lstv_solve, "fpif": fpif_solve, "condat-vu": condat_vu_solve}


def _bounds(value, n_features, name):
    arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (n_features,))
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    return np.array(arr)


class BoxTVRegression(RegressorMixin, BaseEstimator):
    """Box-constrained least squares with a total-variation (fused) penalty.

    Fits ``coef_`` minimizing
    ``alpha1/2 ||X coef - y||^2 + alpha2 sum_j |coef[j+1] - coef[j]|``
    subject to ``lower <= coef <= upper``. Coefficients are ordered, so the
    penalty favours piecewise-constant coefficient profiles.

    Parameters
    ----------
    alpha1 : float, default=5.0
        Weight of the data-fit term.
    alpha2 : float, default=0.5
        Weight of the total-variation term.
    lower, upper : float or array-like of shape (n_features,)
        Box bounds on the coefficients; may be infinite.
    solver : {"fpihf", "fpif", "condat-vu"}, default="fpihf"
        ``"fpihf"`` has a step size independent of ``||X||`` and evaluates
        the data-fit gradient once per iteration.
    gamma : float, optional
        Step size for the partial-inverse solvers; defaults to 0.99 of the
        admissible bound.
    tol : float, default=1e-6
        Relative-change tolerance.
    max_iter : int, default=50000

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    dual_coef_ : ndarray of shape (n_features - 1,)
        Dual variable of the TV term; lies in ``[-alpha2, alpha2]``.
    n_iter_ : int
    converged_ : bool
    objective_ : float
    """

    def __init__(self, alpha1=5.0, alpha2=0.5, lower=-np.inf, upper=np.inf, solver="fpihf",
                 gamma=None, tol=1e-6, max_iter=50000):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.lower = lower
        self.upper = upper
        self.solver = solver
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter

    def _instance(self, X, y):
        n = X.shape[1]
        return ProblemInstance(X, y, _bounds(self.lower, n, "lower"),
                               _bounds(self.upper, n, "upper"), self.alpha1, self.alpha2)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if X.shape[1] < 2:
            raise ValueError("BoxTVRegression needs at least two features")
        if self.solver not in _SOLVERS:
            raise ValueError(f"solver must be one of {sorted(_SOLVERS)}, got {self.solver!r}")
        inst = self._instance(X, y)
        kwargs = {"tol": self.tol, "max_iter": self.max_iter}
        if self.gamma is not None and self.solver != "condat-vu":
            kwargs["gamma"] = self.gamma
        report = _SOLVERS[self.solver](inst, **kwargs)
        self.coef_ = inst.project(report.x)
        self.dual_coef_ = np.asarray(report.u)
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.objective_ = report.objective
        self.n_features_in_ = X.shape[1]
        self._instance_ = inst
        return self

    def optimality_residual(self, step=1e-3):
        """Primal-dual fixed-point residual of the fitted solution."""
        check_is_fitted(self)
        return fixed_point_certificate(self._instance_, self.coef_, self.dual_coef_, step)

    def predict(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_
