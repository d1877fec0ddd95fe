"""scikit-learn style wrappers around the functional core.

These make the maps and diagnostics composable with ``sklearn`` tooling
(``get_params``/``set_params``, ``clone``, pipelines). Inputs are validated
with ``sklearn.utils.validation`` helpers; the heavy lifting stays in
:mod:`invlimit.suspension` and :mod:`invlimit.rotation`.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .families import FamilyParam
from .rotation import DEFAULT_GRID, envelope_modulus, rotation_intervals_pairs
from .suspension import DEFAULT_THETA0, FattenedMap, attract_cloud


def make_param(family: str, params) -> FamilyParam:
    """``FamilyParam`` from a kind name and a sequence of parameter values."""
    values = tuple(float(v) for v in np.atleast_1d(params))
    return FamilyParam(family, values)


def _check_points(X):
    return check_array(X, dtype=np.float64, ensure_min_features=2)[:, :2]


class FattenedMapTransformer(TransformerMixin, BaseEstimator):
    """Push carrier points forward ``n_iter`` times under the fattened map.

    Parameters
    ----------
    family : {'tent', 'quadratic', 'standard'}
    params : float or sequence of float
        ``s``, ``a`` or ``(b, omega)``.
    delta, eps : float
        Spine offset and recorder thickness.
    theta0 : float
        Recorder phase (annulus only).
    n_iter : int
        Number of applications in :meth:`transform`.
    """

    def __init__(self, family="tent", params=1.8, delta=0.01, eps=0.01,
                 theta0=DEFAULT_THETA0, n_iter=1):
        self.family = family
        self.params = params
        self.delta = delta
        self.eps = eps
        self.theta0 = theta0
        self.n_iter = n_iter

    def fit(self, X=None, y=None):
        if int(self.n_iter) < 0:
            raise ValueError("n_iter must be nonnegative")
        self.map_ = FattenedMap(make_param(self.family, self.params), self.delta, self.eps,
                                self.theta0)
        if X is not None:
            self.n_features_in_ = _check_points(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "map_")
        P = self.map_.model.normalize(_check_points(X))
        for _ in range(int(self.n_iter)):
            P = self.map_(P)
        return P


class AttractorEstimator(TransformerMixin, BaseEstimator):
    """Sample an attractor on ``fit``; ``transform`` gives distances to it.

    Attributes
    ----------
    cloud_ : AttractorCloud
    diameter_ : float
    """

    def __init__(self, family="tent", params=1.8, delta=0.01, eps=0.01,
                 theta0=DEFAULT_THETA0, seeds=200, transient=1000, keep=100, random_state=0):
        self.family = family
        self.params = params
        self.delta = delta
        self.eps = eps
        self.theta0 = theta0
        self.seeds = seeds
        self.transient = transient
        self.keep = keep
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.random_state is None:
            raise ValueError("random_state is required; runs must be reproducible")
        F = FattenedMap(make_param(self.family, self.params), self.delta, self.eps, self.theta0)
        self.cloud_ = attract_cloud(F, self.seeds, self.transient, self.keep,
                                    int(self.random_state))
        self.diameter_ = self.cloud_.diameter
        box = 1.0 if self.cloud_.periodic else None
        pts = self.cloud_.points
        if box is not None:
            pts = pts.copy()
            pts[:, 0] = np.mod(pts[:, 0], 1.0)
            # shift r into [0, 2]; a y-period of 8 never wraps for carrier points
            pts[:, 1] = pts[:, 1] + 1.0
            self._tree = cKDTree(pts, boxsize=[1.0, 8.0])
        else:
            self._tree = cKDTree(pts)
        return self

    def transform(self, X):
        """Distance from each row of ``X`` to the nearest cloud point, shape ``(n, 1)``."""
        check_is_fitted(self, "cloud_")
        P = _check_points(X)
        if self.cloud_.periodic:
            P = P.copy()
            P[:, 0] = np.mod(P[:, 0], 1.0)
            P[:, 1] = P[:, 1] + 1.0
        d, _ = self._tree.query(P)
        return d[:, None]


class RotationIntervalEstimator(TransformerMixin, BaseEstimator):
    """Map rows ``(b, omega)`` to rotation-interval endpoints ``(lo, hi)``."""

    def __init__(self, n=100_000, grid_res=DEFAULT_GRID):
        self.n = n
        self.grid_res = grid_res

    def fit(self, X=None, y=None):
        if int(self.n) < 1:
            raise ValueError("n must be positive")
        self.halfwidth_ = 1.0 / self.n
        return self

    def transform(self, X):
        check_is_fitted(self, "halfwidth_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != 2:
            raise ValueError("expected columns (b, omega)")
        for b, w in X:
            FamilyParam.standard(b, w)
        lo, hi, _ = rotation_intervals_pairs(X[:, 0], X[:, 1], int(self.n), self.grid_res)
        return np.column_stack([np.minimum(lo, hi), np.maximum(lo, hi)])


class TongueClassifier(ClassifierMixin, BaseEstimator):
    """Predict membership of ``(b, omega)`` rows in the tongue of ``r``."""

    def __init__(self, r=0.0, n=2000, grid_res=1024):
        self.r = r
        self.n = n
        self.grid_res = grid_res

    def fit(self, X=None, y=None):
        self.classes_ = np.array([False, True])
        self.rotation_ = RotationIntervalEstimator(self.n, self.grid_res).fit()
        return self

    def decision_function(self, X):
        """Signed distance of ``r`` inside the widened interval (positive = member)."""
        check_is_fitted(self, "rotation_")
        lohi = self.rotation_.transform(X)
        tol = 1.0 / self.n + envelope_modulus(np.asarray(X, dtype=float)[:, 0], self.grid_res)
        return np.minimum(self.r - (lohi[:, 0] - tol), (lohi[:, 1] + tol) - self.r)

    def predict(self, X):
        return self.decision_function(X) >= 0.0
