import numpy as np
import pytest
from scipy.spatial.distance import cdist
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from invlimit.estimators import (
    AttractorEstimator,
    FattenedMapTransformer,
    RotationIntervalEstimator,
    TongueClassifier,
    make_param,
)
from invlimit.families import FamilyParam
from invlimit.rotation import rotation_interval
from invlimit.suspension import FattenedMap


def test_make_param():
    assert make_param("tent", 1.5) == FamilyParam.tent(1.5)
    assert make_param("standard", [2, 0.3]) == FamilyParam.standard(2.0, 0.3)
    with pytest.raises(ValueError):
        make_param("tent", 3.0)


@pytest.mark.parametrize("est", [FattenedMapTransformer(), AttractorEstimator(),
                                 RotationIntervalEstimator(), TongueClassifier()])
def test_params_and_clone(est):
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(**{next(iter(c.get_params())): est.get_params()[next(iter(c.get_params()))]})
    with pytest.raises(NotFittedError):
        (c.predict if isinstance(c, TongueClassifier) else c.transform)(np.zeros((1, 2)))


def test_map_transformer_matches_core(rng):
    X = rng.uniform([0, -1], [1, 1], (40, 2))
    T = FattenedMapTransformer("tent", 1.8, 0.05, 0.05, n_iter=3).fit(X)
    F = FattenedMap(FamilyParam.tent(1.8), 0.05, 0.05)
    np.testing.assert_array_equal(T.transform(X), F(F(F(X))))
    assert T.n_features_in_ == 2
    with pytest.raises(ValueError):
        FattenedMapTransformer(n_iter=-1).fit()
    with pytest.raises(ValueError):
        T.transform(np.zeros((3, 1)))


def test_map_pipeline_composes(rng):
    X = rng.uniform([0, -1], [1, 1], (10, 2))
    one = FattenedMapTransformer("standard", (2.0, 0.3))
    pipe = make_pipeline(clone(one), clone(one)).fit(X)
    direct = FattenedMapTransformer("standard", (2.0, 0.3), n_iter=2).fit(X)
    np.testing.assert_allclose(pipe.transform(X), direct.transform(X), atol=1e-15)


def test_attractor_estimator():
    est = AttractorEstimator("tent", 0.5, seeds=20, transient=200, keep=10).fit()
    assert est.diameter_ < 1e-3
    d = est.transform([[0.0, 0.0], [1.0, 0.0]]).ravel()
    P = est.cloud_.points
    np.testing.assert_allclose(d, cdist([[0.0, 0.0], [1.0, 0.0]], P).min(axis=1))
    with pytest.raises(ValueError):
        AttractorEstimator(random_state=None).fit()


def test_attractor_estimator_periodic_distance():
    est = AttractorEstimator("standard", (0.0, 0.3), seeds=20, transient=100, keep=20).fit()
    P = est.cloud_.points
    q = np.array([[P[0, 0] + 1.0, P[0, 1]], [np.mod(P[1, 0] + 0.5, 1.0), P[1, 1]]])
    d = est.transform(q).ravel()
    assert d[0] == pytest.approx(0.0, abs=1e-12)
    # brute force with angular wrap
    dx = np.abs(np.mod(q[1, 0], 1.0) - np.mod(P[:, 0], 1.0))
    dx = np.minimum(dx, 1.0 - dx)
    assert d[1] == pytest.approx(np.hypot(dx, q[1, 1] - P[:, 1]).min(), abs=1e-12)


def test_rotation_estimator_matches_scalar():
    X = np.array([[2.0, 0.3], [0.0, 0.3], [3.0, 0.5]])
    out = RotationIntervalEstimator(n=5000).fit().transform(X)
    assert out.shape == (3, 2)
    for row, (b, w) in zip(out, X):
        I = rotation_interval(FamilyParam.standard(b, w), 5000)
        assert tuple(row) == pytest.approx((I.lo, I.hi), abs=1e-12)
    with pytest.raises(ValueError):
        RotationIntervalEstimator().fit().transform(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        RotationIntervalEstimator().fit().transform([[-1.0, 0.2]])


def test_tongue_classifier():
    clf = TongueClassifier(r=0.0).fit()
    X = np.array([[0.5, 0.05], [0.5, 0.1], [0.0, 0.0], [0.0, 0.2]])
    np.testing.assert_array_equal(clf.predict(X), [True, False, True, False])
    assert clf.decision_function(X).shape == (4,)
    # b / (2 pi) is the T_0 boundary
    assert clf.score(X, [True, False, True, False]) == 1.0
