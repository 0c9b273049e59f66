import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from levimax import catalog
from levimax.estimators import LeviSpectrumTransformer, NecessaryConstantEstimator, check_points


def test_check_points():
    assert check_points([[1, 2j]]).dtype == complex
    with pytest.raises(ValueError):
        check_points([1, 2])
    with pytest.raises(ValueError):
        check_points(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        check_points([[1, 2]], n=3)
    with pytest.raises(ValueError):
        check_points([[np.nan, 0]])


def test_transformer_example1():
    tr = LeviSpectrumTransformer(catalog.SOURCES["example1"], {"t": 2.0})
    X = np.array([[0.1, 0, 0], [0.05, 0, 0]], dtype=complex)
    lam = tr.fit_transform(X)
    assert lam.shape == (2, 2)
    # gradient projection moves re z1 slightly, so compare to the projected points
    assert np.all(lam[:, 0] < 0) and np.all(lam[:, 1] > 0)
    with pytest.raises(NotFittedError):
        LeviSpectrumTransformer(catalog.SOURCES["flat"]).transform(X)


def test_estimator_fit_predict_score():
    est = NecessaryConstantEstimator(q=2)
    lam = np.array([[-0.2, 0.1], [-0.1, 0.1], [0.0, 0.0]])
    est.fit(lam)
    assert est.pointwise_ == pytest.approx([3.0, 2.0, 1.0])
    assert est.A_min_ == pytest.approx(3.0)
    assert est.score(lam) == 1.0
    assert est.score(np.array([[-0.5, 0.1]])) == 0.0
    with pytest.raises(NotFittedError):
        NecessaryConstantEstimator().predict(lam)
    with pytest.raises(ValueError):
        NecessaryConstantEstimator(q=3).fit(lam)


def test_estimator_infeasible_is_infinite():
    est = NecessaryConstantEstimator(q=1).fit(np.array([[-1.0, 1.0]]))
    assert est.A_min_ == np.inf


def test_pipeline_and_clone():
    pipe = make_pipeline(
        LeviSpectrumTransformer(catalog.SOURCES["example1"], {"t": 2.0}), NecessaryConstantEstimator(q=2)
    )
    X = np.array([[0.05 * k, 0.01, 0] for k in range(1, 5)], dtype=complex)
    pipe.fit(X)
    assert pipe[-1].A_min_ > 3.0
    c = clone(pipe)
    assert c.get_params()["necessaryconstantestimator__q"] == 2
    assert not hasattr(c[-1], "A_min_")
