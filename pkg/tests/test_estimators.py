import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tomobss import (KernelScattererSeparation, PCASeparation, PeriodogramElevation, ScattererParams,
                     SimulationConfig, draw_stack, model_covariance, steering_vector)
from tomobss.errors import InvalidInputError
from tomobss.estimation import angular_bias

from conftest import two_scatterers


@pytest.fixture
def scene(geom):
    cfg = SimulationConfig(geom, tuple(two_scatterers(geom, 2.0)), looks=900, seed=5)
    return cfg, draw_stack(cfg).T


def test_get_params_and_clone():
    est = KernelScattererSeparation(kernel="polynomial", order=1.2, n_scatterers=3)
    params = est.get_params()
    assert params["order"] == 1.2 and params["n_scatterers"] == 3
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(beta=2.0)
    assert est.beta == 2.0
    assert clone(PCASeparation(1)).n_scatterers == 1


def test_fit_recovers_scene(scene):
    cfg, X = scene
    est = KernelScattererSeparation(stop_threshold=0.0).fit(X)
    assert est.steering_vectors_.shape == (2, 9)
    assert est.n_features_in_ == 9
    truth = cfg.steering_vectors()
    assert angular_bias(est.steering_vectors_[0], truth[0]) < 5
    assert est.intensities_[0] > est.intensities_[1]


def test_precomputed_matches_samples(scene, geom):
    cfg, X = scene
    a = KernelScattererSeparation(stop_threshold=0.0).fit(X)
    b = KernelScattererSeparation(stop_threshold=0.0, covariance="precomputed").fit(a.covariance_)
    np.testing.assert_allclose(a.steering_vectors_, b.steering_vectors_)


def test_mdl_order(geom):
    sc = (ScattererParams(0.0, 3.0), ScattererParams(100.0, 3.0))
    X = draw_stack(SimulationConfig(geom, sc, noise_power=0.01, looks=900, seed=1)).T
    est = KernelScattererSeparation(n_scatterers="mdl", stop_threshold=0.0).fit(X)
    assert len(est.intensities_) == 2
    with pytest.raises(InvalidInputError):
        KernelScattererSeparation(n_scatterers="mdl", covariance="precomputed").fit(np.eye(9))


def test_mdl_pure_noise_gives_nothing(geom):
    X = draw_stack(SimulationConfig(geom, (), noise_power=1.0, looks=900, seed=2)).T
    est = KernelScattererSeparation(n_scatterers="mdl").fit(X)
    assert est.steering_vectors_.shape == (0, 9)
    assert est.transform(X[:3]).shape == (3, 0)


def test_transform_amplitudes(geom):
    sc = (ScattererParams(40.0, 1.0),)
    X = draw_stack(SimulationConfig(geom, sc, looks=50, seed=3)).T
    est = KernelScattererSeparation(n_scatterers=1).fit(X)
    amps = est.fit_transform(X)
    assert amps.shape == (50, 1)
    r = est.steering_vectors_[0]
    np.testing.assert_allclose(np.outer(amps[:, 0], r), X, atol=1e-8)


def test_transform_errors(scene):
    _, X = scene
    with pytest.raises(NotFittedError):
        PCASeparation().transform(X)
    est = PCASeparation().fit(X)
    with pytest.raises(InvalidInputError):
        est.transform(X[:, :5])


def test_pca_estimator(scene, geom):
    cfg, X = scene
    est = PCASeparation(2).fit(X)
    assert est.steering_vectors_.shape == (2, 9)
    assert est.intensities_[0] >= est.intensities_[1]


def test_sign_covariance_option(scene):
    _, X = scene
    est = PCASeparation(covariance="sign").fit(X)
    assert np.trace(est.covariance_).real == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        PCASeparation(covariance="robust").fit(X)


def test_periodogram_estimator(geom):
    R = np.array([steering_vector(geom, 12.0), steering_vector(geom, -30.0)])
    est = PeriodogramElevation(geom, refine=True).fit()
    np.testing.assert_allclose(est.predict(R), [12.0, -30.0], atol=0.01)
    assert len(est.coherence_) == 2
    with pytest.raises(InvalidInputError):
        PeriodogramElevation().fit()
