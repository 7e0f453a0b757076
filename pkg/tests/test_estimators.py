import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gfflab import lattice, spectral, thick
from gfflab.estimators import AlphaEnergy, BoxCountingDimension, CircleAverageTransformer, HighPointExponent


def test_circle_average_transformer():
    t = CircleAverageTransformer(radius=0.05, cutoff=32, seed=4)
    assert t.get_params() == {"radius": 0.05, "cutoff": 32, "seed": 4}
    X = np.array([[0.3, 0.4], [0.5, 0.5]])
    out = t.fit_transform(X)
    assert out.shape == (2, 1)
    f = spectral.sample_spectral(32, 4)
    np.testing.assert_allclose(out[:, 0], [spectral.circle_average(f, p, 0.05) for p in X], rtol=1e-12)


def test_transformer_requires_fit_and_two_columns():
    with pytest.raises(NotFittedError):
        CircleAverageTransformer().transform([[0.5, 0.5]])
    t = CircleAverageTransformer(cutoff=4).fit([[0.5, 0.5]])
    with pytest.raises(ValueError):
        t.transform([[0.5, 0.5, 0.5]])


def test_clone_keeps_params():
    t = clone(CircleAverageTransformer(radius=0.1, cutoff=8, seed=9))
    assert t.get_params()["seed"] == 9
    assert not hasattr(t, "field_")


def test_high_point_exponent_on_power_law():
    ns = np.repeat([64, 128, 256], 2).astype(float)
    y = ns**1.5
    model = HighPointExponent().fit(ns[:, None], y)
    assert model.slope_ == pytest.approx(1.5)
    np.testing.assert_allclose(model.predict(ns[:, None]), y, rtol=1e-10)
    assert model.score(ns[:, None], y) == pytest.approx(1.0)


def test_high_point_exponent_matches_functional_fit():
    rows = thick.high_point_counts([32, 64, 128], [0.5], 4, seed=2)
    X = np.array([[r[0]] for r in rows], dtype=float)
    y = np.array([r[3] for r in rows], dtype=float)
    assert HighPointExponent().fit(X, y).slope_ == pytest.approx(thick.exponent_fit_rows(rows, 0.5).slope)


def test_box_counting_dimension():
    k = np.arange(1, 64) / 64
    grid = np.array([(x, y) for x in k for y in k])
    assert BoxCountingDimension().fit(grid).dimension_ == pytest.approx(2.0, abs=0.05)


def test_alpha_energy_estimator():
    X = np.array([[0.25, 0.5], [0.75, 0.5]])
    assert AlphaEnergy(alpha=1.0).fit(X).energy_ == pytest.approx(1.0)
    rep = lattice.high_points(lattice.sample_dgff(64, 0), 0.5)
    est = AlphaEnergy(alpha=1.5).fit(rep.coordinates)
    assert est.energy_ == pytest.approx(thick.alpha_energy(thick.EmpiricalMeasure.from_report(rep), 1.5))
