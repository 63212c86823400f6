import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppcqed.fitting import ConvergenceError, least_squares_simplex


def test_linear_model_matches_lstsq():
    rng = np.random.default_rng(0)
    x = np.linspace(0, 1, 50)
    y = 2.0 + 3.0 * x + 0.1 * rng.normal(size=x.size)
    fit = least_squares_simplex(lambda p: p[0] + p[1] * x - y, [0.0, 0.0], [1.0, 1.0], ["a", "b"])
    a = np.vstack([np.ones_like(x), x]).T
    coef, res, *_ = np.linalg.lstsq(a, y, rcond=None)
    assert fit["a"] == pytest.approx(coef[0], abs=1e-7)
    assert fit["b"] == pytest.approx(coef[1], abs=1e-7)
    # covariance oracle s^2 (A^T A)^-1
    s2 = res[0] / (x.size - 2)
    cov = s2 * np.linalg.inv(a.T @ a)
    assert fit.parameter_uncertainties["a"] == pytest.approx(np.sqrt(cov[0, 0]), rel=1e-4)
    assert fit.parameter_uncertainties["b"] == pytest.approx(np.sqrt(cov[1, 1]), rel=1e-4)
    assert fit.converged and fit.n_data == 50


def test_rosenbrock():
    def r(p):
        return np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])

    fit = least_squares_simplex(r, [-1.2, 1.0], [1.0, 1.0], ["x", "y"])
    assert fit["x"] == pytest.approx(1, abs=1e-6)
    assert fit["y"] == pytest.approx(1, abs=1e-6)


def test_iteration_cap():
    def r(p):
        return np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])

    with pytest.raises(ConvergenceError):
        least_squares_simplex(r, [-1.2, 1.0], [1.0, 1.0], ["x", "y"], maxiter=5, restarts=0)
    fit = least_squares_simplex(r, [-1.2, 1.0], [1.0, 1.0], ["x", "y"], maxiter=5, restarts=0,
                                raise_on_failure=False)
    assert not fit.converged


def test_deterministic_given_seed():
    x = np.linspace(0, 1, 20)
    y = np.exp(-3 * x)

    def r(p):
        return p[0] * np.exp(-p[1] * x) - y

    a = least_squares_simplex(r, [0.5, 1.0], [1.0, 1.0], ["a", "k"], seed=4)
    b = least_squares_simplex(r, [0.5, 1.0], [1.0, 1.0], ["a", "k"], seed=4)
    assert a.parameters == b.parameters


@settings(max_examples=30, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(1e-3, 1e3))
def test_scaled_coordinates(centre, width):
    # recovery is relative to the scale whatever the magnitudes
    x = centre + width * np.linspace(-3, 3, 41)
    y = 1 / (1 + ((x - centre) / width) ** 2)

    def r(p):
        return 1 / (1 + ((x - p[0]) / p[1]) ** 2) - y

    fit = least_squares_simplex(r, [centre + 0.2 * width, 1.3 * width], [width, width], ["c", "w"])
    assert abs(fit["c"] - centre) < 1e-6 * width
    assert fit["w"] == pytest.approx(width, rel=1e-6)
