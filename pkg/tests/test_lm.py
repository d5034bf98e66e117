import numpy as np
import pytest
from scipy.optimize import curve_fit, least_squares

from vortexfwm.errors import FitError
from vortexfwm.lm import FitResult, levenberg_marquardt, numeric_jacobian


def exp_model(t, a, k, c):
    return a * np.exp(-k * t) + c


@pytest.fixture
def decay(rng):
    t = np.linspace(0, 4, 40)
    y = exp_model(t, 2.0, 1.3, 0.5) + 0.01 * rng.standard_normal(t.size)
    return t, y


def test_jacobian_matches_analytic():
    t = np.linspace(0, 2, 7)
    p = np.array([2.0, 1.3, 0.5])
    jac = numeric_jacobian(lambda q: exp_model(t, *q), p, np.abs(p))
    e = np.exp(-1.3 * t)
    exact = np.column_stack([e, -2.0 * t * e, np.ones_like(t)])
    assert np.allclose(jac, exact, rtol=1e-8, atol=1e-10)


def test_agrees_with_scipy(decay):
    t, y = decay
    res = levenberg_marquardt(lambda p: exp_model(t, *p) - y, [1.0, 1.0, 0.0], names=("a", "k", "c"), scale=[1, 1, 1])
    ref = least_squares(lambda p: exp_model(t, *p) - y, [1.0, 1.0, 0.0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    assert res.converged
    assert np.allclose(res.params, ref.x, rtol=1e-7)
    popt, pcov = curve_fit(exp_model, t, y, p0=[1.0, 1.0, 0.0])
    assert np.allclose(res.covariance, pcov, rtol=1e-4)
    assert res["k"] == pytest.approx(popt[1], rel=1e-7)


def test_exact_data_recovered():
    t = np.linspace(0, 4, 30)
    y = exp_model(t, 2.0, 1.3, 0.5)
    res = levenberg_marquardt(lambda p: exp_model(t, *p) - y, [1.0, 0.5, 0.1], scale=[1, 1, 1], data_scale=2.5)
    assert np.allclose(res.params, [2.0, 1.3, 0.5], rtol=1e-9)
    assert res.rms < 1e-12


def test_positive_steps_bounded():
    # the first step would overshoot by far; bounded steps change a positive parameter at most 4x
    seen = []

    def fun(p):
        seen.append(p[0])
        return np.array([p[0] - 1e6, 0.0])

    levenberg_marquardt(fun, [1.0], positive=[True], data_scale=1e6)
    trial = np.array(seen[3:])  # skip the Jacobian evaluations at the start
    assert np.all(trial > 0)
    assert np.max(trial) >= 1e6 * (1 - 1e-6)
    accepted = np.maximum.accumulate(np.array(seen))
    assert np.all(accepted[1:] / accepted[:-1] <= 4.0 + 1e-9)


def test_failure_carries_best_so_far():
    # Rosenbrock valley with too few iterations
    def fun(p):
        return np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])

    with pytest.raises(FitError) as info:
        levenberg_marquardt(fun, [-1.2, 1.0], max_iter=3)
    best = info.value.best
    assert isinstance(best, FitResult)
    assert not best.converged
    assert best.rms < np.sqrt(np.mean(fun(np.array([-1.2, 1.0])) ** 2))
    res = levenberg_marquardt(fun, [-1.2, 1.0], max_iter=3, raise_on_failure=False)
    assert not res.converged
    assert levenberg_marquardt(fun, [-1.2, 1.0]).params == pytest.approx([1.0, 1.0], rel=1e-8)


def test_input_validation():
    with pytest.raises(ValueError):
        levenberg_marquardt(lambda p: p[:1], [1.0, 2.0])
    with pytest.raises(ValueError):
        levenberg_marquardt(lambda p: p - 1, [-1.0], positive=[True])


def test_report_layout(decay):
    t, y = decay
    res = levenberg_marquardt(lambda p: exp_model(t, *p) - y, [1.0, 1.0, 0.0], names=("a", "k", "c"), model="decay")
    d = res.to_dict()
    assert set(d) == {"model", "params", "sigmas", "rms", "converged", "n_points"}
    assert d["n_points"] == 40 and d["model"] == "decay"
    assert d["sigmas"]["k"] == pytest.approx(np.sqrt(res.covariance[1, 1]))
