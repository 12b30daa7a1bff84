import numpy as np
import pytest

from wbcbench import optim


def quadratic(a, b):
    def fun(x):
        r = a @ x - b
        return 0.5 * float(r @ r), a.T @ r

    return fun


@pytest.fixture
def problem():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(12, 4))
    b = rng.normal(size=12)
    return a, b, np.linalg.lstsq(a, b, rcond=None)[0]


def test_lbfgs_least_squares(problem):
    a, b, exact = problem
    res = optim.lbfgs(quadratic(a, b), np.zeros(4), tol=1e-10)
    assert res.converged
    np.testing.assert_allclose(res.x, exact, atol=1e-8)


def test_newton_cg_least_squares(problem):
    a, b, exact = problem
    res = optim.newton_cg(quadratic(a, b), lambda x: (lambda v: a.T @ (a @ v)), np.zeros(4), tol=1e-10)
    assert res.converged
    np.testing.assert_allclose(res.x, exact, atol=1e-8)


def test_newton_cholesky_one_step(problem):
    a, b, exact = problem
    res = optim.newton_cholesky(quadratic(a, b), lambda x: a.T @ a, np.zeros(4), tol=1e-10)
    assert res.converged and res.n_iter <= 2
    np.testing.assert_allclose(res.x, exact, atol=1e-10)


def test_rosenbrock():
    def fun(x):
        f = (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
        g = np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])
        return f, g

    res = optim.lbfgs(fun, np.array([-1.2, 1.0]), tol=1e-8, max_iters=500)
    assert res.converged
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-6)


def test_iteration_cap(problem):
    a, b, _ = problem
    res = optim.lbfgs(quadratic(a, b), np.zeros(4), tol=1e-14, max_iters=1)
    assert not res.converged and res.n_iter == 1
