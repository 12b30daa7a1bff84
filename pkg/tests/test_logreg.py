import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference, separating_pairs_1d
from wbcbench import logreg as lr
from wbcbench.dataset import Dataset
from wbcbench.errors import ConfigError, DataError, ShapeError


def model(beta0=0.0, beta=None, **cfg):
    return lr.LogRegModel(beta0, np.zeros(9) if beta is None else beta, lr.LogRegConfig(**cfg), True, 0)


def toy_1d():
    x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
    return Dataset(x, np.array([0, 0, 1, 1]), ("x",))


# --- probabilities and prediction ---------------------------------------------------


def test_zero_model_gives_half():
    m = model()
    assert lr.predict_proba(m, np.arange(9.0)) == 0.5
    assert lr.predict(m, np.arange(9.0)) == 1


def test_intercept_only_values():
    assert lr.predict_proba(model(math.log(3)), np.ones(9)) == pytest.approx(0.75, abs=1e-15)
    assert lr.predict(model(5.0), np.ones(9)) == 1
    assert lr.predict(model(-5.0), np.ones(9)) == 0


def test_saturation_does_not_overflow():
    with np.errstate(over="raise", under="ignore"):
        p = lr.predict_proba(model(-1000.0), np.ones(9))
        q = lr.predict_proba(model(1000.0), np.ones(9))
    assert 0.0 <= p <= 1e-300
    assert q == 1.0


def test_matrix_input_and_shape_error():
    m = model(0.5, np.ones(9))
    probs = lr.predict_proba(m, np.zeros((3, 9)))
    assert probs.shape == (3,)
    assert lr.predict(m, np.zeros((3, 9))).tolist() == [1, 1, 1]
    with pytest.raises(ShapeError):
        lr.predict_proba(m, np.zeros(8))


@settings(max_examples=50, deadline=None)
@given(
    b0=st.floats(-50, 50),
    beta=st.lists(st.floats(-5, 5), min_size=9, max_size=9),
    x=st.lists(st.floats(1, 10), min_size=9, max_size=9),
)
def test_negated_model_is_complement(b0, beta, x):
    beta = np.array(beta)
    p = lr.predict_proba(model(b0, beta), np.array(x))
    q = lr.predict_proba(model(-b0, -beta), np.array(x))
    assert p + q == pytest.approx(1.0, abs=1e-12)


# --- objective ---------------------------------------------------------------------------


def test_loss_at_zero_is_log2(balanced):
    loss, grad = lr.nll_and_gradient(0.0, np.zeros(9), balanced, lr.LogRegConfig(penalty="none"))
    assert loss == pytest.approx(math.log(2), abs=1e-15)
    assert grad[0] == pytest.approx(0.0, abs=1e-15)


def test_l2_penalty_zero_at_origin(balanced):
    a, _ = lr.nll_and_gradient(0.0, np.zeros(9), balanced, lr.LogRegConfig(penalty="none"))
    b, _ = lr.nll_and_gradient(0.0, np.zeros(9), balanced, lr.LogRegConfig(penalty="l2", c=0.01))
    assert a == b


def test_penalty_scaling(balanced, rng):
    beta = rng.normal(size=9)
    n = len(balanced)
    base, _ = lr.nll_and_gradient(0.3, beta, balanced, lr.LogRegConfig(penalty="none"))
    l2, _ = lr.nll_and_gradient(0.3, beta, balanced, lr.LogRegConfig(penalty="l2", c=2.0))
    l1, _ = lr.nll_and_gradient(0.3, beta, balanced, lr.LogRegConfig(penalty="l1", solver="saga", c=2.0))
    assert l2 - base == pytest.approx(0.5 * beta @ beta / (2.0 * n), rel=1e-12)
    assert l1 - base == pytest.approx(np.abs(beta).sum() / (2.0 * n), rel=1e-12)


@pytest.mark.parametrize("penalty", ["none", "l2"])
def test_gradient_matches_finite_differences(balanced, penalty):
    cfg = lr.LogRegConfig(penalty=penalty, c=0.05)
    rng = np.random.default_rng(11)

    def f(w):
        return lr.nll_and_gradient(w[0], w[1:], balanced, cfg)[0]

    for _ in range(10):
        w = rng.normal(scale=0.3, size=10)
        _, g = lr.nll_and_gradient(w[0], w[1:], balanced, cfg)
        fd = central_difference(f, w, h=1e-5)
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-6


def test_l1_subgradient_is_zero_at_kink(balanced):
    cfg = lr.LogRegConfig(penalty="l1", solver="saga", c=1.0)
    _, g_pen = lr.nll_and_gradient(0.0, np.zeros(9), balanced, cfg)
    _, g_raw = lr.nll_and_gradient(0.0, np.zeros(9), balanced, lr.LogRegConfig(penalty="none"))
    np.testing.assert_array_equal(g_pen, g_raw)


def test_objective_errors(balanced):
    with pytest.raises(ShapeError):
        lr.nll_and_gradient(0.0, np.zeros(8), balanced, lr.LogRegConfig())
    with pytest.raises(DataError):
        lr.nll_and_gradient(0.0, np.zeros(9), balanced.subset(np.array([], dtype=int)), lr.LogRegConfig())


# --- configuration -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        {"c": 0.0},
        {"c": -1.0},
        {"solver": "liblinear"},
        {"penalty": "elasticnet"},
        {"penalty": "l1", "solver": "lbfgs"},
        {"max_iters": 0},
        {"tol": 0.0},
    ],
)
def test_bad_config(kwargs):
    with pytest.raises(ConfigError):
        lr.LogRegConfig(**kwargs)


def test_fit_needs_both_classes(balanced):
    with pytest.raises(DataError):
        lr.fit_logreg(balanced.subset(np.flatnonzero(balanced.labels == 0)))


# --- fitting -----------------------------------------------------------------------------------


def test_toy_1d_separable():
    d = toy_1d()
    # the oracle confirms a perfect separator exists before we ask the solver for one
    assert separating_pairs_1d(d.features[:, 0], d.labels, np.linspace(-3, 3, 13))
    m = lr.fit_logreg(d, lr.LogRegConfig(penalty="l2", c=1.0))
    assert m.converged
    assert (lr.predict(m, d.features) == d.labels).all()
    assert m.beta[0] > 0


ALL_SOLVERS = lr.SOLVERS


def test_solvers_agree_on_standardized_data(standardized):
    fits = {
        s: lr.fit_logreg(standardized, lr.LogRegConfig(penalty="none", solver=s, tol=1e-8, max_iters=5000))
        for s in ALL_SOLVERS
    }
    losses = {
        s: lr.nll_and_gradient(m.beta0, m.beta, standardized, lr.LogRegConfig(penalty="none"))[0]
        for s, m in fits.items()
    }
    for a, b in itertools.combinations(ALL_SOLVERS, 2):
        assert np.linalg.norm(fits[a].coef - fits[b].coef) <= 1e-3, (a, b)
        assert abs(losses[a] - losses[b]) <= 1e-8, (a, b)


@pytest.mark.parametrize("solver", ["lbfgs", "newton-cg", "newton-cholesky"])
def test_deterministic_solvers_agree_on_raw_data(balanced, solver):
    ref = lr.fit_logreg(balanced, lr.LogRegConfig(penalty="l2", solver="newton-cholesky", c=1.0, tol=1e-9))
    m = lr.fit_logreg(balanced, lr.LogRegConfig(penalty="l2", solver=solver, c=1.0, tol=1e-9))
    assert m.converged
    assert np.linalg.norm(m.coef - ref.coef) <= 1e-5


def test_label_flip_negates_fit(balanced):
    flipped = Dataset(balanced.features, 1 - balanced.labels)
    cfg = lr.LogRegConfig(penalty="l2", c=1.0, tol=1e-9, solver="newton-cholesky")
    a = lr.fit_logreg(balanced, cfg)
    b = lr.fit_logreg(flipped, cfg)
    np.testing.assert_allclose(a.coef, -b.coef, atol=1e-6)


def test_shrinkage_is_monotone(balanced):
    norms = [
        np.linalg.norm(lr.fit_logreg(balanced, lr.LogRegConfig(c=c, solver="newton-cholesky", tol=1e-9)).beta)
        for c in (0.001, 0.01, 0.1, 0.5, 1.0, 5.0, 10.0)
    ]
    assert all(a <= b + 1e-9 for a, b in zip(norms, norms[1:]))


def test_l1_sparsity(standardized):
    strong = lr.fit_logreg(standardized, lr.LogRegConfig(penalty="l1", solver="saga", c=0.005, max_iters=3000))
    assert (strong.beta == 0).sum() >= 3


@pytest.mark.parametrize("solver", ALL_SOLVERS)
def test_fit_is_reproducible(balanced, solver):
    cfg = lr.LogRegConfig(solver=solver, max_iters=50, fit_seed=3)
    a = lr.fit_logreg(balanced, cfg)
    b = lr.fit_logreg(balanced, cfg)
    assert a.coef.tobytes() == b.coef.tobytes()
    assert a.iters_used == b.iters_used


def test_iteration_cap_reported(balanced):
    m = lr.fit_logreg(balanced, lr.LogRegConfig(solver="sag", max_iters=2, penalty="none"))
    assert not m.converged
    assert m.iters_used == 2


def test_json_round_trip(balanced):
    m = lr.fit_logreg(balanced, lr.LogRegConfig(c=0.5))
    back = lr.LogRegModel.from_dict(json.loads(m.to_json()))
    assert back.to_json() == m.to_json()
    np.testing.assert_array_equal(back.coef, m.coef)


def test_model_rejects_nonfinite():
    with pytest.raises(ValueError):
        lr.LogRegModel(np.nan, np.zeros(9), lr.LogRegConfig(), True, 0)
