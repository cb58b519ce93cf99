import math

import numpy as np
import pytest
from scipy.optimize import minimize

from qwalk.errors import DomainError
from qwalk.optimize.cobyla import (NonFiniteObjectiveError, OptimizerOptions, cobyla_minimize,
                                   trust_region_step)


def sphere(x):
    return float(x @ x)


def rosenbrock(x):
    return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)


def reference(f, x0, opts, constraints=()):
    cons = [{"type": "ineq", "fun": c} for c in constraints]
    return minimize(f, x0, method="COBYLA", constraints=cons,
                    options={"rhobeg": opts.initial_trust_radius, "tol": opts.final_trust_radius,
                             "maxiter": opts.max_evaluations})


def test_quadratic_1d():
    r = cobyla_minimize(lambda x: (x[0] - 2) ** 2, [0.0])
    assert abs(r.x[0] - 2) < 1e-3


def test_sphere_2d():
    r = cobyla_minimize(sphere, [1.0, 1.0])
    assert r.fun < 1e-6
    assert r.nfev <= 1000


def test_rosenbrock_converges_with_larger_budget():
    # at the default trust radius 1000 evaluations only reach f ~ 1.2, for the
    # reference implementation as well; see test_rosenbrock_matches_reference
    r = cobyla_minimize(rosenbrock, [-1.2, 1.0], OptimizerOptions(max_evaluations=5000))
    assert r.fun < 1e-2


def test_rosenbrock_matches_reference():
    opts = OptimizerOptions()
    ours = cobyla_minimize(rosenbrock, [-1.2, 1.0], opts)
    ref = reference(rosenbrock, [-1.2, 1.0], opts)
    assert ours.nfev == opts.max_evaluations
    assert abs(ours.fun - ref.fun) < 1e-2


def test_sphere_matches_reference():
    opts = OptimizerOptions()
    x0 = np.array([1.0, -2.0, 0.5, 3.0])
    assert abs(cobyla_minimize(sphere, x0, opts).fun - reference(sphere, x0, opts).fun) < 1e-2


def test_constrained_quadratic():
    # min (x-2)^2 + y^2 subject to x <= 1, x + y >= 0: optimum at (1, 0) with value 1
    f = lambda x: (x[0] - 2) ** 2 + x[1] ** 2
    cons = [lambda x: 1 - x[0], lambda x: x[0] + x[1]]
    opts = OptimizerOptions()
    r = cobyla_minimize(f, [0.0, 0.0], opts, constraints=cons)
    np.testing.assert_allclose(r.x, [1.0, 0.0], atol=1e-4)
    assert r.maxcv <= 1e-8
    assert abs(r.fun - reference(f, [0.0, 0.0], opts, cons).fun) < 1e-2


def test_trace_is_best_so_far(rng):
    r = cobyla_minimize(rosenbrock, rng.uniform(-2, 2, 2), OptimizerOptions(max_evaluations=300))
    assert r.trace.size == r.nfev
    assert np.all(np.diff(r.trace) <= 0)
    assert r.trace[-1] == r.fun


def test_budget_respected():
    calls = []

    def f(x):
        calls.append(1)
        return rosenbrock(x)

    r = cobyla_minimize(f, [-1.2, 1.0], OptimizerOptions(max_evaluations=40))
    assert len(calls) == r.nfev == 40
    assert "budget" in r.message


def test_returns_best_point_seen():
    seen = []

    def f(x):
        v = sphere(x - 0.3)
        seen.append(v)
        return v

    r = cobyla_minimize(f, [2.0, -1.0, 0.5])
    assert r.fun == min(seen)


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_objective(bad):
    with pytest.raises(NonFiniteObjectiveError):
        cobyla_minimize(lambda x: bad if x[0] > 0.2 else float(x @ x), [0.0, 0.0])


@pytest.mark.parametrize("kwargs", [
    dict(initial_trust_radius=0.1, final_trust_radius=0.2),
    dict(final_trust_radius=0.0),
    dict(max_evaluations=3),
])
def test_invalid_options(kwargs):
    with pytest.raises(DomainError):
        cobyla_minimize(sphere, [1.0, 1.0], OptimizerOptions(**kwargs))


def test_empty_start():
    with pytest.raises(DomainError):
        cobyla_minimize(sphere, [])


def test_trust_region_unconstrained_step():
    d, _ = trust_region_step(np.array([3.0, 4.0]), np.zeros(0), np.zeros((0, 2)), 0.5)
    np.testing.assert_allclose(d, [-0.3, -0.4], atol=1e-12)


def test_trust_region_respects_linear_constraint():
    # minimise x + y with x >= -0.1 (c + a.d >= 0 with c = 0.1, a = e_x)
    d, _ = trust_region_step(np.array([1.0, 1.0]), np.array([0.1]), np.array([[1.0, 0.0]]), 1.0)
    assert d[0] >= -0.1 - 1e-12
    assert np.linalg.norm(d) <= 1.0 + 1e-12
    np.testing.assert_allclose(d, [-0.1, -math.sqrt(1 - 0.01)], atol=1e-9)
