import numpy as np
import pytest

from qwalk.errors import DomainError, QWalkError
from qwalk.objective import TargetDistribution, evaluate
from qwalk.optimize import fit as fit_module
from qwalk.optimize.cobyla import OptimizerOptions
from qwalk.optimize.fit import fit, initial_point, restart_rng
from qwalk.targets import binomial_target
from qwalk.walk import MultiSSQWConfig, ReachabilityWarning

SMALL = OptimizerOptions(max_evaluations=200)


def delta(size, k):
    p = np.zeros(size)
    p[k] = 1.0
    return TargetDistribution(p, np.arange(size, dtype=float))


@pytest.fixture(scope="module")
def small_problem():
    return MultiSSQWConfig(3, num_walkers=1, steps=4, initial_position=3), binomial_target(7, 0.4, 3)


def test_reachable_delta_is_found():
    cfg = MultiSSQWConfig(3, num_walkers=1, steps=1, initial_position=3)
    r = fit(cfg, delta(8, 4), restarts=5, seed=0)
    assert r.best_loss.combined < 1e-4


def test_restart_streams():
    a = initial_point(7, 3, 9)
    assert a.shape == (9,) and np.all((a >= 0) & (a < 2 * np.pi))
    np.testing.assert_array_equal(a, initial_point(7, 3, 9))
    assert not np.array_equal(a, initial_point(7, 4, 9))
    assert not np.array_equal(a, initial_point(8, 3, 9))
    spawned = np.random.SeedSequence(7).spawn(5)[3]
    assert restart_rng(7, 3).random() == np.random.default_rng(spawned).random()


def test_same_seed_bit_identical(small_problem):
    cfg, target = small_problem
    a = fit(cfg, target, restarts=3, seed=11, options=SMALL)
    b = fit(cfg, target, restarts=3, seed=11, options=SMALL)
    np.testing.assert_array_equal(a.best_params, b.best_params)
    np.testing.assert_array_equal(a.restart_final_losses, b.restart_final_losses)
    np.testing.assert_array_equal(a.best_trace, b.best_trace)
    assert a.best_loss == b.best_loss


def test_workers_do_not_change_result(small_problem):
    cfg, target = small_problem
    a = fit(cfg, target, restarts=3, seed=5, options=SMALL, workers=1)
    b = fit(cfg, target, restarts=3, seed=5, options=SMALL, workers=2)
    np.testing.assert_array_equal(a.best_params, b.best_params)
    np.testing.assert_array_equal(a.restart_final_losses, b.restart_final_losses)
    np.testing.assert_array_equal(a.best_trace, b.best_trace)


def test_result_invariants(small_problem):
    cfg, target = small_problem
    r = fit(cfg, target, restarts=4, seed=2, options=SMALL)
    assert r.restarts == 4
    assert r.best_loss.combined == r.restart_final_losses.min()
    assert r.best_loss.combined == r.restart_final_losses[r.best_restart]
    assert np.all(np.diff(r.best_trace) <= 0)
    assert np.all((r.best_params >= 0) & (r.best_params < 2 * np.pi))
    assert evaluate(r.best_params, cfg, target) == r.best_loss
    assert np.all(r.restart_evaluations <= SMALL.max_evaluations)
    assert r.restart_wall_times.shape == (4,)


def test_failed_restart_is_skipped(small_problem, monkeypatch):
    cfg, target = small_problem
    real = fit_module.cobyla_minimize

    def flaky(objective, x0, options):
        if x0[0] < 2.0:
            raise QWalkError("boom")
        return real(objective, x0, options)

    monkeypatch.setattr(fit_module, "cobyla_minimize", flaky)
    first = [initial_point(0, i, cfg.num_params)[0] for i in range(6)]
    assert any(v < 2.0 for v in first) and any(v >= 2.0 for v in first)
    r = fit(cfg, target, restarts=6, seed=0, options=SMALL)
    failed = {i for i, _ in r.failed_restarts}
    assert failed == {i for i, v in enumerate(first) if v < 2.0}
    assert all(np.isnan(r.restart_final_losses[i]) for i in failed)
    assert r.best_restart not in failed


def test_all_restarts_failing_raises(small_problem, monkeypatch):
    cfg, target = small_problem

    def broken(*args):
        raise QWalkError("boom")

    monkeypatch.setattr(fit_module, "cobyla_minimize", broken)
    with pytest.raises(QWalkError, match="all 2 restarts failed"):
        fit(cfg, target, restarts=2, seed=0, options=SMALL)


def test_bad_restart_count(small_problem):
    cfg, target = small_problem
    with pytest.raises(DomainError):
        fit(cfg, target, restarts=0)


def test_unreachable_mass_warns():
    cfg = MultiSSQWConfig(3, num_walkers=1, steps=1, initial_position=0)
    with pytest.warns(ReachabilityWarning):
        fit(cfg, delta(8, 4), restarts=1, seed=0, options=OptimizerOptions(max_evaluations=20))
