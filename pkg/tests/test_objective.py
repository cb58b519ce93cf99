import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk.errors import DomainError, ValidationError
from qwalk.objective import (KL_EPSILON, Objective, TargetDistribution, evaluate,
                             kl_divergence, losses, mse, total_variation)
from qwalk.walk import MultiSSQWConfig


def delta(size, k):
    p = np.zeros(size)
    p[k] = 1.0
    return TargetDistribution(p, np.arange(size, dtype=float))


def test_mse_identity(rng):
    p = rng.dirichlet(np.ones(8))
    assert mse(p, p) == 0.0


def test_mse_arithmetic():
    assert mse([1, 0], [0.5, 0.5]) == 0.25


def test_mse_matches_loop(rng):
    p, q = rng.dirichlet(np.ones(32)), rng.dirichlet(np.ones(32))
    total = 0.0
    for a, b in zip(p, q):
        total += (a - b) ** 2
    assert abs(mse(p, q) - total / 32) < 1e-15


def test_length_mismatch():
    with pytest.raises(DomainError):
        mse([1, 0], [1, 0, 0])
    with pytest.raises(DomainError):
        kl_divergence([1, 0], [1])


def test_kl_identity(rng):
    p = rng.dirichlet(np.ones(8))
    assert kl_divergence(p, p) == 0.0


def test_kl_arithmetic():
    assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)


def test_kl_zero_trained_bin_is_clamped():
    v = kl_divergence([0.5, 0.5], [1.0, 0.0])
    assert math.isfinite(v)
    assert v == pytest.approx(0.5 * math.log(0.5) + 0.5 * math.log(0.5 / KL_EPSILON))


def test_kl_direction():
    # mass missing from the trained distribution is what gets penalised
    assert kl_divergence([0.5, 0.5], [1.0, 0.0]) > kl_divergence([1.0, 0.0], [0.5, 0.5])


def test_kl_rejects_bad_epsilon():
    with pytest.raises(DomainError):
        kl_divergence([1.0], [1.0], epsilon=0)


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1.0
    assert total_variation([0.5, 0.5], [0.25, 0.75]) == 0.25


def test_losses_combination():
    r = losses([1, 0], [0.5, 0.5], kl_weight=2.0)
    assert r.combined == r.mse + 2.0 * r.kl
    assert set(r.as_dict()) == {"mse", "kl", "combined"}


# -- target distribution ---------------------------------------------------

def test_target_validation():
    with pytest.raises(ValidationError):
        TargetDistribution([0.5, 0.6], [0, 1])
    with pytest.raises(ValidationError):
        TargetDistribution([1.5, -0.5], [0, 1])
    with pytest.raises(ValidationError):
        TargetDistribution([0.5, 0.5], [1, 1])
    with pytest.raises(ValidationError):
        TargetDistribution([0.5, 0.5], [0, 1, 2])


def test_target_helpers():
    t = TargetDistribution([0.1, 0.6, 0.2, 0.1], [1.0, 2.0, 3.0, 4.0])
    assert t.position_qubits == 2
    assert t.mode_index() == 1
    assert t.mean() == pytest.approx(2.3)
    with pytest.raises(DomainError):
        TargetDistribution([0.5, 0.25, 0.25], [0, 1, 2]).position_qubits


# -- evaluate ------------------------------------------------------------------

def test_evaluate_exact_fit_is_zero():
    cfg = MultiSSQWConfig(4, num_walkers=2, steps=3, initial_position=3)
    r = evaluate(np.zeros(cfg.num_params), cfg, delta(16, 3 + 6), kl_weight=1.0)
    assert r.combined == 0.0


def test_evaluate_unreachable_target_is_positive(rng):
    cfg = MultiSSQWConfig(4, num_walkers=1, steps=1, initial_position=0)
    target = delta(16, 8)
    for _ in range(20):
        assert evaluate(rng.uniform(0, 2 * np.pi, cfg.num_params), cfg, target).combined > 0.5


def test_evaluate_kl_weight_zero_is_mse(rng):
    cfg = MultiSSQWConfig(3, 2, 2, 4)
    target = TargetDistribution(rng.dirichlet(np.ones(8)), np.arange(8.0))
    r = evaluate(rng.uniform(0, 6, cfg.num_params), cfg, target, kl_weight=0.0)
    assert r.combined == r.mse


def test_evaluate_deterministic(rng):
    cfg = MultiSSQWConfig(4, 3, 3, 7)
    target = TargetDistribution(rng.dirichlet(np.ones(16)), np.arange(16.0))
    x = rng.uniform(0, 6, cfg.num_params)
    assert evaluate(x, cfg, target) == evaluate(x.copy(), cfg, target)


def test_evaluate_dimension_mismatch():
    cfg = MultiSSQWConfig(3)
    with pytest.raises(DomainError):
        evaluate(np.zeros(cfg.num_params), cfg, delta(16, 0))
    with pytest.raises(DomainError):
        Objective(cfg, delta(16, 0))


def test_objective_pickles_and_matches(rng):
    cfg = MultiSSQWConfig(3, 2, 2, 4)
    target = TargetDistribution(rng.dirichlet(np.ones(8)), np.arange(8.0))
    f = Objective(cfg, target, kl_weight=0.5)
    g = pickle.loads(pickle.dumps(f))
    x = rng.uniform(0, 6, cfg.num_params)
    assert f(x) == g(x) == evaluate(x, cfg, target, 0.5).combined


prob_vectors = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.floats(0, 1), min_size=2 ** n, max_size=2 ** n)
    .filter(lambda v: sum(v) > 1e-6)
    .map(lambda v: np.array(v) / sum(v)))


@settings(max_examples=100, deadline=None)
@given(p=prob_vectors, seed=st.integers(0, 2**32 - 1))
def test_losses_nonnegative(p, seed):
    q = np.random.default_rng(seed).dirichlet(np.ones(p.size))
    assert mse(p, q) >= 0
    assert kl_divergence(p, q) >= -1e-12
    assert mse(p, p) == 0
    # bins below the floor leave a slack of at most epsilon/e each
    assert abs(kl_divergence(p, p)) <= p.size * KL_EPSILON
