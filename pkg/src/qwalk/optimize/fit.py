"""Multi-restart fitting of walker coin angles to a target distribution."""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, QWalkError
from ..objective import KL_EPSILON, LossReport, Objective, TargetDistribution, evaluate
from ..walk import TWO_PI, MultiSSQWConfig, canonicalize, check_reachability
from .cobyla import OptimizerOptions, cobyla_minimize

log = logging.getLogger(__name__)


@dataclass
class RestartResult:
    index: int
    x0: np.ndarray
    params: np.ndarray | None
    loss: LossReport | None
    trace: np.ndarray
    wall_time: float
    evaluations: int
    error: str | None = None


@dataclass
class FitResult:
    best_params: np.ndarray
    best_loss: LossReport
    best_restart: int
    restart_final_losses: np.ndarray
    best_trace: np.ndarray
    restart_wall_times: np.ndarray
    restart_evaluations: np.ndarray
    seed: int
    failed_restarts: list = field(default_factory=list)

    @property
    def restarts(self) -> int:
        return self.restart_final_losses.size


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for restart ``index``; identical to ``SeedSequence(seed).spawn(...)[index]``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def initial_point(seed: int, index: int, dim: int) -> np.ndarray:
    return restart_rng(seed, index).uniform(0.0, TWO_PI, size=dim)


def run_restart(objective: Objective, index: int, seed: int,
                options: OptimizerOptions) -> RestartResult:
    config = objective.config
    x0 = initial_point(seed, index, config.num_params)
    t0 = time.perf_counter()
    try:
        res = cobyla_minimize(objective, x0, options)
    except QWalkError as exc:
        log.warning("restart %d failed: %s", index, exc)
        return RestartResult(index, x0, None, None, np.zeros(0),
                             time.perf_counter() - t0, 0, error=str(exc))
    wall = time.perf_counter() - t0
    params = canonicalize(res.x)
    loss = evaluate(params, config, objective.target, objective.kl_weight, objective.epsilon)
    return RestartResult(index, x0, params, loss, res.trace, wall, res.nfev)


def _restart_job(args):
    return run_restart(*args)


def default_workers() -> int:
    return os.cpu_count() or 1


def fit(config: MultiSSQWConfig, target: TargetDistribution, restarts: int = 100,
        seed: int = 0, options: OptimizerOptions | None = None, kl_weight: float = 1.0,
        epsilon: float = KL_EPSILON, workers: int | None = 1) -> FitResult:
    """Best of ``restarts`` COBYLA runs from uniform random angles.

    Restarts are independent and may run in ``workers`` processes; results are
    merged by restart index so the outcome does not depend on scheduling.
    """
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    options = options or OptimizerOptions()
    options.validate(config.num_params)
    check_reachability(config, target.probs)
    objective = Objective(config, target, kl_weight, epsilon)
    jobs = [(objective, i, seed, options) for i in range(restarts)]
    workers = workers or default_workers()
    if workers > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=min(workers, restarts)) as pool:
            results = list(pool.map(_restart_job, jobs))
    else:
        results = [_restart_job(job) for job in jobs]
    results.sort(key=lambda r: r.index)

    ok = [r for r in results if r.error is None]
    if not ok:
        raise QWalkError(f"all {restarts} restarts failed; first error: {results[0].error}")
    final = np.array([r.loss.combined if r.error is None else math.nan for r in results])
    best = min(ok, key=lambda r: (r.loss.combined, r.index))
    return FitResult(
        best_params=best.params,
        best_loss=best.loss,
        best_restart=best.index,
        restart_final_losses=final,
        best_trace=best.trace,
        restart_wall_times=np.array([r.wall_time for r in results]),
        restart_evaluations=np.array([r.evaluations for r in results]),
        seed=seed,
        failed_restarts=[(r.index, r.error) for r in results if r.error is not None],
    )
