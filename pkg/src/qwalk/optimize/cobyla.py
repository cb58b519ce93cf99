"""
COBYLA: derivative-free minimisation by linear approximations.

Keeps a simplex of n+1 evaluated points, fits linear models of the
objective and constraints through them, and steps to the minimiser of the
linear model inside a trust region of radius ``rho``. ``rho`` shrinks from
``initial_trust_radius`` to ``final_trust_radius`` whenever a step fails
and the simplex is already well shaped. Infeasibility is handled through
the merit function ``f + mu * max(0, max_i -c_i)`` with an adaptive
penalty ``mu``.

Constraints are callables ``c(x)`` returning a float or array; a point is
feasible when every value is >= 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, QWalkError

# simplex acceptability and step-size constants from Powell's method
ALPHA = 0.25   # min vertex distance to opposite face, in units of rho
BETA = 2.1     # max edge length, in units of rho
GAMMA = 0.5    # geometry-step length, in units of rho
DELTA = 1.1    # edge threshold when choosing which vertex to drop

MAX_SUBPROBLEM_CONSTRAINTS = 12


class NonFiniteObjectiveError(QWalkError, FloatingPointError):
    """The objective or a constraint returned NaN or inf."""


@dataclass(frozen=True)
class OptimizerOptions:
    initial_trust_radius: float = 0.5
    final_trust_radius: float = 1e-6
    max_evaluations: int = 1000

    def validate(self, dim: int) -> None:
        if not 0 < self.final_trust_radius < self.initial_trust_radius:
            raise DomainError("need 0 < final_trust_radius < initial_trust_radius")
        if self.max_evaluations < dim + 2:
            raise DomainError(
                f"max_evaluations={self.max_evaluations} is below dimension + 2 = {dim + 2}")


@dataclass
class CobylaResult:
    x: np.ndarray
    fun: float
    maxcv: float
    nfev: int
    trace: np.ndarray
    message: str


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    def __init__(self, objective, constraints, max_evaluations):
        self.objective = objective
        self.constraints = list(constraints)
        self.max_evaluations = max_evaluations
        self.nfev = 0
        self.best_x = None
        self.best_key = None
        self.best_f = math.inf
        self.best_cv = math.inf
        self.trace: list[float] = []
        self._trace_best = math.inf

    def __call__(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        if self.nfev >= self.max_evaluations:
            raise _BudgetExhausted
        self.nfev += 1
        f = float(self.objective(x))
        cons = np.concatenate([np.atleast_1d(np.asarray(c(x), dtype=float))
                               for c in self.constraints]) if self.constraints else np.zeros(0)
        if not math.isfinite(f) or not np.all(np.isfinite(cons)):
            raise NonFiniteObjectiveError(
                f"non-finite value at evaluation {self.nfev}: f={f}, constraints={cons}")
        cv = max(0.0, float(-cons.min())) if cons.size else 0.0
        # feasible points first, then lower objective; infeasible ranked by violation
        key = (0, f) if cv <= 0.0 else (1, cv)
        if self.best_key is None or key < self.best_key:
            self.best_key, self.best_x, self.best_f, self.best_cv = key, x.copy(), f, cv
        if cv <= 0.0 and f < self._trace_best:
            self._trace_best = f
        self.trace.append(self._trace_best)
        return f, cons


# ---------------------------------------------------------------------------
# trust-region subproblem

def _min_norm_in_polyhedron(A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """argmin ||d|| subject to A d >= b, by active-set enumeration (small m only)."""
    m, n = A.shape
    if np.all(b <= 0):
        return np.zeros(n)
    best = None
    for k in range(1, min(m, n) + 1):
        for S in itertools.combinations(range(m), k):
            AS = A[list(S)]
            G = AS @ AS.T
            try:
                lam = np.linalg.solve(G, b[list(S)])
            except np.linalg.LinAlgError:
                continue
            if np.any(lam < -1e-12):
                continue
            d = AS.T @ lam
            if np.all(A @ d >= b - 1e-10 * (1 + np.abs(b))):
                if best is None or d @ d < best @ best:
                    best = d
    return best


def _min_linear_on_ball(g, A, b, rho):
    """argmin g.d subject to A d >= b and ||d|| <= rho; None if infeasible."""
    m, n = A.shape
    tol = 1e-10 * (1 + np.abs(b))
    best, best_val = None, math.inf
    for k in range(0, min(m, n) + 1):
        for S in itertools.combinations(range(m), k):
            if k:
                AS = A[list(S)]
                G = AS @ AS.T
                try:
                    Ginv_b = np.linalg.solve(G, b[list(S)])
                    proj = np.linalg.solve(G, AS @ g)
                except np.linalg.LinAlgError:
                    continue
                dp = AS.T @ Ginv_b
                gp = g - AS.T @ proj
            else:
                dp = np.zeros(n)
                gp = g
            slack = rho * rho - dp @ dp
            if slack < -1e-12 * rho * rho:
                continue
            gnorm = math.sqrt(gp @ gp)
            d = dp if gnorm <= 1e-14 * (1 + math.sqrt(g @ g)) else \
                dp - math.sqrt(max(slack, 0.0)) * gp / gnorm
            if m and np.any(A @ d < b - tol):
                continue
            val = g @ d
            if val < best_val:
                best, best_val = d, val
    return best


def trust_region_step(g: np.ndarray, c: np.ndarray, A: np.ndarray, rho: float):
    """Step for the linearised problem at the current pole.

    Minimises ``g.d`` over ``||d|| <= rho`` subject to ``c + A d >= 0``. When
    that set is empty the least achievable worst violation ``t`` is found
    first and the constraints are relaxed to ``c + A d >= -t``.

    Returns ``(d, full)`` where ``full`` means the ball constraint is inactive.
    """
    n = g.size
    if c.size == 0:
        gn = math.sqrt(g @ g)
        if gn == 0.0:
            return np.zeros(n), True
        return -rho * g / gn, False
    if c.size > MAX_SUBPROBLEM_CONSTRAINTS:
        raise DomainError(
            f"at most {MAX_SUBPROBLEM_CONSTRAINTS} constraints supported, got {c.size}")
    b = -c
    d = _min_linear_on_ball(g, A, b, rho)
    if d is None:
        # bisection on the worst violation t for which {A d >= b - t} meets the ball
        lo, hi = 0.0, float(max(0.0, b.max()))
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            p = _min_norm_in_polyhedron(A, b - mid)
            if p is not None and p @ p <= rho * rho:
                hi = mid
            else:
                lo = mid
        relax = hi * (1 + 1e-9) + 1e-14
        d = _min_linear_on_ball(g, A, b - relax, rho)
        if d is None:
            d = _min_norm_in_polyhedron(A, b - relax)
            if d is None or d @ d > rho * rho:
                d = np.zeros(n)
    full = d @ d < (rho * (1 - 1e-10)) ** 2
    return d, full


# ---------------------------------------------------------------------------
# main loop

def cobyla_minimize(objective: Callable[[np.ndarray], float], x0: Sequence[float],
                    options: OptimizerOptions | None = None,
                    constraints: Sequence[Callable] = ()) -> CobylaResult:
    """Minimise ``objective`` from ``x0``; see the module docstring.

    The returned ``trace`` holds, per evaluation, the best feasible objective
    value seen so far (so it is non-increasing).
    """
    options = options or OptimizerOptions()
    x0 = np.array(x0, dtype=float).ravel()
    n = x0.size
    if n < 1:
        raise DomainError("need at least one variable")
    options.validate(n)
    ev = _Evaluator(objective, constraints, options.max_evaluations)
    rho = options.initial_trust_radius
    rhoend = options.final_trust_radius
    message = "trust radius reached its final value"
    try:
        _run(ev, x0, rho, rhoend)
    except _BudgetExhausted:
        message = "evaluation budget exhausted"
    return CobylaResult(x=ev.best_x, fun=ev.best_f, maxcv=ev.best_cv, nfev=ev.nfev,
                        trace=np.array(ev.trace), message=message)


def _violation(cons: np.ndarray) -> float:
    return max(0.0, float(-cons.min())) if cons.size else 0.0


def _run(ev: _Evaluator, x0: np.ndarray, rho: float, rhoend: float) -> None:
    n = x0.size
    pole = x0.copy()
    f0, c0 = ev(pole)
    m = c0.size
    # vertex j sits at pole + sim[:, j]; index n holds the pole's own values
    fval = np.empty(n + 1)
    cval = np.empty((n + 1, m))
    cv = np.empty(n + 1)
    fval[n], cval[n], cv[n] = f0, c0, _violation(c0)
    sim = rho * np.eye(n)

    def swap_pole(j):
        nonlocal pole, sim
        shift = sim[:, j].copy()
        pole = pole + shift
        sim = sim - shift[:, None]
        sim[:, j] = -shift
        for arr in (fval, cv):
            arr[[j, n]] = arr[[n, j]]
        cval[[j, n]] = cval[[n, j]]

    for j in range(n):
        fj, cj = ev(pole + sim[:, j])
        fval[j], cval[j], cv[j] = fj, cj, _violation(cj)
        if fj < fval[n]:
            swap_pole(j)
    simi = np.linalg.inv(sim)

    parmu = 0.0
    skip_geometry = True
    while True:
        # make the best vertex (by merit) the pole
        phi = fval + parmu * cv
        nbest = n
        for j in range(n):
            if phi[j] < phi[nbest] or (phi[j] == phi[nbest] and parmu == 0.0
                                       and cv[j] < cv[nbest]):
                nbest = j
        if nbest != n:
            swap_pole(nbest)
            simi = np.linalg.inv(sim)
        elif np.abs(simi @ sim - np.eye(n)).max() > 1e-8:
            simi = np.linalg.inv(sim)

        # linear models: rows of simi.T @ (vertex - pole values) are gradients
        df = fval[:n] - fval[n]
        g = simi.T @ df
        A = (simi.T @ (cval[:n] - cval[n])).T if m else np.zeros((0, n))

        vsig = 1.0 / np.sqrt((simi ** 2).sum(axis=1))
        veta = np.sqrt((sim ** 2).sum(axis=0))
        parsig, pareta = ALPHA * rho, BETA * rho
        geometry_ok = bool(np.all(vsig >= parsig) and np.all(veta <= pareta))

        if not skip_geometry and not geometry_ok:
            l = int(np.argmax(veta)) if veta.max() > pareta else int(np.argmin(vsig))
            dx = GAMMA * rho * vsig[l] * simi[l]
            # pick the sign the linear merit model prefers
            cvp = _violation(cval[n] + A @ dx) if m else 0.0
            cvm = _violation(cval[n] - A @ dx) if m else 0.0
            if parmu * (cvp - cvm) > -2.0 * (g @ dx):
                dx = -dx
            fn, cn = ev(pole + dx)
            sim[:, l] = dx
            fval[l], cval[l], cv[l] = fn, cn, _violation(cn)
            simi = _replace_column_inverse(simi, l, dx)
            skip_geometry = True
            continue

        d, full = trust_region_step(g, cval[n], A, rho)
        step_ok = True
        if not full and d @ d < 0.25 * rho * rho:
            step_ok = False
        elif full and d @ d < 1e-30:
            step_ok = False

        if step_ok:
            resmax = cv[n]
            resnew = _violation(cval[n] + A @ d) if m else 0.0
            fchange = float(g @ d)
            prerec = resmax - resnew
            barmu = fchange / prerec if prerec > 0 else 0.0
            if parmu < 1.5 * barmu:
                parmu = 2.0 * barmu
                phi = fval + parmu * cv
                if np.any(phi[:n] < phi[n]) or np.any(
                        (phi[:n] == phi[n]) & (cv[:n] < cv[n]) & (parmu == 0.0)):
                    continue
            prerem = parmu * prerec - fchange

            fn, cn = ev(pole + d)
            cvn = _violation(cn)
            vmold = fval[n] + parmu * resmax
            vmnew = fn + parmu * cvn
            trured = vmold - vmnew
            if parmu == 0.0 and fn == fval[n]:
                prerem = prerec
                trured = resmax - cvn

            ratio = 1.0 if trured <= 0 else 0.0
            jdrop = -1
            weights = np.abs(simi @ d)
            for j in range(n):
                if weights[j] > ratio:
                    jdrop, ratio = j, weights[j]
            sigbar = weights * vsig
            edgmax = DELTA * rho
            l = -1
            for j in range(n):
                if sigbar[j] >= parsig or sigbar[j] >= vsig[j]:
                    temp = veta[j]
                    if trured > 0:
                        temp = math.sqrt(((d - sim[:, j]) ** 2).sum())
                    if temp > edgmax:
                        l, edgmax = j, temp
            if l >= 0:
                jdrop = l
            if jdrop >= 0:
                sim[:, jdrop] = d
                fval[jdrop], cval[jdrop], cv[jdrop] = fn, cn, cvn
                simi = _replace_column_inverse(simi, jdrop, d)
            skip_geometry = True
            if jdrop >= 0 and trured > 0 and trured >= 0.1 * prerem:
                continue

        # the step failed or was too short
        if not geometry_ok:
            skip_geometry = False
            continue
        if rho <= rhoend:
            return
        rho *= 0.5
        if rho <= 1.5 * rhoend:
            rho = rhoend
        if parmu > 0.0:
            parmu = _reduce_penalty(parmu, fval, cval)
        skip_geometry = True


def _replace_column_inverse(simi: np.ndarray, j: int, d: np.ndarray) -> np.ndarray:
    """Inverse of the simplex matrix after its column ``j`` becomes ``d``."""
    simi = simi.copy()
    simi[j] /= simi[j] @ d
    for k in range(simi.shape[0]):
        if k != j:
            simi[k] -= (simi[k] @ d) * simi[j]
    return simi


def _reduce_penalty(parmu: float, fval: np.ndarray, cval: np.ndarray) -> float:
    denom = 0.0
    for k in range(cval.shape[1]):
        cmin, cmax = cval[:, k].min(), cval[:, k].max()
        if cmin < 0.5 * cmax:
            temp = max(cmax, 0.0) - cmin
            denom = temp if denom <= 0.0 else min(denom, temp)
    if denom == 0.0:
        return 0.0
    spread = fval.max() - fval.min()
    if spread < parmu * denom:
        return spread / denom
    return parmu
