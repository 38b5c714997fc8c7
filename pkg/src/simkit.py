"""
Trajectory simulation, minimal malfunctioning horizon search, and the
resilience sweep over initial-state radii.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .energy import malfunctioning_feasible_margin, nominal_energy, nominal_min_tf, total_energy_at_mean
from .errors import DimensionMismatch, NoFeasibleHorizon, NoLostActuators
from .matkernel import as_vector
from .models import (
    DirectionPolicy, DirectionPolicyKind, GramConvention, OrderingViolation, ProblemEcho, SweepResult,
)
from .settings import get_tolerance, settings
from .signals import CatalogEntry, ControlSignal, PiecewiseConstantSignal, admissible, build_catalog, signal_stats
from .sysmodel import RegulationTask, SystemModel, build_task
from .worstcase import quadratic_eigen, resilience_lower_bound, resilience_ratio, worst_case_bound

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    terminal_error: float


def _input_blocks(sys: SystemModel, u_c: ControlSignal, u_uc: Optional[ControlSignal]):
    """Pair each signal with the columns of B it drives"""
    if u_uc is None:
        if u_c.dimension == sys.m + sys.p:
            return [(sys.B, u_c)]
        if u_c.dimension == sys.m:
            return [(sys.B_c, u_c)]
        raise DimensionMismatch(f"control has dimension {u_c.dimension}, expected {sys.m + sys.p} or {sys.m}")
    if u_c.dimension != sys.m:
        raise DimensionMismatch(f"u_c has dimension {u_c.dimension}, expected m = {sys.m}")
    if u_uc.dimension != sys.p:
        raise DimensionMismatch(f"u_uc has dimension {u_uc.dimension}, expected p = {sys.p}")
    return [(sys.B_c, u_c), (sys.B_uc, u_uc)]


def _segments(t_f: float, signals: Sequence[ControlSignal]) -> np.ndarray:
    cuts = [0.0, t_f]
    for u in signals:
        if isinstance(u, PiecewiseConstantSignal):
            cuts.extend(u.breakpoints.tolist())
    return np.unique(np.clip(cuts, 0.0, t_f))


def _integrate_ode(x0: np.ndarray, blocks, times: np.ndarray) -> np.ndarray:
    """solve_ivp segment by segment so no step straddles a piecewise switch"""
    t_f = times[-1]
    states = np.empty((times.size, x0.size))
    states[0] = x0
    x = x0.copy()
    cuts = _segments(t_f, [u for _, u in blocks])

    for a, b in zip(cuts[:-1], cuts[1:]):
        inside = np.nextafter(b, a)

        def rhs(t, _x, a=a, inside=inside):
            s = min(max(t, a), inside)
            return sum(M @ u.value(s) for M, u in blocks)

        mask = (times > a) & (times <= b)
        points = np.union1d(times[mask], [b])
        sol = solve_ivp(rhs, (a, b), x, method="DOP853", rtol=1e-12, atol=1e-12, t_eval=points)
        states[mask] = sol.y.T[:int(mask.sum())]
        x = sol.y[:, -1]
    return states


def simulate(sys: SystemModel, task: RegulationTask, u_c: ControlSignal, u_uc: Optional[ControlSignal] = None,
             steps: int = 100, method: str = "exact") -> Trajectory:
    """
    Integrate x' = B_c u_c + B_uc u_uc from x0 over [0, t_f].

    A single signal of dimension m + p drives the full B (nominal system); of
    dimension m it drives B_c alone.

    Args:
        steps: Number of uniform time steps reported (>= 1)
        method: "exact" (closed-form antiderivatives) or "ode" (solve_ivp, DOP853)

    Raises:
        DimensionMismatch: signal dimensions do not match the split
        ValueError: steps < 1 or an unknown method
    """
    if method not in ("exact", "ode"):
        raise ValueError(f"Unknown method: {method}. Use 'exact' or 'ode'.")
    if int(steps) < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    blocks = _input_blocks(sys, u_c, u_uc)
    times = np.linspace(0.0, task.t_f, int(steps) + 1)

    if method == "exact":
        states = np.tile(task.x0, (times.size, 1))
        for M, u in blocks:
            states = states + u.cumulatives(times) @ M.T
    else:
        states = _integrate_ode(np.array(task.x0), blocks, times)

    error = float(np.linalg.norm(states[-1]))
    logger.debug(f"simulate ({method}): terminal error {error:.3e}")
    return Trajectory(times=times, states=states, terminal_error=error)


def min_tf_search(sys: SystemModel, x0, tol: float = 1e-9, cap: float = 1e6) -> float:
    """
    Smallest t_f (within tol) meeting the vertex feasibility condition, by doubling then bisection.

    The left side of that condition is max_i |(B_c^+ x0)_i| / t_f + ||row_i(B_c^+ B_uc)||_1,
    nonincreasing in t_f, so the feasible set is an interval [t*, inf).

    Raises:
        NoFeasibleHorizon: still infeasible once the bracket passes cap
    """
    x0 = as_vector(x0, "x0")
    if sys.p == 0:
        return nominal_min_tf(sys, x0)
    slack = get_tolerance('feasibility_slack')

    def margin(t_f: float) -> float:
        value, _ = malfunctioning_feasible_margin(sys, build_task(x0, t_f, system=sys))
        return value

    lo = 0.0
    hi = max(nominal_min_tf(sys, x0), tol)
    while margin(hi) > 1.0 + slack:
        lo = hi
        hi *= 2.0
        if hi > cap:
            raise NoFeasibleHorizon(cap, margin(cap))

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 1.0 + slack:
            hi = mid
        else:
            lo = mid
    logger.debug(f"min_tf_search: {hi:.9g} (bracket width {hi - lo:.1e})")
    return hi


def direction_grid(n: int, count: int = 360, seed: int = 0) -> np.ndarray:
    """
    Unit directions in R^n, one per row.

    n = 1 gives +/-1; n = 2 gives `count` uniform angles; larger n gives `count`
    seeded normalized Gaussian samples.
    """
    if n < 1 or count < 1:
        raise ValueError(f"need n >= 1 and count >= 1, got n={n}, count={count}")
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        theta = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack((np.cos(theta), np.sin(theta)))
    rng = np.random.default_rng(seed)
    samples = rng.normal(size=(count, n))
    return samples / np.linalg.norm(samples, axis=1, keepdims=True)


def _worst_ratio_over(sys: SystemModel, X: np.ndarray, t_f: float, gram: GramConvention) -> np.ndarray:
    """E_N* / worst-case E_M for each row of X (vectorized, p = 1)"""
    zn = X @ sys.B_pinv.T
    zc = X @ sys.B_c_pinv.T
    eta = zc @ (sys.B_c_pinv @ sys.B_uc)[:, 0]
    g = quadratic_eigen(sys, gram).lambda_max
    e_n = np.sum(zn * zn, axis=1) / t_f
    exact = np.sum(zc * zc, axis=1) / t_f + t_f * (g + 1.0) + 2.0 * np.abs(eta)
    return e_n / exact


def _catalog_ratio_over(sys: SystemModel, X: np.ndarray, t_f: float, stats) -> np.ndarray:
    """Smallest E_N* / E_M+ over the admissible catalog for each row of X (vectorized, any p)"""
    chosen = [s for _, s, ok in stats if ok] or [s for _, s, _ in stats]
    zn = X @ sys.B_pinv.T
    zc = X @ sys.B_c_pinv.T
    e_n = np.sum(zn * zn, axis=1) / t_f
    ratios = []
    for s in chosen:
        z = zc + t_f * (sys.B_c_pinv @ (sys.B_uc @ s.mean))
        ratios.append(e_n / (np.sum(z * z, axis=1) / t_f + s.l2_energy))
    return np.min(ratios, axis=0)


def choose_initial_state(sys: SystemModel, t_f: float, R: float, policy: DirectionPolicy,
                         gram: GramConvention = "effective", stats=None) -> np.ndarray:
    """
    x0 on the sphere of radius R selected by the direction policy.

    With one lost actuator the grid minimum is taken over the exact worst-case
    ratio; otherwise over the smallest catalog ratio, which needs `stats`.
    """
    if policy.kind is DirectionPolicyKind.FIXED:
        d = np.asarray(policy.direction, dtype=np.float64)
        return R * d / np.linalg.norm(d)
    X = R * direction_grid(sys.n, policy.count, policy.seed)
    if sys.p == 1:
        return X[int(np.argmin(_worst_ratio_over(sys, X, t_f, gram)))]
    if not stats:
        raise DimensionMismatch("choosing x0 with more than one lost actuator needs a non-empty catalog")
    return X[int(np.argmin(_catalog_ratio_over(sys, X, t_f, stats)))]


def _catalog_stats(catalog: Sequence[CatalogEntry]):
    return [(entry.label, signal_stats(entry.signal), admissible(entry.signal)) for entry in catalog]


def sweep_ratios(sys: SystemModel, t_f: float, R_grid: Sequence[float], direction_policy: DirectionPolicy = None,
                 catalog: Optional[Sequence[CatalogEntry]] = None, gram: GramConvention = "effective",
                 threads: int = None, catalog_note: str = None) -> SweepResult:
    """
    Energy ratios across radii, against the resilience lower bound.

    For each R an initial state is chosen by the direction policy, then the
    sweep records E_N*/E_M+ per catalog adversary and E_N* over the
    worst-case bound. With one lost actuator it also records E_N*/worst-case
    E_M and the lower bound, and checks metric_bound <= worst_case_ratio <=
    every admissible adversary ratio. With more, metric_bound and
    worst_case_ratio stay empty and the check is bound_ratio <= every
    admissible adversary ratio.

    Raises:
        NoLostActuators: p = 0
        DimensionMismatch: repeated labels, or p > 1 with an empty catalog and a grid policy
    """
    if sys.p == 0:
        raise NoLostActuators("sweep needs at least one lost actuator")
    single = sys.p == 1
    policy = direction_policy or DirectionPolicy()
    if catalog is None:
        catalog = build_catalog(sys.p, t_f)
    stats = _catalog_stats(catalog)
    labels = [label for label, _, _ in stats]
    if len(set(labels)) != len(labels):
        raise DimensionMismatch("adversary labels must be unique")
    tol = get_tolerance('ordering')
    threads = threads or settings.threads

    def evaluate(R: float):
        x0 = choose_initial_state(sys, t_f, R, policy, gram, stats)
        task = build_task(x0, t_f, R, system=sys)
        e_n = nominal_energy(sys, task.x0, t_f)
        bound_ratio = e_n / worst_case_bound(sys, task, gram).bound
        ratios = {label: e_n / total_energy_at_mean(sys, task.x0, t_f, s.mean, s.l2_energy)
                  for label, s, _ in stats}
        violations = []
        if single:
            bound = resilience_lower_bound(sys, t_f, R, gram).lower_bound
            floor = resilience_ratio(sys, task.x0, t_f, gram)
            if bound > floor + tol:
                violations.append(OrderingViolation(R=R, curve='worst_case_ratio', lower=bound, upper=floor))
        else:
            bound, floor = None, bound_ratio
        for label, _, ok in stats:
            if ok and floor > ratios[label] + tol:
                violations.append(OrderingViolation(R=R, curve=label, lower=floor, upper=ratios[label]))
        return x0, e_n, bound, floor if single else None, bound_ratio, ratios, violations

    R_grid = [float(R) for R in R_grid]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, R_grid))
    else:
        rows = [evaluate(R) for R in R_grid]

    violations = [v for row in rows for v in row[6]]
    for v in violations:
        logger.warning(f"ordering violated at R={v.R:g} on {v.curve}: {v.lower:.12g} > {v.upper:.12g}")

    return SweepResult(
        provenance=ProblemEcho(B=sys.B.tolist(), lost_actuators=list(sys.lost_actuators), t_f=t_f),
        gram=gram,
        direction_policy=policy,
        catalog_note=catalog_note or f"{len(catalog)} adversaries",
        R_grid=R_grid,
        x0=[row[0].tolist() for row in rows],
        nominal_energy=[row[1] for row in rows],
        metric_bound=[row[2] for row in rows] if single else None,
        worst_case_ratio=[row[3] for row in rows] if single else None,
        bound_ratio=[row[4] for row in rows],
        curves={label: [row[5][label] for row in rows] for label in labels},
        violations=violations,
    )
