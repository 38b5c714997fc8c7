"""
Minimum-energy regulation for the nominal and the malfunctioning system.

The optimal controls are constants equal to the least-norm mean value that
reaches the origin (the minimum-energy signal with a prescribed mean is that
mean). Nominal:      u*   = -(1/t_f) B^+ x0,                     E_N* = ||B^+ x0||^2 / t_f
Malfunctioning: u_c* = -(1/t_f) B_c^+ (x0 + t_f B_uc mean_uc),  E_M* = ||B_c^+ (...)||^2 / t_f
"""

import itertools
import logging
from typing import Tuple

import numpy as np

from .errors import DimensionMismatch, FamilyTooLarge, InfeasibleHorizon, NoLostActuators
from .matkernel import as_vector
from .models import EnergyReport, ProblemEcho, signal_to_spec
from .settings import get_tolerance, settings
from .signals import ConstantSignal, ControlSignal, admissible, check_dimension, signal_stats
from .sysmodel import RegulationTask, SystemModel

logger = logging.getLogger(__name__)


def echo(sys: SystemModel, task: RegulationTask) -> ProblemEcho:
    return ProblemEcho(
        B=sys.B.tolist(),
        lost_actuators=list(sys.lost_actuators),
        x0=task.x0.tolist(),
        t_f=task.t_f,
        R=task.R or None,
    )


def _check_x0(sys: SystemModel, x0) -> np.ndarray:
    x0 = as_vector(x0, "x0")
    if x0.shape[0] != sys.n:
        raise DimensionMismatch(f"x0 has {x0.shape[0]} entries, system has n = {sys.n}")
    return x0


def _require_lost(sys: SystemModel):
    if sys.p == 0:
        raise NoLostActuators("malfunctioning analysis needs at least one lost actuator")


# ---------------------------------------------------------------------------
# Nominal system
# ---------------------------------------------------------------------------

def nominal_min_tf(sys: SystemModel, x0) -> float:
    """||B^+ x0||_inf: the shortest horizon for which u* is admissible"""
    x0 = _check_x0(sys, x0)
    return float(np.max(np.abs(sys.B_pinv @ x0)))


def nominal_energy(sys: SystemModel, x0, t_f: float) -> float:
    """E_N*(x0, t_f) = ||B^+ x0||_2^2 / t_f"""
    z = sys.B_pinv @ _check_x0(sys, x0)
    return float(z @ z) / t_f


def nominal_control_mean(sys: SystemModel, x0, t_f: float) -> np.ndarray:
    return -(sys.B_pinv @ _check_x0(sys, x0)) / t_f


def nominal_optimal(sys: SystemModel, task: RegulationTask) -> Tuple[ConstantSignal, float]:
    """
    Optimal nominal control and its energy.

    Raises:
        InfeasibleHorizon: t_f < ||B^+ x0||_inf, the optimal constant would leave the unit box
    """
    min_tf = nominal_min_tf(sys, task.x0)
    if task.t_f < min_tf:
        raise InfeasibleHorizon(task.t_f, min_tf)
    u_star = ConstantSignal(value_vector=nominal_control_mean(sys, task.x0, task.t_f), horizon=task.t_f)
    return u_star, nominal_energy(sys, task.x0, task.t_f)


# ---------------------------------------------------------------------------
# Malfunctioning system
# ---------------------------------------------------------------------------

def _offset(sys: SystemModel, x0: np.ndarray, t_f: float, mean_uc) -> np.ndarray:
    mean_uc = np.asarray(mean_uc, dtype=np.float64).reshape(-1)
    if mean_uc.shape[0] != sys.p:
        raise DimensionMismatch(f"uncontrolled mean has {mean_uc.shape[0]} entries, expected p = {sys.p}")
    return x0 + t_f * (sys.B_uc @ mean_uc)


def malfunctioning_control_mean(sys: SystemModel, x0, t_f: float, mean_uc) -> np.ndarray:
    """Least-norm controlled mean -(1/t_f) B_c^+ (x0 + t_f B_uc mean_uc)"""
    x0 = _check_x0(sys, x0)
    return -(sys.B_c_pinv @ _offset(sys, x0, t_f, mean_uc)) / t_f


def malfunctioning_energy(sys: SystemModel, x0, t_f: float, mean_uc) -> float:
    """E_M*(x0, t_f, u_uc), which depends on u_uc only through its mean"""
    x0 = _check_x0(sys, x0)
    z = sys.B_c_pinv @ _offset(sys, x0, t_f, mean_uc)
    return float(z @ z) / t_f


def total_energy_at_mean(sys: SystemModel, x0, t_f: float, mean_uc, l2_uc: float) -> float:
    """E_M+ = E_M* + ||u_uc||_L2^2"""
    return malfunctioning_energy(sys, x0, t_f, mean_uc) + float(l2_uc)


def total_energy(sys: SystemModel, task: RegulationTask, u_uc: ControlSignal) -> float:
    check_dimension(u_uc, sys.p, "u_uc")
    stats = signal_stats(u_uc)
    return total_energy_at_mean(sys, task.x0, task.t_f, stats.mean, stats.l2_energy)


def _vertices(p: int) -> np.ndarray:
    cap = settings.vertex_cap
    if p > cap:
        raise FamilyTooLarge(p, cap)
    return np.array(list(itertools.product((1.0, -1.0), repeat=p)))


def malfunctioning_feasible_margin(sys: SystemModel, task: RegulationTask) -> Tuple[float, np.ndarray]:
    """
    Left-hand side of the vertex feasibility condition and the hypercube vertex attaining it.

    The objective is convex in the uncontrolled mean, so its maximum over the
    box sits on one of the 2^p vertices.
    """
    _require_lost(sys)
    vertices = _vertices(sys.p)
    offsets = task.x0[None, :] + task.t_f * vertices @ sys.B_uc.T
    values = np.max(np.abs(offsets @ sys.B_c_pinv.T), axis=1) / task.t_f
    best = int(np.argmax(values))
    return float(values[best]), vertices[best]


def malfunctioning_feasible(sys: SystemModel, task: RegulationTask) -> bool:
    """True iff the optimal controlled input stays admissible for every admissible u_uc"""
    margin, vertex = malfunctioning_feasible_margin(sys, task)
    feasible = margin <= 1.0 + get_tolerance('feasibility_slack')
    logger.debug(f"vertex feasibility: max vertex value {margin:.6g} at {vertex.tolist()} -> {feasible}")
    return feasible


def regulation_residual(sys: SystemModel, x0, t_f: float, mean_c, mean_uc) -> float:
    """||x0 + t_f (B_c mean_c + B_uc mean_uc)||_2"""
    x0 = _check_x0(sys, x0)
    return float(np.linalg.norm(_offset(sys, x0, t_f, mean_uc) + t_f * (sys.B_c @ mean_c)))


def nominal_report(sys: SystemModel, task: RegulationTask) -> EnergyReport:
    """Nominal part of an EnergyReport; never raises on a short horizon, it flags it"""
    min_tf = nominal_min_tf(sys, task.x0)
    return EnergyReport(
        provenance=echo(sys, task),
        nominal_energy=nominal_energy(sys, task.x0, task.t_f),
        nominal_control=nominal_control_mean(sys, task.x0, task.t_f).tolist(),
        nominal_feasible=task.t_f >= min_tf,
        min_tf=min_tf,
    )


def malfunctioning_optimal(sys: SystemModel, task: RegulationTask, u_uc: ControlSignal,
                           label: str = None) -> EnergyReport:
    """
    Optimal controlled input against a given uncontrolled input.

    An optimal constant outside the unit box is flagged through
    `malfunctioning_control_admissible`, not rejected.

    Raises:
        NoLostActuators: p = 0
        DimensionMismatch: u_uc does not have dimension p
    """
    _require_lost(sys)
    check_dimension(u_uc, sys.p, "u_uc")
    if abs(u_uc.horizon - task.t_f) > 1e-12 * max(1.0, task.t_f):
        raise DimensionMismatch(f"u_uc horizon {u_uc.horizon} differs from t_f {task.t_f}")
    if not admissible(u_uc):
        logger.warning(f"uncontrolled input {label or ''} leaves the unit box; energies are still evaluated")

    stats = signal_stats(u_uc)
    mean_c = malfunctioning_control_mean(sys, task.x0, task.t_f, stats.mean)
    e_m = malfunctioning_energy(sys, task.x0, task.t_f, stats.mean)
    control_ok = bool(np.max(np.abs(mean_c)) <= 1.0 + get_tolerance('feasibility_slack'))
    if not control_ok:
        logger.warning(f"optimal controlled input {label or ''} has ||u_c*||_inf = {np.max(np.abs(mean_c)):.4g} > 1")

    feasible, margin = None, None
    if sys.p <= settings.vertex_cap:
        margin, _ = malfunctioning_feasible_margin(sys, task)
        feasible = margin <= 1.0 + get_tolerance('feasibility_slack')

    report = nominal_report(sys, task)
    return report.model_copy(update={
        'label': label,
        'adversary': signal_to_spec(u_uc),
        'adversary_mean': stats.mean.tolist(),
        'adversary_energy': stats.l2_energy,
        'malfunctioning_energy': e_m,
        'malfunctioning_control': mean_c.tolist(),
        'malfunctioning_control_admissible': control_ok,
        'total_energy': e_m + stats.l2_energy,
        'malfunctioning_feasible': feasible,
        'feasibility_margin': margin,
        'regulation_residual': regulation_residual(sys, task.x0, task.t_f, mean_c, stats.mean),
    })
