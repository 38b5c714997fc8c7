"""
Worst-case total energy over admissible uncontrolled inputs and the lower
bound on the energetic resilience metric.

Expanding the malfunctioning energy around the uncontrolled mean gives

    E_M+ <= (1/t_f)||B_c^+ x0||^2 + t_f * mean^T G mean + 2 eta^T mean + ||u_uc||^2

with eta = B_uc^T B_c^+T B_c^+ x0. The quadratic coefficient G is selected by
the `gram` convention:

    effective  G = B_uc^T B_c^+T B_c^+ B_uc   (exact expansion, default)
    literal    G = B_uc^T B_uc                (printed form, for comparison)

The two agree whenever B_c B_c^T acts as the identity on the range of B_uc.
"""

import logging
from typing import Tuple

import numpy as np

from .energy import echo, nominal_energy
from .errors import NoLostActuators, NotControllable, WrongP
from .matkernel import SymmetricEigen, gram_eigen, matrix_rank, norms, spectral_norm
from .models import GramConvention, ProblemEcho, ResilienceReport, WorstCaseReport
from .settings import get_tolerance
from .sysmodel import RegulationTask, SystemModel, build_task

logger = logging.getLogger(__name__)

GRAM_CONVENTIONS = ("effective", "literal")


def _check_gram(gram: str):
    if gram not in GRAM_CONVENTIONS:
        raise ValueError(f"Unknown gram convention: {gram}. Use 'effective' or 'literal'.")


def quadratic_eigen(sys: SystemModel, gram: GramConvention = "effective") -> SymmetricEigen:
    """Spectral decomposition V diag(lambda) V^T of the quadratic coefficient G"""
    _check_gram(gram)
    if gram == "effective":
        return gram_eigen(sys.B_c_pinv @ sys.B_uc)
    return gram_eigen(sys.B_uc)


def cross_term(sys: SystemModel, x0: np.ndarray) -> np.ndarray:
    """eta = B_uc^T B_c^+T B_c^+ x0"""
    return (sys.B_c_pinv @ sys.B_uc).T @ (sys.B_c_pinv @ x0)


def _is_degenerate(sys: SystemModel, x0: np.ndarray, eta: np.ndarray) -> bool:
    scale = float(np.linalg.norm(sys.B_c_pinv @ x0))
    return bool(np.max(np.abs(eta)) <= get_tolerance('degenerate') * scale)


def _terms(sys: SystemModel, task: RegulationTask, gram: GramConvention) -> dict:
    t_f = task.t_f
    z = sys.B_c_pinv @ task.x0
    eta = cross_term(sys, task.x0)
    eig = quadratic_eigen(sys, gram)
    v_one = norms(eig.eigenvectors).one

    term_base = float(z @ z) / t_f
    term_T1 = t_f * float(np.sum(eig.eigenvalues)) * v_one ** 2
    term_T2 = 2.0 * float(np.sum(np.abs(eta)))
    term_T3 = t_f * sys.p
    return {
        'provenance': echo(sys, task),
        'gram': gram,
        'bound': term_base + term_T1 + term_T2 + term_T3,
        'term_base': term_base,
        'term_T1': term_T1,
        'term_T2': term_T2,
        'term_T3': term_T3,
        'eigenvalues': eig.eigenvalues.tolist(),
        'v_one_norm': v_one,
        'cross_term': eta.tolist(),
        'degenerate': _is_degenerate(sys, task.x0, eta),
    }


def _exact_p1(sys: SystemModel, task: RegulationTask, gram: GramConvention) -> Tuple[float, float, bool]:
    """(exact worst-case total energy, worst constant adversary, degenerate)"""
    t_f = task.t_f
    z = sys.B_c_pinv @ task.x0
    eta = float(cross_term(sys, task.x0)[0])
    g = quadratic_eigen(sys, gram).lambda_max
    degenerate = _is_degenerate(sys, task.x0, np.array([eta]))

    # sign(0) would not maximize the quadratic and T3 terms, so +1 stands in
    sign = 1.0 if degenerate or eta > 0.0 else -1.0
    if degenerate:
        logger.debug(f"degenerate cross term {eta:.3e}; worst adversary defaults to +1")
    exact = float(z @ z) / t_f + t_f * (g + 1.0) + 2.0 * abs(eta)
    return exact, sign, degenerate


def worst_case_bound(sys: SystemModel, task: RegulationTask, gram: GramConvention = "effective") -> WorstCaseReport:
    """
    Upper bound on the worst-case total energy, split into its four terms.

    term_base = (1/t_f)||B_c^+ x0||^2
    term_T1   = t_f * sum(lambda_i) * ||V||_1^2
    term_T2   = 2 ||eta||_1
    term_T3   = t_f * p

    For p = 1 the exact value and the worst adversary are filled in as well.

    Raises:
        NoLostActuators: p = 0
    """
    if sys.p == 0:
        raise NoLostActuators("worst-case bound needs at least one lost actuator")
    fields = _terms(sys, task, gram)
    if sys.p == 1:
        exact, sign, _ = _exact_p1(sys, task, gram)
        fields['exact_p1'] = exact
        fields['worst_adversary_p1'] = [sign]
    report = WorstCaseReport(**fields)
    logger.debug(f"worst-case bound ({gram}) p={sys.p}: {report.bound:.6g}")
    return report


def worst_case_exact_p1(sys: SystemModel, task: RegulationTask, gram: GramConvention = "effective") -> WorstCaseReport:
    """
    Exact worst-case total energy for a single lost actuator.

    exact = (1/t_f)||B_c^+ x0||^2 + t_f (g + 1) + 2|eta|, attained by the
    constant adversary sign(eta) (+1 when eta vanishes).

    Raises:
        WrongP: p != 1
    """
    if sys.p != 1:
        raise WrongP(sys.p)
    fields = _terms(sys, task, gram)
    exact, sign, degenerate = _exact_p1(sys, task, gram)
    fields.update(exact_p1=exact, worst_adversary_p1=[sign], degenerate=degenerate)
    return WorstCaseReport(**fields)


def resilience_ratio(sys: SystemModel, x0, t_f: float, gram: GramConvention = "effective") -> float:
    """E_N*(x0, t_f) / worst-case E_M(x0, t_f) for one initial state (p = 1)"""
    if sys.p != 1:
        raise WrongP(sys.p)
    task = build_task(x0, t_f, system=sys)
    exact, _, _ = _exact_p1(sys, task, gram)
    return nominal_energy(sys, task.x0, t_f) / exact


def resilience_lower_bound(sys: SystemModel, t_f: float, R: float,
                           gram: GramConvention = "effective") -> ResilienceReport:
    """
    Lower bound on the energetic resilience over all ||x0|| >= R.

    bound = R^2 lam_min / (R^2 L + 2 R t_f cross_norm + t_f^2 (g + 1))

    with lam_min = lambda_min(B^+T B^+), L = lambda_max(B_c^+T B_c^+),
    cross_norm = ||B_uc^T B_c^+T B_c^+||_2 and g the quadratic coefficient.

    Raises:
        WrongP: p != 1
        NotControllable: B^+T B^+ is singular
    """
    _check_gram(gram)
    if sys.p != 1:
        raise WrongP(sys.p)
    if not (t_f > 0.0 and R > 0.0):
        raise ValueError(f"t_f and R must be positive, got t_f={t_f}, R={R}")

    lam_min = gram_eigen(sys.B_pinv).lambda_min
    if lam_min <= 0.0:
        raise NotControllable(matrix_rank(sys.B), sys.n)
    L = gram_eigen(sys.B_c_pinv).lambda_max
    cross_norm = spectral_norm((sys.B_c_pinv @ sys.B_uc).T @ sys.B_c_pinv)
    buc_norm_sq = spectral_norm(sys.B_uc) ** 2
    g = quadratic_eigen(sys, gram).lambda_max

    denominator = R * R * L + 2.0 * R * t_f * cross_norm + t_f * t_f * (g + 1.0)
    bound = R * R * lam_min / denominator
    logger.debug(f"resilience bound ({gram}) t_f={t_f:g}, R={R:g}: {bound:.6g}")

    return ResilienceReport(
        provenance=ProblemEcho(B=sys.B.tolist(), lost_actuators=list(sys.lost_actuators), t_f=t_f, R=R),
        gram=gram,
        lower_bound=bound,
        lam_min_full=lam_min,
        L=L,
        cross_norm=cross_norm,
        buc_norm_sq=buc_norm_sq,
        quad_gain=g,
        large_radius_limit=lam_min / L,
    )
