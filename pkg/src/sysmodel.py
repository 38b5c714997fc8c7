"""
Driftless system model x' = B u and its controlled/uncontrolled column split.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Tuple

import numpy as np

from .errors import BadSplit, DimensionMismatch, NotControllable
from .matkernel import as_matrix, as_vector, matrix_rank, pseudoinverse

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Input matrix B (n x (m+p)) with the lost actuators split off into B_uc"""
    B: np.ndarray
    lost_actuators: Tuple[int, ...]
    controlled: Tuple[int, ...]
    B_c: np.ndarray
    B_uc: np.ndarray
    B_pinv: np.ndarray = field(repr=False)
    B_c_pinv: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return len(self.controlled)

    @property
    def p(self) -> int:
        return len(self.lost_actuators)

    def reassemble(self) -> np.ndarray:
        """Put the B_c and B_uc columns back at their original positions"""
        B = np.empty((self.n, self.m + self.p))
        B[:, list(self.controlled)] = self.B_c
        if self.p:
            B[:, list(self.lost_actuators)] = self.B_uc
        return B


@dataclass(frozen=True, eq=False)
class RegulationTask:
    """Drive x0 to the origin at time t_f; R is the radius used by the resilience metric"""
    x0: np.ndarray
    t_f: float
    R: float = 0.0

    def __post_init__(self):
        x0 = as_vector(self.x0, "x0")
        if not np.any(x0 != 0.0):
            raise DimensionMismatch("x0 must be nonzero")
        if not (np.isfinite(self.t_f) and self.t_f > 0.0):
            raise DimensionMismatch(f"t_f must be positive, got {self.t_f}")
        if not (np.isfinite(self.R) and self.R >= 0.0):
            raise DimensionMismatch(f"R must be nonnegative, got {self.R}")
        object.__setattr__(self, 'x0', _frozen(x0))
        object.__setattr__(self, 't_f', float(self.t_f))
        object.__setattr__(self, 'R', float(self.R))


def build_system(B, lost_actuators: Iterable[int] = ()) -> SystemModel:
    """
    Split B into controlled and uncontrolled columns.

    Column order inside each group follows the original order of B.

    Raises:
        BadSplit: indices out of range, repeated, or covering every column
        NotControllable: rank(B) < n
    """
    B = as_matrix(B, "B")
    n, total = B.shape

    lost = [int(i) for i in lost_actuators]
    if len(set(lost)) != len(lost):
        raise BadSplit(f"lost actuator indices repeat: {lost}")
    bad = [i for i in lost if i < 0 or i >= total]
    if bad:
        raise BadSplit(f"lost actuator indices {bad} out of range for {total} columns")
    if len(lost) >= total:
        raise BadSplit("at least one controlled actuator must remain")

    rank = matrix_rank(B)
    if rank < n:
        raise NotControllable(rank, n)

    lost_sorted = tuple(sorted(lost))
    controlled = tuple(i for i in range(total) if i not in lost_sorted)
    B_c = B[:, list(controlled)]
    B_uc = B[:, list(lost_sorted)] if lost_sorted else np.zeros((n, 0))

    logger.debug(f"Built system n={n}, m={len(controlled)}, p={len(lost_sorted)}, rank(B_c)={matrix_rank(B_c)}")

    return SystemModel(
        B=_frozen(B),
        lost_actuators=lost_sorted,
        controlled=controlled,
        B_c=_frozen(B_c),
        B_uc=_frozen(B_uc),
        B_pinv=_frozen(pseudoinverse(B)),
        B_c_pinv=_frozen(pseudoinverse(B_c)),
    )


def build_task(x0, t_f: float, R: float = 0.0, system: SystemModel = None) -> RegulationTask:
    """Create a RegulationTask, checking x0 against the system dimension when given"""
    task = RegulationTask(x0=x0, t_f=t_f, R=R)
    if system is not None and task.x0.shape[0] != system.n:
        raise DimensionMismatch(f"x0 has {task.x0.shape[0]} entries, system has n = {system.n}")
    return task
