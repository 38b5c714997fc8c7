"""
Exception types raised by the energetic-resilience toolkit.

Every error derives from ResilienceError, itself a ValueError, so callers that
only care about "bad input" can catch ValueError.
"""

from typing import Optional


class ResilienceError(ValueError):
    """Base class for all toolkit errors"""


class NonSymmetric(ResilienceError):
    """Matrix handed to the symmetric eigensolver is not symmetric"""

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        self.tolerance = tolerance
        super().__init__(f"matrix asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.1e}")


class NotControllable(ResilienceError):
    """Input matrix does not have full row rank"""

    def __init__(self, rank: int, n: int):
        self.rank = rank
        self.n = n
        super().__init__(f"rank(B) = {rank} < n = {n}: nominal system is not controllable")


class BadSplit(ResilienceError):
    """Lost-actuator indices do not describe a valid column split"""


class DimensionMismatch(ResilienceError):
    """Vector, matrix or signal dimensions do not agree"""


class InvalidSignal(ResilienceError):
    """Signal definition violates its own invariants"""


class InfeasibleHorizon(ResilienceError):
    """Final time is too short for an admissible regulating control"""

    def __init__(self, t_f: float, min_tf: float):
        self.t_f = t_f
        self.min_tf = min_tf
        super().__init__(f"t_f = {t_f:g} is below the minimal feasible horizon {min_tf:g}")


class FamilyTooLarge(ResilienceError):
    """Vertex enumeration over {-1, +1}^p would exceed the configured cap"""

    def __init__(self, p: int, cap: int):
        self.p = p
        self.cap = cap
        super().__init__(f"2^{p} vertices exceeds the enumeration cap (p <= {cap})")


class NoLostActuators(ResilienceError):
    """Operation needs at least one uncontrolled actuator"""


class WrongP(ResilienceError):
    """Operation is only defined for exactly one uncontrolled actuator"""

    def __init__(self, p: int):
        self.p = p
        super().__init__(f"operation requires p = 1, got p = {p}")


class NoFeasibleHorizon(ResilienceError):
    """Horizon search ran past its cap without meeting the vertex feasibility condition"""

    def __init__(self, cap: float, margin: Optional[float] = None):
        self.cap = cap
        self.margin = margin
        detail = f" (vertex value {margin:.6g} at the cap)" if margin is not None else ""
        super().__init__(f"no feasible t_f found below {cap:g}{detail}")


class ConfigError(ResilienceError):
    """Run configuration could not be read or validated"""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
