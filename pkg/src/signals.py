"""
Symbolic control signals on [0, t_f].

Signals are kept symbolic (constant, sinusoid, piecewise-constant) so that their
mean and L2 energy come out in closed form; adaptive quadrature is only a
fallback and a cross-check. Also builds the seeded adversary catalogs used to
stress the worst-case total energy.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Sequence, Union

import numpy as np
from scipy.integrate import quad

from .errors import DimensionMismatch, FamilyTooLarge, InvalidSignal
from .settings import get_tolerance, settings

logger = logging.getLogger(__name__)

DEFAULT_FREQUENCIES = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)  # multiples of 2*pi/t_f
DEFAULT_PHASES = (0.0,)
DEFAULT_BANGBANG_COUNT = 8
DEFAULT_BANGBANG_SWITCHES = 5
DEFAULT_SEED = 7


class AdversaryFamily(str, Enum):
    CONSTANT = "constant"
    SINUSOID = "sinusoid"
    BANGBANG = "bangbang"


def _readonly(array) -> np.ndarray:
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


def _check_horizon(horizon: float):
    if not (np.isfinite(horizon) and horizon > 0.0):
        raise InvalidSignal(f"horizon must be positive, got {horizon}")


class ControlSignal:
    """Common interface of the symbolic signal kinds"""
    horizon: float

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def value(self, t: float) -> np.ndarray:
        """u(t)"""
        raise NotImplementedError

    def cumulative(self, t: float) -> np.ndarray:
        """Integral of u over [0, t], exact"""
        raise NotImplementedError

    def values(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self.value(t) for t in times]).reshape(len(times), self.dimension)

    def cumulatives(self, times: Sequence[float]) -> np.ndarray:
        return np.array([self.cumulative(t) for t in times]).reshape(len(times), self.dimension)


@dataclass(frozen=True, eq=False)
class ConstantSignal(ControlSignal):
    value_vector: np.ndarray
    horizon: float

    def __post_init__(self):
        _check_horizon(self.horizon)
        v = np.array(self.value_vector, dtype=np.float64).reshape(-1)
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise InvalidSignal("constant value must be a non-empty finite vector")
        object.__setattr__(self, 'value_vector', _readonly(v))
        object.__setattr__(self, 'horizon', float(self.horizon))

    @property
    def dimension(self) -> int:
        return self.value_vector.shape[0]

    def value(self, t: float) -> np.ndarray:
        return self.value_vector.copy()

    def cumulative(self, t: float) -> np.ndarray:
        return self.value_vector * float(t)


@dataclass(frozen=True, eq=False)
class SinusoidSignal(ControlSignal):
    """u_i(t) = amplitude_i * sin(omega * t + phase)"""
    amplitude: np.ndarray
    omega: float
    phase: float
    horizon: float

    def __post_init__(self):
        _check_horizon(self.horizon)
        a = np.array(self.amplitude, dtype=np.float64).reshape(-1)
        if a.size == 0 or not np.all(np.isfinite(a)):
            raise InvalidSignal("sinusoid amplitude must be a non-empty finite vector")
        if not (np.isfinite(self.omega) and np.isfinite(self.phase)):
            raise InvalidSignal("sinusoid frequency and phase must be finite")
        object.__setattr__(self, 'amplitude', _readonly(a))
        object.__setattr__(self, 'omega', float(self.omega))
        object.__setattr__(self, 'phase', float(self.phase))
        object.__setattr__(self, 'horizon', float(self.horizon))

    @property
    def dimension(self) -> int:
        return self.amplitude.shape[0]

    def value(self, t: float) -> np.ndarray:
        return self.amplitude * math.sin(self.omega * t + self.phase)

    def cumulative(self, t: float) -> np.ndarray:
        if self.omega == 0.0:
            return self.amplitude * math.sin(self.phase) * float(t)
        return self.amplitude * (math.cos(self.phase) - math.cos(self.omega * t + self.phase)) / self.omega

    def sup_abs_sin(self) -> float:
        """Exact max of |sin(omega t + phase)| over [0, horizon]"""
        lo = self.phase
        hi = self.omega * self.horizon + self.phase
        lo, hi = min(lo, hi), max(lo, hi)
        # first odd multiple of pi/2 at or above lo
        k = math.ceil((lo - math.pi / 2) / math.pi)
        if math.pi / 2 + k * math.pi <= hi:
            return 1.0
        return max(abs(math.sin(lo)), abs(math.sin(hi)))


@dataclass(frozen=True, eq=False)
class PiecewiseConstantSignal(ControlSignal):
    """values[i] on [breakpoints[i], breakpoints[i+1])"""
    breakpoints: np.ndarray
    values_table: np.ndarray
    horizon: float

    def __post_init__(self):
        _check_horizon(self.horizon)
        bp = np.array(self.breakpoints, dtype=np.float64).reshape(-1)
        table = np.array(self.values_table, dtype=np.float64)
        if table.ndim == 1:
            table = table.reshape(-1, 1)
        if bp.size < 2 or not np.all(np.isfinite(bp)):
            raise InvalidSignal("piecewise signal needs at least two finite breakpoints")
        if np.any(np.diff(bp) <= 0.0):
            raise InvalidSignal("breakpoints must be strictly increasing")
        scale = max(1.0, abs(self.horizon))
        if abs(bp[0]) > 1e-12 * scale or abs(bp[-1] - self.horizon) > 1e-12 * scale:
            raise InvalidSignal(f"breakpoints must span [0, {self.horizon}], got [{bp[0]}, {bp[-1]}]")
        if table.shape[0] != bp.size - 1 or not np.all(np.isfinite(table)):
            raise InvalidSignal(f"need {bp.size - 1} finite value rows, got shape {table.shape}")
        bp[0], bp[-1] = 0.0, float(self.horizon)
        object.__setattr__(self, 'breakpoints', _readonly(bp))
        object.__setattr__(self, 'values_table', _readonly(table))
        object.__setattr__(self, 'horizon', float(self.horizon))

    @property
    def dimension(self) -> int:
        return self.values_table.shape[1]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def _piece(self, t: float) -> int:
        index = int(np.searchsorted(self.breakpoints, t, side='right')) - 1
        return min(max(index, 0), self.values_table.shape[0] - 1)

    def value(self, t: float) -> np.ndarray:
        return self.values_table[self._piece(t)].copy()

    def cumulative(self, t: float) -> np.ndarray:
        t = min(max(float(t), 0.0), self.horizon)
        i = self._piece(t)
        full = (self.widths[:i, None] * self.values_table[:i]).sum(axis=0)
        return full + (t - self.breakpoints[i]) * self.values_table[i]


Signal = Union[ConstantSignal, SinusoidSignal, PiecewiseConstantSignal]


@dataclass(frozen=True, eq=False)
class SignalStats:
    """Mean value (1/t_f) * integral of u, and L2 energy integral of ||u||^2"""
    mean: np.ndarray
    l2_energy: float


class CatalogEntry(NamedTuple):
    label: str
    family: AdversaryFamily
    signal: ControlSignal


def constant(value, horizon: float) -> ConstantSignal:
    return ConstantSignal(value_vector=np.atleast_1d(value), horizon=horizon)


def _quadrature_stats(u: ControlSignal) -> SignalStats:
    rtol = get_tolerance('quadrature_rtol')
    tf = u.horizon
    scale = float(np.max(np.abs(u.value(0.0)))) + float(np.max(np.abs(u.value(tf / 3.0)))) + 1.0
    epsabs = 1e-14 * tf * scale
    points = list(u.breakpoints[1:-1]) if isinstance(u, PiecewiseConstantSignal) else None

    mean = np.empty(u.dimension)
    for i in range(u.dimension):
        integral, _ = quad(lambda t: u.value(t)[i], 0.0, tf, epsabs=epsabs, epsrel=rtol / 10, limit=400, points=points)
        mean[i] = integral / tf
    energy, _ = quad(lambda t: float(np.dot(u.value(t), u.value(t))), 0.0, tf,
                     epsabs=epsabs, epsrel=rtol / 10, limit=400, points=points)
    return SignalStats(mean=mean, l2_energy=float(energy))


def signal_stats(u: ControlSignal, method: str = "closed") -> SignalStats:
    """
    Mean and L2 energy of a signal over its horizon.

    Args:
        u: Signal to evaluate
        method: "closed" (exact formulas) or "quadrature" (adaptive quadrature)

    Returns:
        SignalStats with the mean vector and the energy
    """
    if method == "quadrature":
        return _quadrature_stats(u)
    if method != "closed":
        raise ValueError(f"Unknown method: {method}. Use 'closed' or 'quadrature'.")

    tf = u.horizon
    if isinstance(u, ConstantSignal):
        v = u.value_vector
        return SignalStats(mean=v.copy(), l2_energy=float(tf * np.dot(v, v)))

    if isinstance(u, PiecewiseConstantSignal):
        w = u.widths
        table = u.values_table
        mean = (w[:, None] * table).sum(axis=0) / tf
        energy = float(np.sum(w * np.sum(table * table, axis=1)))
        return SignalStats(mean=mean, l2_energy=energy)

    if isinstance(u, SinusoidSignal):
        a, omega, phase = u.amplitude, u.omega, u.phase
        if omega == 0.0:
            v = a * math.sin(phase)
            return SignalStats(mean=v, l2_energy=float(tf * np.dot(v, v)))
        end = omega * tf + phase
        mean = a * (math.cos(phase) - math.cos(end)) / (omega * tf)
        sin_sq = tf / 2.0 - (math.sin(2.0 * end) - math.sin(2.0 * phase)) / (4.0 * omega)
        return SignalStats(mean=mean, l2_energy=float(np.dot(a, a) * sin_sq))

    return _quadrature_stats(u)


def admissible(u: ControlSignal, slack: float = None) -> bool:
    """True iff ||u(t)||_inf <= 1 on the whole horizon (exact per kind)"""
    if slack is None:
        slack = get_tolerance('feasibility_slack')
    if isinstance(u, ConstantSignal):
        peak = float(np.max(np.abs(u.value_vector)))
    elif isinstance(u, PiecewiseConstantSignal):
        peak = float(np.max(np.abs(u.values_table)))
    elif isinstance(u, SinusoidSignal):
        peak = float(np.max(np.abs(u.amplitude))) * u.sup_abs_sin()
    else:
        raise InvalidSignal(f"unsupported signal type {type(u).__name__}")
    return peak <= 1.0 + slack


def check_dimension(u: ControlSignal, dimension: int, name: str = "signal"):
    if u.dimension != dimension:
        raise DimensionMismatch(f"{name} has dimension {u.dimension}, expected {dimension}")


def _sign_label(vertex: Sequence[float]) -> str:
    return "".join('p' if s > 0 else 'm' for s in vertex)


def adversary_catalog_family(name: Union[str, AdversaryFamily], p: int, t_f: float, *,
                             frequencies: Sequence[float] = DEFAULT_FREQUENCIES,
                             phases: Sequence[float] = DEFAULT_PHASES,
                             count: int = DEFAULT_BANGBANG_COUNT,
                             switches: int = DEFAULT_BANGBANG_SWITCHES,
                             seed: int = DEFAULT_SEED,
                             vertex_cap: int = None) -> List[CatalogEntry]:
    """Labelled members of one adversary family"""
    family = AdversaryFamily(name)
    if p < 1:
        raise DimensionMismatch(f"adversary families need p >= 1, got {p}")
    cap = settings.vertex_cap if vertex_cap is None else vertex_cap

    if family is AdversaryFamily.CONSTANT:
        if p > cap:
            raise FamilyTooLarge(p, cap)
        return [
            CatalogEntry(f"const_{_sign_label(vertex)}", family, constant(vertex, t_f))
            for vertex in itertools.product((1.0, -1.0), repeat=p)
        ]

    if family is AdversaryFamily.SINUSOID:
        base = 2.0 * math.pi / t_f
        return [
            CatalogEntry(f"sin_f{mult:g}_ph{phase:g}", family,
                         SinusoidSignal(amplitude=np.ones(p), omega=mult * base, phase=phase, horizon=t_f))
            for mult in frequencies
            for phase in phases
        ]

    rng = np.random.default_rng(seed)
    entries = []
    for i in range(count):
        interior = np.sort(rng.uniform(0.0, t_f, size=switches))
        breakpoints = np.concatenate(([0.0], interior, [t_f]))
        table = rng.choice((-1.0, 1.0), size=(switches + 1, p))
        if np.any(np.diff(breakpoints) <= 0.0):
            # coincident switch draws collapse to fewer pieces
            keep = np.concatenate(([True], np.diff(breakpoints) > 0.0))
            breakpoints = breakpoints[keep]
            table = table[:breakpoints.size - 1]
        entries.append(CatalogEntry(f"bang_{seed}_{i:02d}", family,
                                    PiecewiseConstantSignal(breakpoints=breakpoints, values_table=table, horizon=t_f)))
    return entries


def adversary_family(name: Union[str, AdversaryFamily], p: int, t_f: float, **params) -> List[ControlSignal]:
    """
    Deterministic catalog of uncontrolled inputs.

    constant: all 2^p sign vectors; sinusoid: unit-amplitude sinusoids at the
    configured multiples of 2*pi/t_f; bangbang: seeded random +/-1 signals
    with `switches` switch points.
    """
    return [entry.signal for entry in adversary_catalog_family(name, p, t_f, **params)]


def build_catalog(p: int, t_f: float, families: Sequence[Union[str, AdversaryFamily]] = tuple(AdversaryFamily),
                  **params) -> List[CatalogEntry]:
    """Concatenate several families, in the order given"""
    catalog = []
    for name in families:
        catalog.extend(adversary_catalog_family(name, p, t_f, **params))
    logger.debug(f"Adversary catalog p={p}, t_f={t_f}: {len(catalog)} signals")
    return catalog
