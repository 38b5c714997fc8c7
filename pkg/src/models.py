from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Annotated, Dict, List, Literal, Optional, Union
from enum import Enum
import math

import numpy as np

from .settings import DEFAULT_TOLERANCES
from .signals import (
    AdversaryFamily, ConstantSignal, ControlSignal, PiecewiseConstantSignal, SinusoidSignal,
    DEFAULT_BANGBANG_COUNT, DEFAULT_BANGBANG_SWITCHES, DEFAULT_FREQUENCIES, DEFAULT_PHASES, DEFAULT_SEED,
)

GramConvention = Literal["effective", "literal"]


class DirectionPolicyKind(str, Enum):
    MIN_WORST_CASE = "min_worst_case"
    FIXED = "fixed"


# ---------------------------------------------------------------------------
# Signals as config / report values
# ---------------------------------------------------------------------------

class ConstantSpec(BaseModel):
    kind: Literal["constant"] = "constant"
    value: List[float] = Field(min_length=1)

    def to_signal(self, horizon: float) -> ControlSignal:
        return ConstantSignal(value_vector=self.value, horizon=horizon)


class SinusoidSpec(BaseModel):
    kind: Literal["sinusoid"] = "sinusoid"
    amplitude: List[float] = Field(min_length=1)
    omega: Optional[float] = None
    cycles: Optional[float] = None  # frequency as a multiple of 2*pi/t_f
    phase: float = 0.0

    @model_validator(mode='after')
    def _one_frequency(self):
        if (self.omega is None) == (self.cycles is None):
            raise ValueError("give exactly one of 'omega' or 'cycles'")
        return self

    def to_signal(self, horizon: float) -> ControlSignal:
        omega = self.omega if self.omega is not None else self.cycles * 2.0 * math.pi / horizon
        return SinusoidSignal(amplitude=self.amplitude, omega=omega, phase=self.phase, horizon=horizon)


class PiecewiseSpec(BaseModel):
    kind: Literal["piecewise"] = "piecewise"
    breakpoints: List[float] = Field(min_length=2)
    values: List[List[float]] = Field(min_length=1)

    def to_signal(self, horizon: float) -> ControlSignal:
        return PiecewiseConstantSignal(breakpoints=self.breakpoints, values_table=self.values, horizon=horizon)


SignalSpec = Annotated[Union[ConstantSpec, SinusoidSpec, PiecewiseSpec], Field(discriminator="kind")]


def signal_to_spec(signal: ControlSignal) -> Union[ConstantSpec, SinusoidSpec, PiecewiseSpec]:
    """Serializable form of a symbolic signal"""
    if isinstance(signal, ConstantSignal):
        return ConstantSpec(value=signal.value_vector.tolist())
    if isinstance(signal, SinusoidSignal):
        return SinusoidSpec(amplitude=signal.amplitude.tolist(), omega=signal.omega, phase=signal.phase)
    if isinstance(signal, PiecewiseConstantSignal):
        return PiecewiseSpec(breakpoints=signal.breakpoints.tolist(), values=signal.values_table.tolist())
    raise TypeError(f"cannot serialize {type(signal).__name__}")


class NamedSignalSpec(BaseModel):
    label: str
    signal: SignalSpec


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class ProblemEcho(BaseModel):
    """Inputs echoed into every report"""
    B: List[List[float]]
    lost_actuators: List[int]
    x0: Optional[List[float]] = None
    t_f: float
    R: Optional[float] = None


class EnergyReport(BaseModel):
    label: Optional[str] = None
    provenance: ProblemEcho
    nominal_energy: float = Field(ge=0.0)
    nominal_control: List[float]
    nominal_feasible: bool
    min_tf: float = Field(ge=0.0)
    adversary: Optional[SignalSpec] = None
    adversary_mean: Optional[List[float]] = None
    adversary_energy: Optional[float] = None
    malfunctioning_energy: Optional[float] = Field(default=None, ge=0.0)
    malfunctioning_control: Optional[List[float]] = None
    malfunctioning_control_admissible: Optional[bool] = None
    total_energy: Optional[float] = Field(default=None, ge=0.0)
    malfunctioning_feasible: Optional[bool] = None
    feasibility_margin: Optional[float] = None
    regulation_residual: Optional[float] = None


class WorstCaseReport(BaseModel):
    provenance: ProblemEcho
    gram: GramConvention
    bound: float
    term_base: float
    term_T1: float
    term_T2: float
    term_T3: float
    eigenvalues: List[float]
    v_one_norm: float
    cross_term: List[float]  # B_uc^T B_c^+T B_c^+ x0
    exact_p1: Optional[float] = None
    worst_adversary_p1: Optional[List[float]] = None
    degenerate: bool = False

    def worst_adversary_signal(self) -> Optional[ControlSignal]:
        if self.worst_adversary_p1 is None:
            return None
        return ConstantSignal(value_vector=self.worst_adversary_p1, horizon=self.provenance.t_f)


class ResilienceReport(BaseModel):
    provenance: ProblemEcho
    gram: GramConvention
    lower_bound: float = Field(gt=0.0, le=1.0 + 1e-12)
    lam_min_full: float = Field(gt=0.0)
    L: float = Field(gt=0.0)
    cross_norm: float = Field(ge=0.0)
    buc_norm_sq: float = Field(ge=0.0)
    quad_gain: float = Field(ge=0.0)
    large_radius_limit: float  # lam_min_full / L


class DirectionPolicy(BaseModel):
    kind: DirectionPolicyKind = DirectionPolicyKind.MIN_WORST_CASE
    count: int = Field(default=360, ge=1)
    seed: int = 0
    direction: Optional[List[float]] = None

    @model_validator(mode='after')
    def _fixed_needs_direction(self):
        if self.kind is DirectionPolicyKind.FIXED:
            if not self.direction or not any(abs(v) > 0.0 for v in self.direction):
                raise ValueError("fixed direction policy needs a nonzero 'direction'")
        return self


class OrderingViolation(BaseModel):
    R: float
    curve: str
    lower: float
    upper: float


class SweepResult(BaseModel):
    provenance: ProblemEcho
    gram: GramConvention
    direction_policy: DirectionPolicy
    catalog_note: str
    R_grid: List[float]
    x0: List[List[float]]
    nominal_energy: List[float]
    bound_ratio: List[float]
    metric_bound: Optional[List[float]] = None
    worst_case_ratio: Optional[List[float]] = None
    curves: Dict[str, List[float]]
    violations: List[OrderingViolation] = Field(default_factory=list)

    @property
    def ordered(self) -> bool:
        return not self.violations


class AnalysisReport(BaseModel):
    name: str
    energies: List[EnergyReport] = Field(default_factory=list)
    worst_case: Optional[WorstCaseReport] = None
    resilience: Optional[ResilienceReport] = None
    notes: List[str] = Field(default_factory=list)


class CheckResult(BaseModel):
    group: str
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: Optional[str] = None


class OracleSummary(BaseModel):
    name: str
    passed: bool
    total_checks: int
    failed_checks: int
    max_deviation: Dict[str, float]
    seeds: Dict[str, int]
    failures: List[CheckResult] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------

class SystemSpec(BaseModel):
    B: List[List[float]] = Field(min_length=1)
    lost_actuators: List[int] = Field(default_factory=list)

    @field_validator('B')
    @classmethod
    def _rectangular(cls, rows):
        width = len(rows[0])
        if width == 0 or any(len(row) != width for row in rows):
            raise ValueError("B must be a non-empty rectangular list of rows")
        if not all(math.isfinite(v) for row in rows for v in row):
            raise ValueError("B entries must be finite")
        return rows


class RangeSpec(BaseModel):
    start: float = Field(gt=0.0)
    stop: float = Field(gt=0.0)
    count: int = Field(ge=1)
    spacing: Literal["linear", "log"] = "linear"

    def values(self) -> List[float]:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count).tolist()
        return np.linspace(self.start, self.stop, self.count).tolist()


class TaskSpec(BaseModel):
    x0: Optional[List[float]] = None
    t_f: float = Field(gt=0.0)
    R: Optional[float] = Field(default=None, gt=0.0)
    R_grid: Optional[List[float]] = None
    R_range: Optional[RangeSpec] = None

    @field_validator('R_grid')
    @classmethod
    def _positive_grid(cls, grid):
        if grid is not None and (not grid or any(r <= 0.0 for r in grid)):
            raise ValueError("R_grid must be a non-empty list of positive radii")
        return grid

    def radii(self) -> Optional[List[float]]:
        if self.R_grid is not None:
            return list(self.R_grid)
        if self.R_range is not None:
            return self.R_range.values()
        if self.R is not None:
            return [self.R]
        return None


class CatalogSpec(BaseModel):
    families: List[AdversaryFamily] = Field(default_factory=lambda: list(AdversaryFamily))
    frequencies: List[float] = Field(default_factory=lambda: list(DEFAULT_FREQUENCIES))
    phases: List[float] = Field(default_factory=lambda: list(DEFAULT_PHASES))
    bangbang_count: int = Field(default=DEFAULT_BANGBANG_COUNT, ge=0)
    bangbang_switches: int = Field(default=DEFAULT_BANGBANG_SWITCHES, ge=0)
    seed: int = DEFAULT_SEED
    vertex_cap: Optional[int] = Field(default=None, ge=0)

    def params(self) -> dict:
        return {
            'frequencies': self.frequencies,
            'phases': self.phases,
            'count': self.bangbang_count,
            'switches': self.bangbang_switches,
            'seed': self.seed,
            'vertex_cap': self.vertex_cap,
        }


class SearchSpec(BaseModel):
    budget: int = Field(default=500, ge=0)
    pieces: int = Field(default=16, ge=1)
    restart_every: int = Field(default=64, ge=1)
    seed: int = 11


class VerifySpec(BaseModel):
    fixed_mean_instances: int = Field(default=100, ge=0)
    random_systems: int = Field(default=20, ge=0)
    random_n: int = Field(default=3, ge=1, le=4)
    random_inputs: int = Field(default=5, ge=2, le=6)
    adversaries_per_system: int = Field(default=5, ge=1)
    p1_systems: int = Field(default=50, ge=0)
    pieces: List[int] = Field(default_factory=lambda: [1, 4, 16])
    seed: int = 2024


class OutputSpec(BaseModel):
    out_dir: Optional[str] = None
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])


class RunConfig(BaseModel):
    name: str = "run"
    system: SystemSpec
    task: TaskSpec
    gram: GramConvention = "effective"
    adversaries: List[NamedSignalSpec] = Field(default_factory=list)
    catalog: CatalogSpec = Field(default_factory=CatalogSpec)
    directions: DirectionPolicy = Field(default_factory=DirectionPolicy)
    search: SearchSpec = Field(default_factory=SearchSpec)
    verify: VerifySpec = Field(default_factory=VerifySpec)
    output: OutputSpec = Field(default_factory=OutputSpec)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    threads: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode='after')
    def _consistent(self):
        n = len(self.system.B)
        total = len(self.system.B[0])
        p = len(self.system.lost_actuators)
        if self.task.x0 is not None and len(self.task.x0) != n:
            raise ValueError(f"task.x0 has {len(self.task.x0)} entries but B has {n} rows")
        if any(i < 0 or i >= total for i in self.system.lost_actuators):
            raise ValueError(f"system.lost_actuators must index the {total} columns of B")
        for named in self.adversaries:
            spec = named.signal
            width = len(spec.value) if isinstance(spec, ConstantSpec) else (
                len(spec.amplitude) if isinstance(spec, SinusoidSpec) else len(spec.values[0]))
            if width != p:
                raise ValueError(f"adversary '{named.label}' has dimension {width}, expected p = {p}")
        unknown = sorted(set(self.tolerances) - set(DEFAULT_TOLERANCES))
        if unknown:
            raise ValueError(f"unknown tolerance keys: {unknown}")
        if self.directions.kind is DirectionPolicyKind.FIXED and len(self.directions.direction) != n:
            raise ValueError(f"directions.direction must have {n} entries")
        return self
