"""Problem config schema read by the command line runner."""

from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from invariant_kit.config import Settings
from invariant_kit.models.verdicts import DeclaredProperties


class BoxDomain(BaseModel):
    """Axis-aligned box with a uniform grid per axis."""

    lo: list[float]
    hi: list[float]
    grid: list[int]

    @model_validator(mode="after")
    def check_box(self) -> "BoxDomain":
        if not (len(self.lo) == len(self.hi) == len(self.grid)) or not self.lo:
            raise ValueError("lo, hi and grid must have the same nonzero length")
        for axis, (lo, hi, count) in enumerate(zip(self.lo, self.hi, self.grid)):
            if not lo < hi:
                raise ValueError(f"axis {axis}: lo must be below hi")
            if count < 2:
                raise ValueError(f"axis {axis}: grid count must be at least 2")
        return self

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def pitch(self) -> list[float]:
        return [(hi - lo) / (count - 1) for lo, hi, count in zip(self.lo, self.hi, self.grid)]

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, count) for lo, hi, count in zip(self.lo, self.hi, self.grid)]

    def points(self) -> np.ndarray:
        """All grid points, shape (N, n), in row-major grid-index order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([axis.ravel() for axis in mesh])

    def contains(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lo) - slack) and np.all(x <= np.asarray(self.hi) + slack))

    def refined(self) -> "BoxDomain":
        """Same box with every grid interval halved (contains the original grid)."""
        return BoxDomain(lo=self.lo, hi=self.hi, grid=[2 * count - 1 for count in self.grid])


class TimeDomain(BaseModel):
    """Time interval [0, T] with a uniform sample count."""

    T: float = Field(gt=0)
    grid: int = Field(default=41, ge=2)

    def samples(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.grid)


class Expressions(BaseModel):
    """Expression sources; g and A are row-major matrices."""

    f: list[str]
    h: str
    mu: str
    g: Optional[list[list[str]]] = None
    A: Optional[list[list[str]]] = None
    b: Optional[list[str]] = None
    k_nom: Optional[list[str]] = None


class Tolerances(BaseModel):
    """Per-run overrides of the defaults in Settings."""

    model_config = ConfigDict(extra="forbid")

    zero_threshold: Optional[float] = None
    eps0: Optional[float] = None
    n_refine: Optional[int] = None
    comparison_step: Optional[float] = None
    escape_floor: Optional[float] = None
    sample_count: Optional[int] = None
    sweep_levels: Optional[int] = None
    eta_sequence_len: Optional[int] = None
    simpson_tol: Optional[float] = None
    certify_tol: Optional[float] = None
    boundary_band: Optional[float] = None
    regularity_threshold: Optional[float] = None
    dominance_tol: Optional[float] = None
    invariance_tol: Optional[float] = None
    primal_tol: Optional[float] = None
    dual_tol: Optional[float] = None
    interior_slack: Optional[float] = None

    def resolve(self, base: Settings) -> Settings:
        overrides = {key: value for key, value in self.model_dump().items() if value is not None}
        return base.model_copy(update=overrides)


class ClassifyJob(BaseModel):
    job: Literal["classify"]
    probe_width: float = Field(default=1.0, gt=0)


class CertifyJob(BaseModel):
    job: Literal["certify"]


class NagumoJob(BaseModel):
    job: Literal["nagumo"]
    band: Optional[float] = Field(default=None, gt=0)


class DistanceQuotientJob(BaseModel):
    job: Literal["distance_quotient"]
    eps_sequence: list[float] = Field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    band: Optional[float] = Field(default=None, gt=0)


class GammaJob(BaseModel):
    job: Literal["gamma"]
    w_lo: float
    w_hi: float
    w_count: int = Field(default=41, ge=2)
    band: Optional[float] = Field(default=None, gt=0)


class StabilityJob(BaseModel):
    job: Literal["stability"]
    delta: float = Field(default=1.0, gt=0)


class QPScanJob(BaseModel):
    job: Literal["qp_scan"]
    start: list[float]
    stop: list[float]
    count: int = Field(default=300, ge=2)


class SimulateJob(BaseModel):
    job: Literal["simulate"]
    x0: Optional[list[list[float]]] = None
    random: Optional[int] = Field(default=None, ge=1, description="Number of random x0 drawn from S")
    T: float = Field(default=5.0, gt=0)
    dt: float = Field(default=1e-2, gt=0)

    @model_validator(mode="after")
    def check_initial_states(self) -> "SimulateJob":
        if not self.x0 and not self.random:
            raise ValueError("simulate needs x0 or random")
        return self


class CompareJob(BaseModel):
    job: Literal["compare"]
    x0: list[list[float]]
    T: float = Field(default=1.0, gt=0)
    dt: float = Field(default=1e-3, gt=0)


Job = Annotated[
    Union[
        ClassifyJob,
        CertifyJob,
        NagumoJob,
        DistanceQuotientJob,
        GammaJob,
        StabilityJob,
        QPScanJob,
        SimulateJob,
        CompareJob,
    ],
    Field(discriminator="job"),
]


class ProblemConfig(BaseModel):
    """One problem and the ordered jobs to run on it."""

    name: str = ""
    description: str = ""
    kind: Literal["mbf", "tmbf", "mcbf"]
    states: Optional[list[str]] = Field(default=None, description="State names, default x1..xn")
    expressions: Expressions
    mu_properties: DeclaredProperties = Field(default_factory=DeclaredProperties)
    domain: BoxDomain
    time: Optional[TimeDomain] = None
    jobs: list[Job] = Field(min_length=1)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output_dir: Optional[str] = None

    @field_validator("states")
    @classmethod
    def check_states(cls, value: Optional[list[str]]) -> Optional[list[str]]:
        if value is not None and len(set(value)) != len(value):
            raise ValueError("state names must be unique")
        return value

    @model_validator(mode="after")
    def check_expressions(self) -> "ProblemConfig":
        n = self.domain.dimension
        if self.states is not None and len(self.states) != n:
            raise ValueError(f"{len(self.states)} state names for a {n}-dimensional domain")
        if len(self.expressions.f) != n:
            raise ValueError(f"f has {len(self.expressions.f)} components for a {n}-dimensional domain")
        if self.kind == "tmbf" and self.time is None:
            raise ValueError("kind 'tmbf' needs a time block")
        if self.kind == "mcbf":
            if not self.expressions.g or not self.expressions.k_nom:
                raise ValueError("kind 'mcbf' needs g and k_nom")
            m = len(self.expressions.k_nom)
            if len(self.expressions.g) != n or any(len(row) != m for row in self.expressions.g):
                raise ValueError(f"g must be {n}x{m}")
            rows = self.expressions.A or []
            if any(len(row) != m for row in rows) or len(rows) != len(self.expressions.b or []):
                raise ValueError("A must be kxm and b must have k entries")
        control_jobs = {"qp_scan"}
        for job in self.jobs:
            if job.job in control_jobs and self.kind != "mcbf":
                raise ValueError(f"job '{job.job}' needs kind 'mcbf'")
        return self

    @property
    def state_names(self) -> list[str]:
        return self.states or [f"x{i + 1}" for i in range(self.domain.dimension)]
