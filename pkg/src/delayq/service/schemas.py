"""Pydantic request/response models shared by the service and the CLI.

Unknown keys are rejected everywhere so a typo in a config file fails fast
instead of silently running defaults.
"""

from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..model import SystemParams


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsModel(StrictModel):
    arrival_rate: float = Field(gt=0)
    service_rate: float = Field(gt=0)
    sensitivity: float = Field(gt=0)
    n_queues: int = Field(ge=2)
    velocity_weight: float = Field(ge=0)
    delay: float = Field(ge=0)

    def to_params(self) -> SystemParams:
        return SystemParams(self.arrival_rate, self.service_rate,
                            self.sensitivity, self.n_queues,
                            self.velocity_weight, self.delay)


class HistoryModel(StrictModel):
    """Initial history description: a constant vector, or the equilibrium
    shifted by epsilon (antisymmetric or uniform)."""

    kind: Literal["constant", "equilibrium_perturbed"] = "equilibrium_perturbed"
    values: Optional[List[float]] = None          # constant only
    epsilon: float = 0.1                          # equilibrium_perturbed only
    mode: Literal["antisymmetric", "uniform"] = "antisymmetric"

    @model_validator(mode="after")
    def _check_values(self):
        if self.kind == "constant" and not self.values:
            raise ValueError("constant history requires values")
        return self


class SimulateRequest(StrictModel):
    params: ParamsModel
    horizon: Optional[float] = Field(default=None, gt=0)  # default max(200/mu, 60*delay)
    steps_per_delay: int = Field(default=64, ge=8)
    history: HistoryModel = HistoryModel()
    window_fraction: float = Field(default=0.25, gt=0, le=1)
    include_trajectory: bool = False


class SimulateSummary(StrictModel):
    decayed: bool
    converged: bool
    amplitude: float
    period: Optional[float] = None
    frequency: Optional[float] = None
    horizon: float
    equilibrium: float


class TrajectoryModel(StrictModel):
    times: List[float]
    values: List[List[float]]
    derivatives: List[List[float]]


class SimulateResponse(StrictModel):
    summary: SimulateSummary
    trajectory: Optional[TrajectoryModel] = None


class HopfPointModel(StrictModel):
    root_index: int
    omega_cr: float
    delta_cr: float
    crossing_rate: float


class DesignSummaryModel(StrictModel):
    optimal_weight: float
    weight_lower: float
    weight_upper: float
    critical_delay_at_zero: float
    critical_delay_at_optimal: float
    delay_lower: float
    delay_upper: float
    harm_threshold: float


class AnalyzeRequest(StrictModel):
    params: ParamsModel
    max_root_index: int = Field(default=2, ge=0)


class AnalyzeResponse(StrictModel):
    """Fields that a regime leaves undefined are omitted, never null-filled."""

    region: str
    stable_for_all_delays: bool
    never_stable: bool
    weight_limit: float
    equilibrium: float
    omega_cr: Optional[float] = None
    hopf_points: Optional[List[HopfPointModel]] = None
    design: Optional[DesignSummaryModel] = None


class SweepRequest(StrictModel):
    params: ParamsModel
    grid: Dict[str, List[float]]
    simulate: bool = False
    horizon: Optional[float] = Field(default=None, gt=0)
    steps_per_delay: int = Field(default=64, ge=8)
    window_fraction: float = Field(default=0.25, gt=0, le=1)
    epsilon: float = 0.1
    threads: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_grid(self):
        allowed = set(ParamsModel.model_fields)
        for key, values in self.grid.items():
            if key not in allowed:
                raise ValueError(f"unknown grid axis {key!r}")
            if not values:
                raise ValueError(f"grid axis {key!r} is empty")
        if not self.grid:
            raise ValueError("grid must have at least one axis")
        total = 1
        for values in self.grid.values():
            total *= len(values)
        if total > 10_000:
            raise ValueError(f"grid has {total} points; the limit is 10000")
        return self


class SweepRow(StrictModel):
    arrival_rate: float
    service_rate: float
    sensitivity: float
    n_queues: int
    velocity_weight: float
    delay: float
    region: str
    omega_cr: Optional[float] = None
    delta_cr0: Optional[float] = None
    amp_sim: Optional[float] = None
    amp_o1: Optional[float] = None
    amp_o2: Optional[float] = None
    error: str = ""


class SweepResponse(StrictModel):
    columns: List[str]
    rows: List[SweepRow]


class ValidateRequest(StrictModel):
    criteria: Optional[List[int]] = None   # default: all


class CriterionModel(StrictModel):
    cid: int
    name: str
    passed: bool
    elapsed_s: float
    details: Dict[str, object]


class ValidateResponse(StrictModel):
    criteria: List[CriterionModel]
    all_passed: bool
