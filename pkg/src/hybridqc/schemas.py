"""Request and record models shared by the CLI, the runner and the HTTP service."""
from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1

Command = Literal["qaoa", "aqa", "vqe", "quasi", "exact", "bench"]
Algorithm = Literal["qaoa", "aqa", "vqe", "quasi"]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    seed: int = 0

    # problem instance: a file (path and/or inlined text) or generator settings
    instance: Optional[str] = None
    instance_text: Optional[str] = None
    routes: Optional[int] = Field(default=None, ge=1)
    flights: Optional[int] = Field(default=None, ge=1)
    instance_seed: Optional[int] = None
    size: Optional[int] = Field(default=None, ge=2)
    open_chain: bool = False

    # QAOA / AQA
    p: int = Field(default=5, ge=1)
    tau: float = Field(default=0.4, gt=0)
    n: Optional[int] = Field(default=None, ge=0)
    schedule: str = "linear"
    init: Optional[str] = None
    angles: Optional[list[float]] = None
    budget: Optional[int] = Field(default=None, ge=1)

    # optimizer
    optimizer: Optional[Literal["simplex", "bfgs"]] = None
    max_evals: Optional[int] = Field(default=None, ge=1)
    ftol: float = Field(default=1e-8, gt=0)
    gtol: float = Field(default=1e-6, gt=0)
    gradient: Literal["finite-difference", "parameter-shift"] = "finite-difference"

    # VQE / quasi-dynamics
    bits: Optional[str] = None
    restarts: int = Field(default=1, ge=1)
    threshold: float = Field(default=1e-4, gt=0)
    max_rounds: int = Field(default=20, ge=1)

    # exact
    tol: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=500, ge=1)

    # bench
    qubits: int = Field(default=10, ge=1)
    local: Optional[int] = Field(default=None, ge=1)
    gates: int = Field(default=100, ge=0)
    two_qubit_fraction: float = Field(default=0.0, ge=0, le=1)

    timing: bool = False

    @model_validator(mode="after")
    def _check_init(self):
        allowed = {
            "qaoa": {None, "aqa", "random", "file"},
            "vqe": {None, "neel", "random", "bits"},
            "quasi": {None, "neel", "bits"},
        }.get(self.command)
        if allowed is not None and self.init not in allowed:
            raise ValueError(f"init {self.init!r} not valid for {self.command}")
        if self.init == "bits" and not self.bits:
            raise ValueError("init 'bits' needs a bitstring")
        if self.init == "file" and not self.angles:
            raise ValueError("init 'file' needs angles")
        return self


class QaoaResult(BaseModel):
    instance: str
    p_or_n: int
    tau: Optional[float]
    final_energy: float
    mean_cost: float
    success_probability: float
    evals: int
    wall_time: Optional[float] = None
    initial_energy: Optional[float] = None
    initial_success_probability: Optional[float] = None
    random_guess: float
    betas: Optional[list[float]] = None
    gammas: Optional[list[float]] = None
    converged: bool = True


class VqeRunResult(BaseModel):
    N: int
    e0: float
    e_var: float
    fidelity: float
    rounds: int
    evals: int
    per_round_energies: list[float]
    converged: bool = True
    wall_time: Optional[float] = None


class ExactResult(BaseModel):
    N: int
    e0: float
    iterations: int
    residual: float
    wall_time: Optional[float] = None


class BenchResult(BaseModel):
    N: int
    M: int
    gates: int
    local_applications: int
    global_applications: int
    amplitudes_exchanged: int
    exchange_rounds: int
    max_abs_error: float
    wall_time: Optional[float] = None


class PartialResult(BaseModel):
    """Best point reached before an optimizer abort."""

    best_value: Optional[float]
    best_params: Optional[list[float]]
    evals: int


class RunRecord(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: Command
    status: Literal["ok", "failed"] = "ok"
    message: str = ""
    config: RunConfig
    result: Optional[Union[QaoaResult, VqeRunResult, ExactResult, BenchResult]] = None
    partial: Optional[PartialResult] = None

    @model_validator(mode="after")
    def _check_version(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {self.schema_version}")
        return self


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    algorithms: list[Algorithm]
    sizes: list[int]
    replicates: int = Field(default=1, ge=1)
    seed: int = 0
    flights_per_route: float = Field(default=1.0, gt=0)
    p: int = Field(default=5, ge=1)
    tau: float = Field(default=0.4, gt=0)
    n: Optional[int] = Field(default=None, ge=0)
    aqa_tau: float = Field(default=0.8, gt=0)
    aqa_n: int = Field(default=5, ge=0)
    budget: int = Field(default=200, ge=1)
    optimizer: Optional[Literal["simplex", "bfgs"]] = None
    threshold: float = Field(default=1e-4, gt=0)
    max_rounds: int = Field(default=20, ge=1)
    jobs: int = Field(default=1, ge=1)
    timing: bool = False


SWEEP_COLUMNS = [
    "N",
    "algorithm",
    "seed",
    "p_or_n",
    "tau",
    "energy",
    "success_probability_or_fidelity",
    "random_guess",
    "ratio",
    "evals",
    "seconds",
    "status",
]
