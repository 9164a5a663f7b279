import math
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from nqa_engine.domain.value_objects import ChainParams

Command = Literal["evolve", "sweep-tau", "correlations", "defects", "scaling"]


class ConfigChain(BaseModel):
    """Configuration model for the physical parameters of the chain."""
    N: int = 1024
    J: float = 0.5
    g: float = 10.0
    delta: float = 0.0
    tau: float = 1000.0

    def to_params(self) -> ChainParams:
        return ChainParams(N=self.N, J=self.J, g=self.g, delta=self.delta, tau=self.tau)


class ConfigTolerances(BaseModel):
    """Per-run overrides of the engine-wide numerical defaults."""
    method: Optional[Literal["RK45", "DOP853"]] = None
    rtol: Optional[float] = Field(default=None, gt=0.0)
    atol: Optional[float] = Field(default=None, gt=0.0)
    tracking_points: Optional[int] = Field(default=None, ge=16)
    determinant_budget: Optional[int] = Field(default=None, ge=1)


class ConfigEvolve(BaseModel):
    initial_state: Literal["ground_branch", "diabatic", "adiabatic"] = "ground_branch"
    report_modes: Optional[List[int]] = None  # mode indices written to the CSV; all when omitted


class ConfigSweepTau(BaseModel):
    sizes: List[int] = Field(default_factory=lambda: [64, 128, 256, 512, 1024])
    target: float = Field(default=0.99, gt=0.0, lt=1.0)
    engine: Literal["weber", "ode"] = "weber"
    tau_rtol: float = Field(default=1e-4, gt=0.0)


class ConfigCorrelations(BaseModel):
    max_p: int = Field(default=100, ge=1)
    deltas: List[float] = Field(default_factory=lambda: [0.0])
    ground_state: bool = False


class ConfigDefects(BaseModel):
    deltas: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0])
    numeric: bool = True


class ConfigScaling(BaseModel):
    sizes: List[int] = Field(default_factory=lambda: [64, 128, 256, 512, 1024])
    deltas: List[float] = Field(default_factory=lambda: [0.0, 0.25])
    target: float = Field(default=0.99, gt=0.0, lt=1.0)


Section = Union[ConfigEvolve, ConfigSweepTau, ConfigCorrelations, ConfigDefects, ConfigScaling]


class ConfigRun(BaseModel):
    """Root model of a run-configuration file; one section per command."""
    chain: ConfigChain = Field(default_factory=ConfigChain)
    sample_count: int = Field(default=512, ge=2)
    output_path: str = "results/run"
    tolerances: ConfigTolerances = Field(default_factory=ConfigTolerances)
    evolve: ConfigEvolve = Field(default_factory=ConfigEvolve)
    sweep_tau: ConfigSweepTau = Field(default_factory=ConfigSweepTau)
    correlations: ConfigCorrelations = Field(default_factory=ConfigCorrelations)
    defects: ConfigDefects = Field(default_factory=ConfigDefects)
    scaling: ConfigScaling = Field(default_factory=ConfigScaling)

    def for_command(self, command: Command) -> "RunConfig":
        return RunConfig(
            command=command,
            params=self.chain.to_params(),
            sample_count=self.sample_count,
            output_path=self.output_path,
            tolerances=self.tolerances,
            section=self.section(command),
        )

    def section(self, command: Command) -> Section:
        return {
            "evolve": self.evolve,
            "sweep-tau": self.sweep_tau,
            "correlations": self.correlations,
            "defects": self.defects,
            "scaling": self.scaling,
        }[command]


class RunConfig(BaseModel):
    """Everything one command needs: chain parameters, sampling, output and its own section."""
    command: Command
    params: ChainParams
    sample_count: int = Field(ge=2)
    output_path: str
    tolerances: ConfigTolerances = Field(default_factory=ConfigTolerances)
    section: Section

    @model_validator(mode="after")
    def _check_section(self) -> "RunConfig":
        for name in ("sizes", "deltas"):
            values = getattr(self.section, name, None)
            if values is not None and not values:
                raise ValueError(f"Command '{self.command}' needs a non-empty '{name}' list")
        for N in getattr(self.section, "sizes", None) or []:
            if N < 4 or N % 2:
                raise ValueError(f"Every size must be an even integer >= 4, got {N}")
        for delta in getattr(self.section, "deltas", None) or []:
            if delta < 0:
                raise ValueError(f"Dissipation rates must be non-negative, got {delta}")
        return self

    def echo(self) -> Dict[str, Any]:
        """Every input that influences the results, as plain JSON-ready data."""
        return {
            "command": self.command,
            "params": self.params.model_dump(),
            "sample_count": self.sample_count,
            "output_path": self.output_path,
            "tolerances": self.tolerances.model_dump(),
            "section": self.section.model_dump(),
        }


class ResultRecord(BaseModel):
    """Outcome of one run: the echoed configuration, scalar summaries, series rows and timing."""
    config: Dict[str, Any]
    summary: Dict[str, Any] = Field(default_factory=dict)
    columns: List[str] = Field(default_factory=list)
    rows: List[Dict[str, Any]] = Field(default_factory=list, exclude=True)
    timing: Dict[str, float] = Field(default_factory=dict)

    @field_validator("summary")
    @classmethod
    def _finite(cls, summary: Dict[str, Any]) -> Dict[str, Any]:
        for key, value in summary.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"Summary field '{key}' is not finite: {value}")
        return summary
