import configparser
import io
import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from qkdhydro.common.exception import ConfigurationError
from qkdhydro.schema.channel import DetectorModel, EnvironmentProfile, FiberLink, NoiseSource
from qkdhydro.schema.finitekey import SecurityParams, SweepSettings
from qkdhydro.schema.postproc import PostprocSettings
from qkdhydro.schema.simulation import SimulationConfig

SOURCE_PREFIX = "source."
_SECTIONS = ("link", "detector", "environment", "simulation", "security", "postproc", "sweep")


class EnvironmentSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    baseline_misalignment_rad: float = Field(default=0.0, ge=0, le=math.pi / 2)
    stabilization_gain: float = Field(default=0.0, ge=0, le=1)
    forced_misalignment_rad: Optional[float] = Field(
        default=None,
        ge=0,
        le=math.pi / 2,
        description="Freezes theta and ignores every vibration source",
    )


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")
    link: FiberLink = Field(default_factory=FiberLink)
    detector: DetectorModel = Field(default_factory=DetectorModel)
    environment: EnvironmentSettings = Field(default_factory=EnvironmentSettings)
    sources: List[NoiseSource] = Field(default_factory=list)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    security: SecurityParams = Field(default_factory=SecurityParams)
    postproc: PostprocSettings = Field(default_factory=PostprocSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)

    @classmethod
    def reference(cls) -> "Scenario":
        return cls(
            sources=[
                NoiseSource(name="turbine", frequency_hz=10.0, amplitude_mm=1.0),
                NoiseSource(name="generator", frequency_hz=60.0, amplitude_mm=1.0),
            ]
        )

    @property
    def profile(self) -> EnvironmentProfile:
        if self.environment.forced_misalignment_rad is not None:
            return EnvironmentProfile(baseline_misalignment_rad=self.environment.forced_misalignment_rad)
        return EnvironmentProfile(
            baseline_misalignment_rad=self.environment.baseline_misalignment_rad,
            sources=self.sources,
        )

    @property
    def stabilization_gain(self) -> float:
        return self.environment.stabilization_gain

    def with_seed(self, seed: Optional[int]) -> "Scenario":
        if seed is None:
            return self
        return self.with_updates(simulation={"seed": seed})

    def with_updates(self, **sections: Dict[str, Any]) -> "Scenario":
        """Copy with some section fields replaced; the result is validated again."""
        data = self.model_dump()
        for name, values in sections.items():
            data[name] = {**data[name], **values}
        return _validate(data)

    # INI form
    @classmethod
    def from_ini(cls, text: str) -> "Scenario":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigurationError(f"Unreadable scenario: {e}") from e
        data: Dict[str, Any] = {}
        sources = []
        for section in parser.sections():
            values = dict(parser[section])
            if section.startswith(SOURCE_PREFIX):
                sources.append({"name": section[len(SOURCE_PREFIX) :], **values})
            elif section in _SECTIONS:
                data[section] = values
            else:
                raise ConfigurationError(f"Unknown scenario section [{section}]", field=section)
        data["sources"] = sources
        return _validate(data)

    @classmethod
    def load(cls, path: str) -> "Scenario":
        with open(path, encoding="utf-8") as f:
            return cls.from_ini(f.read())

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        for section in _SECTIONS:
            values = getattr(self, section).model_dump(mode="json", exclude_none=True)
            parser[section] = {key: str(value) for key, value in values.items()}
            if section == "environment":
                for source in self.sources:
                    values = source.model_dump(mode="json", exclude={"name"})
                    parser[SOURCE_PREFIX + source.name] = {key: str(value) for key, value in values.items()}
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()


def _field_path(loc) -> str:
    parts = list(loc)
    if len(parts) >= 2 and parts[0] == "sources" and isinstance(parts[1], int):
        parts = ["source", str(parts[1])] + parts[2:]
    return ".".join(str(part) for part in parts)


def _validate(data: Dict[str, Any]) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        problems = [f"{_field_path(error['loc'])}: {error['msg']}" for error in e.errors()]
        raise ConfigurationError("; ".join(problems), fields=[_field_path(err["loc"]) for err in e.errors()]) from e
