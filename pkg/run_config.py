import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import ConfigError
from settings import settings

logger = logging.getLogger(__name__)

PositiveFloat = Annotated[float, Field(gt=0)]


class GevreySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["gevrey"]
    alpha: float = Field(ge=0)
    P_max: Optional[int] = Field(default=None, ge=1)


class LogGevreySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["loggevrey"]
    alpha: float = Field(gt=0)
    beta: float = Field(default=0.0, ge=0)
    P_max: Optional[int] = Field(default=None, ge=1)


class CustomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["custom"]
    logM: List[float] = Field(min_length=2)
    P_max: Optional[int] = Field(default=None, ge=1)


SequenceSpec = Annotated[Union[GevreySpec, LogGevreySpec, CustomSpec], Field(discriminator="family")]


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sigma_margin: Optional[float] = Field(default=None, gt=0)
    tau_margin: Optional[float] = Field(default=None, gt=0)
    watson_tol: Optional[float] = Field(default=None, gt=0, lt=1)
    rel_tol: Optional[float] = Field(default=None, gt=0)
    bracket_tol: Optional[float] = Field(default=None, gt=0)


class RunConfig(BaseModel):
    """A validated run: which command, on what, with which overrides."""

    model_config = ConfigDict(extra="forbid")

    command: Optional[Literal["sequence", "verdict", "asymp", "report"]] = None
    sequence: Optional[SequenceSpec] = None
    gamma: Optional[List[PositiveFloat]] = Field(default=None, min_length=1)
    gamma_tilde: Optional[PositiveFloat] = None
    P: Optional[int] = Field(default=None, ge=2)
    D: int = Field(default_factory=lambda: settings.default_depth, ge=0)
    a_max: float = Field(default_factory=lambda: settings.default_a_max, ge=1)
    r_hi: float = Field(default_factory=lambda: settings.r_hi, gt=1)
    t_points: int = Field(default=17, ge=2)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    fixture: Optional[str] = None
    n: Optional[int] = Field(default=None, ge=1)
    orders: Optional[List[Annotated[int, Field(ge=0)]]] = None
    grid_radii: int = Field(default=16, ge=2)
    grid_args: int = Field(default=3, ge=1)
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    def sequence_dict(self) -> Optional[Dict[str, Any]]:
        return None if self.sequence is None else self.sequence.model_dump(exclude_none=True)

    def as_report(self) -> Dict[str, Any]:
        """Effective configuration with every default filled in."""
        payload = self.model_dump(exclude={"output"})
        payload["tolerances"] = {**settings.as_dict(), **self.tolerances.model_dump(exclude_none=True)}
        return payload


def _field_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def build_run_config(raw: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    merged = dict(raw)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        errors = e.errors(include_url=False)
        first = errors[0]
        path = _field_path(first["loc"]) or "config"
        logger.error(f"Invalid run config at {path}: {first['msg']}")
        raise ConfigError(
            f"{path}: {first['msg']}",
            field=path,
            errors=[{"field": _field_path(err["loc"]), "message": err["msg"]} for err in errors],
        ) from None


def load_run_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    raw: Dict[str, Any] = {}
    if path:
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}", field="config") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file is not valid JSON: {e}", field="config") from None
        if not isinstance(raw, dict):
            raise ConfigError("Config file must hold a JSON object", field="config")
    return build_run_config(raw, overrides)
