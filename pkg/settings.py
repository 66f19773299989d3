import logging
import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import asdict, dataclass, fields, replace

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

_TOLERANCE_FIELDS = (
    "default_p",
    "default_a_max",
    "default_depth",
    "r_hi",
    "sigma_margin",
    "tau_margin",
    "watson_tol",
    "rel_tol",
    "contraction",
    "extrapolation_tol",
    "slack_tol",
    "bracket_tol",
)


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logger.warning(f"Ignoring non-numeric {name}={raw!r}, using {default}")
        return default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}, using {default}")
        return default


@dataclass(frozen=True)
class Settings:
    """Numerical defaults shared by the library, the CLI and the HTTP app.

    Every value can be overridden from the environment (or a `.env` file);
    per-run overrides come from the run config instead.
    """

    default_p: int
    default_a_max: float
    default_depth: int
    r_hi: float
    sigma_margin: float
    tau_margin: float
    watson_tol: float
    rel_tol: float
    contraction: float
    extrapolation_tol: float
    slack_tol: float
    bracket_tol: float
    gevrey_p_max: int
    loggevrey_p_max: int
    axiom_range: int
    log_level: str
    host: str
    port: int

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            default_p=_env_int("QA_DEFAULT_P", 4096),
            default_a_max=_env_float("QA_DEFAULT_A_MAX", 1000.0),
            default_depth=_env_int("QA_DEFAULT_DEPTH", 8),
            r_hi=_env_float("QA_R_HI", 1e8),
            sigma_margin=_env_float("QA_SIGMA_MARGIN", 0.05),
            tau_margin=_env_float("QA_TAU_MARGIN", 0.15),
            watson_tol=_env_float("QA_WATSON_TOL", 0.02),
            rel_tol=_env_float("QA_REL_TOL", 1e-3),
            contraction=_env_float("QA_CONTRACTION", 0.8),
            extrapolation_tol=_env_float("QA_EXTRAPOLATION_TOL", 0.02),
            slack_tol=_env_float("QA_SLACK_TOL", 1e-12),
            bracket_tol=_env_float("QA_BRACKET_TOL", 1e-4),
            gevrey_p_max=_env_int("QA_GEVREY_P_MAX", 10**9),
            loggevrey_p_max=_env_int("QA_LOGGEVREY_P_MAX", 1 << 22),
            axiom_range=_env_int("QA_AXIOM_RANGE", 4096),
            log_level=os.getenv("QA_LOG_LEVEL", "INFO"),
            host=os.getenv("QA_HOST", "0.0.0.0"),
            port=_env_int("QA_PORT", 8000),
        )

    def with_changes(self, **changes) -> "Settings":
        """A copy with some fields replaced; values are cast to the field's type."""
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise AttributeError(f"Unknown settings: {sorted(unknown)}")
        return replace(self, **{k: type(getattr(self, k))(v) for k, v in changes.items()})

    def as_dict(self) -> dict:
        values = asdict(self)
        return {name: values[name] for name in _TOLERANCE_FIELDS}


_active: ContextVar[Settings] = ContextVar("qa_settings", default=Settings.from_env())


class SettingsProxy:
    """Reads the settings active in the current context.

    Overrides are scoped to a context (a thread or an asyncio task), so concurrent
    runs never see each other's tolerances.
    """

    def __getattr__(self, name: str):
        return getattr(_active.get(), name)

    def current(self) -> Settings:
        return _active.get()

    def as_dict(self) -> dict:
        return _active.get().as_dict()

    @contextmanager
    def overridden(self, **changes):
        """Replace numeric defaults for the duration of one run in this context."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            yield _active.get()
            return
        token = _active.set(_active.get().with_changes(**changes))
        logger.info(f"Settings overridden for this run: {changes}")
        try:
            yield _active.get()
        finally:
            _active.reset(token)


# Global settings instance
settings = SettingsProxy()
