import logging
import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from errors import AxiomError, ConfigError, DomainError, QAError, RangeError
from fixtures import load_fixture
from polyasym import (
    GRID_RADII,
    MultiIndex,
    approximant,
    borel,
    coherence_table,
    deriv_sup,
    remainder_sup,
    sector_grid,
)
from report_writer import SCHEMA_VERSION
from run_config import RunConfig
from seqcore import (
    WeightSequence,
    check_gamma1,
    check_log_convexity,
    check_moderate_growth,
    equivalent_quotients,
    factorial_bounds,
    growth_index,
    ostrowski_argmax,
    tilde,
)
from settings import settings
from verdicts import (
    Mode,
    PolysectorOpening,
    check_growth_index_divergence,
    necessary_sqa,
    quasianalytic_verdict,
    s_quasianalytic_verdict,
    sufficient_qa,
    sufficient_sqa,
    watson_verdict,
)

logger = logging.getLogger(__name__)

REMARK_SLACK = 1e-9
APPROXIMANT_SAMPLES = 8
# |z|^alpha stays above this on remainder grids, clear of the rounding in f - App
REMAINDER_FLOOR = 1e-4


class AnalysisService:
    """Runs the sequence, verdict, asymp and report commands and assembles their reports.

    Numerical failures inside a section are recorded in the report rather than
    raised, so one refused criterion does not hide the others; config problems
    are raised as ConfigError.
    """

    def __init__(self):
        logger.info("Analysis service initialized")

    # -- plumbing ---------------------------------------------------------

    def _guarded(self, errors: List[dict], path: str, fn: Callable[[], Any]) -> Any:
        try:
            result = fn()
        except ConfigError:
            raise
        except QAError as e:
            logger.warning(f"{path}: {type(e).__name__}: {e.message}")
            errors.append({"path": path, **e.to_dict()})
            return {"error": e.to_dict()}
        return result.as_dict() if hasattr(result, "as_dict") else result

    def _sequence(self, config: RunConfig) -> WeightSequence:
        spec = config.sequence_dict()
        if spec is None:
            raise ConfigError("This command needs a 'sequence' specification", field="sequence")
        try:
            return WeightSequence.from_spec(spec)
        except (DomainError, RangeError) as e:
            raise ConfigError(e.message, field="sequence") from None

    def _range(self, config: RunConfig, M: WeightSequence) -> int:
        if config.P is not None and config.P > M.p_max:
            raise ConfigError(f"P={config.P} exceeds the sequence's P_max={M.p_max}", field="P")
        P = min(settings.default_p, M.p_max) if config.P is None else config.P
        if P < 2:
            raise ConfigError(f"The checks need P >= 2 but the sequence only reaches P_max={M.p_max}", field="P")
        return P

    def _opening(self, config: RunConfig) -> PolysectorOpening:
        if not config.gamma:
            raise ConfigError("This command needs 'gamma' openings", field="gamma")
        return PolysectorOpening(tuple(config.gamma))

    def _envelope(self, config: RunConfig, command: str) -> Dict[str, Any]:
        return {"schema": SCHEMA_VERSION, "command": command, "config": config.as_report()}

    def _remainder_orders(self, config: RunConfig, n: int) -> List[MultiIndex]:
        """Diagonal (k, ..., k) for each requested order k, by default k = D."""
        orders = config.orders if config.orders is not None else [config.D]
        return [MultiIndex((k,) * n) for k in orders]

    # -- sections -----------------------------------------------------------

    def _t_table(self, M: WeightSequence, config: RunConfig) -> List[dict]:
        M_tilde = tilde(M)
        rows = []
        for r in np.geomspace(1.0, config.r_hi, config.t_points):
            log_t, p_star = ostrowski_argmax(M, float(r), M.p_max, warn=False)
            log_t_tilde, _ = ostrowski_argmax(M_tilde, float(r), M.p_max, warn=False)
            rows.append({"r": float(r), "log_T": log_t, "log_T_tilde": log_t_tilde, "argmax_p": p_star})
        return rows

    def sequence_section(self, config: RunConfig, errors: List[dict]) -> Dict[str, Any]:
        M = self._sequence(config)
        P = self._range(config, M)
        log_convexity = check_log_convexity(M, P)
        section: Dict[str, Any] = {
            "sequence": M.describe(),
            "P": P,
            "axioms": {
                "log_convexity": log_convexity.as_dict(),
                "moderate_growth": self._guarded(errors, "axioms.moderate_growth", lambda: check_moderate_growth(M, P)),
                "strong_non_quasianalyticity": self._guarded(
                    errors, "axioms.strong_non_quasianalyticity", lambda: check_gamma1(M, P)
                ),
            },
        }
        estimate = self._guarded(errors, "growth_index", lambda: growth_index(M, P, config.a_max))
        section["growth_index"] = estimate
        if "gamma_hat" in estimate:
            section["factorial_bounds"] = self._guarded(
                errors, "factorial_bounds", lambda: _bounds_dict(factorial_bounds(M, P, 0.95 * estimate["gamma_hat"]))
            )
            section["equivalent_quotients"] = self._guarded(
                errors,
                "equivalent_quotients",
                lambda: {
                    "gamma": 0.95 * estimate["gamma_hat"],
                    **equivalent_quotients(M, P, 0.95 * estimate["gamma_hat"]).as_dict(),
                },
            )
        if log_convexity.holds:
            section["series_route"] = {"available": True}
        else:
            refusal = AxiomError(
                f"Log-convexity fails at index {log_convexity.witness_index}; the series criteria are refused",
                axiom="log_convexity",
            )
            errors.append({"path": "series_route", **refusal.to_dict()})
            section["series_route"] = {"available": False, "error": refusal.to_dict()}
        section["ostrowski"] = self._t_table(M, config)
        return section

    def verdict_section(self, config: RunConfig, errors: List[dict]) -> Dict[str, Any]:
        M = self._sequence(config)
        S = self._opening(config)
        P = self._range(config, M)
        a_max = config.a_max
        section: Dict[str, Any] = {
            "gamma": list(S.gamma),
            "gamma_bar": S.gamma_bar,
            "gamma_under": S.gamma_under,
            "s_qa": self._guarded(errors, "s_qa", lambda: s_quasianalytic_verdict(M, S, P)),
            "qa": self._guarded(errors, "qa", lambda: quasianalytic_verdict(M, S, P)),
            "sufficient_sqa": self._guarded(errors, "sufficient_sqa", lambda: sufficient_sqa(M, S, P)),
            "sufficient_qa": self._guarded(errors, "sufficient_qa", lambda: sufficient_qa(M, S, P)),
        }
        if config.gamma_tilde is not None:
            section["necessary_sqa"] = self._guarded(
                errors, "necessary_sqa", lambda: necessary_sqa(M, S, config.gamma_tilde, P)
            )
        section["watson_s_qa"] = self._guarded(errors, "watson_s_qa", lambda: watson_verdict(M, S, Mode.S_QA, P, a_max))
        section["watson_qa"] = self._guarded(errors, "watson_qa", lambda: watson_verdict(M, S, Mode.QA, P, a_max))
        section["growth_index_divergence"] = self._guarded(
            errors, "growth_index_divergence", lambda: check_growth_index_divergence(M, P, a_max)
        )
        return section

    def _approximant_samples(self, F, f, grid, top: MultiIndex) -> List[dict]:
        stride = max(1, len(grid) // APPROXIMANT_SAMPLES)
        samples = []
        for z in grid[::stride][:APPROXIMANT_SAMPLES]:
            samples.append({
                "moduli": list(z.moduli),
                "args": list(z.args),
                "approximant": approximant(F, top, z),
                "f": f(z),
            })
        return samples

    def _remainder_row(self, F, f, alpha: MultiIndex, config: RunConfig) -> dict:
        r_min = max(GRID_RADII[0], REMAINDER_FLOOR ** (1.0 / max(1, alpha.modulus)))
        sub_grid = sector_grid(F.openings, config.grid_radii, config.grid_args, r_min=r_min)
        p_hat, _ = remainder_sup(f, F, alpha, sub_grid)
        q_hat, _ = deriv_sup(f, alpha, sub_grid)
        bound = q_hat / alpha.factorial
        return {
            "alpha": list(alpha),
            "r_min": r_min,
            "P_hat": p_hat,
            "Q_hat": q_hat,
            "bound": bound,
            "holds": p_hat <= bound + REMARK_SLACK,
        }

    def asymp_section(self, config: RunConfig, errors: List[dict]) -> Dict[str, Any]:
        if not config.fixture:
            raise ConfigError("The asymp command needs a 'fixture'", field="fixture")
        n = config.n or (len(config.gamma) if config.gamma else 1)
        fixture = load_fixture(config.fixture, n, config.D, config.gamma)
        F, f = fixture.family, fixture.function
        grid = sector_grid(F.openings, config.grid_radii, config.grid_args)
        top = MultiIndex((config.D,) * n)
        orders = self._remainder_orders(config, n)

        # App_alpha reads the J = N entries up to order sum(alpha_j - 1)
        needed = max(sum(max(k - 1, 0) for k in alpha) for alpha in [top, *orders])
        if needed > config.D:
            F_app = load_fixture(config.fixture, n, needed, config.gamma).family
        else:
            F_app = F

        approximants = self._guarded(
            errors, "approximants", lambda: self._approximant_samples(F_app, f, grid, top)
        )
        coherence = self._guarded(errors, "coherence", lambda: coherence_table(F))
        remainder = [
            self._guarded(errors, f"remainder.{i}", lambda alpha=alpha: self._remainder_row(F_app, f, alpha, config))
            for i, alpha in enumerate(orders)
        ]

        return {
            "fixture": fixture.name,
            "n": n,
            "D": config.D,
            "approximant_depth": F_app.depth,
            "openings": list(F.openings),
            "grid_size": len(grid),
            "approximants": approximants,
            "coherence": coherence,
            "borel": [{"alpha": list(alpha), "value": value} for alpha, value in borel(F).items()],
            "remainder": remainder,
        }

    # -- commands -------------------------------------------------------------

    def run(self, config: RunConfig, command: Optional[str] = None) -> Dict[str, Any]:
        command = command or config.command
        if command is None:
            raise ConfigError("No command given", field="command")
        if config.command is not None and config.command != command:
            raise ConfigError(f"Config is for {config.command!r}, not {command!r}", field="command")

        logger.info(f"Running {command}")
        report = self._envelope(config, command)
        errors: List[dict] = []
        with settings.overridden(**config.tolerances.model_dump(exclude_none=True)):
            if command == "sequence":
                report["result"] = self.sequence_section(config, errors)
            elif command == "verdict":
                report["result"] = self.verdict_section(config, errors)
            elif command == "asymp":
                report["result"] = self.asymp_section(config, errors)
            elif command == "report":
                result: Dict[str, Any] = {"sequence": self.sequence_section(config, errors)}
                if config.gamma:
                    result["verdict"] = self.verdict_section(config, errors)
                if config.fixture:
                    result["asymp"] = self.asymp_section(config, errors)
                report["result"] = result
            else:
                raise ConfigError(f"Unknown command {command!r}", field="command")
        report["errors"] = errors
        return report


def _bounds_dict(bounds) -> Dict[str, float]:
    return {
        "gamma": bounds.gamma,
        "log_a1": bounds.log_a1,
        "log_a2": bounds.log_a2,
        "delta": bounds.delta,
        "a1": math.exp(bounds.log_a1),
    }


# Global service instance
analysis_service = AnalysisService()
