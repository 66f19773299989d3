"""Series and integral criteria for (s) quasi-analyticity and quasi-analyticity
of Carleman ultraholomorphic classes on polysectors.

Every verdict is three-valued: the criteria are exact dichotomies only
asymptotically, so a finite computation answers Inconclusive rather than guess.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate

from errors import AxiomError, DomainError, QuadratureError, RangeError
from seqcore import (
    GrowthIndexEstimate,
    WeightSequence,
    check_strong_regularity,
    growth_index,
    ostrowski_argmax,
    tilde,
)
from settings import settings

logger = logging.getLogger(__name__)

MIN_SERIES_RANGE = 64
SIGMA_FIT_TOL = 1e-3
QUAD_CHUNKS = 64
QUAD_EPSREL = 1e-7
QUAD_REL_TOL = 1e-6
FIT_POINTS = 64
DRIFT_FACTOR = 4.0
ENVELOPE_LIMIT = 1 << 21

OPEN_PROBLEM_NOTE = (
    "Open problem: the opening is at least the growth index but the divergence "
    "condition on (M_p/M_{p+1})^{1/gamma(M)} fails; no criterion decides this case."
)


class Status(str, Enum):
    DIVERGES = "diverges"
    CONVERGES = "converges"
    INCONCLUSIVE = "inconclusive"


class Route(str, Enum):
    SYMBOLIC = "symbolic"
    NUMERIC_FIT = "numeric_fit"


class Variant(str, Enum):
    KORENBLJUM = "korenbljum"
    MANDELBROJT = "mandelbrojt"


class Mode(str, Enum):
    S_QA = "s_qa"
    QA = "qa"


class Kind(str, Enum):
    QUASI_ANALYTIC = "qa"
    NOT_QUASI_ANALYTIC = "not_qa"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PolysectorOpening:
    """Openings gamma_j of the factor sectors S_{gamma_j} = {|arg z| < gamma_j pi / 2}."""

    gamma: Tuple[float, ...]

    def __post_init__(self):
        gamma = tuple(float(g) for g in self.gamma)
        if not gamma:
            raise DomainError("A polysector needs at least one factor")
        if not all(math.isfinite(g) and g > 0 for g in gamma):
            raise DomainError(f"Openings must be positive, got {list(gamma)}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return len(self.gamma)

    @property
    def gamma_bar(self) -> float:
        return max(self.gamma)

    @property
    def gamma_under(self) -> float:
        return min(self.gamma)


@dataclass(frozen=True)
class DivergenceVerdict:
    status: Status
    route: Route
    variant: Optional[Variant]
    exponent: float
    sigma_hat: Optional[float] = None
    tau_hat: Optional[float] = None
    sigma_se: float = 0.0
    tau_se: float = 0.0
    partial_sums: Tuple[Tuple[int, float], ...] = ()
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        payload = {
            "status": self.status.value,
            "route": self.route.value,
            "variant": self.variant.value if self.variant else None,
            "exponent": self.exponent,
            "sigma_hat": self.sigma_hat,
            "tau_hat": self.tau_hat,
            "sigma_se": self.sigma_se,
            "tau_se": self.tau_se,
            "partial_sums": [[p, s] for p, s in self.partial_sums],
        }
        if self.details:
            payload["details"] = self.details
        return payload


@dataclass(frozen=True)
class QAVerdict:
    kind: Kind
    mode: Mode
    criterion: str
    gamma_bar: float
    gamma_under: float
    evidence: dict = field(default_factory=dict)
    note: Optional[str] = None

    def as_dict(self) -> dict:
        payload = {
            "mode": self.mode.value,
            "kind": self.kind.value,
            "criterion": self.criterion,
            "gamma_bar": self.gamma_bar,
            "gamma_under": self.gamma_under,
            "evidence": self.evidence,
        }
        if self.note:
            payload["note"] = self.note
        return payload


def _default_range(M: WeightSequence, P: Optional[int]) -> int:
    return min(settings.default_p, M.p_max) if P is None else P


def _require_log_convex(M: WeightSequence, P: int) -> None:
    if not M.is_log_convex_upto(P):
        raise AxiomError(
            f"(alpha_0) log-convexity fails for {M.family.name} on [0, {P}]; the series criterion does not apply",
            axiom="log_convexity",
        )


# -- series -----------------------------------------------------------------


def korenbljum_terms(M: WeightSequence, gamma: float, p) -> np.ndarray:
    """log of (M_p / ((p+1) M_{p+1}))^{1/(gamma+1)}; scalar in, scalar out."""
    idx = np.asarray(p, dtype=np.int64)
    values = (M.log_moments(idx) - np.log(idx + 1.0) - M.log_moments(idx + 1)) / (gamma + 1.0)
    return float(values) if values.ndim == 0 else values


def mandelbrojt_terms(M: WeightSequence, gamma: float, p) -> np.ndarray:
    """log of (M_p / M_{p+1})^{1/gamma}."""
    idx = np.asarray(p, dtype=np.int64)
    values = -M.log_quotients(idx + 1) / gamma
    return float(values) if values.ndim == 0 else values


def _log_terms(M: WeightSequence, exponent: float, variant: Variant, p: np.ndarray) -> np.ndarray:
    if variant is Variant.KORENBLJUM:
        return exponent * (M.log_moments(p) - np.log(p + 1.0) - M.log_moments(p + 1))
    return -exponent * M.log_quotients(p + 1)


def _bertrand(sigma: float, tau: float) -> Status:
    """Sum of p^-sigma (log p)^-tau."""
    if math.isclose(sigma, 1.0, abs_tol=1e-9):
        if math.isclose(tau, 1.0, abs_tol=1e-9):
            return Status.DIVERGES
        return Status.CONVERGES if tau > 1.0 else Status.DIVERGES
    return Status.CONVERGES if sigma > 1.0 else Status.DIVERGES


def _symbolic_exponents(M: WeightSequence, exponent: float, variant: Variant) -> Optional[Tuple[float, float]]:
    family = M.family
    if not family.is_builtin:
        return None
    alpha = family.alpha
    beta = family.beta or 0.0
    power = alpha + 1.0 if variant is Variant.KORENBLJUM else alpha
    return exponent * power, exponent * beta


def _partial_sums(log_terms: np.ndarray) -> Tuple[Tuple[int, float], ...]:
    log_sums = np.logaddexp.accumulate(log_terms)
    P = len(log_terms)
    samples = []
    size = MIN_SERIES_RANGE
    while size < P:
        samples.append(size)
        size *= 2
    samples.append(P)
    with np.errstate(over="ignore"):
        return tuple((q, float(np.exp(log_sums[q - 1]))) for q in samples)


def _fit_bertrand(log_terms: np.ndarray, p: np.ndarray) -> Tuple[float, float, float, float]:
    X = np.column_stack([np.ones_like(log_terms), -np.log(p + 1.0), -np.log(np.log(np.e + p + 1.0))])
    coef, _, _, _ = np.linalg.lstsq(X, log_terms, rcond=None)
    dof = max(1, len(log_terms) - 3)
    residual = log_terms - X @ coef
    variance = float(residual @ residual) / dof
    try:
        cov = variance * np.linalg.inv(X.T @ X)
        sigma_se, tau_se = float(np.sqrt(max(cov[1, 1], 0.0))), float(np.sqrt(max(cov[2, 2], 0.0)))
    except np.linalg.LinAlgError:
        sigma_se = tau_se = math.inf
    return float(coef[1]), float(coef[2]), sigma_se, tau_se


def _numeric_status(sigma: float, tau: float, sigma_tol: float = math.inf) -> Status:
    """Bertrand rule with margin bands; tau decides only when sigma is within sigma_tol of 1."""
    sigma_margin, tau_margin = settings.sigma_margin, settings.tau_margin
    if sigma > 1.0 + sigma_margin:
        return Status.CONVERGES
    if sigma < 1.0 - sigma_margin:
        return Status.DIVERGES
    if abs(sigma - 1.0) > sigma_tol:
        return Status.INCONCLUSIVE
    if tau > 1.0 + tau_margin:
        return Status.CONVERGES
    if tau < 1.0 - tau_margin:
        return Status.DIVERGES
    return Status.INCONCLUSIVE


def classify_series(
    M: WeightSequence,
    exponent: float,
    variant: Variant,
    P: Optional[int] = None,
    route: str = "auto",
) -> DivergenceVerdict:
    """Decide whether sum_p a_p diverges, with a_p the Korenbljum or Mandelbrojt term.

    Terms run over p = 0..P-1, which needs log M up to P.
    """
    variant = Variant(variant)
    if not exponent > 0:
        raise DomainError(f"Series exponent must be positive, got {exponent}")
    P = _default_range(M, P)
    _require_log_convex(M, min(P, M.p_max))
    if P < MIN_SERIES_RANGE:
        raise RangeError(f"Series classification needs P >= {MIN_SERIES_RANGE}, got {P}")

    p = np.arange(P)
    log_terms = _log_terms(M, exponent, variant, p)
    partial_sums = _partial_sums(log_terms)

    symbolic = _symbolic_exponents(M, exponent, variant)
    if route == "symbolic" and symbolic is None:
        raise DomainError(f"No closed-form term exponents for {M.family.name} sequences")
    if symbolic is not None and route != "numeric":
        sigma, tau = symbolic
        return DivergenceVerdict(
            status=_bertrand(sigma, tau),
            route=Route.SYMBOLIC,
            variant=variant,
            exponent=exponent,
            sigma_hat=sigma,
            tau_hat=tau,
            partial_sums=partial_sums,
        )

    window = p[max(2, P // 4):]
    sigma, tau, sigma_se, tau_se = _fit_bertrand(log_terms[window], window)
    status = _numeric_status(sigma, tau, SIGMA_FIT_TOL + 3.0 * sigma_se)
    if status is Status.INCONCLUSIVE:
        logger.info(f"{variant.value} series inside the margin band: sigma={sigma:.4f}, tau={tau:.4f}")
    return DivergenceVerdict(
        status=status,
        route=Route.NUMERIC_FIT,
        variant=variant,
        exponent=exponent,
        sigma_hat=sigma,
        tau_hat=tau,
        sigma_se=sigma_se,
        tau_se=tau_se,
        partial_sums=partial_sums,
    )


# -- integral ---------------------------------------------------------------


class _Envelope:
    """u -> (log T(e^u), p*) for one sequence truncated at P.

    Below ENVELOPE_LIMIT indices the lower convex hull of (p, log M_p) is tabulated once,
    so each evaluation is a binary search over its edge slopes; above it every call goes
    through ostrowski_argmax.
    """

    def __init__(self, seq: WeightSequence, P: int, r_hi: float):
        self.seq, self.P = seq, P
        _, p_top = ostrowski_argmax(seq, r_hi, P, warn=False)
        top = min(P, p_top + 1)
        self.vertices: Optional[np.ndarray] = None
        if top > ENVELOPE_LIMIT:
            return
        log_moments = seq.array(top)
        if seq.is_log_convex_upto(top):
            vertices = np.arange(top + 1)
        else:
            vertices = _lower_hull(log_moments)
        self.vertices = vertices
        self.values = log_moments[vertices]
        self.slopes = np.diff(self.values) / np.diff(vertices)

    def __call__(self, u: float) -> Tuple[float, int]:
        if self.vertices is None:
            return ostrowski_argmax(self.seq, math.exp(u), self.P, warn=False)
        j = int(np.searchsorted(self.slopes, u, side="right"))
        p = int(self.vertices[j])
        return p * u - float(self.values[j]), p

    def kinks(self, a: float, b: float) -> List[float]:
        """Kinks of u -> log T(e^u) inside (a, b), or [] when there are too many to list."""
        if self.vertices is None:
            _, p_lo = self(a)
            _, p_hi = self(b)
            if p_hi <= p_lo or p_hi - p_lo > 100:
                return []
            candidates = self.seq.log_quotients(np.arange(p_lo + 1, p_hi + 1))
        else:
            lo, hi = np.searchsorted(self.slopes, [a, b], side="right")
            if hi - lo > 100:
                return []
            candidates = self.slopes[lo:hi]
        return [float(s) for s in candidates if a < s < b]

    def p_star(self, u: np.ndarray) -> np.ndarray:
        """p*(e^u), interpolated between kinks when the hull is tabulated."""
        if self.vertices is None:
            return np.array([self(float(x))[1] for x in u], dtype=float)
        if not len(self.slopes):
            return np.full(len(u), float(self.vertices[0]))
        return np.interp(u, self.slopes, self.vertices[1:], left=float(self.vertices[0]))


def _lower_hull(values: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of the points (p, values[p])."""
    hull: List[int] = []
    for p, y in enumerate(values):
        while len(hull) >= 2:
            p0, p1 = hull[-2], hull[-1]
            if (values[p1] - values[p0]) * (p - p0) >= (y - values[p0]) * (p1 - p0):
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull, dtype=np.int64)


def _local_slope(u: np.ndarray, log_p: np.ndarray) -> float:
    slope, _ = np.polyfit(u, log_p, 1)
    return float(slope)


def _growth_fit(envelope: _Envelope, u_lo: float, u_hi: float) -> dict:
    """Growth exponent 1/s of log T from the slope of log p*(r) against log r.

    d log T / d log r = p*(r), so log T(r) ~ c r^a (log r)^-b gives
    d log p* / d log r = a - b / log r. The slopes on the two halves of the
    window give a, b and the drift of the local exponent.
    """
    start = max(u_lo, u_hi / 2.0, 1.0)
    u = np.linspace(start, u_hi, FIT_POINTS)
    p_star = envelope.p_star(u)
    keep = p_star > 1
    if keep.sum() < 8:
        raise RangeError(
            f"p*(r) stays below 2 on [{math.exp(start):.3g}, {math.exp(u_hi):.3g}]; widen the radius range"
        )
    u, log_p = u[keep], np.log(p_star[keep])
    half = len(u) // 2
    lower, upper = _local_slope(u[:half], log_p[:half]), _local_slope(u[half:], log_p[half:])
    u_lower, u_upper = float(np.mean(u[:half])), float(np.mean(u[half:]))
    log_power = (upper - lower) / (1.0 / u_lower - 1.0 / u_upper)
    return {
        "growth_exponent": upper,
        "growth_exponent_lower": lower,
        "log_power": log_power,
        "limit_exponent": upper + log_power / u_upper,
        "fit_points": int(keep.sum()),
    }


def log_integral(
    M: WeightSequence,
    exponent_den: float,
    tilde_flag: bool,
    r_lo: float = 1.0,
    r_hi: Optional[float] = None,
    P: Optional[int] = None,
) -> Tuple[float, DivergenceVerdict]:
    """Integral of log T(r) r^{-1-1/exponent_den} over [r_lo, r_hi], and whether it diverges at infinity.

    T is the Ostrowski function of M, or of (p! M_p) when tilde_flag is set.
    With log T(r) ~ c r^{1/s} (log r)^-b the integral diverges iff
    1/s > 1/exponent_den, or 1/s = 1/exponent_den and b <= 1. The band around
    1/s = 1/exponent_den widens with the drift of the local exponent; inside it
    log-convex sequences are decided by the matching series.
    """
    r_hi = settings.r_hi if r_hi is None else r_hi
    if not exponent_den > 0:
        raise DomainError(f"exponent_den must be positive, got {exponent_den}")
    if not 0 < r_lo < r_hi:
        raise DomainError(f"Need 0 < r_lo < r_hi, got r_lo={r_lo}, r_hi={r_hi}")
    seq = tilde(M) if tilde_flag else M
    P = seq.p_max if P is None else P
    envelope = _Envelope(seq, P, r_hi)

    def integrand(u: float) -> float:
        value, _ = envelope(u)
        return value * math.exp(-u / exponent_den)

    edges = np.linspace(math.log(r_lo), math.log(r_hi), QUAD_CHUNKS + 1)
    total, abs_error = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        points = envelope.kinks(float(a), float(b))
        value, error = integrate.quad(
            integrand, float(a), float(b), epsrel=QUAD_EPSREL, limit=max(200, 2 * len(points) + 50),
            points=points or None,
        )
        total += value
        abs_error += error
    if abs_error > QUAD_REL_TOL * max(abs(total), 1e-300):
        raise QuadratureError(
            f"Quadrature of log T did not reach relative tolerance {QUAD_REL_TOL}", total, abs_error
        )

    _, p_top = envelope(math.log(r_hi))
    if p_top >= P:
        logger.warning(f"T({r_hi:.3g}) saturated at truncation P={P}; the growth fit underestimates")

    details = _growth_fit(envelope, math.log(r_lo), math.log(r_hi))
    ratio = exponent_den * details["growth_exponent"]
    drift = exponent_den * abs(details["growth_exponent"] - details["growth_exponent_lower"])
    band = settings.sigma_margin + DRIFT_FACTOR * drift
    details.update({"ratio": ratio, "band": band})
    if ratio >= 1.0 + band:
        status = Status.DIVERGES
    elif ratio <= 1.0 - band:
        status = Status.CONVERGES
    elif M.is_log_convex_upto(min(settings.default_p, M.p_max)):
        variant = Variant.KORENBLJUM if tilde_flag else Variant.MANDELBROJT
        series = classify_series(M, 1.0 / exponent_den, variant, min(settings.default_p, M.p_max))
        status = series.status
        details["series_cross_check"] = series.as_dict()
    else:
        # on the boundary the integral behaves like sum u^-b du
        limit_ratio = exponent_den * details["limit_exponent"]
        status = _numeric_status(limit_ratio, details["log_power"])

    verdict = DivergenceVerdict(
        status=status,
        route=Route.NUMERIC_FIT,
        variant=None,
        exponent=1.0 / exponent_den,
        details=details,
    )
    return total, verdict


# -- verdicts ---------------------------------------------------------------


def _kind_from_series(status: Status) -> Kind:
    if status is Status.DIVERGES:
        return Kind.QUASI_ANALYTIC
    if status is Status.CONVERGES:
        return Kind.NOT_QUASI_ANALYTIC
    return Kind.INCONCLUSIVE


def per_factor_verdicts(M: WeightSequence, S: PolysectorOpening, P: Optional[int] = None) -> List[dict]:
    """One-variable verdict on each factor sector, ordered by opening."""
    P = _default_range(M, P)
    verdicts = []
    for gamma in sorted(set(S.gamma)):
        series = classify_series(M, 1.0 / (gamma + 1.0), Variant.KORENBLJUM, P)
        verdicts.append({"gamma": gamma, "kind": _kind_from_series(series.status).value})
    return verdicts


def _korenbljum_verdict(M: WeightSequence, S: PolysectorOpening, P: Optional[int], mode: Mode) -> QAVerdict:
    P = _default_range(M, P)
    _require_log_convex(M, min(P, M.p_max))
    gamma = S.gamma_bar if mode is Mode.S_QA else S.gamma_under
    series = classify_series(M, 1.0 / (gamma + 1.0), Variant.KORENBLJUM, P)
    evidence = series.as_dict()
    evidence["per_factor"] = per_factor_verdicts(M, S, P)
    return QAVerdict(
        kind=_kind_from_series(series.status),
        mode=mode,
        criterion="korenbljum_series_max_opening" if mode is Mode.S_QA else "korenbljum_series_min_opening",
        gamma_bar=S.gamma_bar,
        gamma_under=S.gamma_under,
        evidence=evidence,
    )


def s_quasianalytic_verdict(M: WeightSequence, S: PolysectorOpening, P: Optional[int] = None) -> QAVerdict:
    return _korenbljum_verdict(M, S, P, Mode.S_QA)


def quasianalytic_verdict(M: WeightSequence, S: PolysectorOpening, P: Optional[int] = None) -> QAVerdict:
    return _korenbljum_verdict(M, S, P, Mode.QA)


def _mandelbrojt_sufficient(M: WeightSequence, S: PolysectorOpening, P: Optional[int], mode: Mode) -> QAVerdict:
    P = _default_range(M, P)
    gamma = S.gamma_bar if mode is Mode.S_QA else S.gamma_under
    suffix = "max_opening" if mode is Mode.S_QA else "min_opening"
    if M.is_log_convex_upto(P):
        series = classify_series(M, 1.0 / gamma, Variant.MANDELBROJT, P)
        evidence, status, criterion = series.as_dict(), series.status, f"mandelbrojt_series_{suffix}"
    else:
        logger.info(f"{M.family.name} is not log-convex on [0, {P}]; using the integral form")
        value, verdict = log_integral(M, gamma, tilde_flag=False, P=M.p_max)
        evidence = verdict.as_dict()
        evidence["integral_value"] = value
        status, criterion = verdict.status, f"mandelbrojt_integral_{suffix}"
    return QAVerdict(
        kind=Kind.QUASI_ANALYTIC if status is Status.DIVERGES else Kind.INCONCLUSIVE,
        mode=mode,
        criterion=criterion,
        gamma_bar=S.gamma_bar,
        gamma_under=S.gamma_under,
        evidence=evidence,
    )


def sufficient_sqa(M: WeightSequence, S: PolysectorOpening, P: Optional[int] = None) -> QAVerdict:
    """Divergence of sum (M_p/M_{p+1})^{1/gamma_bar} is enough for (s) quasi-analyticity."""
    return _mandelbrojt_sufficient(M, S, P, Mode.S_QA)


def sufficient_qa(M: WeightSequence, S: PolysectorOpening, P: Optional[int] = None) -> QAVerdict:
    """Divergence of sum (M_p/M_{p+1})^{1/gamma_under} is enough for quasi-analyticity."""
    return _mandelbrojt_sufficient(M, S, P, Mode.QA)


def necessary_sqa(
    M: WeightSequence, S: PolysectorOpening, gamma_tilde: float, P: Optional[int] = None
) -> QAVerdict:
    """Convergence at some wider opening gamma_tilde > gamma_bar rules out (s) quasi-analyticity."""
    P = _default_range(M, P)
    if not gamma_tilde > S.gamma_bar:
        raise DomainError(f"gamma_tilde={gamma_tilde} must exceed gamma_bar={S.gamma_bar}")
    _require_log_convex(M, P)
    series = classify_series(M, 1.0 / gamma_tilde, Variant.MANDELBROJT, P)
    evidence = series.as_dict()
    evidence["gamma_tilde"] = gamma_tilde
    return QAVerdict(
        kind=Kind.NOT_QUASI_ANALYTIC if series.status is Status.CONVERGES else Kind.INCONCLUSIVE,
        mode=Mode.S_QA,
        criterion="mandelbrojt_series_wider_opening",
        gamma_bar=S.gamma_bar,
        gamma_under=S.gamma_under,
        evidence=evidence,
    )


@dataclass(frozen=True)
class GrowthDivergenceCheck:
    holds: Optional[bool]
    gamma: float
    estimate: GrowthIndexEstimate
    series: DivergenceVerdict

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "gamma": self.gamma,
            "growth_index": self.estimate.as_dict(),
            "series": self.series.as_dict(),
        }


def check_growth_index_divergence(
    M: WeightSequence, P: Optional[int] = None, a_max: Optional[float] = None
) -> GrowthDivergenceCheck:
    """Whether sum (M_p/M_{p+1})^{1/gamma(M)} diverges.

    Built-in families use their closed-form index; the estimate is still
    computed and kept as evidence. Strong regularity is not re-checked here.
    """
    P = _default_range(M, P)
    estimate = growth_index(M, P, a_max)
    gamma = M.known_growth_index()
    if gamma is None:
        if estimate.degenerate:
            raise DomainError(
                f"Growth index bracket is degenerate for {M.family.name}", bracket=list(estimate.bracket)
            )
        gamma = estimate.gamma_hat
    series = classify_series(M, 1.0 / gamma, Variant.MANDELBROJT, P)
    holds = {Status.DIVERGES: True, Status.CONVERGES: False}.get(series.status)
    return GrowthDivergenceCheck(holds=holds, gamma=gamma, estimate=estimate, series=series)


def watson_verdict(
    M: WeightSequence,
    S: PolysectorOpening,
    mode: Mode,
    P: Optional[int] = None,
    a_max: Optional[float] = None,
) -> QAVerdict:
    """Compare the opening with the growth index of a strongly regular M."""
    mode = Mode(mode)
    P = _default_range(M, P)
    regularity = check_strong_regularity(M, min(P, settings.axiom_range))
    if not regularity.holds:
        raise AxiomError(
            f"{M.family.name} is not strongly regular on the checked range: {', '.join(regularity.failing())}",
            axiom=",".join(regularity.failing()),
        )

    check = check_growth_index_divergence(M, P, a_max)
    gamma_ref = check.gamma
    g = S.gamma_bar if mode is Mode.S_QA else S.gamma_under
    tol = settings.watson_tol
    suffix = "max_opening" if mode is Mode.S_QA else "min_opening"
    evidence = {"growth_index_divergence": check.as_dict(), "strong_regularity": regularity.as_dict()}
    note = None

    if g <= gamma_ref * (1.0 - tol):
        kind, criterion = Kind.NOT_QUASI_ANALYTIC, f"watson_{suffix}_narrow"
    elif g >= gamma_ref * (1.0 + tol):
        criterion = f"watson_{suffix}_wide"
        if check.holds:
            kind = Kind.QUASI_ANALYTIC
        else:
            kind = Kind.INCONCLUSIVE
            note = OPEN_PROBLEM_NOTE
    else:
        kind, criterion = Kind.INCONCLUSIVE, f"watson_{suffix}_boundary"
        note = f"Opening {g:.6g} within {tol:.0%} of the growth index {gamma_ref:.6g}"

    logger.info(f"Watson verdict ({mode.value}) for {M.family.name}, g={g:.6g}: {kind.value}")
    return QAVerdict(
        kind=kind,
        mode=mode,
        criterion=criterion,
        gamma_bar=S.gamma_bar,
        gamma_under=S.gamma_under,
        evidence=evidence,
        note=note,
    )
