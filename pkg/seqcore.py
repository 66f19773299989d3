"""Carleman weight sequences in the logarithmic domain.

A `WeightSequence` never materialises M_p itself: p!^alpha overflows double
precision around p = 170, so every value is stored or computed as log M_p.
Built-in families (Gevrey, log-Gevrey) are evaluated lazily from closed forms,
custom sequences are held as an array.
"""

import functools
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from errors import AxiomError, DomainError, RangeError
from settings import settings

logger = logging.getLogger(__name__)

LogEvaluator = Callable[[np.ndarray], np.ndarray]

# slack on the (P_gamma) feasibility test; absorbs cumulative-sum rounding
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class FamilyTag:
    name: str
    alpha: Optional[float] = None
    beta: Optional[float] = None

    @property
    def is_builtin(self) -> bool:
        return self.name in ("gevrey", "loggevrey")

    def as_dict(self) -> dict:
        payload = {"family": self.name}
        if self.alpha is not None:
            payload["alpha"] = self.alpha
        if self.beta is not None:
            payload["beta"] = self.beta
        return payload


class _LogLogCumulative:
    """Prefix sums S_p = sum_{k=0}^{p} log log(e + k), grown on demand.

    All terms are nonnegative and increasing, so direct accumulation is stable.
    The backing array is only ever replaced, never mutated in place, which keeps
    concurrent readers safe; growth itself is serialized.
    """

    def __init__(self, initial: int = 1024):
        self._lock = threading.Lock()
        self._values = np.zeros(1)
        self._grow(initial)

    def _grow(self, p_top: int) -> np.ndarray:
        with self._lock:
            values = self._values
            n = len(values)
            if p_top >= n:
                new_len = max(p_top + 1, 2 * n)
                k = np.arange(n, new_len, dtype=float)
                tail = values[-1] + np.cumsum(np.log(np.log(np.e + k)))
                values = np.concatenate([values, tail])
                self._values = values
            return values

    def __call__(self, p: np.ndarray) -> np.ndarray:
        values = self._values
        top = int(np.max(p)) if np.size(p) else 0
        if top >= len(values):
            values = self._grow(top)
        return values[p]


_loglog_cumulative = _LogLogCumulative()


class WeightSequence:
    """Immutable weight sequence M with M_0 = 1, addressed through log M_p.

    `log_moments` must accept integer index arrays; `log_quotients` (optional)
    returns log m_p = log M_p - log M_{p-1} for p >= 1 and is used where a
    closed form is more accurate than differencing.
    """

    def __init__(
        self,
        log_moments: LogEvaluator,
        p_max: int,
        family: FamilyTag,
        log_quotients: Optional[LogEvaluator] = None,
        convex_upto: Optional[int] = None,
    ):
        if p_max < 1:
            raise RangeError(f"P_max must be a positive integer, got {p_max}")
        self._log_moments = log_moments
        self._log_quotients = log_quotients
        self.p_max = int(p_max)
        self.family = family
        self._convex_upto = self._scan_convexity() if convex_upto is None else int(convex_upto)
        self._cached = functools.lru_cache(maxsize=4096)(self._scalar_log_moment)

    # -- construction -----------------------------------------------------

    @classmethod
    def gevrey(cls, alpha: float, p_max: Optional[int] = None) -> "WeightSequence":
        if alpha < 0:
            raise DomainError(f"Gevrey order must be nonnegative, got {alpha}")
        alpha = float(alpha)
        return cls(
            log_moments=lambda p: alpha * gammaln(np.asarray(p, dtype=float) + 1.0),
            log_quotients=lambda p: alpha * np.log(np.asarray(p, dtype=float)),
            p_max=p_max or settings.gevrey_p_max,
            family=FamilyTag("gevrey", alpha=alpha),
            convex_upto=p_max or settings.gevrey_p_max,
        )

    @classmethod
    def log_gevrey(cls, alpha: float, beta: float, p_max: Optional[int] = None) -> "WeightSequence":
        if alpha <= 0:
            raise DomainError(f"log-Gevrey alpha must be positive, got {alpha}")
        if beta < 0:
            raise DomainError(f"log-Gevrey beta must be nonnegative, got {beta}")
        alpha, beta = float(alpha), float(beta)
        p_max = p_max or settings.loggevrey_p_max

        def log_moments(p):
            p = np.asarray(p)
            return alpha * gammaln(p + 1.0) + beta * _loglog_cumulative(p.astype(np.int64))

        def log_quotients(p):
            p = np.asarray(p, dtype=float)
            return alpha * np.log(p) + beta * np.log(np.log(np.e + p))

        return cls(
            log_moments=log_moments,
            log_quotients=log_quotients,
            p_max=p_max,
            family=FamilyTag("loggevrey", alpha=alpha, beta=beta),
            convex_upto=p_max,
        )

    @classmethod
    def custom(cls, log_values: Sequence[float], p_max: Optional[int] = None) -> "WeightSequence":
        values = np.asarray(list(log_values), dtype=float)
        if values.ndim != 1 or len(values) < 2:
            raise DomainError("A custom sequence needs at least log M_0 and log M_1")
        if not np.all(np.isfinite(values)):
            raise DomainError("Custom log M values must all be finite")
        if values[0] != 0.0:
            logger.info(f"Rescaling custom sequence by M_0 = exp({values[0]:.6g}) to normalize M_0 = 1")
            values = values - values[0]
        available = len(values) - 1
        if p_max is not None and p_max > available:
            raise RangeError(f"P_max={p_max} exceeds the {available} supplied custom values")
        p_max = available if p_max is None else p_max
        values = values[: p_max + 1]
        values.setflags(write=False)
        return cls(
            log_moments=lambda p: values[np.asarray(p, dtype=np.int64)],
            p_max=p_max,
            family=FamilyTag("custom"),
        )

    @classmethod
    def from_spec(cls, spec: dict) -> "WeightSequence":
        """Build from the plain sequence-spec mapping used by the run config."""
        family = spec.get("family")
        p_max = spec.get("P_max")
        if family == "gevrey":
            return cls.gevrey(spec["alpha"], p_max)
        if family == "loggevrey":
            return cls.log_gevrey(spec["alpha"], spec.get("beta") or 0.0, p_max)
        if family == "custom":
            return cls.custom(spec["logM"], p_max)
        raise DomainError(f"Unknown sequence family {family!r}")

    # -- evaluation -------------------------------------------------------

    def _check_range(self, top: int, bottom: int = 0) -> None:
        if bottom < 0 or top > self.p_max:
            raise RangeError(
                f"Index range [{bottom}, {top}] outside [0, P_max={self.p_max}]",
                p_max=self.p_max,
            )

    def _scalar_log_moment(self, p: int) -> float:
        return float(self._log_moments(np.array([p]))[0])

    def log_moment(self, p: int) -> float:
        self._check_range(p, p)
        return self._cached(int(p))

    def log_moments(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.int64)
        if p.size:
            self._check_range(int(p.max()), int(p.min()))
        return np.asarray(self._log_moments(p), dtype=float)

    def array(self, P: int) -> np.ndarray:
        """log M_0, ..., log M_P."""
        self._check_range(P)
        return self.log_moments(np.arange(P + 1))

    def log_quotients(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.int64)
        if p.size:
            self._check_range(int(p.max()), int(p.min()) - 1)
        if self._log_quotients is not None:
            return np.asarray(self._log_quotients(p), dtype=float)
        return self.log_moments(p) - self.log_moments(p - 1)

    def log_quotient(self, p: int) -> float:
        return float(self.log_quotients(np.array([p]))[0])

    def _scan_convexity(self) -> int:
        logm = np.diff(self.log_moments(np.arange(self.p_max + 1)))
        # 2 logM[n] > logM[n-1] + logM[n+1] + slack  <=>  logm[n] > logm[n+1] + slack
        bad = np.nonzero(logm[:-1] > logm[1:] + settings.slack_tol)[0]
        if bad.size:
            # first violation sits at n = bad[0] + 1, so ranges up to n are convex
            return int(bad[0]) + 1
        return self.p_max

    def is_log_convex_upto(self, P: int) -> bool:
        return P <= self._convex_upto

    def known_growth_index(self) -> Optional[float]:
        """Closed-form growth index for the strongly regular built-in families."""
        if self.family.is_builtin and self.family.alpha:
            return self.family.alpha
        return None

    def describe(self) -> dict:
        payload = self.family.as_dict()
        payload["P_max"] = self.p_max
        return payload

    def __repr__(self) -> str:
        return f"WeightSequence({self.family}, P_max={self.p_max})"


def eval_logM(M: WeightSequence, p: int) -> float:
    return M.log_moment(p)


def tilde(M: WeightSequence) -> WeightSequence:
    """The sequence (p! M_p)."""
    base_moments = M._log_moments
    base_quotients = M._log_quotients
    if M.family.name == "gevrey":
        family = FamilyTag("gevrey", alpha=M.family.alpha + 1.0)
    else:
        family = FamilyTag("custom")

    def log_moments(p):
        return gammaln(np.asarray(p, dtype=float) + 1.0) + base_moments(p)

    log_quotients = None
    if base_quotients is not None:
        def log_quotients(p):
            return np.log(np.asarray(p, dtype=float)) + base_quotients(p)

    return WeightSequence(
        log_moments=log_moments,
        log_quotients=log_quotients,
        p_max=M.p_max,
        family=family,
        convex_upto=M._convex_upto,
    )


# -- axioms ---------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    holds: bool
    witness_index: Optional[int]
    constant_estimate: Optional[float]
    checked_range: int
    stability_flag: bool
    ladder: Tuple[Tuple[int, float], ...] = ()

    def as_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "holds": self.holds,
            "witness_index": self.witness_index,
            "constant_estimate": self.constant_estimate,
            "checked_range": self.checked_range,
            "stability_flag": self.stability_flag,
            "ladder": [[p, c] for p, c in self.ladder],
        }


def _ladder(P: int, cap: int) -> List[int]:
    if 8 * P <= cap:
        return [P, 2 * P, 4 * P, 8 * P]
    top = cap
    return sorted({max(1, top // 8), max(1, top // 4), max(1, top // 2), top})


def _is_stable(values: Sequence[float], rel_tol: float, contraction: float, extrapolation_tol: float) -> bool:
    """A truncated constant counts as stable when its last change under doubling is below
    rel_tol, or when the changes shrink geometrically with ratio at most `contraction` and the
    Aitken tail of the remaining changes is below extrapolation_tol."""
    if len(values) < 2 or not all(math.isfinite(v) for v in values):
        return False
    scale = max(1.0, abs(values[-1]))
    changes = np.diff(np.asarray(values, dtype=float))
    if abs(changes[-1]) <= rel_tol * scale:
        return True
    if len(changes) < 3:
        return False
    tail = changes[-3:]
    if np.any(tail == 0.0) or not (np.all(tail > 0) or np.all(tail < 0)):
        return False
    ratios = tail[1:] / tail[:-1]
    if np.any(ratios > contraction):
        return False
    q = float(ratios[-1])
    return abs(tail[-1]) * q / (1.0 - q) <= extrapolation_tol * scale


def check_log_convexity(M: WeightSequence, P: int) -> AxiomReport:
    if P < 2:
        raise RangeError(f"Log-convexity needs P >= 2, got {P}")
    arr = M.array(P)
    violations = np.nonzero(2.0 * arr[1:-1] > arr[:-2] + arr[2:] + settings.slack_tol)[0]
    witness = int(violations[0]) + 1 if violations.size else None
    if witness is not None:
        logger.info(f"(alpha_0) fails for {M.family.name} at index {witness}")
    return AxiomReport(
        axiom="log_convexity",
        holds=witness is None,
        witness_index=witness,
        constant_estimate=None,
        checked_range=P,
        stability_flag=True,
    )


def _moderate_growth_exponent(M: WeightSequence, P: int) -> Tuple[float, int]:
    """max over 1 <= p + l <= P of (logM[p+l] - logM[p] - logM[l]) / (p+l), with its argmax p+l."""
    arr = M.array(P)
    s = np.arange(1, P + 1)
    if M.is_log_convex_upto(P):
        # logM[p] + logM[s-p] is convex and symmetric in p, minimal at the middle
        half = s // 2
        values = (arr[s] - arr[half] - arr[s - half]) / s
    else:
        values = np.empty(P)
        for i, total in enumerate(s):
            p = np.arange(total + 1)
            values[i] = np.max(arr[total] - arr[p] - arr[total - p]) / total
    idx = int(np.argmax(values))
    return max(0.0, float(values[idx])), int(s[idx])


def check_moderate_growth(M: WeightSequence, P: int) -> AxiomReport:
    if P < 1:
        raise RangeError(f"Moderate growth needs P >= 1, got {P}")
    M._check_range(P)
    exponent, witness = _moderate_growth_exponent(M, P)
    ladder = [(q, _moderate_growth_exponent(M, q)[0]) for q in _ladder(P, M.p_max)]
    stable = _is_stable([c for _, c in ladder], settings.rel_tol, settings.contraction, settings.extrapolation_tol)
    if not stable:
        logger.warning(f"(mu) constant for {M.family.name} did not stabilize: {ladder}")
    return AxiomReport(
        axiom="moderate_growth",
        holds=stable and math.isfinite(exponent),
        witness_index=None if stable else witness,
        constant_estimate=math.exp(exponent),
        checked_range=P,
        stability_flag=stable,
        ladder=tuple((q, math.exp(c)) for q, c in ladder),
    )


def _gamma1_constant(M: WeightSequence, P: int) -> Tuple[float, int]:
    """B-hat on [0, P]; needs log M up to P + 1."""
    logm = np.diff(M.array(P + 1))  # logm[l] = log m_{l+1}
    ell = np.arange(P + 1)
    terms = np.exp(-logm - np.log(ell + 1.0))
    suffix = np.cumsum(terms[::-1])[::-1]
    half = P // 2
    with np.errstate(divide="ignore"):
        log_ratio = np.log(suffix[: half + 1]) + logm[: half + 1]
    idx = int(np.argmax(log_ratio))
    return float(np.exp(log_ratio[idx])), idx


def check_gamma1(M: WeightSequence, P: int) -> AxiomReport:
    cap = M.p_max - 1
    P_eff = min(P, cap)
    if P_eff < 1:
        logger.warning(f"(gamma_1) for {M.family.name}: no doubling range below P_max={M.p_max}")
        constant, _ = _gamma1_constant(M, 0)
        return AxiomReport(
            axiom="strong_non_quasianalyticity",
            holds=False,
            witness_index=0,
            constant_estimate=max(1.0, constant),
            checked_range=min(P, M.p_max),
            stability_flag=False,
        )
    constant, witness = _gamma1_constant(M, P_eff)
    ranges = _ladder(P_eff, cap)
    ladder = [(q, _gamma1_constant(M, q)[0]) for q in ranges]
    stable = len(ranges) >= 2 and _is_stable([c for _, c in ladder], settings.rel_tol, settings.contraction, settings.extrapolation_tol)
    if not stable:
        logger.warning(f"(gamma_1) constant for {M.family.name} did not stabilize: {ladder}")
    return AxiomReport(
        axiom="strong_non_quasianalyticity",
        holds=stable and math.isfinite(constant),
        witness_index=None if stable else witness,
        constant_estimate=max(1.0, constant),
        checked_range=P_eff,
        stability_flag=stable,
        ladder=tuple(ladder),
    )


@dataclass(frozen=True)
class StrongRegularityReport:
    log_convexity: AxiomReport
    moderate_growth: AxiomReport
    gamma1: AxiomReport

    @property
    def holds(self) -> bool:
        return self.log_convexity.holds and self.moderate_growth.holds and self.gamma1.holds

    def failing(self) -> List[str]:
        return [r.axiom for r in (self.log_convexity, self.moderate_growth, self.gamma1) if not r.holds]

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "log_convexity": self.log_convexity.as_dict(),
            "moderate_growth": self.moderate_growth.as_dict(),
            "strong_non_quasianalyticity": self.gamma1.as_dict(),
        }


def check_strong_regularity(M: WeightSequence, P: int) -> StrongRegularityReport:
    P = min(P, M.p_max)
    return StrongRegularityReport(
        log_convexity=check_log_convexity(M, P),
        moderate_growth=check_moderate_growth(M, P),
        gamma1=check_gamma1(M, P),
    )


# -- Ostrowski function -----------------------------------------------------


def _validate_ostrowski(M: WeightSequence, r: float, P: int) -> float:
    if not r > 0:
        raise DomainError(f"T_M(r) needs r > 0, got {r}")
    if P < 0 or P > M.p_max:
        raise RangeError(f"P={P} outside [0, P_max={M.p_max}]")
    return math.log(r)


def ostrowski_argmax(M: WeightSequence, r: float, P: int, warn: bool = True) -> Tuple[float, int]:
    """(log T_M(r) truncated to p <= P, maximizing p)."""
    log_r = _validate_ostrowski(M, r, P)
    if not M.is_log_convex_upto(P):
        value, p_star = _ostrowski_scan(M, log_r, P)
    else:
        # p log r - logM[p] is concave in p: the last p with logm[p] <= log r wins
        lo, hi = 0, P
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if M.log_quotient(mid) <= log_r:
                lo = mid
            else:
                hi = mid - 1
        candidates = np.array([p for p in (lo - 1, lo, lo + 1) if 0 <= p <= P])
        values = candidates.astype(float) * log_r - M.log_moments(candidates)
        best = int(np.argmax(values))
        value, p_star = float(values[best]), int(candidates[best])
    if warn and P > 0 and p_star == P:
        logger.warning(f"T_M({r:.6g}) saturated at truncation P={P}; true sup may be larger")
    return value, p_star


def ostrowski_T(M: WeightSequence, r: float, P: int) -> float:
    return ostrowski_argmax(M, r, P)[0]


def _ostrowski_scan(M: WeightSequence, log_r: float, P: int) -> Tuple[float, int]:
    values = np.arange(P + 1, dtype=float) * log_r - M.array(P)
    best = int(np.argmax(values))
    return float(values[best]), best


def ostrowski_T_bruteforce(M: WeightSequence, r: float, P: int) -> float:
    log_r = _validate_ostrowski(M, r, P)
    return _ostrowski_scan(M, log_r, P)[0]


# -- growth index -----------------------------------------------------------


@dataclass(frozen=True)
class GrowthIndexEstimate:
    gamma_hat: float
    a_max: float
    P: int
    bracket: Tuple[float, float]
    finite_bracket: Tuple[float, float]
    ladder: Tuple[Tuple[int, float], ...] = ()
    loglog_weight: float = 0.0
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "gamma_hat": self.gamma_hat,
            "a_max": self.a_max,
            "P": self.P,
            "bracket": list(self.bracket),
            "finite_bracket": list(self.finite_bracket),
            "ladder": [[p, g] for p, g in self.ladder],
            "loglog_weight": self.loglog_weight,
            "degenerate": self.degenerate,
        }


def _max_drop(log_quotients: np.ndarray, log_p1: np.ndarray, gamma: float) -> float:
    """max over p < q of u_p - u_q with u_p = logm[p] - gamma log(p+1), in O(P)."""
    if len(log_quotients) < 2:
        return -math.inf
    u = log_quotients - gamma * log_p1
    running = np.maximum.accumulate(u)
    return float(np.max(running[:-1] - u[1:]))


def _feasible(log_quotients, log_p1, gamma: float, budget: float) -> bool:
    return _max_drop(log_quotients, log_p1, gamma) <= budget + FEASIBILITY_SLACK


def feasible_growth(M: WeightSequence, gamma: float, P: int, a_max: float) -> bool:
    """Whether (P_gamma) holds on indices 1..P with equivalence factor at most a_max."""
    if a_max < 1:
        raise DomainError(f"a_max must be >= 1, got {a_max}")
    p = np.arange(1, P + 1)
    return _feasible(M.log_quotients(p), np.log(p + 1.0), gamma, 2.0 * math.log(a_max))


def _finite_sup(log_quotients, log_p1, budget: float, tol: float, floor: float = 1e-6,
                ceiling: float = 1e4) -> Tuple[float, float, bool]:
    if not _feasible(log_quotients, log_p1, floor, budget):
        return 0.0, floor, True
    lo, hi = floor, 1.0
    while _feasible(log_quotients, log_p1, hi, budget):
        lo, hi = hi, 2.0 * hi
        if hi > ceiling:
            return lo, lo, False
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _feasible(log_quotients, log_p1, mid, budget):
            lo = mid
        else:
            hi = mid
    return lo, hi, False


def _loglog_weight(log_quotients: np.ndarray, p: np.ndarray) -> float:
    """Weight of a log log(e+p) component in the quotient tail, 0 when absent.

    Both power bases log p and log(p+1) are tried; the better fit decides.
    """
    P = len(p)
    if P < 64:
        return 0.0
    window = slice(P // 4, P)
    y = log_quotients[window]
    loglog = np.log(np.log(np.e + p[window]))
    best = None
    for base in (np.log(p[window]), np.log(p[window] + 1.0)):
        X = np.column_stack([np.ones_like(y), base, loglog])
        coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
        residual = float(np.sum((X @ coef - y) ** 2))
        if best is None or residual < best[0]:
            best = (residual, float(coef[2]), float(coef[1]))
    _, weight, slope = best
    if abs(weight) <= 1e-9 * max(1.0, abs(slope)):
        return 0.0
    return weight


def growth_index(M: WeightSequence, P: int, a_max: Optional[float] = None) -> GrowthIndexEstimate:
    """Estimate gamma(M) from the (P_gamma) feasibility test on [1, P].

    The finite-range supremum carries a bias of order 2 log a_max / log P;
    it is measured on a ladder of ranges P, P/4, P/16, ... and removed by a
    linear fit in 1/log((P+1)/2). A log log quotient component, which the
    finite test cannot separate from the power part, is fitted on the tail
    and divided out first.
    """
    a_max = settings.default_a_max if a_max is None else float(a_max)
    if a_max < 1:
        raise DomainError(f"a_max must be >= 1, got {a_max}")
    if P < 2:
        raise RangeError(f"Growth index needs P >= 2, got {P}")
    if not M.is_log_convex_upto(P):
        raise AxiomError("Growth index needs a log-convex sequence on the checked range", axiom="log_convexity")

    p = np.arange(1, P + 1)
    log_quotients = M.log_quotients(p)
    weight = _loglog_weight(log_quotients, p)
    if weight:
        log_quotients = log_quotients - weight * np.log(np.log(np.e + p))
    log_p1 = np.log(p + 1.0)
    budget = 2.0 * math.log(a_max)
    tol = settings.bracket_tol

    lo0, hi0, degenerate = _finite_sup(log_quotients, log_p1, budget, tol)
    if degenerate:
        logger.warning(f"(P_gamma) infeasible even near gamma=0 for {M.family.name}")
        return GrowthIndexEstimate(lo0, a_max, P, (lo0, hi0), (lo0, hi0), loglog_weight=weight, degenerate=True)

    ladder = [(P, 0.5 * (lo0 + hi0))]
    size = P // 4
    while size >= 32 and len(ladder) < 4:
        lo, hi, _ = _finite_sup(log_quotients[:size], log_p1[:size], budget, tol)
        ladder.append((size, 0.5 * (lo + hi)))
        size //= 4

    correction = 0.0
    if len(ladder) >= 2:
        x = np.array([1.0 / math.log((q + 1) / 2.0) for q, _ in ladder])
        g = np.array([v for _, v in ladder])
        slope, _ = np.polyfit(x, g, 1)
        correction = max(0.0, float(slope)) * x[0]

    bracket = (lo0 - correction, hi0 - correction)
    gamma_hat = 0.5 * (bracket[0] + bracket[1])
    logger.info(f"Growth index of {M.family.name}: {gamma_hat:.6g} (finite sup {0.5 * (lo0 + hi0):.6g})")
    return GrowthIndexEstimate(
        gamma_hat=gamma_hat,
        a_max=a_max,
        P=P,
        bracket=bracket,
        finite_bracket=(lo0, hi0),
        ladder=tuple(ladder),
        loglog_weight=weight,
    )


@dataclass(frozen=True)
class EquivalentQuotients:
    log_quotients: np.ndarray
    factor: float

    def as_dict(self) -> dict:
        return {"factor": self.factor, "checked_range": int(len(self.log_quotients))}


def equivalent_quotients(M: WeightSequence, P: int, gamma: float) -> EquivalentQuotients:
    """m'_p = (p+1)^gamma max_{k<=p} (k+1)^-gamma m_k, rescaled so that a^-1 m <= m' <= a m."""
    p = np.arange(1, P + 1)
    log_quotients = M.log_quotients(p)
    log_p1 = np.log(p + 1.0)
    running = np.maximum.accumulate(log_quotients - gamma * log_p1)
    raw = gamma * log_p1 + running
    log_a = float(np.max(raw - log_quotients))
    return EquivalentQuotients(log_quotients=raw - 0.5 * log_a, factor=math.exp(0.5 * log_a))


@dataclass(frozen=True)
class FactorialBounds:
    log_a1: float
    log_a2: float
    delta: float
    gamma: float


def factorial_bounds(M: WeightSequence, P: int, gamma: float) -> FactorialBounds:
    """a1^p p!^gamma <= M_p <= a2^p p!^delta on 1..P, with a1, a2, delta fitted on the range."""
    p = np.arange(1, P + 1)
    log_m = M.log_moments(p)
    log_fact = gammaln(p + 1.0)
    log_a1 = float(np.min((log_m - gamma * log_fact) / p))
    tail = p >= max(2, P // 2)
    delta = float(np.max(log_m[tail] / log_fact[tail]))
    log_a2 = float(np.max((log_m - delta * log_fact) / p))
    return FactorialBounds(log_a1=log_a1, log_a2=log_a2, delta=delta, gamma=gamma)
