"""Built-in analytic fixtures: a function on a polysector together with its exact total family."""

import cmath
import functools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from errors import ConfigError
from polyasym import FunctionHandle, SectorPoint, TotalFamily, _monomial, zero_handle

logger = logging.getLogger(__name__)

AVAILABLE_FIXTURES = ("exp_sum", "poly:<c0,c1,...>", "gevrey_flat:<s>", "monomial:<k1,...,kn>")


@dataclass(frozen=True)
class Fixture:
    name: str
    function: FunctionHandle
    family: TotalFamily


def _sum_of(point: SectorPoint) -> complex:
    return complex(np.sum(point.complex())) if len(point) else 0j


# -- exp(z_1 + ... + z_n) -------------------------------------------------------


def _exp_of_sum(point: SectorPoint) -> complex:
    return cmath.exp(_sum_of(point))


def _exp_handle(openings, name):
    return FunctionHandle(_exp_of_sum, openings, derivative=lambda order, point: _exp_of_sum(point), name=name)


def exp_sum(n: int, depth: int, openings: Sequence[float]) -> Fixture:
    def factory(J, alpha, sub_openings):
        if J.is_full:
            return 1.0
        return _exp_handle(sub_openings, f"exp_sum_{J.label()}")

    return Fixture("exp_sum", _exp_handle(openings, "exp_sum"), TotalFamily.build(n, depth, openings, factory))


# -- g(z_1 + ... + z_n) for a polynomial g ------------------------------------------


def poly(
    coefficients: Sequence[complex], n: int, depth: int, openings: Sequence[float], name: str = "poly"
) -> Fixture:
    c = np.asarray(coefficients, dtype=complex)
    degree = len(c) - 1

    def g(m: int, w: complex) -> complex:
        if m > degree:
            return 0j
        return complex(npoly.polyval(w, npoly.polyder(c, m) if m else c))

    def handle(m: int, sub_openings, name: str) -> FunctionHandle:
        return FunctionHandle(
            lambda point: g(m, _sum_of(point)),
            sub_openings,
            derivative=lambda order, point: g(m + sum(order), _sum_of(point)),
            name=name,
        )

    def factory(J, alpha, sub_openings):
        if J.is_full:
            return g(alpha.modulus, 0j)
        return handle(alpha.modulus, sub_openings, f"poly_{J.label()}_{alpha.entries}")

    return Fixture(name, handle(0, openings, "poly"),
                   TotalFamily.build(n, depth, openings, factory))


# -- z^k = z_1^{k_1} ... z_n^{k_n} --------------------------------------------------------


def _falling(k: int, b: int) -> int:
    return math.perm(k, b) if b <= k else 0


def _monomial_handle(coefficient: float, powers: Tuple[int, ...], openings, name: str) -> FunctionHandle:
    def evaluate(point):
        return coefficient * math.prod(
            (_monomial(r, t, k) for r, t, k in zip(point.moduli, point.args, powers)), start=1 + 0j
        )

    def derivative(order, point):
        value = coefficient + 0j
        for r, t, k, b in zip(point.moduli, point.args, powers, order):
            if b > k:
                return 0j
            value *= _falling(k, b) * _monomial(r, t, k - b)
        return value

    return FunctionHandle(evaluate, openings, derivative=derivative, name=name)


def monomial(powers: Sequence[int], depth: int, openings: Sequence[float]) -> Fixture:
    powers = tuple(int(k) for k in powers)
    n = len(powers)

    def factory(J, alpha, sub_openings):
        # lim_{z_J -> 0} D^{alpha_J} z^k survives only when alpha_J = k_J
        hit = all(a == powers[j] for j, a in zip(J.members, alpha))
        coefficient = math.prod(math.factorial(powers[j]) for j in J.members) if hit else 0.0
        if J.is_full:
            return coefficient
        rest = tuple(powers[j] for j in J.complement)
        return _monomial_handle(coefficient, rest, sub_openings, f"monomial_{J.label()}_{alpha.entries}")

    return Fixture(f"monomial:{','.join(map(str, powers))}", _monomial_handle(1.0, powers, openings, "monomial"),
                   TotalFamily.build(n, depth, openings, factory))


# -- prod_j exp(-z_j^{-1/s}) ------------------------------------------------------------


@functools.lru_cache(maxsize=256)
def _flat_coefficients(s: float, p: int) -> Tuple[float, ...]:
    """g^{(p)}(w) = g(w) sum_m c_m w^{-p - m/s} for g(w) = exp(-w^{-1/s})."""
    if p == 0:
        return (1.0,)
    previous = _flat_coefficients(s, p - 1)
    current = [0.0] * (p + 1)
    for m, c in enumerate(previous):
        exponent = -(p - 1) - m / s
        current[m] += c * exponent
        current[m + 1] += c / s
    return tuple(current)


def flat_derivative(s: float, p: int, modulus: float, arg: float) -> complex:
    log_w = complex(math.log(modulus), arg)
    damping = cmath.exp(-log_w / s)
    total = 0j
    for m, c in enumerate(_flat_coefficients(s, p)):
        if c:
            total += c * cmath.exp((-p - m / s) * log_w - damping)
    return total


def gevrey_flat(s: float, n: int, depth: int, openings: Sequence[float]) -> Fixture:
    if not s > 0:
        raise ConfigError(f"gevrey_flat needs s > 0, got {s}", field="fixture")
    if any(g >= s for g in openings):
        raise ConfigError(
            f"gevrey_flat:{s:g} is flat only on openings below {s:g}, got {list(openings)}", field="gamma"
        )

    def evaluate(point):
        return math.prod((flat_derivative(s, 0, r, t) for r, t in zip(point.moduli, point.args)), start=1 + 0j)

    def derivative(order, point):
        return math.prod(
            (flat_derivative(s, k, r, t) for r, t, k in zip(point.moduli, point.args, order)), start=1 + 0j
        )

    def factory(J, alpha, sub_openings):
        return 0.0 if J.is_full else zero_handle(sub_openings)

    f = FunctionHandle(evaluate, openings, derivative=derivative, name=f"gevrey_flat:{s:g}")
    return Fixture(f"gevrey_flat:{s:g}", f, TotalFamily.build(n, depth, openings, factory))


# -- lookup ---------------------------------------------------------------------------


def _parse_numbers(text: str, cast, name: str) -> List:
    text = text.strip().strip("[]")
    try:
        return [cast(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"Could not parse arguments of fixture {name!r}", field="fixture") from None


def default_opening(name: str) -> float:
    if name.startswith("gevrey_flat:"):
        values = _parse_numbers(name.split(":", 1)[1], float, name)
        if values and values[0] > 0:
            return 0.5 * values[0]
    return 1.0


def load_fixture(name: str, n: int, depth: int, openings: Optional[Sequence[float]] = None) -> Fixture:
    kind, _, argument = name.partition(":")
    if openings is None:
        openings = [default_opening(name)] * n
    if len(openings) != n:
        raise ConfigError(f"Fixture needs {n} openings, got {len(openings)}", field="gamma")
    logger.info(f"Building fixture {name} with n={n}, depth={depth}")
    if kind == "exp_sum" and not argument:
        return exp_sum(n, depth, openings)
    if kind == "poly" and argument:
        coefficients = _parse_numbers(argument, complex, name)
        if not coefficients:
            raise ConfigError("poly fixture needs at least one coefficient", field="fixture")
        return poly(coefficients, n, depth, openings, name=name)
    if kind == "gevrey_flat" and argument:
        values = _parse_numbers(argument, float, name)
        if len(values) != 1:
            raise ConfigError("gevrey_flat takes a single order s", field="fixture")
        return gevrey_flat(values[0], n, depth, openings)
    if kind == "monomial" and argument:
        powers = _parse_numbers(argument, int, name)
        if len(powers) != n:
            raise ConfigError(f"monomial:{argument} has {len(powers)} powers but n={n}", field="fixture")
        return monomial(powers, depth, openings)
    raise ConfigError(
        f"Unknown fixture {name!r}; available fixtures: {', '.join(AVAILABLE_FIXTURES)}",
        field="fixture",
        available=list(AVAILABLE_FIXTURES),
    )
