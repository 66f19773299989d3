"""Multi-index machinery for strong asymptotic development on polysectors.

Points live on the Riemann surface of the logarithm: each coordinate is a
modulus plus an unbounded argument, and the sector of opening gamma is
{|arg z| < gamma pi / 2}.
"""

import cmath
import itertools
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from errors import DomainError, IncompleteFamilyError, RangeError, StepError
from seqcore import WeightSequence

logger = logging.getLogger(__name__)

MIN_REMAINDER_RADIUS = 1e-6
GRID_MARGIN = 0.9
GRID_RADII = (1e-3, 1.0)


@dataclass(frozen=True)
class MultiIndex:
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in entries):
            raise DomainError(f"Multi-index entries must be nonnegative, got {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def modulus(self) -> int:
        return sum(self.entries)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(a) for a in self.entries)

    def __le__(self, other: "MultiIndex") -> bool:
        return len(self.entries) == len(other.entries) and all(a <= b for a, b in zip(self.entries, other.entries))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> int:
        return self.entries[i]


def multi_indices(n: int, max_modulus: int, min_modulus: int = 0) -> Iterator[MultiIndex]:
    """All multi-indices of length n with min_modulus <= |alpha| <= max_modulus, graded then lexicographic."""
    for total in range(min_modulus, max_modulus + 1):
        for combo in itertools.product(range(total + 1), repeat=n):
            if sum(combo) == total:
                yield MultiIndex(combo)


@dataclass(frozen=True)
class IndexSubset:
    """Nonempty J within {0, ..., n-1} (0-based; messages print 1-based)."""

    members: Tuple[int, ...]
    n: int

    def __post_init__(self):
        members = tuple(sorted(set(int(j) for j in self.members)))
        if not members:
            raise DomainError("Index subsets must be nonempty")
        if members[0] < 0 or members[-1] >= self.n:
            raise DomainError(f"Subset {members} outside 0..{self.n - 1}")
        object.__setattr__(self, "members", members)

    @property
    def complement(self) -> Tuple[int, ...]:
        return tuple(j for j in range(self.n) if j not in self.members)

    @property
    def is_full(self) -> bool:
        return len(self.members) == self.n

    def union(self, other: "IndexSubset") -> "IndexSubset":
        return IndexSubset(self.members + other.members, self.n)

    def disjoint(self, other: "IndexSubset") -> bool:
        return not set(self.members) & set(other.members)

    def label(self) -> Tuple[int, ...]:
        return tuple(j + 1 for j in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, j: int) -> bool:
        return j in self.members


def all_subsets(n: int) -> List[IndexSubset]:
    return [IndexSubset(c, n) for size in range(1, n + 1) for c in itertools.combinations(range(n), size)]


@dataclass(frozen=True)
class SectorPoint:
    moduli: Tuple[float, ...]
    args: Tuple[float, ...]

    def __post_init__(self):
        moduli = tuple(float(r) for r in self.moduli)
        args = tuple(float(t) for t in self.args)
        if len(moduli) != len(args):
            raise DomainError("moduli and args must have the same length")
        if any(not r > 0 for r in moduli):
            raise DomainError(f"Sector points need positive moduli, got {moduli}")
        object.__setattr__(self, "moduli", moduli)
        object.__setattr__(self, "args", args)

    @classmethod
    def from_complex(cls, values: Sequence[complex]) -> "SectorPoint":
        return cls(tuple(abs(v) for v in values), tuple(cmath.phase(v) for v in values))

    @classmethod
    def empty(cls) -> "SectorPoint":
        return cls((), ())

    def complex(self) -> np.ndarray:
        return np.asarray(self.moduli) * np.exp(1j * np.asarray(self.args))

    def select(self, indices: Sequence[int]) -> "SectorPoint":
        return SectorPoint(tuple(self.moduli[i] for i in indices), tuple(self.args[i] for i in indices))

    def contained_in(self, openings: Sequence[float], margin: float = 1.0) -> bool:
        return len(openings) == len(self.args) and all(
            abs(t) < margin * g * math.pi / 2 for t, g in zip(self.args, openings)
        )

    def modulus_power(self, alpha: Sequence[int]) -> float:
        return math.prod(r ** a for r, a in zip(self.moduli, alpha))

    def __len__(self) -> int:
        return len(self.moduli)


def _monomial(modulus: float, arg: float, k: int) -> complex:
    """z^k on the Riemann surface of log."""
    return (modulus ** k) * cmath.exp(1j * k * arg)


DerivativeOracle = Callable[[Tuple[int, ...], SectorPoint], complex]


class FunctionHandle:
    """A holomorphic function on a polysector given by its openings.

    `derivative(order, point)` is available when an oracle was supplied;
    handles declared `serial` are never evaluated concurrently.
    """

    def __init__(
        self,
        evaluator: Callable[[SectorPoint], complex],
        openings: Sequence[float],
        derivative: Optional[DerivativeOracle] = None,
        serial: bool = False,
        name: str = "",
    ):
        self._evaluator = evaluator
        self._derivative = derivative
        self.openings = tuple(float(g) for g in openings)
        self.name = name
        self._lock = threading.Lock() if serial else None

    @property
    def has_derivative(self) -> bool:
        return self._derivative is not None

    def _check(self, point: SectorPoint) -> None:
        if not point.contained_in(self.openings):
            raise DomainError(
                f"Point with args {point.args} outside the polysector of openings {self.openings}",
                function=self.name,
            )

    def _call(self, fn, *args) -> complex:
        if self._lock is None:
            return complex(fn(*args))
        with self._lock:
            return complex(fn(*args))

    def __call__(self, point: SectorPoint) -> complex:
        self._check(point)
        return self._call(self._evaluator, point)

    def derivative(self, order: Sequence[int], point: SectorPoint) -> complex:
        if self._derivative is None:
            raise DomainError(f"No derivative oracle for {self.name or 'this function'}")
        self._check(point)
        order = tuple(int(k) for k in order)
        if not any(order):
            return self(point)
        return self._call(self._derivative, order, point)

    def combine(self, a: complex, other: "FunctionHandle", b: complex) -> "FunctionHandle":
        derivative = None
        if self.has_derivative and other.has_derivative:
            def derivative(order, point):
                return a * self.derivative(order, point) + b * other.derivative(order, point)
        return FunctionHandle(
            lambda point: a * self(point) + b * other(point),
            self.openings,
            derivative=derivative,
            name=f"{a}*{self.name}+{b}*{other.name}",
        )


def zero_handle(openings: Sequence[float]) -> FunctionHandle:
    return FunctionHandle(lambda point: 0j, openings, derivative=lambda order, point: 0j, name="zero")


FamilyKey = Tuple[IndexSubset, MultiIndex]
FamilyEntry = Union[FunctionHandle, complex]


class TotalFamily:
    """Entries f_{alpha_J}: a function on S_{J'} for J != N, a scalar for J = N.

    Only |alpha_J| <= depth is stored; lookups beyond fail loudly.
    """

    def __init__(self, n: int, depth: int, openings: Sequence[float], entries: Mapping[FamilyKey, FamilyEntry]):
        if n < 1:
            raise DomainError(f"n must be at least 1, got {n}")
        if len(openings) != n:
            raise DomainError(f"Expected {n} openings, got {len(openings)}")
        self.n = n
        self.depth = depth
        self.openings = tuple(float(g) for g in openings)
        self._entries: Dict[FamilyKey, FamilyEntry] = dict(entries)
        for J in all_subsets(n):
            for alpha in multi_indices(len(J), depth):
                if (J, alpha) not in self._entries:
                    raise IncompleteFamilyError(J.label(), alpha.entries)

    @classmethod
    def build(
        cls,
        n: int,
        depth: int,
        openings: Sequence[float],
        factory: Callable[[IndexSubset, MultiIndex, Tuple[float, ...]], FamilyEntry],
    ) -> "TotalFamily":
        """factory(J, alpha_J, openings of J') -> entry."""
        openings = tuple(float(g) for g in openings)
        entries = {}
        for J in all_subsets(n):
            sub_openings = tuple(openings[j] for j in J.complement)
            for alpha in multi_indices(len(J), depth):
                entry = factory(J, alpha, sub_openings)
                entries[(J, alpha)] = complex(entry) if J.is_full else entry
        return cls(n, depth, openings, entries)

    def subsets(self) -> List[IndexSubset]:
        return all_subsets(self.n)

    def entry(self, J: IndexSubset, alpha: MultiIndex) -> FamilyEntry:
        try:
            return self._entries[(J, alpha)]
        except KeyError:
            raise IncompleteFamilyError(J.label(), alpha.entries) from None

    def evaluate(self, J: IndexSubset, alpha: MultiIndex, point: SectorPoint) -> complex:
        """f_{alpha_J} at a point of S_{J'} (ignored when J = N)."""
        entry = self.entry(J, alpha)
        if J.is_full:
            return entry
        return entry(point)

    def items(self):
        return self._entries.items()

    def scalars(self) -> Dict[MultiIndex, complex]:
        full = IndexSubset(tuple(range(self.n)), self.n)
        return {alpha: value for (J, alpha), value in self._entries.items() if J == full}

    def replace_entries(self, updates: Mapping[FamilyKey, FamilyEntry]) -> "TotalFamily":
        entries = dict(self._entries)
        entries.update(updates)
        return TotalFamily(self.n, self.depth, self.openings, entries)

    def linear_combination(self, a: complex, other: "TotalFamily", b: complex) -> "TotalFamily":
        if (self.n, self.depth) != (other.n, other.depth):
            raise DomainError("Families must share n and depth")
        entries = {}
        for key, value in self._entries.items():
            theirs = other.entry(*key)
            if key[0].is_full:
                entries[key] = a * value + b * theirs
            else:
                entries[key] = value.combine(a, theirs, b)
        return TotalFamily(self.n, self.depth, self.openings, entries)


def _check_point(F: TotalFamily, z: SectorPoint) -> None:
    if not z.contained_in(F.openings):
        raise DomainError(f"Point with args {z.args} outside the polysector of openings {F.openings}")


def approximant(F: TotalFamily, alpha: MultiIndex, z: SectorPoint) -> complex:
    """App_alpha(F)(z): inclusion-exclusion over nonempty J of the Taylor parts below alpha_J."""
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    if len(alpha) != F.n:
        raise DomainError(f"alpha has {len(alpha)} entries, family has n={F.n}")
    _check_point(F, z)
    tables = [
        [_monomial(z.moduli[j], z.args[j], k) / math.factorial(k) for k in range(alpha[j])]
        for j in range(F.n)
    ]
    total = 0j
    for J in F.subsets():
        bounds = [alpha[j] for j in J.members]
        if min(bounds) == 0:
            continue
        sign = 1 if len(J) % 2 else -1
        point = z.select(J.complement)
        partial = 0j
        for beta in itertools.product(*(range(b) for b in bounds)):
            weight = math.prod(tables[j][k] for j, k in zip(J.members, beta))
            partial += F.evaluate(J, MultiIndex(beta), point) * weight
        total += sign * partial
    return total


def approximant_bruteforce(F: TotalFamily, alpha: MultiIndex, z: SectorPoint) -> complex:
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    _check_point(F, z)
    total = 0j
    for size in range(1, F.n + 1):
        for members in itertools.combinations(range(F.n), size):
            J = IndexSubset(members, F.n)
            for beta in itertools.product(*(range(alpha[j]) for j in members)):
                term = F.evaluate(J, MultiIndex(beta), z.select(J.complement))
                for j, k in zip(members, beta):
                    term = term * (_monomial(z.moduli[j], z.args[j], k) / math.factorial(k))
                total += (-1) ** (size + 1) * term
    return total


# -- coherence ----------------------------------------------------------------


def default_ray(radius: float = 1e-4, count: int = 3, ratio: float = 10.0) -> List[float]:
    """Geometric radii ending at `radius`."""
    return [radius * ratio ** (count - 1 - k) for k in range(count)]


def _extrapolate_to_zero(xs: Sequence[float], ys: Sequence[complex]) -> complex:
    """Neville's scheme evaluated at x = 0."""
    p = list(ys)
    for m in range(1, len(xs)):
        for i in range(len(xs) - m):
            p[i] = (-xs[i + m] * p[i] + xs[i] * p[i + 1]) / (xs[i] - xs[i + m])
    return p[0]


def _stencil(handle: FunctionHandle, point: SectorPoint, order: Tuple[int, ...], scale: float) -> complex:
    """Central differences along each coordinate's ray with step |h| = scale * modulus."""
    axes = []
    denominator = 1.0 + 0j
    for i, k in enumerate(order):
        if k == 0:
            axes.append([(0.0, 1.0)])
            continue
        step = scale * point.moduli[i]
        if point.moduli[i] - 0.5 * k * step <= 0:
            raise StepError(f"Difference stencil of order {k} leaves the sector along coordinate {i}")
        h = step * cmath.exp(1j * point.args[i])
        denominator *= h ** k
        axes.append([(0.5 * k - m, (-1) ** m * math.comb(k, m)) for m in range(k + 1)])
    if denominator == 0 or not cmath.isfinite(denominator):
        raise StepError(f"Finite-difference step underflow at moduli {point.moduli}")
    total = 0j
    for combo in itertools.product(*axes):
        moduli = tuple(r + t * scale * r for r, (t, _) in zip(point.moduli, combo))
        weight = math.prod(w for _, w in combo)
        total += weight * handle(SectorPoint(moduli, point.args))
    return total / denominator


def _finite_difference(handle: FunctionHandle, point: SectorPoint, order: Tuple[int, ...]) -> complex:
    coarse = _stencil(handle, point, order, 0.1)
    fine = _stencil(handle, point, order, 0.05)
    return (4.0 * fine - coarse) / 3.0


def coherence_residual(
    F: TotalFamily,
    J: IndexSubset,
    L: IndexSubset,
    alpha_J: MultiIndex,
    alpha_L: MultiIndex,
    base_point: SectorPoint,
    radii: Optional[Sequence[float]] = None,
    directions: Optional[Sequence[float]] = None,
) -> float:
    """|lim_{z_L -> 0} D^{alpha_L} f_{alpha_J} - f_{(alpha_J, alpha_L)}| at base_point on S_{(J u L)'}."""
    if not J.disjoint(L):
        raise DomainError(f"J={J.label()} and L={L.label()} must be disjoint")
    radii = list(radii) if radii is not None else default_ray()
    directions = list(directions) if directions is not None else [0.0] * len(L)
    if len(directions) != len(L) or len(alpha_L) != len(L) or len(alpha_J) != len(J):
        raise DomainError("alpha_J, alpha_L and directions must match J and L")

    union = J.union(L)
    combined = dict(zip(J.members, alpha_J))
    combined.update(zip(L.members, alpha_L))
    target_alpha = MultiIndex(tuple(combined[j] for j in union.members))
    target = F.evaluate(union, target_alpha, base_point)

    handle = F.entry(J, alpha_J)
    domain = J.complement
    rest = union.complement
    if len(base_point) != len(rest):
        raise DomainError(f"base_point needs {len(rest)} coordinates, got {len(base_point)}")
    base = {j: (base_point.moduli[i], base_point.args[i]) for i, j in enumerate(rest)}
    ray_args = dict(zip(L.members, directions))
    l_order = dict(zip(L.members, alpha_L))
    order = tuple(l_order.get(j, 0) for j in domain)

    values = []
    for rho in radii:
        moduli = tuple(rho if j in L else base[j][0] for j in domain)
        args = tuple(ray_args[j] if j in L else base[j][1] for j in domain)
        point = SectorPoint(moduli, args)
        if not point.contained_in(handle.openings):
            raise DomainError(f"Ray leaves the polysector at radius {rho}", args=list(args))
        if handle.has_derivative:
            values.append(handle.derivative(order, point))
        else:
            values.append(_finite_difference(handle, point, order))
    tail = min(3, len(radii))
    limit = _extrapolate_to_zero(radii[-tail:], values[-tail:])
    return abs(limit - target)


def coherence_table(F: TotalFamily, base_moduli: float = 0.5, radii: Optional[Sequence[float]] = None) -> List[dict]:
    """Residuals for every disjoint (J, L) and every alpha_J, alpha_L with |alpha_J| + |alpha_L| <= depth."""
    rows = []
    for J in F.subsets():
        for L in F.subsets():
            if not J.disjoint(L):
                continue
            rest = J.union(L).complement
            base = SectorPoint((base_moduli,) * len(rest), (0.0,) * len(rest))
            for alpha_J in multi_indices(len(J), F.depth):
                for alpha_L in multi_indices(len(L), F.depth - alpha_J.modulus):
                    residual = coherence_residual(F, J, L, alpha_J, alpha_L, base, radii)
                    rows.append({
                        "J": list(J.label()),
                        "L": list(L.label()),
                        "alpha_J": list(alpha_J),
                        "alpha_L": list(alpha_L),
                        "residual": residual,
                    })
    return rows


# -- extraction ------------------------------------------------------------------


def first_order_family(F: TotalFamily) -> Dict[Tuple[int, int], FamilyEntry]:
    """f_{jm}: the entries with J = {j}."""
    family = {}
    for j in range(F.n):
        J = IndexSubset((j,), F.n)
        for m in range(F.depth + 1):
            family[(j, m)] = F.entry(J, MultiIndex((m,)))
    return family


def assemble_first_order(F: TotalFamily, first: Mapping[Tuple[int, int], FamilyEntry]) -> TotalFamily:
    return F.replace_entries({(IndexSubset((j,), F.n), MultiIndex((m,))): entry for (j, m), entry in first.items()})


def borel(F: TotalFamily) -> Dict[MultiIndex, complex]:
    """The Borel image (D^alpha f(0))_{|alpha| <= depth}, read from the J = N entries."""
    return dict(sorted(F.scalars().items(), key=lambda item: (item[0].modulus, item[0].entries)))


# -- estimates --------------------------------------------------------------------


def sector_grid(
    openings: Sequence[float],
    radii_count: int = 6,
    arg_count: int = 3,
    margin: float = GRID_MARGIN,
    r_min: float = GRID_RADII[0],
    r_max: float = GRID_RADII[1],
) -> List[SectorPoint]:
    """Product grid on a proper bounded subpolysector."""
    radii = np.geomspace(r_min, r_max, radii_count)
    per_coordinate = []
    for g in openings:
        half = margin * g * math.pi / 2
        args = np.linspace(-half, half, arg_count) if arg_count > 1 else np.zeros(1)
        per_coordinate.append([(float(r), float(t)) for r in radii for t in args])
    return [
        SectorPoint(tuple(r for r, _ in combo), tuple(t for _, t in combo))
        for combo in itertools.product(*per_coordinate)
    ]


def remainder_sup(
    f: FunctionHandle, F: TotalFamily, alpha: MultiIndex, grid: Sequence[SectorPoint]
) -> Tuple[float, Optional[SectorPoint]]:
    """max over the grid of |f - App_alpha(F)| / |z|^alpha, and where it is attained."""
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))
    best, where = 0.0, None
    skipped = 0
    for z in grid:
        if min(z.moduli) < MIN_REMAINDER_RADIUS:
            skipped += 1
            continue
        value = abs(f(z) - approximant(F, alpha, z)) / z.modulus_power(alpha)
        if where is None or value > best:
            best, where = value, z
    if where is None:
        raise DomainError(f"Every grid point has a radius below {MIN_REMAINDER_RADIUS}")
    if skipped:
        logger.debug(f"remainder_sup skipped {skipped} points near the vertex")
    return best, where


def _oracle(df: Union[FunctionHandle, DerivativeOracle]) -> DerivativeOracle:
    return df.derivative if isinstance(df, FunctionHandle) else df


def deriv_sup(
    df: Union[FunctionHandle, DerivativeOracle], alpha: MultiIndex, grid: Sequence[SectorPoint]
) -> Tuple[float, Optional[SectorPoint]]:
    oracle = _oracle(df)
    order = tuple(alpha)
    best, where = 0.0, None
    for z in grid:
        value = abs(oracle(order, z))
        if where is None or value > best:
            best, where = value, z
    return best, where


def membership_constant(
    df: Union[FunctionHandle, DerivativeOracle], M: WeightSequence, grid: Sequence[SectorPoint], J_max: int
) -> float:
    """Least A for which |D^J f| <= C A^j j! M_j on the sampled grid, 1 <= j = |J| <= J_max."""
    if J_max > M.p_max:
        raise RangeError(f"J_max={J_max} exceeds P_max={M.p_max}")
    if not grid:
        return 0.0
    oracle = _oracle(df)
    n = len(grid[0])
    log_m = M.array(J_max)
    log_fact = gammaln(np.arange(J_max + 1) + 1.0)
    best = -math.inf
    for alpha in multi_indices(n, J_max, min_modulus=1):
        j = alpha.modulus
        for z in grid:
            value = abs(oracle(tuple(alpha), z))
            if value == 0:
                continue
            best = max(best, (math.log(value) - log_fact[j] - log_m[j]) / j)
    return 0.0 if best == -math.inf else math.exp(best)
