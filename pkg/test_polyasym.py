#!/usr/bin/env python3
"""
Tests for the polysector machinery: approximants, coherence of total
families, Borel images and the grid estimates
"""

import cmath
import math

import numpy as np
import pytest

from errors import ConfigError, DomainError, IncompleteFamilyError, RangeError
from fixtures import default_opening, exp_sum, gevrey_flat, load_fixture, monomial, poly
from polyasym import (
    FunctionHandle,
    IndexSubset,
    MultiIndex,
    SectorPoint,
    TotalFamily,
    approximant,
    approximant_bruteforce,
    assemble_first_order,
    borel,
    coherence_residual,
    coherence_table,
    deriv_sup,
    first_order_family,
    membership_constant,
    multi_indices,
    remainder_sup,
    sector_grid,
    zero_handle,
)
from seqcore import WeightSequence


def point(*pairs):
    return SectorPoint(tuple(r for r, _ in pairs), tuple(t for _, t in pairs))


def floored_grid(openings, alpha, radii=5, args=3):
    r_min = max(1e-3, 1e-4 ** (1.0 / max(1, alpha.modulus)))
    return sector_grid(openings, radii, args, r_min=r_min)


# -- indices and points --------------------------------------------------------------


def test_multi_index_basics():
    alpha = MultiIndex((2, 0, 3))
    assert alpha.modulus == 5
    assert alpha.factorial == 12
    assert MultiIndex((1, 0, 3)) <= alpha
    assert not MultiIndex((3, 0, 0)) <= alpha
    with pytest.raises(DomainError):
        MultiIndex((1, -1))


def test_multi_indices_are_graded():
    indices = list(multi_indices(2, 2))
    assert len(indices) == 6
    assert [a.modulus for a in indices] == sorted(a.modulus for a in indices)
    assert len(list(multi_indices(3, 3, min_modulus=1))) == 19


def test_index_subsets():
    J = IndexSubset((2, 0), 3)
    assert J.members == (0, 2)
    assert J.complement == (1,)
    assert J.label() == (1, 3)
    assert J.disjoint(IndexSubset((1,), 3))
    assert J.union(IndexSubset((1,), 3)).is_full
    with pytest.raises(DomainError):
        IndexSubset((), 3)
    with pytest.raises(DomainError):
        IndexSubset((3,), 3)


def test_sector_points():
    z = point((0.5, 0.2), (1.0, -1.4))
    assert z.contained_in((1.0, 1.0))
    assert not z.contained_in((1.0, 0.5))
    assert z.select((1,)).moduli == (1.0,)
    assert z.complex()[0] == pytest.approx(0.5 * cmath.exp(0.2j))
    # arguments beyond pi are points of the Riemann surface, not wrapped
    assert point((1.0, 4.0)).contained_in((3.0,))
    with pytest.raises(DomainError):
        point((0.0, 0.0))


def test_function_handle_domain():
    f = FunctionHandle(lambda z: z.complex()[0], (1.0,), name="identity")
    with pytest.raises(DomainError):
        f(point((1.0, 2.0)))
    with pytest.raises(DomainError):
        f.derivative((1,), point((1.0, 0.0)))


def test_incomplete_family():
    J = IndexSubset((0,), 1)
    with pytest.raises(IncompleteFamilyError):
        TotalFamily(1, 2, (1.0,), {(J, MultiIndex((0,))): 1.0})
    F = exp_sum(1, 2, (1.0,)).family
    with pytest.raises(IncompleteFamilyError):
        F.entry(J, MultiIndex((3,)))
    with pytest.raises(IncompleteFamilyError):
        approximant(F, MultiIndex((5,)), point((0.5, 0.0)))


# -- approximants ------------------------------------------------------------------------


def test_approximant_of_zero_order_is_zero():
    F = exp_sum(2, 3, (1.0, 1.0)).family
    assert approximant(F, MultiIndex((0, 0)), point((0.5, 0.1), (0.3, -0.2))) == 0


def test_approximant_in_one_variable_is_taylor_truncation():
    F = exp_sum(1, 6, (1.0,)).family
    z = point((0.7, 0.4))
    w = 0.7 * cmath.exp(0.4j)
    for k in range(7):
        expected = sum(w ** m / math.factorial(m) for m in range(k))
        assert approximant(F, MultiIndex((k,)), z) == pytest.approx(expected, rel=1e-13, abs=1e-15)


def test_approximant_of_monomial():
    fixture = monomial((2, 1), 4, (1.0, 1.0))
    z = point((0.6, 0.3), (0.8, -0.5))
    f = fixture.function(z)
    assert approximant(fixture.family, MultiIndex((3, 2)), z) == pytest.approx(f, rel=1e-13)
    assert approximant(fixture.family, MultiIndex((2, 2)), z) == pytest.approx(f, rel=1e-13)
    assert approximant(fixture.family, MultiIndex((2, 1)), z) == 0


def test_approximant_rejects_points_outside_sector():
    F = exp_sum(2, 2, (1.0, 0.5)).family
    with pytest.raises(DomainError):
        approximant(F, MultiIndex((1, 1)), point((0.5, 0.0), (0.5, 1.0)))
    with pytest.raises(DomainError):
        approximant(F, MultiIndex((1,)), point((0.5, 0.0), (0.5, 0.0)))


def _random_family(rng, n, depth, openings):
    def factory(J, alpha, sub_openings):
        c = complex(rng.normal(), rng.normal())
        if J.is_full:
            return c
        w = rng.normal(scale=0.5, size=len(sub_openings)) + 1j * rng.normal(scale=0.5, size=len(sub_openings))

        def evaluate(z, c=c, w=w):
            return c * cmath.exp(complex(np.dot(w, z.complex())))

        return FunctionHandle(evaluate, sub_openings, name=f"random_{J.label()}_{alpha.entries}")

    return TotalFamily.build(n, depth, openings, factory)


def test_approximant_matches_bruteforce_on_random_families():
    rng = np.random.default_rng(20240611)
    families = {n: _random_family(rng, n, 6, (1.5,) * n) for n in (1, 2, 3)}
    for _ in range(200):
        n = int(rng.integers(1, 4))
        F = families[n]
        while True:
            alpha = MultiIndex(tuple(int(a) for a in rng.integers(0, 7, size=n)))
            if alpha.modulus <= 6:
                break
        z = SectorPoint(
            tuple(float(r) for r in rng.uniform(0.1, 1.0, size=n)),
            tuple(float(t) for t in rng.uniform(-1.0, 1.0, size=n) * 1.5 * math.pi / 2),
        )
        fast = approximant(F, alpha, z)
        slow = approximant_bruteforce(F, alpha, z)
        assert fast == pytest.approx(slow, rel=1e-12, abs=1e-10)


def test_approximant_is_linear_in_the_family():
    F1 = exp_sum(2, 4, (1.0, 1.0)).family
    F2 = poly([1.0, -2.0, 0.5, 3.0], 2, 4, (1.0, 1.0)).family
    a, b = 2.0 - 1.0j, 0.5
    G = F1.linear_combination(a, F2, b)
    for alpha in (MultiIndex((1, 1)), MultiIndex((2, 3)), MultiIndex((3, 3)), MultiIndex((0, 4))):
        for z in (point((0.3, 0.2), (0.8, -0.5)), point((1.0, 0.0), (0.05, 0.7))):
            expected = a * approximant(F1, alpha, z) + b * approximant(F2, alpha, z)
            assert approximant(G, alpha, z) == pytest.approx(expected, rel=1e-12, abs=1e-12)


# -- coherence -----------------------------------------------------------------------------


def test_exp_family_is_coherent():
    rows = coherence_table(exp_sum(2, 3, (1.0, 1.0)).family)
    assert rows
    assert max(row["residual"] for row in rows) < 1e-8


def test_poly_family_is_coherent():
    rows = coherence_table(poly([1.0, -2.0, 0.5, 3.0], 2, 3, (1.0, 1.0)).family)
    assert max(row["residual"] for row in rows) < 1e-8


def test_perturbed_scalar_breaks_coherence():
    F = exp_sum(2, 3, (1.0, 1.0)).family
    full = IndexSubset((0, 1), 2)
    perturbed = F.replace_entries({(full, MultiIndex((0, 1))): 1.01})
    J, L = IndexSubset((0,), 2), IndexSubset((1,), 2)
    residual = coherence_residual(perturbed, J, L, MultiIndex((0,)), MultiIndex((1,)), SectorPoint.empty())
    assert 5e-3 <= residual <= 2e-2
    assert coherence_residual(F, J, L, MultiIndex((0,)), MultiIndex((1,)), SectorPoint.empty()) < 1e-8


@pytest.mark.parametrize("epsilon", [1e-4, 1e-3, 1e-2, 1e-1])
def test_coherence_residual_tracks_injected_perturbation(epsilon):
    F = exp_sum(2, 3, (1.0, 1.0)).family
    full = IndexSubset((0, 1), 2)
    perturbed = F.replace_entries({(full, MultiIndex((0, 1))): 1.0 + epsilon})
    J, L = IndexSubset((0,), 2), IndexSubset((1,), 2)
    residual = coherence_residual(perturbed, J, L, MultiIndex((0,)), MultiIndex((1,)), SectorPoint.empty())
    assert epsilon / 2 <= residual <= 2 * epsilon


def test_coherence_by_finite_differences():
    F = exp_sum(2, 3, (1.0, 1.0)).family
    J, L = IndexSubset((0,), 2), IndexSubset((1,), 2)
    plain = FunctionHandle(lambda z: cmath.exp(z.complex()[0]), (1.0,), name="exp_no_oracle")
    G = F.replace_entries({(J, MultiIndex((0,))): plain})
    assert coherence_residual(G, J, L, MultiIndex((0,)), MultiIndex((1,)), SectorPoint.empty()) < 1e-6


def test_coherence_needs_disjoint_subsets():
    F = exp_sum(2, 2, (1.0, 1.0)).family
    J = IndexSubset((0,), 2)
    with pytest.raises(DomainError):
        coherence_residual(F, J, J, MultiIndex((0,)), MultiIndex((1,)), point((0.5, 0.0)))


# -- extraction ---------------------------------------------------------------------------------


def test_first_order_family_and_assembly():
    F = exp_sum(2, 2, (1.0, 1.0)).family
    first = first_order_family(F)
    assert len(first) == 6
    assert sorted(first) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    G = assemble_first_order(F, first)
    assert dict(G.items()) == dict(F.items())


def test_borel_image():
    F = exp_sum(2, 3, (1.0, 1.0)).family
    image = borel(F)
    assert image[MultiIndex((1, 1))] == 1
    assert len(image) == 10
    assert list(image)[0] == MultiIndex((0, 0))
    null = gevrey_flat(1.0, 2, 3, (0.5, 0.5)).family
    assert all(value == 0 for value in borel(null).values())
    difference = F.linear_combination(1.0, F, -1.0)
    assert all(value == 0 for value in borel(difference).values())


def test_borel_of_polynomial_gives_derivatives_at_origin():
    F = poly([1.0, 2.0, 3.0], 2, 3, (1.0, 1.0)).family
    image = borel(F)
    assert image[MultiIndex((0, 0))] == 1
    assert image[MultiIndex((1, 0))] == 2
    assert image[MultiIndex((1, 1))] == 6
    assert image[MultiIndex((2, 1))] == 0


@pytest.mark.parametrize(
    "F",
    [
        exp_sum(2, 3, (1.0, 1.0)).family,
        poly([1.0, 2.0, 3.0], 3, 2, (1.0, 0.5, 1.0)).family,
        monomial([2, 1], 4, (1.0, 1.0)).family,
    ],
    ids=["exp_sum", "poly", "monomial"],
)
def test_borel_values_are_the_full_subset_entries(F):
    full = IndexSubset(tuple(range(F.n)), F.n)
    image = borel(F)
    assert set(image) == set(multi_indices(F.n, F.depth))
    for alpha, value in image.items():
        assert F.entry(full, alpha) == value


# -- grid estimates ---------------------------------------------------------------------------------


def test_sector_grid_stays_inside():
    grid = sector_grid((1.0, 0.5), radii_count=4, arg_count=3)
    assert len(grid) == 12 ** 2
    assert all(z.contained_in((1.0, 0.5), margin=0.91) for z in grid)
    assert min(min(z.moduli) for z in grid) == pytest.approx(1e-3)
    assert max(max(z.moduli) for z in grid) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2])
def test_polynomial_remainder_vanishes(n):
    fixture = poly([1.0, 2.0, 3.0], n, 3, (1.0,) * n)
    grid = sector_grid(fixture.family.openings, 4, 3, r_min=0.5)
    alpha = MultiIndex((2,) * n) if n == 2 else MultiIndex((3,))
    p_hat, where = remainder_sup(fixture.function, fixture.family, alpha, grid)
    assert where is not None
    assert p_hat <= 1e-12


@pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
def test_flat_remainder_on_the_real_ray(p):
    fixture = gevrey_flat(1.0, 1, 5, (0.5,))
    grid = sector_grid((0.5,), radii_count=2000, arg_count=1, r_min=1e-2)
    p_hat, where = remainder_sup(fixture.function, fixture.family, MultiIndex((p,)), grid)
    expected = (p / math.e) ** p
    assert expected * 0.999 <= p_hat <= expected * (1 + 1e-9)
    assert where.moduli[0] == pytest.approx(1.0 / p, rel=5e-3)


def test_remainder_scales_with_the_function():
    fixture = gevrey_flat(1.0, 1, 3, (0.5,))
    grid = sector_grid((0.5,), 12, 3)
    scaled = fixture.function.combine(2.5, zero_handle((0.5,)), 0.0)
    base, _ = remainder_sup(fixture.function, fixture.family, MultiIndex((2,)), grid)
    bigger, _ = remainder_sup(scaled, fixture.family, MultiIndex((2,)), grid)
    assert bigger == pytest.approx(2.5 * base, rel=1e-12)


def test_remainder_needs_points_away_from_vertex():
    fixture = exp_sum(1, 2, (1.0,))
    with pytest.raises(DomainError):
        remainder_sup(fixture.function, fixture.family, MultiIndex((1,)), [point((1e-8, 0.0))])


def test_derivative_sup_of_exp():
    fixture = exp_sum(2, 3, (1.0, 1.0))
    grid = sector_grid((1.0, 1.0), 6, 3)
    q_hat, where = deriv_sup(fixture.function, MultiIndex((1, 2)), grid)
    assert q_hat == pytest.approx(math.e ** 2)
    assert where.moduli == (1.0, 1.0)
    assert where.args == (0.0, 0.0)
    via_oracle, _ = deriv_sup(fixture.function.derivative, MultiIndex((1, 2)), grid)
    assert via_oracle == q_hat


def test_derivative_sup_of_constant():
    fixture = poly([5.0], 1, 2, (1.0,))
    q_hat, _ = deriv_sup(fixture.function, MultiIndex((2,)), sector_grid((1.0,)))
    assert q_hat == 0


@pytest.mark.parametrize(
    "name, n, openings, radii, args",
    [
        ("exp_sum", 1, (1.0,), 8, 3),
        ("exp_sum", 2, (1.0, 1.5), 5, 3),
        ("monomial:2,1", 2, (1.0, 1.0), 5, 3),
        ("monomial:3", 1, (2.0,), 8, 5),
        ("gevrey_flat:1", 1, (0.5,), 40, 3),
        ("gevrey_flat:1", 2, (0.5, 0.5), 10, 3),
        ("poly:1,2,3", 2, (1.0, 1.0), 6, 1),
    ],
)
def test_remainder_bounded_by_derivatives(name, n, openings, radii, args):
    fixture = load_fixture(name, n, 4, openings)
    for alpha in multi_indices(n, 4):
        grid = floored_grid(openings, alpha, radii, args)
        p_hat, _ = remainder_sup(fixture.function, fixture.family, alpha, grid)
        q_hat, _ = deriv_sup(fixture.function, alpha, grid)
        assert p_hat <= q_hat / alpha.factorial + 1e-9, (name, alpha.entries)


def test_membership_constant_of_zero():
    fixture = gevrey_flat(1.0, 1, 2, (0.5,))
    zero = zero_handle((0.5,))
    assert membership_constant(zero, WeightSequence.gevrey(1), sector_grid((0.5,)), 5) == 0
    assert membership_constant(fixture.function, WeightSequence.gevrey(1), [], 5) == 0


def test_membership_constant_range():
    M = WeightSequence.custom([0.0, 0.0, 0.0])
    with pytest.raises(RangeError):
        membership_constant(zero_handle((1.0,)), M, sector_grid((1.0,)), 5)


def test_membership_constant_of_exp_is_stable():
    fixture = exp_sum(1, 2, (1.0,))
    grid = sector_grid((1.0,))
    M = WeightSequence.gevrey(0)
    small = membership_constant(fixture.function, M, grid, 5)
    large = membership_constant(fixture.function, M, grid, 20)
    assert small == pytest.approx(math.e, rel=1e-12)
    assert large == pytest.approx(small, rel=1e-12)


def test_membership_constant_of_flat_function_is_bounded():
    fixture = gevrey_flat(1.0, 1, 2, (0.5,))
    grid = sector_grid((0.5,))
    M = WeightSequence.gevrey(1)
    constants = [membership_constant(fixture.function, M, grid, J) for J in (5, 10, 20)]
    assert 0 < constants[0] <= constants[1] <= constants[2] < 10


# -- fixtures -------------------------------------------------------------------------------------------


def test_unknown_fixture_lists_available():
    with pytest.raises(ConfigError) as excinfo:
        load_fixture("sin_sum", 1, 2)
    assert excinfo.value.details["field"] == "fixture"
    assert "exp_sum" in excinfo.value.message


def test_fixture_argument_checks():
    with pytest.raises(ConfigError):
        load_fixture("gevrey_flat:1", 1, 2, (1.0,))
    with pytest.raises(ConfigError):
        load_fixture("monomial:1,2", 3, 2)
    with pytest.raises(ConfigError):
        load_fixture("poly:a,b", 1, 2)
    with pytest.raises(ConfigError):
        load_fixture("exp_sum", 2, 2, (1.0,))


def test_fixture_default_openings():
    assert default_opening("gevrey_flat:2") == 1.0
    assert default_opening("exp_sum") == 1.0
    assert load_fixture("gevrey_flat:1", 2, 2).family.openings == (0.5, 0.5)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
