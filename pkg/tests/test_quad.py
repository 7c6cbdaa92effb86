import random

import pytest
from hypothesis import given, settings, strategies as st

from edt0l.core import Budget, validate_system
from edt0l.ops import annotate, decoded_pairs, finite_set_system
from edt0l.pell import PellInstance, pell_pair_system
from edt0l.quad import (
    BRUTE_MAX,
    CaseTag,
    NotApplicable,
    QuadraticEquation,
    build_pair_system,
    classify_equation,
    lagrange_reduce,
    poly_family,
    quad_bruteforce,
    solutions_in_box,
)

coeff = st.integers(-4, 4)


@pytest.mark.parametrize(
    "coeffs, tag",
    [
        ((1, 0, -2, 0, 0, -1), CaseTag.PellLike),
        ((0, 1, 0, 0, 0, -6), CaseTag.HyperbolicDegenerate),
        ((0, 0, 0, 2, 3, 1), CaseTag.LinearPair),
        ((0, 0, 0, 0, 0, 5), CaseTag.Trivial),
        ((1, 2, 1, 3, 0, 0), CaseTag.Parabolic),
        ((0, 0, 1, 1, 0, 0), CaseTag.Parabolic),
        ((1, 0, 1, 0, 0, -2), CaseTag.NonPositiveD),
        ((1, 0, -1, 0, 0, -3), CaseTag.SquareD),
        ((0, 1, 1, 0, 0, -2), CaseTag.SquareD),
    ],
)
def test_classify(coeffs, tag):
    assert classify_equation(QuadraticEquation.of(coeffs)) is tag


def test_reduction_values():
    r = lagrange_reduce(QuadraticEquation.of((1, 0, -2, 0, 0, -1)))
    assert (r.D, r.E, r.F, r.N) == (8, 0, 4, -32)
    assert r.forward(3, 2) == (16, 6)  # U = 8y, V = 2x
    r = lagrange_reduce(QuadraticEquation.of((1, 0, 1, 0, 0, -1)))
    assert (r.D, r.E, r.F, r.N) == (-4, 0, 4, 16)
    with pytest.raises(NotApplicable):
        lagrange_reduce(QuadraticEquation.of((0, 1, 0, 0, 0, -1)))
    with pytest.raises(NotApplicable):
        lagrange_reduce(QuadraticEquation.of((1, 2, 1, 0, 0, 0)))


def test_reduction_swaps():
    r = lagrange_reduce(QuadraticEquation.of((0, 2, 1, 0, 0, -1)))
    assert r.swapped and r.eq.coeffs == (1, 2, 0, 0, 0, -1)


def test_reduction_is_sound():
    rng = random.Random(3)
    checked = 0
    while checked < 100:
        eq = QuadraticEquation.of([rng.randint(-5, 5) for _ in range(6)])
        try:
            r = lagrange_reduce(eq)
        except NotApplicable:
            continue
        x, y = rng.randint(-30, 30), rng.randint(-30, 30)
        if r.swapped:
            x, y = y, x
        u, v = r.forward(x, y)
        assert (r.eq(x, y) == 0) == (u * u - r.D * v * v == r.N)
        assert r.back(u, v) == (x, y)
        checked += 1


def test_poly_family():
    comps = poly_family(lambda t: t * t - 3, lambda t: 2 * t + 1)
    want = {(t * t - 3, 2 * t + 1) for t in range(-40, 41)}
    got = annotate(comps).pairs_in_box(100)
    assert got == {p for p in want if abs(p[0]) <= 100 and abs(p[1]) <= 100}


def test_pell_box():
    got = solutions_in_box(build_pair_system(QuadraticEquation.of((1, 0, -2, 0, 0, -1))), 100)
    base = {(1, 0), (3, 2), (17, 12), (99, 70)}
    assert got == {(sx * x, sy * y) for x, y in base for sx in (1, -1) for sy in (1, -1)}


def test_hyperbola_divisors():
    got = solutions_in_box(build_pair_system(QuadraticEquation.of((0, 1, 0, 0, 0, -6))), 10)
    assert got == {(1, 6), (2, 3), (3, 2), (6, 1), (-1, -6), (-2, -3), (-3, -2), (-6, -1)}


def test_circle():
    assert solutions_in_box(build_pair_system(QuadraticEquation.of((1, 0, 1, 0, 0, -2))), 5) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
    assert build_pair_system(QuadraticEquation.of((1, 0, 1, 0, 0, -3))).pairs_in_box(100) == set()


def test_trivial_cases():
    assert solutions_in_box(build_pair_system(QuadraticEquation.of((0,) * 6)), 2) == {(x, y) for x in range(-2, 3) for y in range(-2, 3)}
    assert solutions_in_box(build_pair_system(QuadraticEquation.of((0,) * 5 + (1,))), 50) == set()


def test_solutions_in_box_basics():
    assert solutions_in_box(annotate([]), 10) == set()
    assert solutions_in_box(pell_pair_system(PellInstance(2)), 20) == {(1, 0), (3, 2), (17, 12)}
    assert solutions_in_box(finite_set_system({(5, 5)}), 4) == set()


def test_bruteforce_examples():
    assert quad_bruteforce(QuadraticEquation.of((1, 0, 1, 0, 0, -3)), 10) == set()
    assert len(quad_bruteforce(QuadraticEquation.of((0,) * 6), 3)) == 49
    assert quad_bruteforce((0, 0, 0, 1, 0, -2), 2) == {(2, y) for y in range(-2, 3)}
    with pytest.raises(ValueError):
        quad_bruteforce(QuadraticEquation.of((0,) * 6), BRUTE_MAX + 1)


def test_bruteforce_big_coefficients():
    eq = QuadraticEquation.of((10**15, 0, -(10**15), 0, 0, 0))
    assert quad_bruteforce(eq, 30) == {(t, s * t) for t in range(-30, 31) for s in (1, -1)}


def test_systems_validate_and_are_separated():
    rng = random.Random(8)
    for _ in range(40):
        x = build_pair_system(QuadraticEquation.of([rng.randint(-3, 3) for _ in range(6)]))
        assert x.system.separated
        assert validate_system(x.system) == []


def test_decoded_words_solve_the_equation():
    rng = random.Random(9)
    for _ in range(25):
        eq = QuadraticEquation.of([rng.randint(-2, 2) for _ in range(6)])
        x = build_pair_system(eq)
        for p, q in decoded_pairs(x.system, Budget(8, 200, 2000)):
            assert eq(p, q) == 0


@settings(max_examples=150, deadline=None, derandomize=True)
@given(coeff, coeff, coeff, coeff, coeff, coeff)
def test_matches_bruteforce(a, b, g, d, e, z):
    eq = QuadraticEquation(a, b, g, d, e, z)
    assert solutions_in_box(build_pair_system(eq), 60) == quad_bruteforce(eq, 60)
