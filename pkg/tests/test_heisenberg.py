import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from edt0l.core import Budget, enumerate_language, validate_system
from edt0l.heisenberg import (
    HEIS_BRUTE_MAX,
    IDENTITY,
    EquationSyntaxError,
    OneVarEquation,
    build_solution_system,
    decode_triples,
    derive_z_system,
    evaluate_at,
    heis_bruteforce,
    invert,
    multiply,
    normalize_word,
    parse_equation,
    word_of,
)

ints = st.integers(-10**6, 10**6)
elements = st.tuples(ints, ints, ints)


def test_multiply():
    assert multiply((0, 1, 0), (1, 0, 0)) == (1, 1, 1)  # b a = a b c
    assert multiply((1, 2, 3), (4, 5, 6)) == (5, 7, 17)
    assert multiply((7, -2, 5), IDENTITY) == (7, -2, 5)


def test_invert():
    assert invert((0, 0, 0)) == (0, 0, 0)
    assert invert((1, 0, 0)) == (-1, 0, 0)
    assert invert((1, 2, 3)) == (-1, -2, -1)


@pytest.mark.parametrize(
    "word, want",
    [
        ("b a", (1, 1, 1)),
        ("b a^-1", (-1, 1, -1)),
        ("b^-1 a^-1 b a", (0, 0, 1)),  # c itself
        ("a^-1 b^-1 a b", (0, 0, -1)),  # its inverse
        ("a a a c^-1 c^-1 b b", (3, 2, -2)),
        ("", (0, 0, 0)),
    ],
)
def test_normalize(word, want):
    assert normalize_word(word.split()) == want


def test_normalize_accepts_text():
    assert normalize_word("b^2 a^3") == (3, 2, 6)
    with pytest.raises(ValueError):
        normalize_word(["d"])


@settings(max_examples=300, derandomize=True)
@given(elements, elements, elements)
def test_group_laws(g, h, k):
    assert multiply(multiply(g, h), k) == multiply(g, multiply(h, k))
    assert multiply(g, invert(g)) == IDENTITY == multiply(invert(g), g)


@settings(max_examples=200, derandomize=True)
@given(st.tuples(*[st.integers(-6, 6)] * 3), st.tuples(*[st.integers(-6, 6)] * 3))
def test_normal_forms_concatenate(g, h):
    assert normalize_word(list(word_of(g) + word_of(h))) == multiply(g, h)


def test_xyx_exponents():
    rng = random.Random(0)
    for _ in range(100):
        x1, x2, x3, y1, y2, y3 = (rng.randint(-9, 9) for _ in range(6))
        w = word_of((x1, x2, x3)) + word_of((y1, y2, y3)) + word_of((x1, x2, x3))
        want = (2 * x1 + y1, 2 * x2 + y2, 2 * x3 + y3 + x1 * y2 + x1 * x2 + y1 * x2)
        assert normalize_word(list(w)) == want


# ----------------------------------------------------------------- parsing


def test_parse_blocks():
    assert parse_equation("X a^2 b^-1 X a b^3 c^-2").blocks == ((1, 2, -1, 0), (1, 1, 3, -2))
    assert parse_equation("X X^-1").blocks == ((1, 0, 0, 0), (-1, 0, 0, 0))
    assert parse_equation("a X").blocks == ((1, 1, 0, 0),)
    assert parse_equation("X a b X^-1 = 1").blocks == ((1, 1, 1, 0), (-1, 0, 0, 0))
    assert parse_equation("X^2 a^0 b").blocks == ((1, 0, 0, 0), (1, 0, 1, 0))
    assert parse_equation("Xa^-1").blocks == ((1, -1, 0, 0),)


def test_constants_normalised_inside_blocks():
    assert parse_equation("X b a").blocks == ((1, 1, 1, 1),)


def test_round_trip_through_text():
    rng = random.Random(5)
    for _ in range(50):
        blocks = tuple((rng.choice((1, -1)), rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(rng.randint(1, 5)))
        eq = OneVarEquation(blocks)
        assert parse_equation(str(eq)) == eq


@pytest.mark.parametrize(
    "text, pos",
    [
        ("a b", 0),
        ("X a^", 3),
        ("X + a", 2),
        ("X = 2", 2),
        ("", 0),
        ("X = 1 a", 2),
    ],
)
def test_parse_errors(text, pos):
    with pytest.raises(EquationSyntaxError) as exc:
        parse_equation(text)
    assert exc.value.position == pos


def test_rotation_keeps_solutions():
    a, b = parse_equation("a X b^-1 X^-1 c"), parse_equation("X b^-1 X^-1 c a")
    assert heis_bruteforce(a, 4) == heis_bruteforce(b, 4)


def test_block_validation():
    with pytest.raises(ValueError):
        OneVarEquation(())
    with pytest.raises(ValueError):
        OneVarEquation(((2, 0, 0, 0),))


# ---------------------------------------------------------------- Z-system


def test_z_system_of_x_equals_one():
    z = derive_z_system(OneVarEquation(((1, 0, 0, 0),)))
    assert (z.eq1, z.eq2, z.eq3) == ((1, 0), (1, 0), (0, 0, 0, 1, 0))


def test_z_system_unsatisfiable():
    z = derive_z_system(parse_equation("X a b X^-1"))
    assert z.eq1 == (0, 1)
    assert heis_bruteforce(parse_equation("X a b X^-1"), 6) == set()


def test_z_system_text():
    assert str(derive_z_system(parse_equation("X^2 a^-2"))).splitlines() == [
        "2*X1 - 2 = 0",
        "2*X2 = 0",
        "X1*X2 - 4*X2 + 2*X3 = 0",
    ]


def test_evaluate_at():
    one = OneVarEquation(((1, 0, 0, 0),))
    assert evaluate_at(one, (0, 0, 0))
    assert not evaluate_at(one, (1, 0, 0))


def test_z_system_pointwise():
    eq = parse_equation("X a X a^-1")
    z = derive_z_system(eq)
    for x in itertools.product(range(-4, 5), repeat=3):
        assert evaluate_at(eq, x) == z.holds(x)


def test_commutator_point():
    # X = (a b)^-1 = b^-1 a^-1, whose normal form carries c^1
    eq = parse_equation("X a b")
    assert heis_bruteforce(eq, 3) == {(-1, -1, 1)}
    assert derive_z_system(eq).holds((-1, -1, 1))


# ------------------------------------------------------------------ systems


def test_case_two_singleton():
    s = build_solution_system("X a^-1")
    assert s.case == 2 and s.point == (1, 0, 0)
    assert enumerate_language(s.system, Budget(3, 10, 10)).words == (("a",),)
    s = build_solution_system(parse_equation("X^2 a^-2"))
    assert s.point == (1, 0, 0)


def test_case_two_empty():
    s = build_solution_system("X^2 a")
    assert s.point is None
    assert enumerate_language(s.system, Budget(5, 50, 50)).words == ()
    assert s.triples_in_box(5) == set()


def test_case_one_free_commutator():
    s = build_solution_system("X X^-1")
    assert s.case == 1
    assert s.triples_in_box(1) == heis_bruteforce(parse_equation("X X^-1"), 1)
    assert len(s.triples_in_box(1)) == 27


def test_case_one_words_are_solutions():
    eq = parse_equation("X a X^-1 a^-1")
    s = build_solution_system(eq)
    assert validate_system(s.system) == []
    got = decode_triples(enumerate_language(s.system, Budget(14, 40, 10**4)).words)
    assert got
    assert all(evaluate_at(eq, x) for x in got)
    assert {(0, 0, 1), (0, 0, -1), (1, 0, 0)} <= got
    assert got <= s.triples_in_box(40)


def test_case_one_empty():
    s = build_solution_system("X a X^-1")
    assert s.case == 1 and s.pairs is None
    assert enumerate_language(s.system, Budget(5, 50, 50)).words == ()


@pytest.mark.parametrize("text", ["X a^-1", "X^2 a^-2", "X a X^-1 a^-1", "X b X^-1 a^2 b^-1 a^-2", "a X b X^-1 c", "X^-1 c X c^-1"])
def test_end_to_end_small(text):
    eq = parse_equation(text)
    assert build_solution_system(eq).triples_in_box(6) == heis_bruteforce(eq, 6)


def test_bruteforce_guard():
    eq = parse_equation("X")
    assert heis_bruteforce(eq, 3) == {(0, 0, 0)}
    with pytest.raises(ValueError):
        heis_bruteforce(eq, HEIS_BRUTE_MAX + 1)


def test_bruteforce_big_constants():
    eq = OneVarEquation(((1, 10**12, 0, 0), (-1, 0, 0, 0)))
    assert heis_bruteforce(eq, 2) == set()
