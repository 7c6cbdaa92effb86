"""Random inputs shared by the unit and acceptance tests, plus brute-force helpers."""

import math
import random

from edt0l.core import Edt0lSystem, Endomorphism, RationalControl
from edt0l.ops import Finite, RecurrenceSpec, annotate, stabilize_pair


def random_second_order_components(rng: random.Random) -> list:
    """Head pairs and a jointly stepped tail from two random second-order sequences.

    T = 2 is drawn only with non-zero K on both sides: a purely linear side
    needs millions of steps to leave a box of size 10^6.
    """
    T = rng.randint(2, 6)
    lo = 1 if T == 2 else 0
    a = (rng.choice((-1, 1)) * rng.randint(lo, 3), rng.randint(-5, 5), rng.randint(-5, 5))
    b = (rng.choice((-1, 1)) * rng.randint(lo, 3), rng.randint(-5, 5), rng.randint(-5, 5))
    head, tail = stabilize_pair(T, a, b)
    return ([Finite(frozenset(head))] if head else []) + [tail]


def random_annotated(rng: random.Random):
    comps = [Finite(frozenset((rng.randint(-40, 40), rng.randint(-40, 40)) for _ in range(rng.randint(0, 6))))]
    for _ in range(rng.randint(1, 2)):
        comps += random_second_order_components(rng)
    return annotate(comps)


def random_spec(rng: random.Random, top: int = 5) -> RecurrenceSpec:
    sign = rng.choice((1, -1))
    seeds = tuple(sign * rng.randint(0, top) for _ in range(3))
    matrix = tuple(tuple(rng.randint(0, top) for _ in range(3)) for _ in range(3))
    return RecurrenceSpec(seeds, matrix)


def random_system(rng: random.Random) -> Edt0lSystem:
    """Arbitrary small system: random images, random control with shuffled state names."""
    term = {"a", "a^-1", "b"}
    ext = term | {f"x{i}" for i in range(rng.randint(1, 4))}
    letters = sorted(ext)
    endos = {}
    for k in range(rng.randint(1, 4)):
        eid = f"e{k}"
        imgs = {}
        for c in rng.sample(letters, rng.randint(1, len(letters))):
            imgs[c] = tuple(rng.choice(letters) for _ in range(rng.randint(0, 3)))
        endos[eid] = Endomorphism(eid, imgs)
    names = [f"st{rng.randint(0, 10**6)}_{i}" for i in range(rng.randint(1, 5))]
    trans = set()
    for _ in range(rng.randint(1, 8)):
        trans.add((rng.choice(names), rng.choice(sorted(endos)), rng.choice(names)))
    acc = set(rng.sample(names, rng.randint(1, len(names))))
    start = tuple(rng.choice(letters) for _ in range(rng.randint(1, 3)))
    return Edt0lSystem(term, ext, start, endos, RationalControl(set(names), names[0], acc, trans))


def parikh_apply(e: Endomorphism, counts: dict) -> dict:
    """Letter counts of w e from the letter counts of w."""
    out: dict = {}
    for c, n in counts.items():
        for d in e.image(c):
            out[d] = out.get(d, 0) + n
    return {c: n for c, n in out.items() if n}


def pell_brute(D: int, ymax: int = 10**6):
    """Least y >= 1 with 1 + D y^2 a square, by plain search."""
    for y in range(1, ymax + 1):
        v = 1 + D * y * y
        x = math.isqrt(v)
        if x * x == v:
            return x, y
    return None


def genpell_box(D: int, N: int, B: int) -> set:
    out = set()
    for y in range(-B, B + 1):
        v = N + D * y * y
        if v < 0:
            continue
        x = math.isqrt(v)
        if x * x == v and x <= B:
            out.add((x, y))
            out.add((-x, y))
    return out
