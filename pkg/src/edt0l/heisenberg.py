"""The Heisenberg group in Mal'cev coordinates and its one-variable equations.

Elements are a^i b^j c^k with c = a^-1 b^-1 a b central, so b a = a b c and
the product law is (i, j, k)(l, m, n) = (i + l, j + m, k + n + j l).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .core import INV, Edt0lSystem, Endomorphism, RationalControl, decode_exponents, power
from .ops import concatenate_systems, map_homomorphism, star_system, union_systems
from .quad import QuadraticEquation, build_pair_system


class MalcevElement(NamedTuple):
    i: int
    j: int
    k: int


IDENTITY = MalcevElement(0, 0, 0)


def multiply(g, h) -> MalcevElement:
    i, j, k = g
    l, m, n = h
    return MalcevElement(i + l, j + m, k + n + j * l)


def invert(g) -> MalcevElement:
    i, j, k = g
    return MalcevElement(-i, -j, i * j - k)


def power_of(g, e: int) -> MalcevElement:
    base = g if e >= 0 else invert(g)
    out = IDENTITY
    for _ in range(abs(e)):
        out = multiply(out, base)
    return out


_GENERATOR = {"a": MalcevElement(1, 0, 0), "b": MalcevElement(0, 1, 0), "c": MalcevElement(0, 0, 1)}


def letter_element(sym: str, e: int) -> MalcevElement:
    """a^e, b^e or c^e (powers of one generator need no commutator correction)."""
    g = _GENERATOR[sym]
    return MalcevElement(g.i * e, g.j * e, g.k * e)


class EquationSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"position {position}: {message}")
        self.position = position


@dataclass(frozen=True)
class GroupWord:
    """Tokens (symbol, exponent) with symbol in a, b, c, X and exponent non-zero."""

    tokens: tuple

    def __str__(self) -> str:
        return " ".join(s if e == 1 else f"{s}^{e}" for s, e in self.tokens) or "1"


_TOKEN = re.compile(r"\s*(?:([abcX])(?:\^(-?\d+))?|(=)\s*1\s*$)")


def parse_word(text: str) -> GroupWord:
    """Parse ``term+ ('=' '1')?`` where term is sym or sym^int."""
    tokens = []
    pos = 0
    n = len(text)
    ended = False
    while pos < n:
        if text[pos:].strip() == "":
            break
        if ended:
            raise EquationSyntaxError("unexpected text after '= 1'", pos)
        m = _TOKEN.match(text, pos)
        if not m:
            at = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise EquationSyntaxError(f"unexpected {text[at]!r}", at)
        if m.group(3):
            ended = True
        else:
            e = int(m.group(2)) if m.group(2) is not None else 1
            if e:
                tokens.append((m.group(1), e))
        pos = m.end()
    if not tokens and not ended:
        raise EquationSyntaxError("empty equation", 0)
    return GroupWord(tuple(tokens))


def _letters(word) -> list:
    """Single-letter tokens from a string ("b a^-1"), a GroupWord or letter names."""
    if isinstance(word, str):
        word = parse_word(word)
    if isinstance(word, GroupWord):
        out = []
        for s, e in word.tokens:
            out += [s if e > 0 else s + INV] * abs(e)
        return out
    return list(word)


def normalize_word(letters) -> MalcevElement:
    """Normal form of a word over a, b, c and their inverses."""
    out = IDENTITY
    for x in _letters(letters):
        base = x[: -len(INV)] if x.endswith(INV) else x
        if base not in _GENERATOR:
            raise ValueError(f"not a group letter: {x!r}")
        out = multiply(out, letter_element(base, -1 if x.endswith(INV) else 1))
    return out


class Block(NamedTuple):
    eps: int
    i: int
    j: int
    k: int


@dataclass(frozen=True)
class OneVarEquation:
    """X^eps_1 a^i_1 b^j_1 c^k_1 ... X^eps_n a^i_n b^j_n c^k_n = 1."""

    blocks: tuple

    def __post_init__(self):
        bl = tuple(Block(*b) for b in self.blocks)
        if not bl:
            raise ValueError("an equation needs at least one occurrence of X")
        if any(b.eps not in (1, -1) for b in bl):
            raise ValueError("block signs must be +1 or -1")
        object.__setattr__(self, "blocks", bl)

    def __str__(self) -> str:
        parts = []
        for b in self.blocks:
            parts.append("X" if b.eps == 1 else "X^-1")
            for s, e in zip("abc", b[1:]):
                if e:
                    parts.append(s if e == 1 else f"{s}^{e}")
        return " ".join(parts)


def parse_equation(text: str) -> OneVarEquation:
    """Read an equation in X and bring it to block form.

    Constants in front of the first X are moved to the end: w X ... = 1 and
    X ... w = 1 are conjugate, so they have the same solutions.
    """
    word = parse_word(text)
    toks = list(word.tokens)
    first = next((n for n, (s, _) in enumerate(toks) if s == "X"), None)
    if first is None:
        raise EquationSyntaxError("no occurrence of X", 0)
    toks = toks[first:] + toks[:first]
    blocks = []
    pending = None
    consts: list = []
    for s, e in toks:
        if s == "X":
            for _ in range(abs(e)):
                if pending is not None:
                    blocks.append(Block(pending, *normalize_word(consts)))
                pending, consts = (1 if e > 0 else -1), []
        else:
            consts += [s if e > 0 else s + INV] * abs(e)
    blocks.append(Block(pending, *normalize_word(consts)))
    return OneVarEquation(tuple(blocks))


@dataclass(frozen=True)
class ZSystem:
    """A1 x1 + C1 = 0, A2 x2 + C2 = 0 and c12 x1 x2 + c1 x1 + c2 x2 + c3 x3 + c0 = 0."""

    eq1: tuple
    eq2: tuple
    eq3: tuple

    def holds(self, x) -> bool:
        x1, x2, x3 = x
        A1, C1 = self.eq1
        A2, C2 = self.eq2
        c12, c1, c2, c3, c0 = self.eq3
        return A1 * x1 + C1 == 0 and A2 * x2 + C2 == 0 and c12 * x1 * x2 + c1 * x1 + c2 * x2 + c3 * x3 + c0 == 0

    def __str__(self) -> str:
        (A1, C1), (A2, C2) = self.eq1, self.eq2
        c12, c1, c2, c3, c0 = self.eq3
        return "\n".join(
            _linear_form(zip(cs, names)) + " = 0"
            for cs, names in (
                ((A1, C1), ("X1", "")),
                ((A2, C2), ("X2", "")),
                ((c12, c1, c2, c3, c0), ("X1*X2", "X1", "X2", "X3", "")),
            )
        )


def _linear_form(terms) -> str:
    out = ""
    for c, name in terms:
        if c == 0:
            continue
        mag = str(abs(c)) if abs(c) != 1 or not name else ""
        body = mag + ("*" if mag and name else "") + name
        if not out:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out or "0"


def derive_z_system(eq: OneVarEquation) -> ZSystem:
    """Exponent equations after substituting X = a^x1 b^x2 c^x3 and normalising.

    The c exponent collects x3 or x1 x2 - x3 from each X^eps, each block's k,
    and b-before-a corrections j * i over every ordered pair of factors.
    """
    bl = eq.blocks
    A = sum(b.eps for b in bl)
    c12 = sum(1 for b in bl if b.eps < 0)
    c1 = c2 = c0 = 0
    for r, br in enumerate(bl):
        c0 += br.k
        for s in range(r):
            bs = bl[s]
            c12 += br.eps * bs.eps
            c1 += br.eps * bs.j
            c0 += br.i * bs.j
        for s in range(r + 1):
            c2 += br.i * bl[s].eps
    return ZSystem(
        (A, sum(b.i for b in bl)),
        (A, sum(b.j for b in bl)),
        (c12, c1, c2, A, c0),
    )


def evaluate_at(eq: OneVarEquation, x) -> bool:
    """Substitute x for X and test the product against the identity."""
    x = MalcevElement(*x)
    xi = invert(x)
    g = IDENTITY
    for b in eq.blocks:
        g = multiply(g, x if b.eps == 1 else xi)
        g = multiply(g, (b.i, b.j, b.k))
    return g == IDENTITY


HEIS_BRUTE_MAX = 50


def heis_bruteforce(eq: OneVarEquation, B: int) -> set:
    """All x in [-B, B]^3 with evaluate_at true, evaluated over the whole box at once."""
    if B < 0 or B > HEIS_BRUTE_MAX:
        raise ValueError(f"box bound must lie in [0, {HEIS_BRUTE_MAX}]")
    import numpy as np

    r = np.arange(-B, B + 1, dtype=object if _too_big(eq, B) else np.int64)
    X1, X2, X3 = np.meshgrid(r, r, r, indexing="ij")
    Y1, Y2, Y3 = -X1, -X2, X1 * X2 - X3
    gi = gj = gk = 0
    for b in eq.blocks:
        l, m, n = (X1, X2, X3) if b.eps == 1 else (Y1, Y2, Y3)
        gi, gj, gk = gi + l, gj + m, gk + n + gj * l
        gi, gj, gk = gi + b.i, gj + b.j, gk + b.k + gj * b.i
    hit = (gi == 0) & (gj == 0) & (gk == 0)
    idx = np.argwhere(hit)
    return {(int(p) - B, int(q) - B, int(s) - B) for p, q, s in idx}


def _too_big(eq: OneVarEquation, B: int) -> bool:
    n = len(eq.blocks)
    m = max([B] + [abs(v) for b in eq.blocks for v in b[1:]])
    return (n * m) ** 2 * 4 * (n + 1) > 2**62


# ------------------------------------------------------------------ systems

HEIS_TERMINALS = frozenset({"a", "a^-1", "b", "b^-1", "c", "c^-1"})


def _single_word_system(word: tuple, letters=HEIS_TERMINALS) -> Edt0lSystem:
    """Language {word}: one step from a start letter."""
    ctl = RationalControl({"s0", "s1"}, "s0", {"s1"}, {("s0", "emit", "s1")})
    return Edt0lSystem(letters, letters | {"⊥"}, ("⊥",), {"emit": Endomorphism("emit", {"⊥": word})}, ctl)


def _empty_system() -> Edt0lSystem:
    ctl = RationalControl({"s0"}, "s0", set(), set())
    return Edt0lSystem(HEIS_TERMINALS, HEIS_TERMINALS | {"⊥"}, ("⊥",), {}, ctl)


def _c_powers() -> Edt0lSystem:
    """{c}* ∪ {c^-1}*, i.e. every c^n with n in Z."""
    one = {"c": _single_word_system(("c",), frozenset({"c"})), "c^-1": _single_word_system(("c^-1",), frozenset({"c^-1"}))}
    return union_systems(star_system(one["c"]), star_system(one["c^-1"]))


@dataclass(frozen=True)
class HeisSolution:
    """Solution language of a one-variable equation plus the data that generates it.

    ``system`` is the EDT0L system over a, b, c and inverses.  In the
    Σε = 0 case ``pairs`` is the annotated system for (x1, x2) and x3 is free;
    otherwise ``point`` is the unique solution or None.
    """

    equation: OneVarEquation
    zsystem: ZSystem
    case: int
    system: Edt0lSystem
    pairs: object = None
    point: tuple | None = None

    def triples_in_box(self, B: int) -> set:
        if self.case == 1:
            if self.pairs is None:
                return set()
            return {(x, y, z) for x, y in self.pairs.pairs_in_box(B) for z in range(-B, B + 1)}
        if self.point is None or max(abs(v) for v in self.point) > B:
            return set()
        return {self.point}


def build_solution_system(eq: OneVarEquation) -> HeisSolution:
    if isinstance(eq, str):
        eq = parse_equation(eq)
    z = derive_z_system(eq)
    (A, C1), (_, C2) = z.eq1, z.eq2
    c12, c1, c2, c3, c0 = z.eq3
    if A == 0:
        if C1 or C2:
            return HeisSolution(eq, z, 1, _empty_system())
        pairs = build_pair_system(QuadraticEquation(0, c12, 0, c1, c2, c0))
        h = {t: (t,) for t in ("a", "a^-1", "b", "b^-1")}
        h["#"] = ()
        ab = map_homomorphism(pairs.system, h)
        return HeisSolution(eq, z, 1, concatenate_systems(ab, _c_powers()), pairs=pairs)
    if C1 % A or C2 % A:
        return HeisSolution(eq, z, 2, _empty_system())
    x1, x2 = -C1 // A, -C2 // A
    rest = c12 * x1 * x2 + c1 * x1 + c2 * x2 + c0
    if rest % A:
        return HeisSolution(eq, z, 2, _empty_system())
    pt = (x1, x2, -rest // A)
    word = power("a", pt[0]) + power("b", pt[1]) + power("c", pt[2])
    return HeisSolution(eq, z, 2, _single_word_system(word), point=pt)


def decode_triples(words: Iterable) -> set:
    return {decode_exponents(w, ("a", "b", "c"), separated=False) for w in words}


def word_of(x) -> tuple:
    """Normal-form letter word a^x1 b^x2 c^x3."""
    return power("a", x[0]) + power("b", x[1]) + power("c", x[2])

