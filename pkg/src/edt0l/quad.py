"""Two-variable integer quadratics: case dispatch, Lagrange reduction and pair systems.

Every case ends in a list of components (finite sets, jointly stepped
recurrences, or the whole plane), so the decoded language and the box
enumeration come from the same data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .ops import (
    AnnotatedSystem,
    Finite,
    Plane,
    annotate,
    divide_separated,
    stabilize_pair,
    swap_sides,
)
from .pell import GenPellInstance, genpell_fundamentals, is_perfect_square, lifts, stabilized_linear_image


class NotApplicable(ValueError):
    """Lagrange reduction needs alpha != 0 (after a swap) and D != 0."""


class CaseTag(enum.Enum):
    PellLike = "PellLike"
    SquareD = "SquareD"
    NonPositiveD = "NonPositiveD"
    Parabolic = "Parabolic"
    HyperbolicDegenerate = "HyperbolicDegenerate"
    LinearPair = "LinearPair"
    Trivial = "Trivial"


@dataclass(frozen=True)
class QuadraticEquation:
    """alpha x^2 + beta xy + gamma y^2 + delta x + epsilon y + zeta = 0."""

    alpha: int
    beta: int
    gamma: int
    delta: int
    epsilon: int
    zeta: int

    @classmethod
    def of(cls, coeffs) -> "QuadraticEquation":
        return cls(*(int(c) for c in coeffs))

    @property
    def coeffs(self) -> tuple:
        return (self.alpha, self.beta, self.gamma, self.delta, self.epsilon, self.zeta)

    def __call__(self, x: int, y: int) -> int:
        a, b, g, d, e, z = self.coeffs
        return a * x * x + b * x * y + g * y * y + d * x + e * y + z

    def swapped(self) -> "QuadraticEquation":
        a, b, g, d, e, z = self.coeffs
        return QuadraticEquation(g, b, a, e, d, z)


@dataclass(frozen=True)
class LagrangeReduction:
    """U = D y + E, V = 2 alpha x + beta y + delta turn the equation into U^2 - D V^2 = N."""

    eq: QuadraticEquation  # after the swap, if any
    D: int
    E: int
    F: int
    N: int
    swapped: bool

    def forward(self, x: int, y: int) -> tuple:
        a, b, _, d, _, _ = self.eq.coeffs
        return self.D * y + self.E, 2 * a * x + b * y + d

    def back(self, u: int, v: int):
        """(x, y) in the reduced equation's variable order, or None if not integral."""
        return _back(self.eq, self.D, self.E, u, v)


def _back(eq: QuadraticEquation, D: int, E: int, u: int, v: int):
    a, b, _, d, _, _ = eq.coeffs
    ny = u - E
    nx = D * v - b * u + b * E - d * D
    if ny % D or nx % (2 * a * D):
        return None
    return nx // (2 * a * D), ny // D


def _invariants(eq: QuadraticEquation) -> tuple:
    a, b, g, d, e, z = eq.coeffs
    D = b * b - 4 * a * g
    E = b * d - 2 * a * e
    F = d * d - 4 * a * z
    return D, E, F, E * E - D * F


def lagrange_reduce(eq: QuadraticEquation) -> LagrangeReduction:
    swapped = False
    if eq.alpha == 0:
        if eq.gamma == 0:
            raise NotApplicable("alpha = gamma = 0: no square term to complete")
        eq, swapped = eq.swapped(), True
    D, E, F, N = _invariants(eq)
    if D == 0:
        raise NotApplicable("D = 0: parabolic case")
    return LagrangeReduction(eq, D, E, F, N, swapped)


def classify_equation(eq: QuadraticEquation) -> CaseTag:
    a, b, g, d, e, _ = eq.coeffs
    if a == b == g == 0:
        return CaseTag.Trivial if d == e == 0 else CaseTag.LinearPair
    if a == 0 and g == 0:
        return CaseTag.HyperbolicDegenerate
    if a == 0:
        eq = eq.swapped()
    D, _, _, N = _invariants(eq)
    if D == 0:
        return CaseTag.Parabolic
    if D < 0:
        return CaseTag.NonPositiveD
    if is_perfect_square(D)[0]:
        return CaseTag.SquareD
    return CaseTag.PellLike


# ------------------------------------------------------------ families


def poly_family(fx, fy) -> list:
    """Components for {(fx(t), fy(t)) : t in Z}, fx and fy of degree <= 2.

    Both halves t >= 0 and t = -1 - s (s >= 0) satisfy f_k = 2 f_{k-1} - f_{k-2} + K
    with K the constant second difference.
    """
    Kx = fx(1) - 2 * fx(0) + fx(-1)
    Ky = fy(1) - 2 * fy(0) + fy(-1)
    head_p, tail_p = stabilize_pair(2, (Kx, fx(-1), fx(0)), (Ky, fy(-1), fy(0)))
    head_n, tail_n = stabilize_pair(2, (Kx, fx(0), fx(-1)), (Ky, fy(0), fy(-1)))
    head = head_p + head_n
    return ([Finite(frozenset(head))] if head else []) + [tail_p, tail_n]


def _divisors(n: int) -> list:
    """Positive divisors of n != 0."""
    n = abs(n)
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


def _signed_divisors(n: int) -> list:
    ds = _divisors(n)
    return ds + [-d for d in ds]


def _ext_gcd(a: int, b: int) -> tuple:
    """(g, s, t) with s a + t b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


# --------------------------------------------------------------- cases


def _linear(d: int, e: int, z: int) -> list:
    """d x + e y + z = 0 with (d, e) != (0, 0)."""
    g, s, t = _ext_gcd(d, e)
    if z % g:
        return []
    m = -z // g
    x0, y0 = s * m, t * m
    dx, dy = e // g, -d // g
    return poly_family(lambda k: x0 + k * dx, lambda k: y0 + k * dy)


def _hyperbolic(eq: QuadraticEquation) -> list:
    _, b, _, d, e, z = eq.coeffs
    R = e * d - b * z
    if R:
        pts = set()
        for p in _signed_divisors(R):
            q = R // p
            if (p - e) % b == 0 and (q - d) % b == 0:
                pts.add(((p - e) // b, (q - d) // b))
        return [Finite(frozenset(pts))]
    comps = []
    if e % b == 0:
        x0 = -e // b
        comps += poly_family(lambda k: x0, lambda k: k)
    if d % b == 0:
        y0 = -d // b
        comps += poly_family(lambda k: k, lambda k: y0)
    return comps


def _parabolic(eq: QuadraticEquation, E: int, F: int) -> list:
    """V^2 = 2 E y + F with V = 2 alpha x + beta y + delta."""
    a, b, _, d, _, _ = eq.coeffs

    def x_of(v, y):
        n = v - b * y - d
        return None if n % (2 * a) else n // (2 * a)

    comps = []
    if E == 0:
        ok, r = is_perfect_square(F)
        if not ok:
            return []
        L = 2 * abs(a)
        for v in {r, -r}:
            for y0 in range(L):
                if x_of(v, y0) is None:
                    continue
                comps += poly_family(lambda k, v=v, y0=y0: x_of(v, y0 + L * k), lambda k, y0=y0: y0 + L * k)
        return comps
    # y and x are integral along v + L k whenever they are at v
    L = 4 * abs(a * E)
    for v0 in range(L):
        if (v0 * v0 - F) % (2 * E):
            continue
        y = (v0 * v0 - F) // (2 * E)
        if x_of(v0, y) is None:
            continue

        def fy(k, v0=v0):
            v = v0 + L * k
            return (v * v - F) // (2 * E)

        def fx(k, v0=v0, fy=fy):
            return x_of(v0 + L * k, fy(k))

        comps += poly_family(fx, fy)
    return comps


def _finite_from_uv(red_eq, D, E, uvs) -> list:
    pts = set()
    for u, v in uvs:
        p = _back(red_eq, D, E, u, v)
        if p is not None:
            pts.add(p)
    return [Finite(frozenset(pts))]


def _non_positive(red_eq, D, E, N) -> list:
    # U^2 + |D| V^2 = N
    uvs = []
    if N >= 0:
        v = 0
        while -D * v * v <= N:
            ok, u = is_perfect_square(N + D * v * v)
            if ok:
                uvs += [(s * u, t * v) for s in (1, -1) for t in (1, -1)]
            v += 1
    return _finite_from_uv(red_eq, D, E, uvs)


def _square(red_eq, D, E, N) -> list:
    r = math.isqrt(D)
    if N:
        # (U - r V)(U + r V) = N
        uvs = []
        for p in _signed_divisors(N):
            q = N // p
            if (p + q) % 2 == 0 and (q - p) % (2 * r) == 0:
                uvs.append(((p + q) // 2, (q - p) // (2 * r)))
        return _finite_from_uv(red_eq, D, E, uvs)
    # U = +-r V: the admissible V form residue classes mod 2 |alpha| D
    L = 2 * abs(red_eq.alpha) * D
    comps = []
    for s in (1, -1):
        for v0 in range(L):
            if _back(red_eq, D, E, s * r * v0, v0) is None:
                continue
            comps += poly_family(
                lambda k, s=s, v0=v0: _back(red_eq, D, E, s * r * (v0 + L * k), v0 + L * k)[0],
                lambda k, s=s, v0=v0: _back(red_eq, D, E, s * r * (v0 + L * k), v0 + L * k)[1],
            )
    return comps


def _pell_like(red_eq, D, E, N) -> AnnotatedSystem:
    if N == 0:
        return annotate(_finite_from_uv(red_eq, D, E, [(0, 0)]))
    _, b, _, d, _, _ = red_eq.coeffs
    comps = []
    for k in lifts(N):
        for cls in genpell_fundamentals(GenPellInstance(D, N // (k * k))):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    # numerators of x and y before dividing by 2 alpha D and D
                    spec = stabilized_linear_image(
                        cls, (-b * s1 * k, D * s2 * k, b * E - d * D, s1 * k, 0, -E)
                    )
                    if spec.head:
                        comps.append(Finite(frozenset(spec.head)))
                    comps.append(spec.tail)
    return divide_separated(annotate(_merge_heads(comps)), 2 * red_eq.alpha * D, D)


def _merge_heads(comps) -> list:
    fin = set()
    rest = []
    for c in comps:
        if isinstance(c, Finite):
            fin |= c.pairs
        elif c not in rest:
            rest.append(c)
    return ([Finite(frozenset(fin))] if fin else []) + rest


def build_pair_system(eq: QuadraticEquation) -> AnnotatedSystem:
    """Annotated #-separated system whose decoded pairs are exactly the solutions of ``eq``."""
    if not isinstance(eq, QuadraticEquation):
        eq = QuadraticEquation.of(eq)
    a, b, g, d, e, z = eq.coeffs
    if a == b == g == 0:
        if d == e == 0:
            return annotate([Plane()] if z == 0 else [])
        return annotate(_merge_heads(_linear(d, e, z)))
    if a == 0 and g == 0:
        return annotate(_merge_heads(_hyperbolic(eq)))
    if a == 0:
        return swap_sides(build_pair_system(eq.swapped()))
    D, E, F, N = _invariants(eq)
    if D == 0:
        return annotate(_merge_heads(_parabolic(eq, E, F)))
    if D < 0:
        return annotate(_merge_heads(_non_positive(eq, D, E, N)))
    if is_perfect_square(D)[0]:
        return annotate(_merge_heads(_square(eq, D, E, N)))
    return _pell_like(eq, D, E, N)


def solutions_in_box(sys: AnnotatedSystem, B: int) -> set:
    return sys.pairs_in_box(B)


BRUTE_MAX = 10_000


def quad_bruteforce(eq: QuadraticEquation, B: int) -> set:
    """Every (x, y) with |x|, |y| <= B solving ``eq``."""
    if not isinstance(eq, QuadraticEquation):
        eq = QuadraticEquation.of(eq)
    if B < 0 or B > BRUTE_MAX:
        raise ValueError(f"box bound must lie in [0, {BRUTE_MAX}]")
    worst = sum(abs(c) for c in eq.coeffs) * max(1, B) ** 2
    if worst < 2**62:
        import numpy as np

        r = np.arange(-B, B + 1, dtype=np.int64)
        X, Y = np.meshgrid(r, r, indexing="ij")
        a, b, g, d, e, z = eq.coeffs
        vals = a * X * X + b * X * Y + g * Y * Y + d * X + e * Y + z
        xs, ys = np.nonzero(vals == 0)
        return {(int(i) - B, int(j) - B) for i, j in zip(xs, ys)}
    return {(x, y) for x in range(-B, B + 1) for y in range(-B, B + 1) if eq(x, y) == 0}
