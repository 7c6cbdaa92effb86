"""Pell and generalised Pell equations, and sign-stabilised linear images of their solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ops import ContractError, Recurrent, stabilize_pair


def is_perfect_square(n: int) -> tuple:
    """(True, root) when n is a square, else (False, None)."""
    if n < 0:
        return False, None
    r = math.isqrt(n)
    return (True, r) if r * r == n else (False, None)


@dataclass(frozen=True)
class PellInstance:
    D: int

    def __post_init__(self):
        if self.D < 2 or is_perfect_square(self.D)[0]:
            raise ContractError(f"D = {self.D} must be >= 2 and not a perfect square")


@dataclass(frozen=True)
class PellSolution:
    x: int
    y: int


@dataclass(frozen=True)
class GenPellInstance:
    D: int
    N: int

    def __post_init__(self):
        PellInstance(self.D)
        if self.N == 0:
            raise ContractError("N must be non-zero")


def _bound_holds(D: int, x: int, y: int) -> bool:
    # log(x + y sqrt D) < sqrt D (log 4D + 2); x, y may be far beyond float range
    lhs = math.log(x) + math.log1p(y / x * math.sqrt(D))
    return lhs < math.sqrt(D) * (math.log(4 * D) + 2)


def fundamental_solution(inst: PellInstance) -> PellSolution:
    """Least solution other than (1, 0), from the continued fraction of sqrt D."""
    D = inst.D
    a0 = math.isqrt(D)
    m, d, a = 0, 1, a0
    h_prev, h = 1, a0
    k_prev, k = 0, 1
    while h * h - D * k * k != 1:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
    assert _bound_holds(D, h, k), "fundamental solution exceeds the size bound"
    return PellSolution(h, k)


def pell_solutions(inst: PellInstance, count: int) -> list:
    if count < 1:
        raise ContractError("count must be >= 1")
    f = fundamental_solution(inst)
    out = [PellSolution(1, 0)]
    x, y = 1, 0
    while len(out) < count:
        x, y = f.x * x + inst.D * f.y * y, f.y * x + f.x * y
        out.append(PellSolution(x, y))
    return out


def forward(D: int, u1: int, v1: int, x: int, y: int) -> tuple:
    return u1 * x + D * v1 * y, v1 * x + u1 * y


def backward(D: int, u1: int, v1: int, x: int, y: int) -> tuple:
    return u1 * x - D * v1 * y, u1 * y - v1 * x


@dataclass(frozen=True)
class SolutionClass:
    """Forward orbit of a fundamental (x0, y0) of x^2 - D y^2 = N under the Pell unit (u1, v1)."""

    D: int
    N: int
    x0: int
    y0: int
    u1: int
    v1: int

    @property
    def fundamental(self) -> tuple:
        return (self.x0, self.y0)

    @property
    def generator(self) -> tuple:
        return (self.u1, self.v1)

    def step(self, x: int, y: int) -> tuple:
        return forward(self.D, self.u1, self.v1, x, y)

    def back(self, x: int, y: int) -> tuple:
        return backward(self.D, self.u1, self.v1, x, y)

    def terms(self, count: int) -> list:
        out, p = [], (self.x0, self.y0)
        for _ in range(count):
            out.append(p)
            p = self.step(*p)
        return out

    def upto(self, bound: int, scale: int = 1) -> list:
        """Orbit members with scale*x, scale*y <= bound (both coordinates grow along the orbit)."""
        out, (x, y) = [], (self.x0, self.y0)
        while scale * x <= bound and scale * y <= bound:
            out.append((x, y))
            x, y = self.step(x, y)
        return out


def pell_class(inst: PellInstance) -> SolutionClass:
    """The Pell solutions themselves as the class of (1, 0) for N = 1."""
    f = fundamental_solution(inst)
    return SolutionClass(inst.D, 1, 1, 0, f.x, f.y)


def _positive(x: int, y: int, D: int) -> bool:
    """x + y sqrt D > 0, decided with integers."""
    if x >= 0 and y >= 0:
        return x > 0 or y > 0
    if x <= 0 and y <= 0:
        return False
    if x > 0:
        return x * x > D * y * y
    return D * y * y > x * x


def _ray_minimum(D: int, u1: int, v1: int, x: int, y: int) -> tuple:
    if not _positive(x, y, D):
        x, y = -x, -y
    while x < 0 or y < 0:
        x, y = forward(D, u1, v1, x, y)
    while True:
        bx, by = backward(D, u1, v1, x, y)
        if bx < 0 or by < 0:
            return x, y
        x, y = bx, by


def _all_fundamentals(D: int, N: int, u1: int, v1: int) -> list:
    """Least non-negative member of every orbit (primitive or not)."""
    if N > 0:
        ymax = math.isqrt(v1 * v1 * N // (2 * (u1 + 1)))
    else:
        ymax = math.isqrt(v1 * v1 * -N // (2 * (u1 - 1)))
    found = set()
    for y in range(ymax + 1):
        ok, x = is_perfect_square(N + D * y * y)
        if not ok:
            continue
        for sx in {x, -x}:
            found.add(_ray_minimum(D, u1, v1, sx, y))
    return sorted(found)


def genpell_fundamentals(inst: GenPellInstance) -> list:
    """Fundamentals of the classes of non-negative primitive solutions."""
    f = fundamental_solution(PellInstance(inst.D))
    return [
        SolutionClass(inst.D, inst.N, x, y, f.x, f.y)
        for x, y in _all_fundamentals(inst.D, inst.N, f.x, f.y)
        if math.gcd(x, y) == 1
    ]


def lifts(N: int) -> list:
    """All k >= 1 with k^2 | N."""
    out, k = [], 1
    while k * k <= abs(N):
        if N % (k * k) == 0:
            out.append(k)
        k += 1
    return out


def genpell_solutions(inst: GenPellInstance, bound: int) -> set:
    """All integer (x, y) with |x|, |y| <= bound and x^2 - D y^2 = N."""
    if bound < 0:
        raise ContractError("bound must be >= 0")
    out = set()
    for k in lifts(inst.N):
        for cls in genpell_fundamentals(GenPellInstance(inst.D, inst.N // (k * k))):
            for x, y in cls.upto(bound, k):
                for sx in (1, -1):
                    for sy in (1, -1):
                        out.add((sx * k * x, sy * k * y))
    return out


@dataclass(frozen=True)
class LinearImageSpec:
    """t_n = alpha x_n + beta y_n + gamma and s_n = delta x_n + epsilon y_n + zeta on one orbit.

    ``head`` holds (t_n, s_n) for n < M; from M on ``tail`` generates the pairs
    and both sequences are sign-constant with non-decreasing absolute value.
    """

    coeffs: tuple
    M: int
    head: tuple
    tail: Recurrent

    def pairs(self, count: int) -> list:
        return list(self.head[:count]) + self.tail.pairs(max(0, count - len(self.head)))


def stabilized_linear_image(stream, coeffs) -> LinearImageSpec:
    """Head/tail decomposition of an affine image of a Pell or class orbit.

    Both sides satisfy t_n = T t_{n-1} - t_{n-2} + K with T = 2 u1 and
    K = (2 - T) * constant, which the non-negative (t, t - t_prev, (T-2) t + K)
    form carries.  M is the first index where both of those states are
    same-signed; from there on they stay so.
    """
    if isinstance(stream, PellInstance):
        stream = pell_class(stream)
    al, be, ga, de, ep, ze = coeffs
    T = 2 * stream.u1
    prev = stream.back(stream.x0, stream.y0)
    cur = (stream.x0, stream.y0)

    def f(p):
        return al * p[0] + be * p[1] + ga

    def g(p):
        return de * p[0] + ep * p[1] + ze

    head, tail = stabilize_pair(T, ((2 - T) * ga, f(prev), f(cur)), ((2 - T) * ze, g(prev), g(cur)))
    return LinearImageSpec(tuple(coeffs), len(head), tuple(head), tail)


def pell_pair_system(inst: PellInstance):
    """Annotated system for {a^x # b^y : (x, y) a non-negative Pell solution}.

    Both sides run the (x, y) recurrence itself, a-side state (x, y, 0) and
    b-side state (y, x, 0), so solution n comes from theta phi^n psi.
    """
    from .ops import RecurrenceSpec, annotate

    f = fundamental_solution(inst)
    u, v, D = f.x, f.y, inst.D
    a = RecurrenceSpec((1, 0, 0), ((u, D * v, 0), (v, u, 0), (0, 0, 0)))
    b = RecurrenceSpec((0, 1, 0), ((u, v, 0), (D * v, u, 0), (0, 0, 0)))
    return annotate([Recurrent(a, b)])


def pell_language_system(inst: PellInstance):
    """{a^x # a^y : x^2 - D y^2 = 1, x, y >= 0} with start a_x # a_x~ and control phi* theta.

    Left of # the letters a_x, a_y~ count (x_n, y_n); right of # the letters
    a_x~, a_y count the same pair.  theta keeps a_x on the left and a_y on the
    right, so solution n costs n + 1 control steps.
    """
    from .core import SEP, Edt0lSystem, Endomorphism, RationalControl

    f = fundamental_solution(inst)
    u, v, D = f.x, f.y, inst.D
    ax, axb, ay, ayb = "a_x", "a_x~", "a_y", "a_y~"
    phi = Endomorphism(
        "phi",
        {
            ax: (ax,) * u + (ayb,) * v,
            axb: (axb,) * u + (ay,) * v,
            ay: (axb,) * (D * v) + (ay,) * u,
            ayb: (ax,) * (D * v) + (ayb,) * u,
        },
    )
    theta = Endomorphism("theta", {ax: ("a",), ay: ("a",), axb: (), ayb: ()})
    ctl = RationalControl({"q0", "q1"}, "q0", {"q1"}, {("q0", "phi", "q0"), ("q0", "theta", "q1")})
    return Edt0lSystem({"a", SEP}, {ax, axb, ay, ayb, "a", SEP}, (ax, SEP, axb), {"phi": phi, "theta": theta}, ctl, True)
