"""Closure constructions, recurrence systems and division for #-separated systems.

An AnnotatedSystem carries, next to its EDT0L system, the list of components
(finite pair sets and jointly stepped recurrences) whose union is its decoded
language.  Division and box enumeration work on the components; the system is
always rebuilt from them, so the two views cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    INV,
    SEP,
    Budget,
    Edt0lSystem,
    Endomorphism,
    ParseError,
    RationalControl,
    decode_exponents,
    dumps,
    enumerate_language,
    inverse,
    loads,
    power,
    system_from_dict,
    system_to_dict,
)


class ConstructionError(ValueError):
    pass


class ContractError(ValueError):
    pass


Matrix = tuple  # 3 rows of 3 ints


def mat_mul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def mat_vec(A, v):
    return tuple(A[i][0] * v[0] + A[i][1] * v[1] + A[i][2] * v[2] for i in range(3))


def mat_pow(A, n: int):
    R = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    while n:
        if n & 1:
            R = mat_mul(R, A)
        A = mat_mul(A, A)
        n >>= 1
    return R


def same_signed(v) -> bool:
    return all(x >= 0 for x in v) or all(x <= 0 for x in v)


@dataclass(frozen=True)
class RecurrenceSpec:
    """p_n = a1 p + a2 q + a3 r, q_n = b1 p + ..., r_n = g1 p + ... (rows of ``matrix``)."""

    seeds: tuple
    matrix: Matrix

    def __post_init__(self):
        seeds = tuple(int(s) for s in self.seeds)
        matrix = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(seeds) != 3 or len(matrix) != 3 or any(len(r) != 3 for r in matrix):
            raise ConstructionError("recurrence needs 3 seeds and a 3x3 matrix")
        if any(x < 0 for row in matrix for x in row):
            raise ConstructionError("matrix entries must be non-negative")
        if not same_signed(seeds):
            raise ConstructionError("seeds must be all >= 0 or all <= 0")
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "matrix", matrix)

    @property
    def sign(self) -> int:
        return -1 if any(s < 0 for s in self.seeds) else 1

    def state(self, n: int) -> tuple:
        return mat_vec(mat_pow(self.matrix, n), self.seeds)

    def term(self, n: int) -> int:
        return self.state(n)[0]

    def states(self, count: int) -> list:
        out, s = [], self.seeds
        for _ in range(count):
            out.append(s)
            s = mat_vec(self.matrix, s)
        return out

    def terms(self, count: int) -> list:
        return [s[0] for s in self.states(count)]

    def canonical_T(self) -> int | None:
        """T if the matrix is the second-order form built by :func:`second_order`."""
        m = self.matrix
        T = m[2][1] + 2
        if m == ((1, 1, 1), (0, 1, 1), (0, T - 2, T - 1)):
            return T
        return None

    def influence(self) -> list:
        """Coordinates that ever feed p (p itself included)."""
        keep = {0}
        changed = True
        while changed:
            changed = False
            for j in list(keep):
                for i in range(3):
                    if self.matrix[j][i] and i not in keep:
                        keep.add(i)
                        changed = True
        return sorted(keep)


def canonical_matrix(T: int) -> Matrix:
    return ((1, 1, 1), (0, 1, 1), (0, T - 2, T - 1))


def second_order_state(T: int, K: int, t_prev: int, t: int) -> tuple:
    """State (t, t - t_prev, (T-2) t + K) for t_k = T t_{k-1} - t_{k-2} + K."""
    return (t, t - t_prev, (T - 2) * t + K)


def second_order(T: int, K: int, t_prev: int, t: int) -> RecurrenceSpec:
    """Non-negative 3x3 form of t_k = T t_{k-1} - t_{k-2} + K, started at t.

    Valid (same-signed) only once the sequence has stabilised; callers scan
    for that point first.
    """
    if T < 2:
        raise ConstructionError("second-order form needs T >= 2")
    return RecurrenceSpec(second_order_state(T, K, t_prev, t), canonical_matrix(T))


def stabilize_pair(T: int, a: tuple, b: tuple) -> tuple:
    """Scan two second-order sequences sharing T until both states are same-signed.

    ``a`` and ``b`` are (K, previous term, current term).  Returns the finite
    head of pairs before that point and the Recurrent tail from it.
    """
    (Ka, ap, ac), (Kb, bp, bc) = a, b
    head = []
    for _ in range(_STABLE_CAP):
        sa, sb = second_order_state(T, Ka, ap, ac), second_order_state(T, Kb, bp, bc)
        if same_signed(sa) and same_signed(sb):
            m = canonical_matrix(T)
            return head, Recurrent(RecurrenceSpec(sa, m), RecurrenceSpec(sb, m))
        head.append((ac, bc))
        ap, ac = ac, T * ac - ap + Ka
        bp, bc = bc, T * bc - bp + Kb
    raise RuntimeError("sign stabilisation not reached")


_STABLE_CAP = 10_000


def trace_power(T: int, n: int) -> int:
    """Trace of [[T, -1], [1, 0]]^n."""
    a, b = 2, T
    if n == 0:
        return a
    for _ in range(n - 1):
        a, b = b, T * b - a
    return b


@dataclass(frozen=True)
class Finite:
    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(x), int(y)) for x, y in self.pairs))


@dataclass(frozen=True)
class Plane:
    """Every integer pair.  Needed for identically-zero equations; no jointly
    stepped sequence can produce two independent free parameters."""


@dataclass(frozen=True)
class Recurrent:
    """Pairs (p_n of side a, p_n of side b) for n >= 0, stepping both sides together."""

    a: RecurrenceSpec
    b: RecurrenceSpec

    def pairs(self, count: int) -> list:
        return list(zip(self.a.terms(count), self.b.terms(count)))


_BOX_STEP_CAP = 100_000


def _monotone(spec: RecurrenceSpec) -> bool:
    # same-signed states and a1 >= 1 give |p_{n+1}| >= |p_n|
    return spec.matrix[0][0] >= 1


def component_pairs_in_box(comp, B: int) -> set:
    if isinstance(comp, Plane):
        return {(x, y) for x in range(-B, B + 1) for y in range(-B, B + 1)}
    if isinstance(comp, Finite):
        return {(x, y) for x, y in comp.pairs if abs(x) <= B and abs(y) <= B}
    out = set()
    ia, ib = comp.a.influence(), comp.b.influence()
    ma, mb = _monotone(comp.a), _monotone(comp.b)
    sa, sb = comp.a.seeds, comp.b.seeds
    seen = set()
    for _ in range(_BOX_STEP_CAP):
        x, y = sa[0], sb[0]
        if abs(x) <= B and abs(y) <= B:
            out.add((x, y))
        if (ma and abs(x) > B) or (mb and abs(y) > B):
            return out
        key = (tuple(sa[i] for i in ia), tuple(sb[i] for i in ib))
        if key in seen:
            return out
        seen.add(key)
        sa, sb = mat_vec(comp.a.matrix, sa), mat_vec(comp.b.matrix, sb)
    raise RuntimeError("component does not leave the box; cannot enumerate it exactly")


@dataclass(frozen=True)
class AnnotatedSystem:
    system: Edt0lSystem
    components: tuple

    def pairs_in_box(self, B: int) -> set:
        out = set()
        for c in self.components:
            out |= component_pairs_in_box(c, B)
        return out


# ---------------------------------------------------------------- renaming


def _rename_letter(c: str, tag: str) -> str:
    if c.endswith(INV):
        return c[: -len(INV)] + tag + INV
    return c + tag


def rename(sys: Edt0lSystem, tag: str, keep: Iterable[str] = ()) -> Edt0lSystem:
    """Tag every letter outside ``keep``, every endomorphism id and every state."""
    keep = set(keep)

    def r(c):
        return c if c in keep else _rename_letter(c, tag)

    endos = {
        eid + tag: Endomorphism(eid + tag, {r(c): tuple(r(d) for d in img) for c, img in e.images.items()})
        for eid, e in sys.endos.items()
    }
    ctl = sys.control
    q = lambda s: s + tag  # noqa: E731
    new_ctl = RationalControl(
        {q(s) for s in ctl.states},
        q(ctl.initial),
        {q(s) for s in ctl.accepting},
        {(q(a), e + tag, q(b)) for a, e, b in ctl.transitions},
    )
    return Edt0lSystem(
        {r(c) for c in sys.terminal}, {r(c) for c in sys.extended}, tuple(r(c) for c in sys.start), endos, new_ctl, sys.separated
    )


def _merge(parts: Sequence[Edt0lSystem]):
    endos, states, trans, acc, ext, term = {}, set(), set(), set(), set(), set()
    for p in parts:
        endos.update(p.endos)
        states |= p.control.states
        trans |= p.control.transitions
        acc |= p.control.accepting
        ext |= p.extended
        term |= p.terminal
    return endos, states, trans, acc, ext, term


# ------------------------------------------------------ recurrence systems


def _side_letters(letter: str) -> dict:
    return {k: f"{letter}_{k}" for k in "pqr"}


# Entries up to this size are written out letter by letter; larger ones go
# through a chain of doubling steps so that no image outgrows a few letters.
DIRECT_MAX = 64


def _bits(values) -> int:
    """0 if every value fits the direct encoding, else the bit length needed."""
    m = max((abs(v) for v in values), default=0)
    return 0 if m <= DIRECT_MAX else m.bit_length()


def _horner(tag: str, inputs: Sequence[str], outputs: Sequence[str], M, k: int, mirror: bool) -> tuple:
    """k + 1 images turning each input x_j into M[i][j] copies of outputs[i].

    Every input is swapped for an anchor o_j plus one counter w_ij per set
    leading bit; each later step doubles the counters and adds one more where
    the bit is set; the last step drops the anchors and releases the counters.
    """
    anchors = [f"{tag}o{j}" for j in range(len(inputs))]
    w = {(i, j): f"{tag}w{i}{j}" for i in range(len(outputs)) for j in range(len(inputs)) if M[i][j]}
    chain = []
    for b in range(k - 1, -1, -1):
        img = {}
        for j, x in enumerate(inputs):
            fresh = tuple(w[i, j] for i in range(len(outputs)) if (i, j) in w and (M[i][j] >> b) & 1)
            if b == k - 1:
                img[x] = (anchors[j],) + fresh
            else:
                img[anchors[j]] = (anchors[j],) + fresh
        if b != k - 1:
            for c in w.values():
                img[c] = (c, c)
        chain.append(img)
    last = {o: () for o in anchors}
    for (i, _), c in w.items():
        last[c] = (outputs[i],)
    chain.append(last)
    if mirror:
        chain = [{**img, **{inverse(c): tuple(inverse(d) for d in v) for c, v in img.items()}} for img in chain]
    letters = set(anchors) | set(w.values())
    if mirror:
        letters |= {inverse(c) for c in letters}
    return chain, letters


def _seed_chain(spec: RecurrenceSpec, letter: str, bot: str, k: int) -> tuple:
    L = _side_letters(letter)
    names = [L["p"], L["q"], L["r"]]
    if k == 0:
        seed = ()
        for name, s in zip(names, spec.seeds):
            seed += power(name, s)
        return [{bot: seed}], set()
    if spec.sign < 0:
        names = [inverse(n) for n in names]
    M = [[abs(s)] for s in spec.seeds]
    return _horner(f"{letter}_s", [bot], names, M, k, mirror=False)


def _step_chain(spec: RecurrenceSpec, letter: str, k: int) -> tuple:
    L = _side_letters(letter)
    names = [L["p"], L["q"], L["r"]]
    m = spec.matrix
    if k == 0:
        step = {}
        for i, name in enumerate(names):
            # column i: how many of each letter one copy of names[i] produces
            img = ()
            for j, out in enumerate(names):
                img += power(out, m[j][i])
            step[name] = img
            step[inverse(name)] = tuple(inverse(c) for c in img)
        return [step], set()
    return _horner(f"{letter}_m", names, names, m, k, mirror=True)


def _finisher(letter: str) -> dict:
    L = _side_letters(letter)
    fin = {L["p"]: (letter,), inverse(L["p"]): (inverse(letter),)}
    for k in "qr":
        fin[L[k]] = ()
        fin[inverse(L[k])] = ()
    return fin


def _state_letters(letter: str) -> set:
    names = set(_side_letters(letter).values())
    return names | {inverse(n) for n in names} | {letter, inverse(letter)}


def _zip_chains(chains: Sequence[list]) -> list:
    n = max(len(c) for c in chains)
    out = []
    for t in range(n):
        img = {}
        for c in chains:
            if t < len(c):
                img.update(c[t])
        out.append(img)
    return out


def _add_chain(endos: dict, trans: set, states: set, eid: str, chain: list, src: str, dst: str) -> None:
    """Endomorphisms eid, eid.1, ... on a path src -> ... -> dst of fresh states."""
    cur = src
    for t, img in enumerate(chain):
        name = eid if t == 0 else f"{eid}.{t}"
        nxt = dst if t == len(chain) - 1 else f"{src}>{name}"
        endos[name] = Endomorphism(name, img)
        states.add(nxt)
        trans.add((cur, name, nxt))
        cur = nxt


def build_recurrence_system(spec: RecurrenceSpec, letter: str = "a") -> Edt0lSystem:
    """System with control theta phi* psi whose language is {letter^(p_n)}.

    For large entries theta and phi stand for short chains of steps.
    """
    if not isinstance(spec, RecurrenceSpec):
        raise ConstructionError("expected a RecurrenceSpec")
    bot = "⊥"
    seed, l1 = _seed_chain(spec, letter, bot, _bits(spec.seeds))
    step, l2 = _step_chain(spec, letter, _bits(x for row in spec.matrix for x in row))
    endos, trans, states = {}, set(), {"s0", "s1", "s2"}
    _add_chain(endos, trans, states, "theta", seed, "s0", "s1")
    _add_chain(endos, trans, states, "phi", step, "s1", "s1")
    _add_chain(endos, trans, states, "psi", [_finisher(letter)], "s1", "s2")
    ctl = RationalControl(states, "s0", {"s2"}, trans)
    return Edt0lSystem({letter, inverse(letter)}, _state_letters(letter) | l1 | l2 | {bot}, (bot,), endos, ctl)


PAIR_TERMINALS = frozenset({"a", "a^-1", "b", "b^-1", SEP})


def _empty_separated() -> Edt0lSystem:
    ctl = RationalControl({"s0"}, "s0", set(), set())
    return Edt0lSystem(PAIR_TERMINALS, PAIR_TERMINALS | {"⊥1", "⊥2"}, ("⊥1", SEP, "⊥2"), {}, ctl, True)


def recurrent_pair_system(r: Recurrent) -> Edt0lSystem:
    """Separated system for {a^(p_n) # b^(p'_n)}: control theta phi* psi on both sides."""
    ks = _bits(r.a.seeds + r.b.seeds)
    km = _bits([x for s in (r.a, r.b) for row in s.matrix for x in row])
    sa, l1 = _seed_chain(r.a, "a", "⊥1", ks)
    sb, l2 = _seed_chain(r.b, "b", "⊥2", ks)
    ma, l3 = _step_chain(r.a, "a", km)
    mb, l4 = _step_chain(r.b, "b", km)
    endos, trans, states = {}, set(), {"s0", "s1", "s2"}
    _add_chain(endos, trans, states, "theta", _zip_chains([sa, sb]), "s0", "s1")
    _add_chain(endos, trans, states, "phi", _zip_chains([ma, mb]), "s1", "s1")
    _add_chain(endos, trans, states, "psi", [{**_finisher("a"), **_finisher("b")}], "s1", "s2")
    ctl = RationalControl(states, "s0", {"s2"}, trans)
    ext = _state_letters("a") | _state_letters("b") | l1 | l2 | l3 | l4 | {"⊥1", "⊥2", SEP}
    return Edt0lSystem(PAIR_TERMINALS, ext, ("⊥1", SEP, "⊥2"), endos, ctl, True)


def _exponent_chain(bot: str, letter: str, n: int, tag: str) -> list:
    if abs(n) <= DIRECT_MAX:
        return [{bot: power(letter, n)}]
    out = letter if n > 0 else inverse(letter)
    return _horner(tag, [bot], [out], [[abs(n)]], abs(n).bit_length(), mirror=False)[0]


def finite_pair_system(pairs: Iterable) -> Edt0lSystem:
    """One control path per pair: ⊥1 -> a^x, ⊥2 -> b^y (by doubling chains if large)."""
    pairs = sorted(set(pairs))
    endos, trans, states = {}, set(), {"s0", "s1"}
    ext = set(PAIR_TERMINALS) | {"⊥1", "⊥2"}
    for i, (x, y) in enumerate(pairs):
        chain = _zip_chains([_exponent_chain("⊥1", "a", x, "a_x"), _exponent_chain("⊥2", "b", y, "b_y")])
        for img in chain:
            for c, v in img.items():
                ext.add(c)
                ext.update(v)
        _add_chain(endos, trans, states, f"f{i}", chain, "s0", "s1")
    ctl = RationalControl(states, "s0", {"s1"}, trans)
    return Edt0lSystem(PAIR_TERMINALS, ext, ("⊥1", SEP, "⊥2"), endos, ctl, True)


def finite_set_system(pairs: Iterable) -> AnnotatedSystem:
    """One endomorphism per pair: ⊥1 -> a^x, ⊥2 -> b^y."""
    pairs = frozenset(pairs)
    return AnnotatedSystem(finite_pair_system(pairs), (Finite(pairs),))


def plane_system() -> Edt0lSystem:
    """Separated system for {a^x # b^y : x, y in Z}: pick signs, then grow each side alone."""
    P, Pm, Q, Qm = "P", "P^-1", "Q", "Q^-1"
    endos = {}
    trans = set()
    for sx, lp in (("+", P), ("-", Pm)):
        for sy, lq in (("+", Q), ("-", Qm)):
            eid = f"init{sx}{sy}"
            endos[eid] = Endomorphism(eid, {"⊥1": (lp,), "⊥2": (lq,)})
            trans.add(("s0", eid, "s1"))
    for eid, letter, img in (
        ("grow_a", P, ("a", P)),
        ("grow_a^-1", Pm, ("a^-1", Pm)),
        ("grow_b", Q, ("b", Q)),
        ("grow_b^-1", Qm, ("b^-1", Qm)),
    ):
        endos[eid] = Endomorphism(eid, {letter: img})
        trans.add(("s1", eid, "s1"))
    endos["stop"] = Endomorphism("stop", {c: () for c in (P, Pm, Q, Qm)})
    trans.add(("s1", "stop", "s2"))
    ctl = RationalControl({"s0", "s1", "s2"}, "s0", {"s2"}, trans)
    return Edt0lSystem(PAIR_TERMINALS, PAIR_TERMINALS | {"⊥1", "⊥2", P, Pm, Q, Qm}, ("⊥1", SEP, "⊥2"), endos, ctl, True)


def component_system(comp) -> Edt0lSystem:
    if isinstance(comp, Plane):
        return plane_system()
    if isinstance(comp, Finite):
        return finite_pair_system(comp.pairs)
    return recurrent_pair_system(comp)


# ------------------------------------------------------------------ unions


def union_separated_systems(xs: Sequence[Edt0lSystem]) -> Edt0lSystem:
    """Right fold of the binary union: fresh ⊥, $ dispatched by theta1/theta2."""
    for x in xs:
        if not x.separated:
            raise ContractError("union_separated needs #-separated inputs")
    if not xs:
        return _empty_separated()
    shared = set().union(*(x.terminal for x in xs)) | {SEP}
    parts = [rename(x, f"~{i}", keep=shared) for i, x in enumerate(xs)]
    acc = parts[-1]
    for k in range(len(parts) - 2, -1, -1):
        acc = _union2(parts[k], acc, k)
    return acc


def _union2(h1: Edt0lSystem, h2: Edt0lSystem, k: int) -> Edt0lSystem:
    bot, dol = f"⊥^{k}", f"$^{k}"
    t1, t2 = f"theta1^{k}", f"theta2^{k}"
    start = f"u^{k}"
    endos, states, trans, acc, ext, term = _merge([h1, h2])
    endos[t1] = Endomorphism(t1, {bot: (h1.start[0],), dol: (h1.start[2],)})
    endos[t2] = Endomorphism(t2, {bot: (h2.start[0],), dol: (h2.start[2],)})
    states.add(start)
    trans |= {(start, t1, h1.control.initial), (start, t2, h2.control.initial)}
    ctl = RationalControl(states, start, acc, trans)
    return Edt0lSystem(term, ext | {bot, dol, SEP}, (bot, SEP, dol), endos, ctl, True)


def annotate(components: Iterable) -> AnnotatedSystem:
    comps = tuple(c for c in components if not (isinstance(c, Finite) and not c.pairs))
    return AnnotatedSystem(union_separated_systems([component_system(c) for c in comps]), comps)


def union_separated(xs: Sequence[AnnotatedSystem]) -> AnnotatedSystem:
    for x in xs:
        if not x.system.separated:
            raise ContractError("union_separated needs #-separated inputs")
    comps = tuple(c for x in xs for c in x.components)
    return AnnotatedSystem(union_separated_systems([x.system for x in xs]), comps)


def union_systems(x: Edt0lSystem, y: Edt0lSystem) -> Edt0lSystem:
    """L(x) ∪ L(y) via a fresh start letter dispatching to either start word."""
    x = rename(x, "~L", keep=x.terminal)
    y = rename(y, "~R", keep=y.terminal)
    endos, states, trans, acc, ext, term = _merge([x, y])
    z = "Z"
    while z in ext:
        z += "'"
    endos["iota~L"] = Endomorphism("iota~L", {z: x.start})
    endos["iota~R"] = Endomorphism("iota~R", {z: y.start})
    states.add("u")
    trans |= {("u", "iota~L", x.control.initial), ("u", "iota~R", y.control.initial)}
    return Edt0lSystem(term, ext | {z}, (z,), endos, RationalControl(states, "u", acc, trans))


# -------------------------------------------------- concatenation and star


def _copy(sys: Edt0lSystem, tag: str):
    """Copy with every letter tagged (terminals too) and the map back to terminals."""
    c = rename(sys, tag, keep=())
    back = {_rename_letter(t, tag): (t,) for t in sys.terminal}
    return c, back


def concatenate_systems(x: Edt0lSystem, y: Edt0lSystem) -> Edt0lSystem:
    """L(x)L(y): derive the x copy, then the y copy, then strip the tags."""
    cx, bx = _copy(x, "~1")
    cy, by = _copy(y, "~2")
    endos, states, trans, acc, ext, term = _merge([cx, cy])
    endos["join"] = Endomorphism("join", {})
    endos["untag"] = Endomorphism("untag", {**bx, **by})
    for q in cx.control.accepting:
        trans.add((q, "join", cy.control.initial))
    for q in cy.control.accepting:
        trans.add((q, "untag", "end"))
    states.add("end")
    terminal = x.terminal | y.terminal
    ctl = RationalControl(states, cx.control.initial, {"end"}, trans)
    return Edt0lSystem(terminal, ext | terminal, cx.start + cy.start, endos, ctl)


def star_system(x: Edt0lSystem) -> Edt0lSystem:
    """L(x)*: a marker S spawns a fresh copy of the start word before itself.

    A finished copy is moved to the real terminals (which no tagged
    endomorphism touches); unfinished letters become the fail letter F.
    """
    cx, back = _copy(x, "~s")
    S, F = "S", "F"
    while S in cx.extended or S in x.terminal:
        S += "'"
    while F in cx.extended or F in x.terminal:
        F += "'"
    endos, states, trans, acc, ext, term = _merge([cx])
    endos["spawn"] = Endomorphism("spawn", {S: cx.start + (S,)})
    endos["stop"] = Endomorphism("stop", {S: ()})
    fin = dict(back)
    for c in cx.extended:
        if c not in fin:
            fin[c] = (F,)
    endos["finish"] = Endomorphism("finish", fin)
    states |= {"hub", "done"}
    trans |= {("hub", "spawn", cx.control.initial), ("hub", "stop", "done")}
    for q in cx.control.accepting:
        trans.add((q, "finish", "hub"))
    ctl = RationalControl(states, "hub", {"done"}, trans)
    return Edt0lSystem(x.terminal, ext | x.terminal | {S, F}, (S,), endos, ctl)


def map_homomorphism(x: Edt0lSystem, h: Mapping[str, Sequence[str]]) -> Edt0lSystem:
    """h(L(x)) by a final endomorphism applied at every accepting state of x."""
    missing = set(x.terminal) - set(h)
    if missing:
        raise ContractError(f"homomorphism undefined on {sorted(missing)}")
    new_term = {d for img in h.values() for d in img}
    clash = {c for c in x.extended - x.terminal if c in new_term}
    if clash:
        x = rename(x, "~h", keep=x.extended - clash)
    eta = "eta"
    while eta in x.endos:
        eta += "'"
    end = "h_end"
    while end in x.control.states:
        end += "'"
    endos = dict(x.endos)
    endos[eta] = Endomorphism(eta, {c: tuple(img) for c, img in h.items()})
    trans = set(x.control.transitions) | {(q, eta, end) for q in x.control.accepting}
    ctl = RationalControl(x.control.states | {end}, x.control.initial, {end}, trans)
    sep = x.separated and tuple(h.get(SEP, ())) == (SEP,) and not any(SEP in img for c, img in h.items() if c != SEP)
    return Edt0lSystem(new_term, x.extended | new_term, x.start, endos, ctl, sep)


# ---------------------------------------------------------------- division


def _restrict(spec: RecurrenceSpec) -> RecurrenceSpec:
    """Zero the coordinates that never feed p; the p sequence is unchanged."""
    keep = spec.influence()
    if len(keep) == 3:
        return spec
    seeds = tuple(s if i in keep else 0 for i, s in enumerate(spec.seeds))
    m = tuple(tuple(spec.matrix[i][j] if i in keep and j in keep else 0 for j in range(3)) for i in range(3))
    return RecurrenceSpec(seeds, m)


def _mod_state(v, m):
    return tuple(x % m for x in v)


class _Side:
    """One side of a residue class n = r + j*lam, divided by g, as a function of j."""

    def __init__(self, spec: RecurrenceSpec, r: int, lam: int, g: int):
        self.g = g
        T = spec.canonical_T()
        if T is not None:
            t = [spec.term(r + i * lam) for i in range(3)]
            if any(x % g for x in t):
                raise ArithmeticError("residue class not divisible")
            self.T = trace_power(T, lam)
            t = [x // g for x in t]
            self.K = t[2] - self.T * t[1] + t[0]
            self.t0, self.t1 = t[0], t[1]
            self.kind = "second"
        else:
            s = spec.state(r)
            if any(x % g for x in s):
                raise NotImplementedError(
                    "cannot resample: the state at the class start is not divisible as a whole "
                    "and the recurrence is not in second-order form"
                )
            self.kind = "general"
            self.s0 = tuple(x // g for x in s)
            self.A = mat_pow(spec.matrix, lam)

    def states(self):
        """Yield (state at j, spec starting at j) for j = 0, 1, ..."""
        if self.kind == "second":
            prev = self.T * self.t0 - self.t1 + self.K
            cur = self.t0
            while True:
                yield second_order_state(self.T, self.K, prev, cur), ("second", self.T)
                prev, cur = cur, self.T * cur - prev + self.K
        else:
            s = self.s0
            while True:
                yield s, ("general", self.A)
                s = mat_vec(self.A, s)


def _spec_from(state, how) -> RecurrenceSpec:
    if how[0] == "second":
        return RecurrenceSpec(state, canonical_matrix(how[1]))
    return RecurrenceSpec(state, how[1])


_SCAN_CAP = 10_000


def resample_component(r: Recurrent, gamma: int, zeta: int) -> list:
    """Components covering the indices n where gamma | p_n(a) and zeta | p_n(b), divided."""
    if gamma == 0 or zeta == 0:
        raise ContractError("division by zero")
    if gamma == 1 and zeta == 1:
        return [r]
    a, b = _restrict(r.a), _restrict(r.b)
    ga, gb = abs(gamma), abs(zeta)
    # the joint residue sequence is eventually periodic: find preperiod mu and period lam
    first = {}
    sa, sb = _mod_state(a.seeds, ga), _mod_state(b.seeds, gb)
    n = 0
    while (sa, sb) not in first:
        first[(sa, sb)] = n
        sa, sb = _mod_state(mat_vec(a.matrix, sa), ga), _mod_state(mat_vec(b.matrix, sb), gb)
        n += 1
    mu = first[(sa, sb)]
    lam = n - mu
    residues = sorted(first.items(), key=lambda kv: kv[1])
    out = []
    head = set()
    for (ma, mb), idx in residues:
        if ma[0] or mb[0]:
            continue
        if idx < mu:
            head.add((a.term(idx) // gamma, b.term(idx) // zeta))
            continue
        side_a, side_b = _Side(a, idx, lam, gamma), _Side(b, idx, lam, zeta)
        for j, ((xa, ha), (xb, hb)) in enumerate(zip(side_a.states(), side_b.states())):
            if same_signed(xa) and same_signed(xb):
                out.append(Recurrent(_spec_from(xa, ha), _spec_from(xb, hb)))
                break
            head.add((xa[0], xb[0]))
            if j > _SCAN_CAP:
                raise RuntimeError("sign stabilisation not reached")
    if head:
        out.insert(0, Finite(frozenset(head)))
    return out


def divide_separated(x: AnnotatedSystem, gamma: int, zeta: int) -> AnnotatedSystem:
    """{(x/gamma, y/zeta) : (x, y) decoded, gamma | x, zeta | y}, rebuilt from components."""
    if gamma == 0 or zeta == 0:
        raise ContractError("gamma and zeta must be non-zero")
    if not x.system.separated:
        raise ContractError("divide_separated needs a #-separated system")
    comps = []
    for c in x.components:
        if isinstance(c, Plane):
            comps.append(c)
        elif isinstance(c, Finite):
            comps.append(Finite(frozenset((p // gamma, q // zeta) for p, q in c.pairs if p % gamma == 0 and q % zeta == 0)))
        else:
            comps.extend(resample_component(c, gamma, zeta))
    return annotate(_merge_finite(comps))


def _merge_finite(comps):
    fin = set()
    rest = []
    for c in comps:
        if isinstance(c, Finite):
            fin |= c.pairs
        else:
            rest.append(c)
    return ([Finite(frozenset(fin))] if fin else []) + rest


def negate_spec(s: RecurrenceSpec) -> RecurrenceSpec:
    return RecurrenceSpec(tuple(-x for x in s.seeds), s.matrix)


def swap_sides(x: AnnotatedSystem) -> AnnotatedSystem:
    comps = []
    for c in x.components:
        if isinstance(c, Plane):
            comps.append(c)
        elif isinstance(c, Finite):
            comps.append(Finite(frozenset((q, p) for p, q in c.pairs)))
        else:
            comps.append(Recurrent(c.b, c.a))
    return annotate(comps)


# ---------------------------------------------------------------- decoding


def decode_pairs(words: Iterable) -> set:
    return {decode_exponents(w, ("a", "b"), separated=True) for w in words}


def decoded_pairs(sys: Edt0lSystem, budget: Budget) -> set:
    return decode_pairs(enumerate_language(sys, budget).words)


# ----------------------------------------------------------- serialization


def _spec_to_dict(s: RecurrenceSpec) -> dict:
    return {"seeds": list(s.seeds), "matrix": [list(r) for r in s.matrix]}


def _spec_from_dict(d, loc) -> RecurrenceSpec:
    if not isinstance(d, dict) or set(d) != {"seeds", "matrix"}:
        raise ParseError("expected {seeds, matrix}", loc)
    try:
        return RecurrenceSpec(tuple(d["seeds"]), tuple(tuple(r) for r in d["matrix"]))
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), loc) from None


def annotated_to_dict(x: AnnotatedSystem) -> dict:
    d = system_to_dict(x.system)
    comps = []
    for c in x.components:
        if isinstance(c, Plane):
            comps.append({"plane": {}})
        elif isinstance(c, Finite):
            comps.append({"finite": [list(p) for p in sorted(c.pairs)]})
        else:
            comps.append({"recurrent": {"a": _spec_to_dict(c.a), "b": _spec_to_dict(c.b)}})
    d["components"] = comps
    return d


def serialize_annotated(x: AnnotatedSystem) -> str:
    return dumps(annotated_to_dict(x))


def deserialize_annotated(text: str) -> AnnotatedSystem:
    d = loads(text)
    sys = system_from_dict(d, extra=("components",))
    raw = d.get("components", [])
    if not isinstance(raw, list):
        raise ParseError("expected an array", "$.components")
    comps = []
    for i, c in enumerate(raw):
        loc = f"$.components[{i}]"
        if c == {"plane": {}}:
            comps.append(Plane())
        elif isinstance(c, dict) and set(c) == {"finite"} and isinstance(c["finite"], list):
            try:
                comps.append(Finite(frozenset((int(x), int(y)) for x, y in c["finite"])))
            except (TypeError, ValueError):
                raise ParseError("expected [[x, y], ...]", loc) from None
        elif isinstance(c, dict) and set(c) == {"recurrent"} and isinstance(c["recurrent"], dict) and set(c["recurrent"]) == {"a", "b"}:
            r = c["recurrent"]
            comps.append(Recurrent(_spec_from_dict(r["a"], loc + ".a"), _spec_from_dict(r["b"], loc + ".b")))
        else:
            raise ParseError("expected {finite: ...}, {recurrent: {a, b}} or {plane: {}}", loc)
    return AnnotatedSystem(sys, tuple(comps))
