"""Fidelity mode for division: the indexed-alphabet construction, run lazily.

The divided system replaces every hatted letter c^nu (nu a word over {¢, $},
|nu| <= |gamma|) and every endomorphism phi by the family Phi_phi of all ways
to hand the indices of c^nu, plus optionally one fresh bundle of one $ and
|gamma| - 1 ¢, to the letters of c phi.  A final theta keeps $-indexed
terminals and erases ¢-indexed ones; anything else fails.

Two things differ from a literal materialisation:

* Phi_phi is never built.  For a fixed control path, whether some choice of
  psi_1 in Phi_phi1, psi_2 in Phi_phi2, ... avoids the fail letter is a
  question about each letter's derivation subtree, so it is answered by
  memoised dynamic programming over (letter, step).  Only the counts of ¢ and
  $ matter, since every ordering of an index word behaves the same way.
* Images longer than two letters are split into a balanced binary tree of
  sub-steps first.  A letter can receive at most one bundle per step, so
  without the split a single step such as ⊥ -> a^6 with |gamma| = 3 needs six
  indices but can only be given three, and the construction would lose words.
  With binary images the greedy choice "carry (leaves mod |gamma|)" always
  works, so no divisible word is lost.
"""

from __future__ import annotations

from functools import lru_cache

from .core import SEP, Budget, Edt0lSystem, Endomorphism, Enumeration, apply_endomorphism, inverse

MAX_FIDELITY = 3

_ID = Endomorphism("id", {})


def _levels(m: int) -> int:
    h = 1
    while (1 << h) < m:
        h += 1
    return h


def _side_outputs(root: str, steps: list, terminal: frozenset, g: int, h: int) -> frozenset:
    """Words reachable from hatted ``root`` (index empty) through ``steps`` then theta."""
    nsteps = len(steps)

    def combine(children):
        acc = {(0, 0): {()}}
        for ch in children:
            nxt = {}
            for (c1, s1), w1 in acc.items():
                for (c2, s2), w2 in ch.items():
                    key = (c1 + c2, s1 + s2)
                    if key[0] + key[1] > 2 * g:
                        continue
                    bucket = nxt.setdefault(key, set())
                    for u in w1:
                        for v in w2:
                            bucket.add(u + v)
            acc = nxt
        out = {}
        for c in range(g + 1):
            for s in range(g + 1 - c):
                words = set(acc.get((c, s), ())) | set(acc.get((c + g - 1, s + 1), ()))
                if words:
                    out[(c, s)] = frozenset(words)
        return out

    @lru_cache(maxsize=None)
    def letter(c: str, t: int):
        if t == nsteps:
            if c in terminal:
                return {(0, 1): frozenset({(c,)}), (1, 0): frozenset({()})}
            return {}
        img = steps[t].image(c)
        if not img:
            return {(0, 0): frozenset({()})}
        if h == 1:
            return combine([letter(d, t + 1) for d in img])
        return combine([segment(u, t, h - 1) for u in _halves(img)])

    @lru_cache(maxsize=None)
    def segment(u: tuple, t: int, lv: int):
        if lv == 1:
            return combine([letter(d, t + 1) for d in u])
        return combine([segment(v, t, lv - 1) for v in _halves(u)])

    return letter(root, 0).get((0, 0), frozenset())


def _halves(u: tuple) -> list:
    if len(u) <= 1:
        return [u]
    k = (len(u) + 1) // 2
    return [u[:k], u[k:]]


def _flip(words, base: str):
    sw = {base: inverse(base), inverse(base): base}
    return {tuple(sw.get(c, c) for c in w) for w in words}


def divide_fidelity(sys: Edt0lSystem, gamma: int, zeta: int, budget: Budget) -> Enumeration:
    """Words of the divided system whose underlying control path fits ``budget``.

    The path and form limits are measured on the original system, one unit per
    original control step.
    """
    if gamma == 0 or zeta == 0:
        raise ValueError("gamma and zeta must be non-zero")
    if abs(gamma) > MAX_FIDELITY or abs(zeta) > MAX_FIDELITY:
        raise ValueError(f"fidelity mode supports |gamma|, |zeta| <= {MAX_FIDELITY}")
    if not sys.separated:
        raise ValueError("fidelity division needs a #-separated system")
    left, _, right = sys.start
    maxlen = max((len(img) for e in sys.endos.values() for img in e.images.values()), default=1)
    h = _levels(max(2, maxlen))
    out = sys.control.outgoing()
    acc = sys.control.accepting
    words: set = set()
    complete = True
    stack = [(sys.control.initial, sys.start, ())]
    while stack:
        state, form, path = stack.pop()
        if state in acc and all(c in sys.terminal for c in form):
            steps = [sys.endos[e] for e in path]
            a_side = _run_side(left, steps, [], sys.terminal, gamma, h, "a")
            extra = ([_ID] if abs(gamma) > 1 else []) + ([_ID] if gamma < 0 else [])
            b_side = _run_side(right, steps, extra, sys.terminal, zeta, h, "b") if a_side else set()
            for A in a_side:
                for B in b_side:
                    words.add(A + (SEP,) + B)
                    if len(words) > budget.max_words:
                        return Enumeration(tuple(sorted(words)[: budget.max_words]), False)
        if len(path) == budget.max_path_len:
            if out.get(state):
                complete = False
            continue
        for eid, target in out.get(state, ()):
            new = apply_endomorphism(sys.endos[eid], form)
            if len(new) > budget.max_form_len:
                complete = False
                continue
            stack.append((target, new, path + (eid,)))
    return Enumeration(tuple(sorted(words)), complete)


def _run_side(root, steps, extra, terminal, g, h, base):
    if abs(g) == 1:
        w = (root,)
        for e in steps + extra:
            w = apply_endomorphism(e, w)
        res = {w} if all(c in terminal for c in w) else set()
    else:
        res = set(_side_outputs(root, steps + extra, frozenset(terminal), abs(g), h))
    return _flip(res, base) if g < 0 else res
