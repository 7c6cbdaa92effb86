"""EDT0L systems: data model, bounded enumeration, decoding, validation and JSON I/O.

Letters are plain strings.  The inverse of letter ``x`` is the independent
letter ``x + "^-1"``; nothing here ever cancels ``x x^-1``.  Words are tuples
of letter names.  Endomorphisms act on the right, so a control path
``e1 e2 ... ek`` sends ``w`` to ``(...((w e1) e2)...) ek``.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

SEP = "#"
INV = "^-1"

Word = tuple  # tuple[str, ...]


class DomainError(ValueError):
    """A word contains a letter outside the expected alphabet."""


class DecodeError(ValueError):
    """A word does not have the shape required by a decoding template."""


class ParseError(ValueError):
    """Malformed serialized system.  ``location`` is a JSON path or line:col."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


def inverse(letter: str) -> str:
    if letter.endswith(INV):
        return letter[: -len(INV)]
    return letter + INV


def power(letter: str, n: int) -> Word:
    """The word letter^n, using the inverse letter when n < 0."""
    if n >= 0:
        return (letter,) * n
    return (letter + INV,) * (-n)


@dataclass(frozen=True)
class Endomorphism:
    id: str
    images: Mapping[str, Word] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "images", {k: tuple(v) for k, v in self.images.items()})

    def image(self, letter: str) -> Word:
        return self.images.get(letter, (letter,))


@dataclass(frozen=True)
class RationalControl:
    """Finite automaton whose edges are labelled by endomorphism ids."""

    states: frozenset
    initial: str
    accepting: frozenset
    transitions: frozenset  # of (source, endo_id, target)

    def __post_init__(self):
        object.__setattr__(self, "states", frozenset(self.states))
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        object.__setattr__(self, "transitions", frozenset(tuple(t) for t in self.transitions))

    def outgoing(self) -> dict:
        out = defaultdict(list)
        for t in sorted(self.transitions):
            out[t[0]].append((t[1], t[2]))
        return out


@dataclass(frozen=True)
class Edt0lSystem:
    terminal: frozenset
    extended: frozenset
    start: Word
    endos: Mapping[str, Endomorphism]
    control: RationalControl
    separated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terminal", frozenset(self.terminal))
        object.__setattr__(self, "extended", frozenset(self.extended))
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "endos", dict(self.endos))


@dataclass(frozen=True)
class Budget:
    max_path_len: int
    max_form_len: int
    max_words: int

    def __post_init__(self):
        if min(self.max_path_len, self.max_form_len, self.max_words) < 1:
            raise ValueError("budget fields must be >= 1")


class Enumeration(NamedTuple):
    words: tuple  # sorted tuple of words
    complete: bool  # False if some branch was pruned or the word cap was hit


def apply_endomorphism(e: Endomorphism, w: Sequence[str], alphabet: Iterable[str] | None = None) -> Word:
    if alphabet is not None:
        alphabet = set(alphabet)
        for c in w:
            if c not in alphabet:
                raise DomainError(f"letter {c!r} not in alphabet")
    out: list = []
    for c in w:
        out.extend(e.image(c))
    return tuple(out)


def apply_path(sys: Edt0lSystem, path: Sequence[str], w: Sequence[str] | None = None) -> Word:
    w = sys.start if w is None else tuple(w)
    for eid in path:
        w = apply_endomorphism(sys.endos[eid], w)
    return w


def enumerate_language(sys: Edt0lSystem, b: Budget) -> Enumeration:
    """Breadth-first search over (control state, sentential form) pairs.

    A pair first reached at depth d is never re-expanded from a deeper
    occurrence, which is sound because everything reachable from the deeper
    copy within the path budget is reachable from the shallower one too.
    """
    out = sys.control.outgoing()
    term = sys.terminal
    accepting = sys.control.accepting
    found: list = []
    seen_words: set = set()
    complete = True

    start = (sys.control.initial, sys.start)
    if len(sys.start) > b.max_form_len:
        return Enumeration((), False)
    seen = {start}
    level = [start]
    depth = 0
    while level:
        for state, form in level:
            if state in accepting and form not in seen_words and all(c in term for c in form):
                if len(found) >= b.max_words:
                    return Enumeration(tuple(sorted(found)), False)
                seen_words.add(form)
                found.append(form)
        if depth == b.max_path_len:
            if any(out.get(s) for s, _ in level):
                complete = False
            break
        nxt = []
        for state, form in level:
            for eid, target in out.get(state, ()):
                new = apply_endomorphism(sys.endos[eid], form)
                if len(new) > b.max_form_len:
                    complete = False
                    continue
                key = (target, new)
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        nxt.sort()
        level = nxt
        depth += 1
    return Enumeration(tuple(sorted(found)), complete)


def _runs(w: Sequence[str]) -> list:
    runs: list = []
    for c in w:
        if runs and runs[-1][0] == c:
            runs[-1][1] += 1
        else:
            runs.append([c, 1])
    return runs


def _signed_run(block: Sequence[str], base: str) -> int:
    if not block:
        return 0
    if all(c == base for c in block):
        return len(block)
    if all(c == base + INV for c in block):
        return -len(block)
    raise DecodeError(f"block {' '.join(block)!r} is not a power of {base}")


def decode_exponents(w: Sequence[str], template: Sequence[str], separated: bool | None = None) -> tuple:
    """Signed run lengths of ``w`` read against ``template``.

    Separated words (``a^x # b^y``) have one block per template entry between
    ``#`` letters.  Unseparated words (``a^i b^j c^k``) are read block by block
    in template order.  ``separated=None`` picks the mode from the word.
    """
    w = tuple(w)
    if separated is None:
        separated = SEP in w
    if separated:
        parts: list = [[]]
        for c in w:
            if c == SEP:
                parts.append([])
            else:
                parts[-1].append(c)
        if len(parts) != len(template):
            raise DecodeError(f"expected {len(template) - 1} separator(s), found {len(parts) - 1}")
        return tuple(_signed_run(p, base) for p, base in zip(parts, template))
    vals = []
    i = 0
    for base in template:
        j = i
        while j < len(w) and w[j] in (base, base + INV):
            j += 1
        vals.append(_signed_run(w[i:j], base))
        i = j
    if i != len(w):
        raise DecodeError(f"stray letter {w[i]!r} at position {i}")
    return tuple(vals)


def validate_system(sys: Edt0lSystem) -> list:
    v = []
    ext = sys.extended
    for c in sorted(sys.terminal - ext):
        v.append(f"terminal letter {c} not in extended alphabet")
    for c in sys.start:
        if c not in ext:
            v.append(f"start letter {c} not in extended alphabet")
    for eid in sorted(sys.endos):
        e = sys.endos[eid]
        if e.id != eid:
            v.append(f"endomorphism {eid} stored under mismatched id {e.id}")
        for c, img in sorted(e.images.items()):
            if c not in ext:
                v.append(f"endomorphism {eid} maps unknown letter {c}")
            for d in img:
                if d not in ext:
                    v.append(f"image of {c} under {eid} contains unknown letter {d}")
    ctl = sys.control
    if ctl.initial not in ctl.states:
        v.append(f"initial state {ctl.initial} not in states")
    for q in sorted(ctl.accepting - ctl.states):
        v.append(f"accepting state {q} not in states")
    for src, eid, dst in sorted(ctl.transitions):
        if eid not in sys.endos:
            v.append(f"unknown endomorphism {eid}")
        for q in (src, dst):
            if q not in ctl.states:
                v.append(f"transition state {q} not in states")
    if sys.separated:
        s = sys.start
        if len(s) != 3 or s[1] != SEP or SEP in (s[0], s[2]):
            v.append("separated start must have shape x # y")
        if SEP not in ext:
            v.append("separator not in extended alphabet")
        for eid in sorted(sys.endos):
            e = sys.endos[eid]
            if e.image(SEP) != (SEP,):
                v.append(f"separator not fixed by {eid}")
            for c, img in sorted(e.images.items()):
                if c != SEP and SEP in img:
                    v.append(f"image of {c} under {eid} contains separator")
    return v


def canonical_states(sys: Edt0lSystem) -> Edt0lSystem:
    """Rename control states to q0, q1, ... in breadth-first order."""
    ctl = sys.control
    out = ctl.outgoing()
    order = [ctl.initial]
    seen = {ctl.initial}
    i = 0
    while i < len(order):
        for _, t in out.get(order[i], ()):
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    order += sorted(ctl.states - seen, key=str)
    name = {q: f"q{n}" for n, q in enumerate(order)}
    new = RationalControl(
        states=frozenset(name.values()),
        initial=name[ctl.initial],
        accepting=frozenset(name[q] for q in ctl.accepting),
        transitions=frozenset((name[a], e, name[b]) for a, e, b in ctl.transitions),
    )
    return Edt0lSystem(sys.terminal, sys.extended, sys.start, sys.endos, new, sys.separated)


def _state_key(q: str):
    # q10 sorts after q9
    if q[:1] == "q" and q[1:].isdigit():
        return (0, int(q[1:]), q)
    return (1, 0, q)


def system_to_dict(sys: Edt0lSystem) -> dict:
    ctl = sys.control
    return {
        "terminal": sorted(sys.terminal),
        "extended": sorted(sys.extended),
        "start": list(sys.start),
        "endomorphisms": {
            eid: {c: list(img) for c, img in sorted(sys.endos[eid].images.items())} for eid in sorted(sys.endos)
        },
        "control": {
            "states": sorted(ctl.states, key=_state_key),
            "initial": ctl.initial,
            "accepting": sorted(ctl.accepting, key=_state_key),
            "transitions": [list(t) for t in sorted(ctl.transitions, key=lambda t: (_state_key(t[0]), t[1], _state_key(t[2])))],
        },
        "separated": sys.separated,
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1)


def serialize_system(sys: Edt0lSystem) -> str:
    return dumps(system_to_dict(sys))


_FIELDS = ("terminal", "extended", "start", "endomorphisms", "control", "separated")
_CONTROL_FIELDS = ("states", "initial", "accepting", "transitions")


def _str_list(x, loc: str) -> list:
    if not isinstance(x, list) or not all(isinstance(c, str) for c in x):
        raise ParseError("expected an array of strings", loc)
    return x


def system_from_dict(d, extra: Sequence[str] = ()) -> Edt0lSystem:
    if not isinstance(d, dict):
        raise ParseError("expected an object")
    for k in d:
        if k not in _FIELDS and k not in extra:
            raise ParseError(f"unknown field {k!r}", f"$.{k}")
    for k in _FIELDS:
        if k not in d:
            raise ParseError(f"missing field {k!r}", f"$.{k}")
    terminal = _str_list(d["terminal"], "$.terminal")
    extended = _str_list(d["extended"], "$.extended")
    start = _str_list(d["start"], "$.start")
    if not isinstance(d["endomorphisms"], dict):
        raise ParseError("expected an object", "$.endomorphisms")
    endos = {}
    for eid, imgs in d["endomorphisms"].items():
        loc = f"$.endomorphisms.{eid}"
        if not isinstance(imgs, dict):
            raise ParseError("expected an object", loc)
        endos[eid] = Endomorphism(eid, {c: tuple(_str_list(img, f"{loc}.{c}")) for c, img in imgs.items()})
    c = d["control"]
    if not isinstance(c, dict):
        raise ParseError("expected an object", "$.control")
    for k in c:
        if k not in _CONTROL_FIELDS:
            raise ParseError(f"unknown field {k!r}", f"$.control.{k}")
    for k in _CONTROL_FIELDS:
        if k not in c:
            raise ParseError(f"missing field {k!r}", f"$.control.{k}")
    if not isinstance(c["initial"], str):
        raise ParseError("expected a string", "$.control.initial")
    trans = c["transitions"]
    if not isinstance(trans, list):
        raise ParseError("expected an array", "$.control.transitions")
    for i, t in enumerate(trans):
        if not (isinstance(t, list) and len(t) == 3 and all(isinstance(x, str) for x in t)):
            raise ParseError("expected [from, endo-id, to]", f"$.control.transitions[{i}]")
    if not isinstance(d["separated"], bool):
        raise ParseError("expected a boolean", "$.separated")
    ctl = RationalControl(
        frozenset(_str_list(c["states"], "$.control.states")),
        c["initial"],
        frozenset(_str_list(c["accepting"], "$.control.accepting")),
        frozenset(tuple(t) for t in trans),
    )
    return Edt0lSystem(frozenset(terminal), frozenset(extended), tuple(start), endos, ctl, d["separated"])


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}:{exc.colno}") from None


def deserialize_system(text: str) -> Edt0lSystem:
    return system_from_dict(loads(text))
