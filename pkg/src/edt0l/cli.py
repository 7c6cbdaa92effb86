"""Command-line front end: ``edt0l pell|genpell|quad|heis|enum|verify``.

Exit codes: 0 success, 1 verification mismatch, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .core import Budget, DecodeError, ParseError, decode_exponents, enumerate_language, serialize_system
from .heisenberg import (
    HEIS_BRUTE_MAX,
    EquationSyntaxError,
    OneVarEquation,
    build_solution_system,
    heis_bruteforce,
    parse_equation,
)
from .ops import ContractError, deserialize_annotated, serialize_annotated
from .pell import GenPellInstance, PellInstance, fundamental_solution, genpell_fundamentals, genpell_solutions, pell_solutions
from .quad import BRUTE_MAX, QuadraticEquation, build_pair_system, classify_equation, quad_bruteforce, solutions_in_box


class UsageError(Exception):
    pass


def _lines(rows) -> list:
    rows = sorted(rows)
    if not rows:
        return ["(no solutions)"]
    return [" ".join(str(v) for v in r) for r in rows]


def _emit(path, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _coeffs(text: str) -> QuadraticEquation:
    try:
        vals = [int(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"--coeffs expects six comma-separated integers, got {text!r}") from None
    if len(vals) != 6:
        raise UsageError(f"--coeffs expects six integers, got {len(vals)}")
    return QuadraticEquation.of(vals)


def run_pell(args) -> list:
    inst = PellInstance(args.d)
    f = fundamental_solution(inst)
    return [f"{f.x} {f.y}"] + [f"{s.x} {s.y}" for s in pell_solutions(inst, args.count)]


def run_genpell(args) -> list:
    inst = GenPellInstance(args.d, args.n)
    out = [f"fundamental {c.x0} {c.y0}" for c in genpell_fundamentals(inst)]
    return out + _lines(genpell_solutions(inst, args.box))


def run_quad(args) -> list:
    eq = _coeffs(args.coeffs)
    sys_ = build_pair_system(eq)
    _emit(args.emit_system, serialize_annotated(sys_))
    print(f"case: {classify_equation(eq).value}", file=sys.stderr)
    return _lines(solutions_in_box(sys_, args.box))


def run_heis(args) -> list:
    eq = parse_equation(args.eq)
    sol = build_solution_system(eq)
    _emit(args.emit_system, serialize_system(sol.system))
    head = [f"equation: {eq}", f"case: {sol.case}"] + str(sol.zsystem).splitlines()
    return head + _lines(sol.triples_in_box(args.box))


def run_enum(args) -> list:
    try:
        x = deserialize_annotated(Path(args.system).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(str(e)) from None
    res = enumerate_language(x.system, Budget(args.path_len, args.form_len, args.max_words))
    if args.decode:
        tmpl = tuple(args.decode.split(","))
        try:
            rows = [decode_exponents(w, tmpl) for w in res.words]
        except DecodeError as e:
            raise UsageError(f"cannot decode: {e}") from None
        out = _lines(set(rows))
    else:
        out = [" ".join(w) if w else "(empty word)" for w in res.words] or ["(no words)"]
    if not res.complete:
        print("note: budget exhausted, listing may be partial", file=sys.stderr)
    return out


def random_quadratic(rng: random.Random) -> QuadraticEquation:
    return QuadraticEquation.of([rng.randint(-3, 3) for _ in range(6)])


def random_heis(rng: random.Random) -> OneVarEquation:
    n = rng.randint(1, 6)
    eps = [rng.choice((1, -1)) for _ in range(n)]
    if rng.random() < 0.5 and n > 1:
        # balanced signs, the case with a free X3
        eps = [1, -1] * (n // 2) + ([1] if n % 2 else [])
        rng.shuffle(eps)
    blocks = [[e, rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(-3, 3)] for e in eps]
    if rng.random() < 0.5:
        blocks[-1][1] -= sum(b[1] for b in blocks)
        blocks[-1][2] -= sum(b[2] for b in blocks)
    return OneVarEquation(tuple(tuple(b) for b in blocks))


def run_verify(args) -> tuple:
    rng = random.Random(args.seed)
    limit = BRUTE_MAX if args.mode == "quad" else HEIS_BRUTE_MAX
    if not 0 <= args.box <= limit:
        raise UsageError(f"--box must lie in [0, {limit}] for mode {args.mode}")
    for n in range(args.random):
        if args.mode == "quad":
            eq = random_quadratic(rng)
            got = solutions_in_box(build_pair_system(eq), args.box)
            want = quad_bruteforce(eq, args.box)
            label = ",".join(str(c) for c in eq.coeffs)
        else:
            eq = random_heis(rng)
            got = build_solution_system(eq).triples_in_box(args.box)
            want = heis_bruteforce(eq, args.box)
            label = str(eq)
        if got != want:
            lines = [f"mismatch on case {n}: {label}"]
            lines += [f"  only constructed: {p}" for p in sorted(got - want)[:5]]
            lines += [f"  only brute force: {p}" for p in sorted(want - got)[:5]]
            return lines, 1
    return [f"ok: {args.random} {args.mode} cases agree in box {args.box}"], 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edt0l", description="EDT0L solution languages for Pell, quadratic and Heisenberg equations")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("pell", help="fundamental solution and the first solutions of x^2 - D y^2 = 1")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--count", type=int, default=5)

    s = sub.add_parser("genpell", help="solutions of x^2 - D y^2 = N in a box")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--box", type=int, default=100)

    s = sub.add_parser("quad", help="solutions of a x^2 + b xy + g y^2 + d x + e y + z = 0")
    s.add_argument("--coeffs", required=True, help="a,b,g,d,e,z (write --coeffs=-1,... if the first is negative)")
    s.add_argument("--emit-system", metavar="PATH")
    s.add_argument("--box", type=int, default=20)

    s = sub.add_parser("heis", help="solutions of a one-variable Heisenberg equation")
    s.add_argument("--eq", required=True)
    s.add_argument("--emit-system", metavar="PATH")
    s.add_argument("--box", type=int, default=3)

    s = sub.add_parser("enum", help="enumerate a serialized system within a budget")
    s.add_argument("--system", required=True, metavar="PATH")
    s.add_argument("--path-len", type=int, default=8)
    s.add_argument("--form-len", type=int, default=256)
    s.add_argument("--max-words", type=int, default=100)
    s.add_argument("--decode", metavar="LETTERS", help="print exponents read against base letters, e.g. a,b")

    s = sub.add_parser("verify", help="compare constructions with brute force on random equations")
    s.add_argument("--mode", choices=("quad", "heis"), required=True)
    s.add_argument("--random", type=int, required=True)
    s.add_argument("--box", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    code = 0
    try:
        if args.command == "verify":
            out, code = run_verify(args)
        else:
            out = {
                "pell": run_pell,
                "genpell": run_genpell,
                "quad": run_quad,
                "heis": run_heis,
                "enum": run_enum,
            }[args.command](args)
    except (UsageError, ContractError, EquationSyntaxError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print("\n".join(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
