"""Command-line front end.

Every command reads and writes JSON.  Exit status is 0 on success, 1 on a
domain error (reported on stderr as {"error": {"code", "message"}}) and 2 on
a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .belitskii import canonicalize
from .decompose import krull_schmidt
from .errors import CanonError, ParseError
from .field import get_field
from .linalg import matrix_from_json, matrix_to_json
from .oracle import DEFAULT_BUDGET, enumerate_canonical
from .problems import (ProblemSpec, kronecker_problem, module_problem, poset_problem, problem_from_json,
                       simsim_problem, upper_triangular_problem, wasow_problem)
from .algebra import ReducedAlgebra
from .weyr import commutant_algebra, weyr_form


def _load(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})") from None


def _emit(data) -> None:
    sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _parse_dims(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"bad --dims value {text!r}") from None


def _problem(args) -> ProblemSpec:
    return problem_from_json(_load(args.problem), args.field)


def _sizes(spec: ProblemSpec, args, mdata=None) -> tuple[int, ...]:
    dims = _parse_dims(getattr(args, "dims", None))
    if dims is None and isinstance(mdata, dict):
        dims = mdata.get("dims") or mdata.get("sizes")
    if dims is not None:
        return spec.sizes_from_dims(dims)
    if spec.kind == "simsim":
        n = int(spec.meta["n"])
        return (n, n)
    if spec.t == 1 and isinstance(mdata, dict) and "rows" in mdata:
        return (int(mdata["rows"]),)
    raise ParseError("strip sizes are needed: pass --dims or a \"dims\" key in the matrix file")


def _matrix(path: str, spec: ProblemSpec):
    data = _load(path)
    return matrix_from_json(data, spec.field), data


def cmd_weyr(args) -> int:
    data = _load(args.matrix)
    field = get_field(args.field) if args.field else None
    a = matrix_from_json(data, field)
    form = weyr_form(a)
    s = form.structure
    sp = s.standard_partition
    _emit({
        "W": matrix_to_json(form.W),
        "P": matrix_to_json(form.P),
        "eigenvalues": [a.field.render(v) for v in s.eigenvalues],
        "characteristics": [list(c) for c in s.characteristics],
        "standard_partition": {"sizes": list(sp.sizes), "classes": list(sp.classes)},
        "commutant": commutant_algebra(form.W, s).to_json(),
    })
    return 0


def cmd_canon(args) -> int:
    spec = _problem(args)
    m, data = _matrix(args.matrix, spec)
    sizes = _sizes(spec, args, data)
    scm = canonicalize(spec.algebra(sizes), m, spec.classification)
    _emit(scm.to_json(witness=args.witness, trace=args.trace))
    return 0


def cmd_equiv(args) -> int:
    spec = _problem(args)
    m1, d1 = _matrix(args.m1, spec)
    m2, _ = _matrix(args.m2, spec)
    sizes = _sizes(spec, args, d1)
    alg = spec.algebra(sizes)
    c1 = canonicalize(alg, m1, spec.classification)
    c2 = canonicalize(alg, m2, spec.classification)
    _emit({"equivalent": c1.matrix == c2.matrix})
    return 0


def cmd_decompose(args) -> int:
    spec = _problem(args)
    m, data = _matrix(args.matrix, spec)
    sizes = _sizes(spec, args, data)
    scm = canonicalize(spec.algebra(sizes), m, spec.classification)
    _emit(krull_schmidt(scm).to_json())
    return 0


def cmd_enumerate(args) -> int:
    spec = _problem(args)
    sizes = _sizes(spec, args)
    found = enumerate_canonical(spec, sizes, budget=args.budget, jobs=args.jobs,
                                skip_nonsplitting=args.skip_nonsplitting)
    _emit([c.to_json() for c in found])
    return 0


def cmd_problem_new(args) -> int:
    field = get_field(args.field or "Q")
    if args.quiver:
        data = dict(_load(args.quiver), kind="quiver")
        spec = problem_from_json(data, field)
    elif args.kronecker:
        spec = kronecker_problem(field).spec
    elif args.simsim is not None:
        spec = simsim_problem(args.simsim, field).spec
    elif args.poset:
        data = _load(args.poset)
        spec = poset_problem(int(data["n"]), [tuple(r) for r in data.get("relations", [])], field)
    elif args.upper_triangular is not None:
        spec = upper_triangular_problem(args.upper_triangular, field)
    elif args.wasow is not None:
        spec = wasow_problem(args.wasow, field)
    elif args.module:
        spec = module_problem(ReducedAlgebra.from_json(_load(args.module), field))
    else:
        spec = problem_from_json(_load(args.spec), field)
    _emit(spec.to_json())
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"error": {"code": "USAGE", "message": message}}) + "\n")
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help="Q or F<p>; overrides the field named in the input")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="enumeration budget")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for enumeration")

    parser = _Parser(prog="lmcanon", description="Canonical forms for linear matrix problems")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("weyr", parents=[common], help="Weyr form of a square matrix")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_weyr)

    p = sub.add_parser("canon", parents=[common], help="canonical form under a problem")
    p.add_argument("problem")
    p.add_argument("matrix")
    p.add_argument("--dims")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_canon)

    p = sub.add_parser("equiv", parents=[common], help="test equivalence of two matrices")
    p.add_argument("problem")
    p.add_argument("m1")
    p.add_argument("m2")
    p.add_argument("--dims")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("decompose", parents=[common], help="Krull-Schmidt decomposition")
    p.add_argument("problem")
    p.add_argument("matrix")
    p.add_argument("--dims")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("enumerate", parents=[common], help="all canonical matrices over a prime field")
    p.add_argument("problem")
    p.add_argument("--dims", required=True)
    p.add_argument("--skip-nonsplitting", action="store_true",
                   help="leave out matrices whose eigenvalues are not in the field")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("problem", help="problem construction")
    psub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = psub.add_parser("new", parents=[common], help="build a problem JSON")
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--quiver", metavar="SPEC.json")
    group.add_argument("--kronecker", action="store_true")
    group.add_argument("--simsim", type=int, metavar="N")
    group.add_argument("--poset", metavar="SPEC.json")
    group.add_argument("--upper-triangular", type=int, metavar="T")
    group.add_argument("--wasow", type=int, metavar="T")
    group.add_argument("--module", metavar="ALGEBRA.json")
    group.add_argument("--spec", metavar="PROBLEM.json", help="any problem JSON, normalised to a pair")
    q.set_defaults(func=cmd_problem_new)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CanonError as exc:
        return _fail(exc.code, str(exc))
    except (KeyError, TypeError, ValueError) as exc:
        # malformed but syntactically valid input
        return _fail("PARSE", f"{type(exc).__name__}: {exc}")


def _fail(code: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
