"""``hybridsat`` command line: classify, solve, check, gen, oracle.

Exit codes: 0 sat/true/witness found, 1 unsat/false (complete procedures
only), 2 usage or parse error, 3 unknown or no witness within the bound.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .boolean_clones import CloneError, classify, parse_fun
from .deciders import Answer, complexity_lookup, dispatch, route
from .formula import FormulaError, Op, parse, unparse
from .kripke import FrameClass, KripkeModel, ModelError, check, sat_bounded
from .reductions import InstanceError, generate

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2, 3

_OPS = {"dia": Op.DIA, "box": Op.BOX, "down": Op.DOWN, "at": Op.AT}


class UsageError(Exception):
    pass


def _read(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {source}: {e.strerror}") from None


def _frames(text: str) -> FrameClass:
    try:
        return FrameClass.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _emit(args, text: str, data: dict) -> None:
    print(json.dumps(data, sort_keys=True) if args.json else text)


def cmd_classify(args) -> int:
    try:
        ops = frozenset(_OPS[o.strip()] for o in args.ops.split(",") if o.strip())
    except KeyError as e:
        raise UsageError(f"unknown operator {e.args[0]!r}; use dia, box, down, at") from None
    try:
        base = [parse_fun(b.strip()) for b in args.base.split(",") if b.strip()]
    except CloneError as e:
        raise UsageError(str(e)) from None
    F = _frames(args.frames)
    report = classify(base)
    label = complexity_lookup(ops, report, F)
    proc = route(ops, report, F)
    data = {"report": report.to_json(), "label": label, "procedure": proc, "frames": F.value}
    text = "\n".join(
        [
            f"subset of:  {', '.join(sorted(c.value for c in report.subset_of)) or '-'}",
            f"contains:   {', '.join(sorted(c.value for c in report.contains)) or '-'}",
            f"bfWithTrue: {str(report.bf_with_true).lower()}",
            f"procedure:  {proc}",
            label,
        ]
    )
    _emit(args, text, data)
    return EXIT_SAT


def _formula(source: str):
    text = _read(source)
    try:
        return parse(text)
    except FormulaError as e:
        raise UsageError(f"parse error: {e}") from None


def cmd_solve(args) -> int:
    f = _formula(args.file)
    v = dispatch(f, _frames(args.frames), bound=args.bound)
    lines = [str(v.answer), f"procedure: {v.procedure}", f"label: {v.label}", f"complete: {str(v.complete).lower()}"]
    if v.witness is not None:
        lines.append("witness: " + json.dumps(v.witness.to_json(), sort_keys=True))
    _emit(args, "\n".join(lines), v.to_json())
    return {Answer.SAT: EXIT_SAT, Answer.UNSAT: EXIT_UNSAT, Answer.UNKNOWN: EXIT_UNKNOWN}[v.answer]


def _state(K: KripkeModel, text: str):
    for s in K.states:
        if str(s) == text:
            return s
    raise UsageError(f"no state named {text!r}")


def cmd_check(args) -> int:
    try:
        K = KripkeModel.from_json(_read(args.model))
    except (ModelError, json.JSONDecodeError) as e:
        raise UsageError(f"bad model: {e}") from None
    f = _formula(args.formula)
    w = _state(K, args.state) if args.state is not None else K.states[0]
    g = {}
    for item in args.assign or []:
        for pair in item.split(","):
            x, sep, s = pair.partition("=")
            if not sep:
                raise UsageError(f"assignment {pair!r} is not var=state")
            g[x.strip()] = _state(K, s.strip())
    try:
        ok = check(K, g, w, f)
    except ModelError as e:
        raise UsageError(str(e)) from None
    _emit(args, str(ok).lower(), {"result": ok, "state": w})
    return EXIT_SAT if ok else EXIT_UNSAT


def cmd_gen(args) -> int:
    src = args.instance
    if src is None or src == "-":
        text = sys.stdin.read()
    elif os.path.isfile(src):
        text = _read(src)
    else:
        text = src
    try:
        out = generate(args.kind, text)
    except InstanceError as e:
        raise UsageError(str(e)) from None
    if args.json:
        print(json.dumps({"formula": unparse(out.formula), **out.sidecar()}, sort_keys=True))
    else:
        print(unparse(out.formula))
        print(out.sidecar_json())
    return EXIT_SAT


def cmd_oracle(args) -> int:
    f = _formula(args.file)
    w = sat_bounded(f, _frames(args.frames), args.bound)
    if w is None:
        _emit(args, "not-found (no model within the bound; this is not unsat)", {"witness": None})
        return EXIT_UNKNOWN
    _emit(args, json.dumps(w.to_json(), sort_keys=True), {"witness": w.to_json()})
    return EXIT_SAT


def _bound(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("bound must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridsat", description="Satisfiability of hybrid logic fragments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, bound: bool = False):
        sp.add_argument("--frames", default="all", help="all, trans, total or er")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if bound:
            sp.add_argument("--bound", type=_bound, default=3, help="state bound for the oracle")

    c = sub.add_parser("classify", help="complexity cell of an operator set and connective base")
    c.add_argument("--ops", required=True, help="comma list of dia, box, down, at")
    c.add_argument("--base", required=True, help="comma list of connectives (and, or, not, f#0110/2, ...)")
    common(c)
    c.set_defaults(run=cmd_classify)

    s = sub.add_parser("solve", help="decide satisfiability of a formula file ('-' for stdin)")
    s.add_argument("file")
    common(s, bound=True)
    s.set_defaults(run=cmd_solve)

    k = sub.add_parser("check", help="evaluate a formula in a JSON model")
    k.add_argument("model")
    k.add_argument("formula")
    k.add_argument("--state", help="evaluation state (default: first state)")
    k.add_argument("--assign", action="append", help="var=state pairs, comma separated")
    k.add_argument("--json", action="store_true")
    k.set_defaults(run=cmd_check)

    g = sub.add_parser("gen", help="encode an ord, ordneg, qbf, unreach or parity instance")
    g.add_argument("kind", choices=["ord", "ordneg", "qbf", "unreach", "parity"])
    g.add_argument("instance", nargs="?", help="instance text or file (default: stdin)")
    g.add_argument("--json", action="store_true")
    g.set_defaults(run=cmd_gen)

    o = sub.add_parser("oracle", help="bounded model search only")
    o.add_argument("file")
    common(o, bound=True)
    o.set_defaults(run=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_SAT
    try:
        return args.run(args)
    except UsageError as e:
        print(f"hybridsat: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
