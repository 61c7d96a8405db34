"""Command-line interface: `translate`, `verify`, and `oracle`.

`translate` prints a program or theory after one of the supported
transformations; `verify` emits prover problems and drives an external
prover configured via --prover or the OCOMP_PROVER environment variable;
`oracle` enumerates the stable models of a program over a finite domain.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import ground
from .fol import Formula, format_formula, parse_spec
from .ordered import OcConfig, completion_bundle, ordered_completion, ordered_completion_of_theory
from .simplify import simplify_formula
from .syntax import ParseError, Program, parse_precomputed, parse_program
from .tptp import ProverSettings, run_verify
from .tau_star import tau_star_program

PROVER_ENV = "OCOMP_PROVER"


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _load(path: str, kind: str) -> Program | list[Formula]:
    """Load a .lp program or .spec theory; `kind` is program, theory, or auto."""
    text = _read_input(path)
    if kind == "auto":
        if path.endswith(".lp"):
            kind = "program"
        elif path.endswith(".spec"):
            kind = "theory"
        else:
            kind = "theory"
    if kind == "program":
        return parse_program(text)
    return parse_spec(text)


def _print_sentence(f: Formula, simplify: bool, rule_arrow: bool = False) -> None:
    if simplify:
        f = simplify_formula(f)
    print(format_formula(f, rule_arrow=rule_arrow) + ".")


def cmd_translate(args: argparse.Namespace) -> int:
    default_kind = "program" if args.with_ == "tau-star" else "auto"
    source = _load(args.file, args.input if args.input != "auto" else default_kind if args.file == "-" else "auto")
    simplify = not args.no_simplify

    if args.with_ == "tau-star":
        if not isinstance(source, Program):
            print("error: tau-star applies to programs", file=sys.stderr)
            return 2
        for f in tau_star_program(source):
            _print_sentence(f, simplify, rule_arrow=True)
        return 0

    variant = "level_mapping" if args.level_mapping else "order_predicates"
    if args.with_ == "completion":
        complete_undefined = not args.skip_undefined
        if isinstance(source, Program):
            bundle = completion_bundle(source, complete_undefined)
        else:
            from .completion import comp_def, comp_rules, theory_entries

            entries = theory_entries(source)
            sections = [("constraints", entries.constraints)]
            rules = tuple(comp_rules(p, entries) for p in sorted(entries.predicates)
                          if entries.by_pred.get(p) or complete_undefined)
            defs = tuple(comp_def(p, entries) for p in sorted(entries.predicates)
                         if entries.by_pred.get(p) or complete_undefined)
            sections.extend([("rules", rules), ("definitions", defs)])
            from .ordered import TheoryBundle

            bundle = TheoryBundle(tuple(sections))
    else:  # ordered-completion
        cfg = OcConfig(variant=variant, simplified=True, complete_undefined=args.complete_undefined)
        if isinstance(source, Program):
            bundle = ordered_completion(source, cfg)
        else:
            bundle = ordered_completion_of_theory(source, cfg)

    skip = () if args.axioms or args.with_ == "completion" else ("axioms",)
    for name, formulas in bundle.sections:
        if name in skip:
            continue
        for f in formulas:
            _print_sentence(f, simplify, rule_arrow=(name == "rules"))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.equivalence != "ordered-completion":
        print("error: only --equivalence ordered-completion is supported", file=sys.stderr)
        return 2
    prover = args.prover or os.environ.get(PROVER_ENV)
    if not prover:
        print(f"error: no prover configured (use --prover or ${PROVER_ENV})", file=sys.stderr)
        return 2
    left = _load(args.left, "program")
    if not isinstance(left, Program):
        print("error: the left input must be a program", file=sys.stderr)
        return 2
    right = _load(args.right, "auto")
    settings = ProverSettings(
        path=prover,
        timeout=args.time_limit,
        extra_args=tuple(args.prover_args.split()) if args.prover_args else (),
        jobs=args.jobs,
    )
    variant = "level_mapping" if args.level_mapping else "order_predicates"
    cfg = OcConfig(variant=variant, simplified=True, complete_undefined=True)
    outcome = run_verify(
        left,
        right,
        settings,
        direction=args.direction,
        cfg=cfg,
        bypass_tightness=args.bypass_tightness,
        out_dir=Path(args.out_dir) if args.out_dir else None,
        report=print,
    )
    return 0 if outcome.success else 1


def cmd_oracle(args: argparse.Namespace) -> int:
    source = _load(args.file, "program")
    if not isinstance(source, Program):
        print("error: the oracle applies to programs", file=sys.stderr)
        return 2
    if args.domain:
        domain = frozenset(parse_precomputed(part.strip()) for part in args.domain.split(",") if part.strip())
        print(f"domain: {{{', '.join(sorted(str(t) for t in domain))}}}")
    else:
        domain = ground.default_domain(source, int_radius=args.int_radius)
        shown = ", ".join(sorted(str(t) for t in domain))
        print(f"domain (default: program constants, integers widened by {args.int_radius}): {{{shown}}}")
    models = ground.stable_models(source, domain, max_atoms=args.max_atoms)
    if not models:
        print("no stable models over this domain")
        return 1
    for i, model in enumerate(models):
        atoms = ", ".join(str(a) for a in sorted(model, key=ground.atom_sort_key))
        print(f"stable model {i}: {{{atoms}}}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocomp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    translate = sub.add_parser("translate", help="print a transformed program or theory")
    translate.add_argument("--with", dest="with_", required=True,
                           choices=["tau-star", "completion", "ordered-completion"])
    translate.add_argument("--axioms", action="store_true",
                           help="include order/level axioms in ordered-completion output")
    translate.add_argument("--no-simplify", action="store_true",
                           help="print the raw formulas without simplification")
    translate.add_argument("--level-mapping", action="store_true",
                           help="use level functions instead of order predicates")
    translate.add_argument("--complete-undefined", action="store_true",
                           help="also complete predicates that occur in no rule head")
    translate.add_argument("--skip-undefined", action="store_true",
                           help="for completion: skip predicates with no defining rules")
    translate.add_argument("--input", choices=["auto", "program", "theory"], default="auto")
    translate.add_argument("file", help=".lp program, .spec theory, or - for stdin")
    translate.set_defaults(func=cmd_translate)

    verify = sub.add_parser("verify", help="verify a correspondence with an external prover")
    verify.add_argument("--equivalence", required=True, choices=["ordered-completion"])
    verify.add_argument("--direction", choices=["forward", "backward", "universal"],
                        default="universal")
    verify.add_argument("--bypass-tightness", action="store_true",
                        help="use ordinary completion instead of ordered completion")
    verify.add_argument("--level-mapping", action="store_true")
    verify.add_argument("--prover", help=f"prover executable (default ${PROVER_ENV})")
    verify.add_argument("--prover-args", default="", help="extra arguments passed to the prover")
    verify.add_argument("--time-limit", type=float, default=60.0, help="seconds per sub-problem")
    verify.add_argument("--jobs", type=int, default=1, help="concurrent prover processes")
    verify.add_argument("--out-dir", help="where to keep problem files and transcripts")
    verify.add_argument("left", help=".lp program")
    verify.add_argument("right", help=".spec theory or .lp program")
    verify.set_defaults(func=cmd_verify)

    oracle = sub.add_parser("oracle", help="enumerate stable models over a finite domain")
    oracle.add_argument("--domain", help="comma-separated precomputed terms")
    oracle.add_argument("--int-radius", type=int, default=2,
                        help="widen program integers by this radius for the default domain")
    oracle.add_argument("--max-atoms", type=int, default=20,
                        help="bail out when the candidate atom space exceeds this size")
    oracle.add_argument("file", help=".lp program")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
