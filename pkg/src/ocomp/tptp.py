"""Typed first-order problem emission and the external-prover driver.

Problems use the TPTP typed first-order form with integer arithmetic: a
declared sort for general values, an injection of the built-in integers
into it, symbolic constants with pairwise disequalities, and helper
predicates for comparisons between general values.  The driver runs one
prover subprocess per conjecture and keys success solely on SZS status.
"""

from __future__ import annotations

import re
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .fol import (
    AbsT,
    And,
    Arith,
    Bottom,
    Cmp,
    Const,
    Exists,
    FoTerm,
    Forall,
    Formula,
    Implies,
    LvlApp,
    Or,
    PredApp,
    Sort,
    Top,
    Var,
    subformulas,
    term_sort,
)
from .ordered import TheoryBundle
from .syntax import Infimum, Numeral, SymbolicConstant, Supremum


class UnsupportedConstructError(ValueError):
    """A formula uses a construct the emitter cannot encode."""


GENERAL = "general"
INT_INJECTION = "f__int"
ABS_FN = "i__abs"
LESS = "g__less"
LESS_EQ = "g__lesseq"
INFIMUM = "c__infimum"
SUPREMUM = "c__supremum"


@dataclass
class _Symbols:
    predicates: dict[str, int] = field(default_factory=dict)
    level_fns: dict[str, int] = field(default_factory=dict)
    constants: set[str] = field(default_factory=set)
    uses_int: bool = False
    uses_abs: bool = False
    uses_general_cmp: bool = False
    uses_inf: bool = False
    uses_sup: bool = False


def _scan_term(t: FoTerm, sym: _Symbols) -> None:
    if isinstance(t, Var):
        if t.sort is Sort.INTEGER:
            sym.uses_int = True
    elif isinstance(t, Const):
        v = t.value
        if isinstance(v, Numeral):
            sym.uses_int = True
        elif isinstance(v, SymbolicConstant):
            sym.constants.add(v.name)
        elif isinstance(v, Infimum):
            sym.uses_inf = True
        else:
            sym.uses_sup = True
    elif isinstance(t, AbsT):
        sym.uses_int = True
        sym.uses_abs = True
        _scan_term(t.arg, sym)
    elif isinstance(t, Arith):
        sym.uses_int = True
        _scan_term(t.left, sym)
        _scan_term(t.right, sym)
    elif isinstance(t, LvlApp):
        sym.uses_int = True
        old = sym.level_fns.setdefault(t.predicate, len(t.args))
        if old != len(t.args):
            raise UnsupportedConstructError(f"level function of {t.predicate!r} used with two arities")
        for a in t.args:
            _scan_term(a, sym)


def _scan(formulas: Iterable[Formula]) -> _Symbols:
    sym = _Symbols()
    for formula in formulas:
        for sub in subformulas(formula):
            if isinstance(sub, PredApp):
                old = sym.predicates.setdefault(sub.name, len(sub.args))
                if old != len(sub.args):
                    raise UnsupportedConstructError(f"predicate {sub.name!r} used with two arities")
                for a in sub.args:
                    _scan_term(a, sym)
            elif isinstance(sub, Cmp):
                _scan_term(sub.left, sym)
                _scan_term(sub.right, sym)
                both_int = term_sort(sub.left) is Sort.INTEGER and term_sort(sub.right) is Sort.INTEGER
                if sub.rel not in ("=", "!=") and not both_int:
                    sym.uses_general_cmp = True
    return sym


# --------------------------------------------------------------------------
# Formula rendering
# --------------------------------------------------------------------------


def _render_term(t: FoTerm, want: Sort) -> str:
    sort = term_sort(t)
    text = _render_term_raw(t)
    if want is Sort.GENERAL and sort is Sort.INTEGER:
        return f"{INT_INJECTION}({text})"
    if want is Sort.INTEGER and sort is Sort.GENERAL:
        raise UnsupportedConstructError(f"general term in integer position: {t!r}")
    return text


def _render_term_raw(t: FoTerm) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        v = t.value
        if isinstance(v, Numeral):
            return str(v.value)
        if isinstance(v, SymbolicConstant):
            return f"s__{v.name}"
        return INFIMUM if isinstance(v, Infimum) else SUPREMUM
    if isinstance(t, AbsT):
        return f"{ABS_FN}({_render_term(t.arg, Sort.INTEGER)})"
    if isinstance(t, Arith):
        if t.op == "-" and t.left == Const(Numeral(0)):
            return f"$uminus({_render_term(t.right, Sort.INTEGER)})"
        fn = {"+": "$sum", "-": "$difference", "*": "$product"}[t.op]
        return f"{fn}({_render_term(t.left, Sort.INTEGER)}, {_render_term(t.right, Sort.INTEGER)})"
    if isinstance(t, LvlApp):
        if not t.args:
            return f"lvl_{t.predicate}"
        args = ", ".join(_render_term(a, Sort.GENERAL) for a in t.args)
        return f"lvl_{t.predicate}({args})"
    raise UnsupportedConstructError(f"cannot render term: {t!r}")


_INT_REL = {"<": "$less", "<=": "$lesseq", ">": "$greater", ">=": "$greatereq"}


def _render_cmp(f: Cmp) -> str:
    both_int = term_sort(f.left) is Sort.INTEGER and term_sort(f.right) is Sort.INTEGER
    if both_int:
        l, r = _render_term(f.left, Sort.INTEGER), _render_term(f.right, Sort.INTEGER)
        if f.rel == "=":
            return f"({l} = {r})"
        if f.rel == "!=":
            return f"({l} != {r})"
        return f"{_INT_REL[f.rel]}({l}, {r})"
    l, r = _render_term(f.left, Sort.GENERAL), _render_term(f.right, Sort.GENERAL)
    if f.rel == "=":
        return f"({l} = {r})"
    if f.rel == "!=":
        return f"({l} != {r})"
    if f.rel == "<":
        return f"{LESS}({l}, {r})"
    if f.rel == "<=":
        return f"{LESS_EQ}({l}, {r})"
    if f.rel == ">":
        return f"{LESS}({r}, {l})"
    return f"{LESS_EQ}({r}, {l})"


def render_formula(f: Formula) -> str:
    if isinstance(f, PredApp):
        if not f.args:
            return f.name
        args = ", ".join(_render_term(a, Sort.GENERAL) for a in f.args)
        return f"{f.name}({args})"
    if isinstance(f, Cmp):
        return _render_cmp(f)
    if isinstance(f, Top):
        return "$true"
    if isinstance(f, Bottom):
        return "$false"
    if isinstance(f, And):
        return "(" + " & ".join(render_formula(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(render_formula(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        if isinstance(f.right, Bottom):
            return f"~({render_formula(f.left)})"
        return f"({render_formula(f.left)} => {render_formula(f.right)})"
    if isinstance(f, (Forall, Exists)):
        quant = "!" if isinstance(f, Forall) else "?"
        vars_ = []
        body = f
        cls = type(f)
        while isinstance(body, cls):
            vars_.append(body.var)
            body = body.body
        decls = ", ".join(
            f"{v.name}: {'$int' if v.sort is Sort.INTEGER else GENERAL}" for v in vars_
        )
        return f"{quant}[{decls}]: ({render_formula(body)})"
    raise UnsupportedConstructError(f"cannot render formula: {f!r}")


# --------------------------------------------------------------------------
# Problems
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TptpProblem:
    """A typed first-order problem: declarations, axioms, and conjectures."""

    declarations: tuple[str, ...]
    scaffold_axioms: tuple[tuple[str, str], ...]
    axioms: tuple[tuple[str, Formula], ...]
    conjectures: tuple[tuple[str, Formula], ...]

    def render(self, conjecture: int | None = None) -> str:
        lines = list(self.declarations)
        for name, text in self.scaffold_axioms:
            lines.append(f"tff({name}, axiom, {text}).")
        for name, f in self.axioms:
            lines.append(f"tff({name}, axiom, {render_formula(f)}).")
        selected = self.conjectures if conjecture is None else (self.conjectures[conjecture],)
        for name, f in selected:
            lines.append(f"tff({name}, conjecture, {render_formula(f)}).")
        return "\n".join(lines) + "\n"


def _scaffold(sym: _Symbols) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
    decls: list[str] = [f"tff(general_type, type, {GENERAL}: $tType)."]
    axioms: list[tuple[str, str]] = []
    constants = sorted(sym.constants)
    if sym.uses_int:
        decls.append(f"tff(f_int_decl, type, {INT_INJECTION}: $int > {GENERAL}).")
        axioms.append(
            (
                "f_int_injective",
                f"![I: $int, J: $int]: (({INT_INJECTION}(I) = {INT_INJECTION}(J)) => (I = J))",
            )
        )
    if sym.uses_abs:
        decls.append(f"tff(abs_decl, type, {ABS_FN}: $int > $int).")
        axioms.append(
            (
                "abs_def",
                f"![I: $int]: ((($greatereq(I, 0)) => ({ABS_FN}(I) = I))"
                f" & (($less(I, 0)) => ({ABS_FN}(I) = $uminus(I))))",
            )
        )
    for name in constants:
        decls.append(f"tff(c_{name}_decl, type, s__{name}: {GENERAL}).")
    for i, a in enumerate(constants):
        for b in constants[i + 1 :]:
            axioms.append((f"distinct_{a}_{b}", f"s__{a} != s__{b}"))
        if sym.uses_int:
            axioms.append((f"not_int_{a}", f"![I: $int]: ({INT_INJECTION}(I) != s__{a})"))
    if sym.uses_inf:
        decls.append(f"tff(inf_decl, type, {INFIMUM}: {GENERAL}).")
    if sym.uses_sup:
        decls.append(f"tff(sup_decl, type, {SUPREMUM}: {GENERAL}).")
    for pred in sorted(sym.predicates):
        arity = sym.predicates[pred]
        if arity == 0:
            decls.append(f"tff({pred}_decl, type, {pred}: $o).")
        else:
            args = " * ".join([GENERAL] * arity)
            decls.append(f"tff({pred}_decl, type, {pred}: ({args}) > $o).")
    for pred in sorted(sym.level_fns):
        arity = sym.level_fns[pred]
        if arity == 0:
            decls.append(f"tff(lvl_{pred}_decl, type, lvl_{pred}: $int).")
        else:
            args = " * ".join([GENERAL] * arity)
            decls.append(f"tff(lvl_{pred}_decl, type, lvl_{pred}: ({args}) > $int).")
    if sym.uses_general_cmp:
        decls.append(f"tff(gless_decl, type, {LESS}: ({GENERAL} * {GENERAL}) > $o).")
        decls.append(f"tff(glesseq_decl, type, {LESS_EQ}: ({GENERAL} * {GENERAL}) > $o).")
        axioms.append(
            (
                "gless_lesseq",
                f"![X: {GENERAL}, Y: {GENERAL}]: ({LESS_EQ}(X, Y) <=> ({LESS}(X, Y) | (X = Y)))",
            )
        )
        if sym.uses_int:
            axioms.append(
                (
                    "gless_int",
                    f"![I: $int, J: $int]: ({LESS}({INT_INJECTION}(I), {INT_INJECTION}(J)) <=> $less(I, J))",
                )
            )
            for a in constants:
                axioms.append((f"gless_int_{a}", f"![I: $int]: {LESS}({INT_INJECTION}(I), s__{a})"))
        for i, a in enumerate(constants):
            for b in constants[i + 1 :]:
                axioms.append((f"gless_{a}_{b}", f"{LESS}(s__{a}, s__{b})"))
        if sym.uses_inf:
            axioms.append(("inf_least", f"![X: {GENERAL}]: ((X != {INFIMUM}) => {LESS}({INFIMUM}, X))"))
        if sym.uses_sup:
            axioms.append(("sup_greatest", f"![X: {GENERAL}]: ((X != {SUPREMUM}) => {LESS}(X, {SUPREMUM}))"))
    return tuple(decls), tuple(axioms)


def emit_tptp(bundle: TheoryBundle, conjectures: Iterable[Formula]) -> TptpProblem:
    """Encode a theory bundle as axioms and the given sentences as conjectures."""
    conjectures = tuple(conjectures)
    named_axioms: list[tuple[str, Formula]] = []
    for section, formulas in bundle.sections:
        clean = re.sub(r"[^a-zA-Z0-9]", "_", section)
        for i, f in enumerate(formulas):
            named_axioms.append((f"{clean}_{i}", f))
    sym = _scan([f for _, f in named_axioms] + list(conjectures))
    decls, scaffold = _scaffold(sym)
    named_conjectures = tuple((f"conjecture_{i}", f) for i, f in enumerate(conjectures))
    return TptpProblem(decls, scaffold, tuple(named_axioms), named_conjectures)


# --------------------------------------------------------------------------
# Prover driver
# --------------------------------------------------------------------------

SZS_RE = re.compile(r"SZS\s+status\s+(\w+)")

_THEOREM_STATUSES = {"Theorem", "Unsatisfiable", "ContradictoryAxioms"}
_COUNTER_STATUSES = {"CounterSatisfiable", "Satisfiable"}
_TIMEOUT_STATUSES = {"Timeout", "ResourceOut"}


@dataclass(frozen=True)
class ProverSettings:
    path: str
    timeout: float = 60.0
    extra_args: tuple[str, ...] = ()
    jobs: int = 1


@dataclass(frozen=True)
class ConjectureResult:
    name: str
    status: str  # Theorem | CounterSatisfiable | Timeout | GaveUp | Error
    seconds: float
    transcript: Path | None
    detail: str = ""


@dataclass(frozen=True)
class VerifyOutcome:
    results: tuple[ConjectureResult, ...]
    seconds: float

    @property
    def success(self) -> bool:
        return all(r.status == "Theorem" for r in self.results)


def classify_szs(output: str) -> str:
    match = SZS_RE.search(output)
    if match is None:
        return "Error"
    status = match.group(1)
    if status in _THEOREM_STATUSES:
        return "Theorem"
    if status in _COUNTER_STATUSES:
        return "CounterSatisfiable"
    if status in _TIMEOUT_STATUSES:
        return "Timeout"
    return "GaveUp"


def run_prover(settings: ProverSettings, problem_file: Path, name: str) -> ConjectureResult:
    """Run one prover subprocess on one problem file."""
    command = [settings.path, *settings.extra_args, str(problem_file)]
    transcript = problem_file.with_suffix(".out")
    start = time.monotonic()
    try:
        proc = subprocess.run(
            command,
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
            timeout=settings.timeout,
        )
        output = proc.stdout.decode("utf-8", errors="replace")
        status = classify_szs(output)
        detail = "" if status != "Error" else "no SZS status line in prover output"
    except subprocess.TimeoutExpired as exc:
        output = (exc.stdout or b"").decode("utf-8", errors="replace")
        status = "Timeout"
        detail = f"prover exceeded {settings.timeout:.0f} s"
    except OSError as exc:
        output = str(exc)
        status = "Error"
        detail = f"failed to run prover: {exc}"
    transcript.write_text(output)
    return ConjectureResult(name, status, time.monotonic() - start, transcript, detail)


def prove_all(
    settings: ProverSettings,
    problems: list[tuple[str, Path]],
) -> list[ConjectureResult]:
    """Prove the named problem files, possibly concurrently; results keep order."""
    if settings.jobs <= 1 or len(problems) <= 1:
        return [run_prover(settings, path, name) for name, path in problems]
    with ThreadPoolExecutor(max_workers=settings.jobs) as pool:
        futures = [pool.submit(run_prover, settings, path, name) for name, path in problems]
        return [f.result() for f in futures]


def write_problem_files(
    problem: TptpProblem, out_dir: Path, prefix: str
) -> list[tuple[str, Path]]:
    """One .p file per conjecture, named `<prefix>_<i>.p`."""
    out_dir.mkdir(parents=True, exist_ok=True)
    out = []
    for i, (name, _) in enumerate(problem.conjectures):
        path = out_dir / f"{prefix}_{i}.p"
        path.write_text(problem.render(conjecture=i))
        out.append((f"{prefix}_{i}", path))
    return out


def make_out_dir(out_dir: Path | None) -> Path:
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        return out_dir
    return Path(tempfile.mkdtemp(prefix="ocomp_"))


# --------------------------------------------------------------------------
# Verification runs
# --------------------------------------------------------------------------


def _verify_problems(
    axiom_bundle: TheoryBundle,
    target_sentences: list[Formula],
    direction: str,
    out_dir: Path,
) -> list[tuple[str, Path]]:
    problems: list[tuple[str, Path]] = []
    if direction in ("forward", "universal"):
        problem = emit_tptp(axiom_bundle, target_sentences)
        problems.extend(write_problem_files(problem, out_dir, "forward"))
    if direction in ("backward", "universal"):
        target_bundle = TheoryBundle((("target", tuple(target_sentences)),))
        problem = emit_tptp(target_bundle, axiom_bundle.all_formulas())
        problems.extend(write_problem_files(problem, out_dir, "backward"))
    return problems


_BACKWARD_NOTE = (
    "Note: an unproven backward/universal conjecture does not refute the\n"
    "correspondence.  A stable model only guarantees that SOME extension by\n"
    "order facts is a model of the ordered completion, so the faithful claim\n"
    "existentially quantifies the order predicates, which is beyond the\n"
    "first-order problems emitted here."
)


def run_verify(
    left,
    right,
    settings: ProverSettings,
    direction: str = "forward",
    cfg=None,
    bypass_tightness: bool = False,
    out_dir: Path | None = None,
    report=None,
) -> VerifyOutcome:
    """Build the problem files for a verification task and run the prover.

    `left` is a program; `right` is a program or a list of sentences.  The
    ordered completion of `left` provides the axioms (ordinary completion
    under `bypass_tightness`); forward problems prove each target sentence,
    backward problems swap the roles, universal runs both.
    """
    from .ordered import OcConfig, completion_bundle, ordered_completion
    from .simplify import simplify_formula
    from .syntax import Program

    if cfg is None:
        cfg = OcConfig()
    say = report if report is not None else (lambda text: None)

    def transform(program) -> TheoryBundle:
        bundle = completion_bundle(program, cfg.complete_undefined) if bypass_tightness else ordered_completion(program, cfg)
        return bundle.map_formulas(simplify_formula)

    axiom_bundle = transform(left)
    if isinstance(right, Program):
        target_sentences = transform(right).all_formulas()
    else:
        target_sentences = [simplify_formula(f) for f in right]

    directory = make_out_dir(out_dir)
    problems = _verify_problems(axiom_bundle, target_sentences, direction, directory)

    from .fol import format_formula

    start = time.monotonic()
    results: list[ConjectureResult] = []
    if settings.jobs > 1:
        results = prove_all(settings, problems)
        for result in results:
            say(f"> Proving {result.name} ended with a SZS status")
            say(f"Status: {result.status} ({result.seconds * 1000:.0f} ms)\n")
    else:
        for name, path in problems:
            say(f"> Proving {name}...")
            say("Axioms:")
            for f in axiom_bundle.all_formulas() if name.startswith("forward") else target_sentences:
                say(f"    {format_formula(f)}")
            say("")
            say("Conjectures:")
            index = int(name.rsplit("_", 1)[1])
            conjecture = target_sentences[index] if name.startswith("forward") else axiom_bundle.all_formulas()[index]
            say(f"    {format_formula(conjecture)}")
            say("")
            result = run_prover(settings, path, name)
            results.append(result)
            say(f"> Proving {name} ended with a SZS status")
            say(f"Status: {result.status} ({result.seconds * 1000:.0f} ms)\n")
    outcome = VerifyOutcome(tuple(results), time.monotonic() - start)
    if outcome.success:
        say(f"> Success! Found a proof of the {direction} theorem. ({outcome.seconds * 1000:.0f} ms)")
    else:
        say(f"> Failure! Could not prove the {direction} theorem. ({outcome.seconds * 1000:.0f} ms)")
        if direction in ("backward", "universal"):
            say(_BACKWARD_NOTE)
    return outcome
