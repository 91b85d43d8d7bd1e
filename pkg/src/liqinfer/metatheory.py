"""Executable metatheory: an algorithmic re-checker (infer then subsume),
subject-reduction trials over the evaluator, and a finite-domain semantic
implication oracle that realizes the undecidable implication rule as a
brute-force enumeration over small integer grids.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .anf import _all_names, normalize
from .inference import Inferencer
from .semantics import AtValue, Stuck, step
from .subtyping import SubtypeChecker
from .syntax import (
    AddExp,
    App,
    BaseArm,
    BoolConst,
    BoolRef,
    BoolVarRef,
    CmpRef,
    ConjRef,
    Const,
    Env,
    IffRef,
    IntConst,
    IntExp,
    IntExpr,
    Lam,
    Let,
    LiqError,
    MulExp,
    NameSource,
    NegExp,
    PrimConst,
    Refinement,
    Scheme,
    SubExp,
    Term,
    TopRef,
    Var,
    VarExp,
    VALUE_VAR,
    refinement_vars,
    render_term,
)
from .validity import ValidityEngine


class OracleInapplicable(LiqError):
    """A query variable does not have base type, so the finite enumeration
    cannot interpret it."""


# ---------------------------------------------------------------------------
# Re-checking: infer then subsume
# ---------------------------------------------------------------------------


def recheck(
    env: Env,
    term: Term,
    scheme: Scheme,
    qualifiers: Sequence[Refinement],
    engine: Optional[ValidityEngine] = None,
    inferencer: Optional[Inferencer] = None,
) -> bool:
    """Sound (not complete) check that the term has the given type: the
    inferred type must be a subtype of it and it must be well formed."""
    inf = inferencer if inferencer is not None else Inferencer(qualifiers, engine)
    try:
        inferred = inf.infer(env, term)
    except LiqError:
        return False
    return inf.checker.wf_check(env, scheme) and inf.checker.is_subtype(env, inferred, scheme)


# ---------------------------------------------------------------------------
# Subject reduction trials
# ---------------------------------------------------------------------------


@dataclass
class TrialReport:
    term: Term
    well_typed: bool
    ok: bool
    steps: int = 0
    stuck: bool = False
    timed_out: bool = False
    failure: Optional[str] = None
    inferred: Optional[Scheme] = None


def subject_reduction_trial(
    term: Term,
    qualifiers: Sequence[Refinement],
    fuel: int,
    engine: Optional[ValidityEngine] = None,
    inferencer: Optional[Inferencer] = None,
) -> TrialReport:
    """Evaluate up to `fuel` steps, re-checking every reduct against the
    originally inferred type (closed terms: no substitution reaches it)."""
    inf = inferencer if inferencer is not None else Inferencer(qualifiers, engine)
    try:
        s0 = inf.infer(Env(), term)
    except LiqError as e:
        return TrialReport(term, well_typed=False, ok=False, failure=str(e))
    names = NameSource("fx", used=_all_names(term))
    cur = term
    for i in range(fuel):
        out = step(cur, names)
        if isinstance(out, AtValue):
            return TrialReport(term, True, True, steps=i, inferred=s0)
        if isinstance(out, Stuck):
            return TrialReport(
                term, True, False, steps=i, stuck=True,
                failure=f"stuck at {render_term(out.redex)}: {out.reason}", inferred=s0,
            )
        cur = out.term
        if not recheck(Env(), cur, s0, qualifiers, inferencer=inf):
            return TrialReport(
                term, True, False, steps=i + 1,
                failure=f"preservation violated at {render_term(cur)}", inferred=s0,
            )
    return TrialReport(term, True, True, steps=fuel, timed_out=True, inferred=s0)


# ---------------------------------------------------------------------------
# Finite semantic implication oracle
# ---------------------------------------------------------------------------


def eval_int_expr(e: IntExpr, asg: dict[str, object]) -> int:
    if isinstance(e, IntExp):
        return e.value
    if isinstance(e, VarExp):
        v = asg[e.name]
        if not isinstance(v, int) or isinstance(v, bool):
            raise OracleInapplicable(f"{e.name} is not an integer")
        return v
    if isinstance(e, NegExp):
        return -eval_int_expr(e.arg, asg)
    if isinstance(e, AddExp):
        return eval_int_expr(e.lhs, asg) + eval_int_expr(e.rhs, asg)
    if isinstance(e, SubExp):
        return eval_int_expr(e.lhs, asg) - eval_int_expr(e.rhs, asg)
    if isinstance(e, MulExp):
        return eval_int_expr(e.lhs, asg) * eval_int_expr(e.rhs, asg)
    raise OracleInapplicable(f"cannot evaluate {e!r}")


def eval_refinement(r: Refinement, asg: dict[str, object]) -> bool:
    if isinstance(r, TopRef):
        return True
    if isinstance(r, BoolRef):
        return r.value
    if isinstance(r, CmpRef):
        l, rr = eval_int_expr(r.lhs, asg), eval_int_expr(r.rhs, asg)
        return {"=": l == rr, "<=": l <= rr, ">=": l >= rr, "<": l < rr, ">": l > rr}[r.op]
    if isinstance(r, BoolVarRef):
        v = asg[r.name]
        if not isinstance(v, bool):
            raise OracleInapplicable(f"{r.name} is not a boolean")
        return v
    if isinstance(r, IffRef):
        return eval_refinement(r.lhs, asg) == eval_refinement(r.rhs, asg)
    if isinstance(r, ConjRef):
        return all(eval_refinement(p, asg) for p in r.parts)
    raise OracleInapplicable(f"cannot evaluate {r!r}")


def _base_bindings(env: Env) -> list[tuple[str, str, tuple]]:
    """(name, sort, refinements) for bindings usable by the oracle; shadowed
    bindings are dropped."""
    last = {name: i for i, (name, _) in enumerate(env.bindings)}
    out = []
    for i, (name, sch) in enumerate(env.bindings):
        if last[name] != i:
            continue
        if sch.qvars or not all(isinstance(a, BaseArm) for a in sch.body.arms):
            continue
        arms = sch.body.arms
        out.append((name, arms[0].base.name, tuple(a.ref for a in arms)))
    return out


def _nu_sort(refs: Sequence[Refinement]) -> str:
    def scan(r: Refinement) -> Optional[str]:
        if isinstance(r, CmpRef):
            if VALUE_VAR in refinement_vars(r):
                return "int"
            return None
        if isinstance(r, BoolVarRef):
            return "bool" if r.name == VALUE_VAR else None
        if isinstance(r, IffRef):
            return scan(r.lhs) or scan(r.rhs)
        if isinstance(r, ConjRef):
            for p in r.parts:
                s = scan(p)
                if s:
                    return s
        return None

    for r in refs:
        s = scan(r)
        if s:
            return s
    return "int"


def semantic_implication_oracle(
    env: Env,
    lhs: Refinement,
    rhs: Refinement,
    bound: int = 4,
) -> bool:
    """Enumerate every substitution of integers in [-bound, bound] (booleans
    over both values) for the base variables of the environment and the value
    variable, keep the ones satisfying the environment refinements under
    direct evaluation, and require that whenever the left refinement
    evaluates to true the right one does too."""
    bindings = _base_bindings(env)
    known = {name for name, _, _ in bindings} | {VALUE_VAR}
    free = (refinement_vars(lhs) | refinement_vars(rhs)) - known
    if free:
        raise OracleInapplicable(f"variables without a base type in scope: {sorted(free)}")
    nu = _nu_sort([lhs, rhs])
    names = [name for name, _, _ in bindings] + [VALUE_VAR]
    sorts = {name: sort for name, sort, _ in bindings}
    sorts[VALUE_VAR] = nu

    def domain(sort: str):
        return (False, True) if sort == "bool" else range(-bound, bound + 1)

    def grids(i: int, asg: dict[str, object]):
        if i == len(names):
            yield dict(asg)
            return
        for v in domain(sorts[names[i]]):
            asg[names[i]] = v
            yield from grids(i + 1, asg)
        del asg[names[i]]

    for asg in grids(0, {}):
        consistent = True
        for name, _, refs in bindings:
            inner = {**asg, VALUE_VAR: asg[name]}
            if not all(eval_refinement(r, inner) for r in refs):
                consistent = False
                break
        if not consistent:
            continue
        if eval_refinement(lhs, asg) and not eval_refinement(rhs, asg):
            return False
    return True


# ---------------------------------------------------------------------------
# Random well-typed terms
# ---------------------------------------------------------------------------


@dataclass
class GenConfig:
    int_lo: int = -8
    int_hi: int = 8
    max_depth: int = 4
    max_lam_depth: int = 3
    allow_ite: bool = True


def random_term(
    rng: random.Random,
    config: GenConfig = GenConfig(),
    want: str = "int",
    depth: int = 0,
    scope: Optional[list[tuple[str, str]]] = None,
    lam_depth: int = 0,
    names: Optional[NameSource] = None,
) -> Term:
    """Sized generation over the grammar, weighted toward arithmetic."""
    scope = scope if scope is not None else []
    names = names if names is not None else NameSource("g")
    in_scope = [n for n, s in scope if s == want]

    def lit() -> Term:
        if want == "bool":
            return Const(BoolConst(rng.random() < 0.5))
        return Const(IntConst(rng.randint(config.int_lo, config.int_hi)))

    if depth >= config.max_depth:
        if in_scope and rng.random() < 0.5:
            return Var(rng.choice(in_scope))
        return lit()

    choices: list[tuple[float, str]] = [(2.0, "lit")]
    if in_scope:
        choices.append((2.0, "var"))
    if want == "int":
        choices += [(1.2, "neg"), (2.2, "add"), (2.0, "sub"), (1.2, "mul"), (1.6, "let")]
        if lam_depth < config.max_lam_depth:
            choices.append((0.9, "beta"))
        if config.allow_ite:
            choices.append((0.5, "ite"))
    else:
        choices += [(2.0, "cmp")]

    total = sum(w for w, _ in choices)
    pick = rng.random() * total
    kind = choices[-1][1]
    for w, k in choices:
        if pick < w:
            kind = k
            break
        pick -= w

    def sub(w: str = "int", d: int = 1) -> Term:
        return random_term(rng, config, w, depth + d, scope, lam_depth, names)

    if kind == "lit":
        return lit()
    if kind == "var":
        return Var(rng.choice(in_scope))
    if kind == "neg":
        return App(Const(PrimConst("neg")), sub())
    if kind in ("add", "sub", "mul"):
        return App(App(Const(PrimConst(kind)), sub()), sub())
    if kind == "cmp":
        op = rng.choice(["le", "ge", "lt", "gt", "eq"])
        return App(App(Const(PrimConst(op)), sub()), sub())
    if kind == "ite":
        cond = random_term(rng, config, "bool", depth + 1, scope, lam_depth, names)
        return App(App(App(Const(PrimConst("ite")), cond), sub()), sub())
    if kind == "beta":
        binder = names.fresh()
        body = random_term(
            rng, config, "int", depth + 1, scope + [(binder, "int")], lam_depth + 1, names
        )
        return App(Lam(binder, body), sub())
    binder = names.fresh()
    bound = sub()
    body = random_term(
        rng, config, want, depth + 1, scope + [(binder, "int")], lam_depth, names
    )
    return Let(binder, bound, body)


def generate_corpus(
    n: int,
    qualifiers: Sequence[Refinement],
    seed: int = 0,
    engine: Optional[ValidityEngine] = None,
    config: GenConfig = GenConfig(),
    max_attempts_factor: int = 30,
) -> list[Term]:
    """Closed ANF terms accepted by inference under the qualifier set."""
    rng = random.Random(seed)
    inf = Inferencer(qualifiers, engine)
    out: list[Term] = []
    attempts = 0
    while len(out) < n and attempts < n * max_attempts_factor:
        attempts += 1
        cand = normalize(random_term(rng, config))
        try:
            inf.infer(Env(), cand)
        except LiqError:
            continue
        out.append(cand)
    if len(out) < n:
        raise LiqError(f"generated only {len(out)} of {n} well-typed terms")
    return out


@dataclass
class SuiteReport:
    trials: int = 0
    violations: int = 0
    stuck: int = 0
    timeouts: int = 0
    recheck_failures: int = 0
    reports: list[TrialReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.stuck == 0 and self.recheck_failures == 0


def run_subject_reduction(
    trials: int,
    fuel: int = 100,
    qualifiers: Optional[Sequence[Refinement]] = None,
    seed: int = 0,
    bound: int = 4,
    engine: Optional[ValidityEngine] = None,
) -> SuiteReport:
    """Generate a corpus and run preservation plus reflexive re-check on it."""
    if qualifiers is None:
        qualifiers = default_qualifiers()
    engine = engine if engine is not None else ValidityEngine()
    inf = Inferencer(qualifiers, engine)
    corpus = generate_corpus(trials, qualifiers, seed=seed, engine=engine)
    report = SuiteReport()
    for term in corpus:
        tr = subject_reduction_trial(term, qualifiers, fuel, inferencer=inf)
        report.trials += 1
        report.reports.append(tr)
        if tr.stuck:
            report.stuck += 1
        elif not tr.ok:
            report.violations += 1
        if tr.timed_out:
            report.timeouts += 1
        if tr.inferred is not None and not recheck(
            Env(), term, tr.inferred, qualifiers, inferencer=inf
        ):
            report.recheck_failures += 1
    return report


def default_qualifiers() -> tuple[Refinement, ...]:
    ge = CmpRef(">=", VarExp(VALUE_VAR), IntExp(0))
    le = CmpRef("<=", VarExp(VALUE_VAR), IntExp(0))
    return (ge, le)


# ---------------------------------------------------------------------------
# Oracle-vs-engine agreement on random base implications
# ---------------------------------------------------------------------------


def random_base_query(
    rng: random.Random, bound: int = 4
) -> tuple[Env, list[BaseArm], list[BaseArm]]:
    """A random environment of int bindings plus intersections of comparison
    refinements, shaped like the queries subtyping generates."""
    from .syntax import INT, LiquidType, mono

    var_names = ["x", "y"][: rng.randint(0, 2)]

    def expr(vars_ok: list[str]) -> IntExpr:
        roll = rng.random()
        if roll < 0.45 or not vars_ok:
            return IntExp(rng.randint(-3, 3))
        if roll < 0.8:
            return VarExp(rng.choice(vars_ok))
        lhs = VarExp(rng.choice(vars_ok))
        rhs = IntExp(rng.randint(-3, 3))
        return AddExp(lhs, rhs) if rng.random() < 0.5 else SubExp(lhs, rhs)

    def cmp(vars_ok: list[str], with_nu: bool) -> Refinement:
        op = rng.choice(["=", "<=", ">=", "<", ">"])
        lhs: IntExpr = VarExp(VALUE_VAR) if with_nu else expr(vars_ok)
        if not with_nu and rng.random() < 0.5:
            lhs = expr(vars_ok)
        return CmpRef(op, lhs, expr(vars_ok))

    env = Env()
    avail: list[str] = []
    for name in var_names:
        arms = tuple(
            BaseArm(INT, cmp(avail, rng.random() < 0.8))
            for _ in range(rng.randint(1, 2))
        )
        env = env.extend(name, mono(LiquidType(arms)))
        avail.append(name)
    lhs_arms = [BaseArm(INT, cmp(avail, True)) for _ in range(rng.randint(1, 2))]
    rhs_arms = [BaseArm(INT, cmp(avail, True)) for _ in range(rng.randint(1, 2))]
    return env, lhs_arms, rhs_arms


@dataclass
class AgreementReport:
    queries: int = 0
    valid: int = 0
    invalid: int = 0
    unknown: int = 0
    unsound: int = 0  # engine said Valid, oracle has a countermodel
    external_checked: int = 0
    external_disagreements: int = 0


def run_oracle_agreement(
    n: int,
    bound: int = 4,
    seed: int = 0,
    engine: Optional[ValidityEngine] = None,
    external: Optional[ValidityEngine] = None,
) -> AgreementReport:
    """Check the built-in verdicts against finite enumeration (and against an
    external solver when one is configured)."""
    from .validity import Invalid, Unknown, Valid

    rng = random.Random(seed)
    engine = engine if engine is not None else ValidityEngine()
    checker = SubtypeChecker(engine)
    report = AgreementReport()
    for _ in range(n):
        env, lhs_arms, rhs_arms = random_base_query(rng, bound)
        q = checker.base_subtype_query(env, lhs_arms, rhs_arms)
        verdict = engine.check(q)
        report.queries += 1
        lhs = lhs_arms[0].ref if len(lhs_arms) == 1 else ConjRef(tuple(a.ref for a in lhs_arms))
        rhs = rhs_arms[0].ref if len(rhs_arms) == 1 else ConjRef(tuple(a.ref for a in rhs_arms))
        oracle_ok = semantic_implication_oracle(env, lhs, rhs, bound)
        if isinstance(verdict, Valid):
            report.valid += 1
            if not oracle_ok:
                report.unsound += 1
        elif isinstance(verdict, Invalid):
            report.invalid += 1
        else:
            report.unknown += 1
        if external is not None and not isinstance(verdict, Unknown):
            ext = external.check_external(q)
            if not isinstance(ext, Unknown):
                report.external_checked += 1
                if isinstance(verdict, Valid) != isinstance(ext, Valid):
                    report.external_disagreements += 1
    return report
