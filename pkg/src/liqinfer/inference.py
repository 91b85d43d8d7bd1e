"""Template-based inference of liquid intersection types.

Each binding form gets a fresh template enumerating every combination of
qualifiers over the base positions of its ML shape; well-formedness filters
arms whose refinements mention out-of-scope variables (the temporary type),
and subtyping against the inferred body keeps only the sound arms.  An
intersection emptied by filtering collapses to the top-refined skeleton of
the shape; an application with no accepting arm is an inference failure.
"""

from __future__ import annotations

from itertools import product
from typing import Optional, Sequence, Union

from .logic import DEFAULT_CONFIG, EmbedConfig
from .shapes import ShapeScheme, elaborate, shape_env
from .subtyping import LogEntry, SubtypeChecker
from .syntax import (
    App,
    Arrow,
    Base,
    BaseArm,
    BoolConst,
    Const,
    CONSTANTS,
    Env,
    FunArm,
    IntConst,
    Lam,
    Let,
    LiqError,
    LiquidType,
    PartialPrim,
    PrimConst,
    Refinement,
    Scheme,
    SimpleType,
    Term,
    TyAbs,
    TyInst,
    TyVar,
    Var,
    VarArm,
    make_type,
    mono,
    refinement_vars,
    render_term,
    subst_liquid,
    subst_tyvar_liquid,
    top_skeleton,
)
from .validity import ValidityEngine


class InferenceFailure(LiqError):
    """The algorithm required a non-empty intersection and none survived."""


class ArmCapExceeded(LiqError):
    """A fresh template would exceed the configured arm cap."""


# ---------------------------------------------------------------------------
# Fresh templates
# ---------------------------------------------------------------------------


def _count_base(shape: SimpleType) -> int:
    if isinstance(shape, Base):
        return 1
    if isinstance(shape, TyVar):
        return 0
    return _count_base(shape.dom) + _count_base(shape.cod)


def _arm_with(shape: SimpleType, quals) -> Union[BaseArm, FunArm, VarArm]:
    if isinstance(shape, Base):
        return BaseArm(shape, next(quals))
    if isinstance(shape, TyVar):
        return VarArm(shape.name)
    dom = LiquidType((_arm_with(shape.dom, quals),))
    cod = LiquidType((_arm_with(shape.cod, quals),))
    return FunArm(shape.binder, dom, cod)


def fresh(shape: SimpleType, qualifiers: Sequence[Refinement], max_arms: int = 4096) -> LiquidType:
    """One arm per function from the base positions of the shape into the
    qualifier set; |Q|^k arms for k positions.  The empty product collapses
    to the top skeleton."""
    k = _count_base(shape)
    quals = tuple(dict.fromkeys(qualifiers))  # dedupe, keep order
    if k == 0:
        return LiquidType((_arm_with(shape, iter(())),))
    if not quals:
        return top_skeleton(shape)
    count = len(quals) ** k
    if count > max_arms:
        raise ArmCapExceeded(
            f"fresh template needs {count} arms, above the cap of {max_arms}"
        )
    arms = [_arm_with(shape, iter(combo)) for combo in product(quals, repeat=k)]
    return make_type(arms)


def temporary_type(
    template: LiquidType, checker: SubtypeChecker, env: Env, shape: SimpleType
) -> LiquidType:
    """The well-formedness survivors of a fresh template; an emptied
    intersection collapses to the top-refined skeleton of the shape."""
    arms = [
        arm for arm in template.arms if checker.wf_check(env, LiquidType((arm,)))
    ]
    return make_type(arms) if arms else top_skeleton(shape)


def _strip_ty(t: Term) -> Term:
    while isinstance(t, (TyAbs, TyInst)):
        t = t.body
    return t


def _has_ty_nodes(t: Term) -> bool:
    if isinstance(t, (TyAbs, TyInst)):
        return True
    if isinstance(t, Lam):
        return _has_ty_nodes(t.body)
    if isinstance(t, App):
        return _has_ty_nodes(t.fun) or _has_ty_nodes(t.arg)
    if isinstance(t, Let):
        return _has_ty_nodes(t.bound) or _has_ty_nodes(t.body)
    return False


def _prog_vars(t: LiquidType) -> set[str]:
    out: set[str] = set()
    for arm in t.arms:
        if isinstance(arm, BaseArm):
            out |= refinement_vars(arm.ref)
        elif isinstance(arm, FunArm):
            out |= _prog_vars(arm.dom)
            out |= _prog_vars(arm.cod) - {arm.binder}
    return out


# ---------------------------------------------------------------------------
# The inference algorithm
# ---------------------------------------------------------------------------


class Inferencer:
    def __init__(
        self,
        qualifiers: Sequence[Refinement],
        engine: Optional[ValidityEngine] = None,
        max_arms: int = 4096,
        config: EmbedConfig = DEFAULT_CONFIG,
        constraint_log: Optional[list[LogEntry]] = None,
    ) -> None:
        self.qualifiers = tuple(dict.fromkeys(qualifiers))
        self.engine = engine if engine is not None else ValidityEngine()
        self.max_arms = max_arms
        self.checker = SubtypeChecker(self.engine, config, constraint_log)
        self._shapes: dict[int, ShapeScheme] = {}

    # Public entry point.  Accepts a plain (parsed or evaluated) term or an
    # already elaborated one; elaboration is redone internally so template
    # shapes stay aligned with the inserted type abstractions.
    def infer(self, env: Env, term: Term) -> Scheme:
        from .shapes import erase

        plain = erase(term) if _has_ty_nodes(term) else term
        elab = elaborate(shape_env(env), plain)
        old = self._shapes
        self._shapes = elab.shapes
        try:
            return self._infer(env, elab.term)
        finally:
            self._shapes = old

    def _shape_at(self, t: Term) -> ShapeScheme:
        return self._shapes[id(t)]

    def _infer(self, env: Env, t: Term) -> Scheme:
        if isinstance(t, Var):
            sch = self._shape_at(t)
            bound = env.lookup(t.name)
            if not sch.qvars and isinstance(sch.ty, Base):
                if bound is None:
                    raise InferenceFailure(f"unbound variable {t.name!r}")
                ref_eq = _self_eq(sch.ty, t.name)
                return mono(LiquidType((ref_eq,)))
            if bound is None:
                raise InferenceFailure(f"unbound variable {t.name!r}")
            return bound
        if isinstance(t, Const):
            if isinstance(t.const, PartialPrim):
                return self._partial_type(env, t.const)
            return CONSTANTS.type_of(t.const)
        if isinstance(t, Lam):
            return self._infer_lam(env, t)
        if isinstance(t, App):
            return self._infer_app(env, t)
        if isinstance(t, Let):
            return self._infer_let(env, t)
        if isinstance(t, TyAbs):
            inner = self._infer(env, t.body)
            return Scheme((t.tyvar,) + inner.qvars, inner.body)
        if isinstance(t, TyInst):
            return self._infer_inst(env, t)
        raise InferenceFailure(f"cannot infer a type for {render_term(t)}")

    def _mono_body(self, sch: Scheme, t: Term) -> LiquidType:
        if sch.qvars:
            raise InferenceFailure(
                f"polymorphic type where a monomorphic one is required: {render_term(t)}"
            )
        return sch.body

    def _infer_lam(self, env: Env, t: Lam) -> Scheme:
        shape = self._shape_at(t).ty
        assert isinstance(shape, Arrow)
        template = fresh(shape, self.qualifiers, self.max_arms)
        temp = temporary_type(template, self.checker, env, shape)
        top = top_skeleton(shape)
        collapsed = temp == top and top.arms[0] not in template.arms
        wf_arms = list(temp.arms)
        # one body inference per distinct domain
        bodies: dict[LiquidType, Optional[LiquidType]] = {}
        for arm in wf_arms:
            assert isinstance(arm, FunArm)
            if arm.dom in bodies:
                continue
            try:
                sch = self._infer(env.extend(arm.binder, mono(arm.dom)), t.body)
                bodies[arm.dom] = self._mono_body(sch, t.body)
            except InferenceFailure:
                bodies[arm.dom] = None
        survivors = []
        for arm in wf_arms:
            body = bodies[arm.dom]
            if body is None:
                continue
            inner = env.extend(arm.binder, mono(arm.dom))
            if self.checker.is_subtype(inner, body, arm.cod):
                survivors.append(arm)
        if survivors:
            return mono(make_type(survivors))
        if not collapsed:
            top_arm = top.arms[0]
            assert isinstance(top_arm, FunArm)
            try:
                sch = self._infer(env.extend(top_arm.binder, mono(top_arm.dom)), t.body)
                body = self._mono_body(sch, t.body)
            except InferenceFailure:
                body = None
            if body is not None and self.checker.is_subtype(
                env.extend(top_arm.binder, mono(top_arm.dom)), body, top_arm.cod
            ):
                return mono(top)
        raise InferenceFailure(f"no template arm fits {render_term(t)}")

    def _infer_app(self, env: Env, t: App) -> Scheme:
        if isinstance(t.fun, Lam):
            # A direct beta redex only arises from evaluation (normalization
            # let-binds lambda heads); type it like the equivalent let so the
            # argument keeps its precise type.
            arg_sch = self._infer(env, t.arg)
            inner_env = env.extend(t.fun.binder, arg_sch)
            body = self._mono_body(self._infer(inner_env, t.fun.body), t.fun.body)
            shape = self._shape_at(t).ty
            return self._filter_template(env, inner_env, body, shape, t)
        fun = self._infer(env, t.fun)
        if fun.qvars:
            raise InferenceFailure(
                f"polymorphic function must be instantiated before application: {render_term(t)}"
            )
        arg = self._infer(env, t.arg)
        arg_body = self._mono_body(arg, t.arg)
        return mono(self.apply_result(env, fun.body, arg_body, t.arg, t))

    def apply_result(
        self,
        env: Env,
        fun_type: LiquidType,
        arg_type: LiquidType,
        arg_term: Term,
        at: Optional[Term] = None,
    ) -> LiquidType:
        """Codomains of the arms whose domain accepts the argument, with the
        argument substituted, intersected."""
        where = render_term(at if at is not None else arg_term)
        arms = [a for a in fun_type.arms if isinstance(a, FunArm)]
        if not arms:
            raise InferenceFailure(f"application of a non-function in {where}")
        survivors = [a for a in arms if self.checker.is_subtype(env, arg_type, a.dom)]
        if not survivors:
            raise InferenceFailure(f"no function arm accepts the argument in {where}")
        atom = _strip_ty(arg_term)
        out = []
        for arm in survivors:
            if isinstance(atom, (Var, Const)):
                cod = subst_liquid(arm.cod, {arm.binder: atom})
            elif arm.binder in _prog_vars(arm.cod):
                raise InferenceFailure(
                    f"non-atomic argument flows into refinements in {where}"
                )
            else:
                cod = arm.cod
            out.extend(cod.arms)
        return make_type(out)

    def _infer_let(self, env: Env, t: Let) -> Scheme:
        shape = self._shape_at(t).ty
        bound = self._infer(env, t.bound)
        inner_env = env.extend(t.binder, bound)
        body = self._mono_body(self._infer(inner_env, t.body), t.body)
        return self._filter_template(env, inner_env, body, shape, t)

    def _filter_template(
        self, env: Env, inner_env: Env, body: LiquidType, shape: SimpleType, t: Term
    ) -> Scheme:
        template = fresh(shape, self.qualifiers, self.max_arms)
        temp = temporary_type(template, self.checker, env, shape)  # wf under the outer env
        # the top-refined skeleton is always a candidate; keeping it whenever
        # it is derivable makes let results stable under evaluation, which
        # substitutes ever more precise types for the bound variable
        candidates = list(dict.fromkeys(list(temp.arms) + list(top_skeleton(shape).arms)))
        keep = [
            arm
            for arm in candidates
            if self.checker.is_subtype(inner_env, body, LiquidType((arm,)))
        ]
        if keep:
            return mono(make_type(keep))
        raise InferenceFailure(f"no template arm fits {render_term(t)}")

    def _infer_inst(self, env: Env, t: TyInst) -> Scheme:
        template = fresh(t.ty, self.qualifiers, self.max_arms)
        instance = temporary_type(template, self.checker, env, t.ty)
        inner = self._infer(env, t.body)
        if not inner.qvars:
            raise InferenceFailure(
                f"instantiation of a monomorphic term: {render_term(t)}"
            )
        alpha, rest = inner.qvars[0], inner.qvars[1:]
        return Scheme(rest, subst_tyvar_liquid(inner.body, alpha, instance))

    def _partial_type(self, env: Env, c: PartialPrim) -> Scheme:
        if c.op == "ite":
            sch = CONSTANTS.type_of(PrimConst("ite"))
            body = sch.body
            for _ in c.args:
                arm = body.arms[0]
                assert isinstance(arm, FunArm)
                body = arm.cod
            return Scheme(sch.qvars, body)
        cur = CONSTANTS.type_of(PrimConst(c.op)).body
        for arg in c.args:
            if not (isinstance(arg, Const) and isinstance(arg.const, (IntConst, BoolConst))):
                raise InferenceFailure("partially applied primitive with a non-literal argument")
            arg_type = CONSTANTS.type_of(arg.const).body
            cur = self.apply_result(env, cur, arg_type, arg)
        return mono(cur)


def _self_eq(base: Base, name: str):
    from .syntax import CmpRef, IffRef, BoolVarRef, VarExp, VALUE_VAR

    if base.name == "int":
        return BaseArm(base, CmpRef("=", VarExp(VALUE_VAR), VarExp(name)))
    return BaseArm(base, IffRef(BoolVarRef(VALUE_VAR), BoolVarRef(name)))


def infer(
    env: Env,
    term: Term,
    qualifiers: Sequence[Refinement],
    engine: Optional[ValidityEngine] = None,
    max_arms: int = 4096,
) -> Scheme:
    """Convenience wrapper constructing a one-shot Inferencer."""
    return Inferencer(qualifiers, engine, max_arms).infer(env, term)
