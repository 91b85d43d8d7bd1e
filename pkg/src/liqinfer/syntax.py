"""Core syntax: lambda terms, ML simple types, refinement expressions and
the intersection-of-refinements type algebra.

Types are kept in a canonical form throughout: an intersection is a
non-empty tuple of arms, deduplicated and sorted by printed form, all
sharing one simple-type shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

VALUE_VAR = "v"

PRIM_OPS = ("neg", "add", "sub", "mul", "le", "ge", "lt", "gt", "eq", "ite", "fix")

PRIM_SURFACE = {
    "neg": "-",
    "add": "+",
    "sub": "sub",
    "mul": "*",
    "le": "<=",
    "ge": ">=",
    "lt": "<",
    "gt": ">",
    "eq": "=",
    "ite": "if",
    "fix": "fix",
}


class LiqError(Exception):
    """Base class for every error raised by this package."""


class IllFoundedType(LiqError):
    """Arms of an intersection do not share a single simple-type shape."""


# ---------------------------------------------------------------------------
# Refinement expressions
# ---------------------------------------------------------------------------
#
# Integer expressions are linear combinations of literals and variables;
# MulExp only ever appears in the exact-product refinement of the
# multiplication primitive.


@dataclass(frozen=True)
class IntExp:
    value: int


@dataclass(frozen=True)
class VarExp:
    """An int-sorted variable (a program variable or the value variable)."""

    name: str


@dataclass(frozen=True)
class NegExp:
    arg: "IntExpr"


@dataclass(frozen=True)
class AddExp:
    lhs: "IntExpr"
    rhs: "IntExpr"


@dataclass(frozen=True)
class SubExp:
    lhs: "IntExpr"
    rhs: "IntExpr"


@dataclass(frozen=True)
class MulExp:
    lhs: "IntExpr"
    rhs: "IntExpr"


IntExpr = Union[IntExp, VarExp, NegExp, AddExp, SubExp, MulExp]


@dataclass(frozen=True)
class TopRef:
    """The empty refinement; satisfied by every value."""


@dataclass(frozen=True)
class BoolRef:
    value: bool


@dataclass(frozen=True)
class CmpRef:
    """Comparison between two integer expressions; op is one of = <= >= < >."""

    op: str
    lhs: IntExpr
    rhs: IntExpr


@dataclass(frozen=True)
class BoolVarRef:
    """A bool-sorted variable used as a propositional atom."""

    name: str


@dataclass(frozen=True)
class IffRef:
    lhs: "Refinement"
    rhs: "Refinement"


@dataclass(frozen=True)
class ConjRef:
    """Conjunction; appears only in derived refinements, never in qualifiers."""

    parts: tuple["Refinement", ...]


Refinement = Union[TopRef, BoolRef, CmpRef, BoolVarRef, IffRef, ConjRef]

TOP = TopRef()

CMP_OPS = ("=", "<=", ">=", "<", ">")


def int_expr_vars(e: IntExpr) -> frozenset[str]:
    if isinstance(e, IntExp):
        return frozenset()
    if isinstance(e, VarExp):
        return frozenset((e.name,))
    if isinstance(e, NegExp):
        return int_expr_vars(e.arg)
    return int_expr_vars(e.lhs) | int_expr_vars(e.rhs)


def refinement_vars(r: Refinement) -> frozenset[str]:
    if isinstance(r, (TopRef, BoolRef)):
        return frozenset()
    if isinstance(r, CmpRef):
        return int_expr_vars(r.lhs) | int_expr_vars(r.rhs)
    if isinstance(r, BoolVarRef):
        return frozenset((r.name,))
    if isinstance(r, IffRef):
        return refinement_vars(r.lhs) | refinement_vars(r.rhs)
    return frozenset().union(*(refinement_vars(p) for p in r.parts)) if r.parts else frozenset()


def refinement_sorts_ok(r: Refinement, sorts: Mapping[str, str]) -> bool:
    """True iff r is a bool-sorted expression with every variable used at the
    sort recorded in `sorts` (values "int" or "bool")."""

    def int_ok(e: IntExpr) -> bool:
        if isinstance(e, IntExp):
            return True
        if isinstance(e, VarExp):
            return sorts.get(e.name) == "int"
        if isinstance(e, NegExp):
            return int_ok(e.arg)
        return int_ok(e.lhs) and int_ok(e.rhs)

    if isinstance(r, (TopRef, BoolRef)):
        return True
    if isinstance(r, CmpRef):
        return int_ok(r.lhs) and int_ok(r.rhs)
    if isinstance(r, BoolVarRef):
        return sorts.get(r.name) == "bool"
    if isinstance(r, IffRef):
        return refinement_sorts_ok(r.lhs, sorts) and refinement_sorts_ok(r.rhs, sorts)
    if isinstance(r, ConjRef):
        return all(refinement_sorts_ok(p, sorts) for p in r.parts)
    return False


# ---------------------------------------------------------------------------
# Terms and constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class PrimConst:
    op: str


@dataclass(frozen=True)
class PartialPrim:
    """A primitive applied to a strict prefix of its arguments.

    Produced only by the evaluator; args are closed value terms.
    """

    op: str
    args: tuple["Term", ...]


Constant = Union[IntConst, BoolConst, PrimConst, PartialPrim]


Pos = Optional[tuple[int, int]]


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    const: Constant
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam:
    binder: str
    body: "Term"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Let:
    binder: str
    bound: "Term"
    body: "Term"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TyAbs:
    """Explicit type abstraction; inserted by elaboration, never parsed."""

    tyvar: str
    body: "Term"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TyInst:
    """Explicit type instantiation at a simple type; inserted by elaboration."""

    ty: "SimpleType"
    body: "Term"
    pos: Pos = field(default=None, compare=False, repr=False)


Term = Union[Var, Const, Lam, App, Let, TyAbs, TyInst]


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Const):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.binder}
    if isinstance(t, App):
        return free_vars(t.fun) | free_vars(t.arg)
    if isinstance(t, Let):
        return free_vars(t.bound) | (free_vars(t.body) - {t.binder})
    return free_vars(t.body)


def subst_term(value: Term, name: str, t: Term) -> Term:
    """Capture-avoiding substitution [value/name]t.

    Binders are globally unique after parsing, so a shadowing binder can only
    be `name` itself, which stops the substitution.
    """
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Const):
        if isinstance(t.const, PartialPrim):
            args = tuple(subst_term(value, name, a) for a in t.const.args)
            return Const(PartialPrim(t.const.op, args))
        return t
    if isinstance(t, Lam):
        if t.binder == name:
            return t
        return Lam(t.binder, subst_term(value, name, t.body))
    if isinstance(t, App):
        return App(subst_term(value, name, t.fun), subst_term(value, name, t.arg))
    if isinstance(t, Let):
        bound = subst_term(value, name, t.bound)
        body = t.body if t.binder == name else subst_term(value, name, t.body)
        return Let(t.binder, bound, body)
    if isinstance(t, TyAbs):
        return TyAbs(t.tyvar, subst_term(value, name, t.body))
    return TyInst(t.ty, subst_term(value, name, t.body))


# ---------------------------------------------------------------------------
# Simple types (ML shapes)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Base:
    name: str  # "int" or "bool"


@dataclass(frozen=True)
class TyVar:
    name: str


@dataclass(frozen=True)
class Arrow:
    """Function shape; the binder names the domain for dependent refinements
    and is ignored by equality."""

    binder: str = field(compare=False)
    dom: "SimpleType"
    cod: "SimpleType"


SimpleType = Union[Base, TyVar, Arrow]

INT = Base("int")
BOOL = Base("bool")


def simple_type_vars(t: SimpleType) -> frozenset[str]:
    if isinstance(t, Base):
        return frozenset()
    if isinstance(t, TyVar):
        return frozenset((t.name,))
    return simple_type_vars(t.dom) | simple_type_vars(t.cod)


# ---------------------------------------------------------------------------
# Liquid intersection types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseArm:
    base: Base
    ref: Refinement


@dataclass(frozen=True)
class FunArm:
    binder: str
    dom: "LiquidType"
    cod: "LiquidType"


@dataclass(frozen=True)
class VarArm:
    name: str


Arm = Union[BaseArm, FunArm, VarArm]


@dataclass(frozen=True)
class LiquidType:
    """A canonical intersection: deduplicated arms sorted by printed form."""

    arms: tuple[Arm, ...]

    def __post_init__(self) -> None:
        if not self.arms:
            raise IllFoundedType("a type must have at least one arm")


@dataclass(frozen=True)
class Scheme:
    qvars: tuple[str, ...]
    body: LiquidType


def arm_shape(a: Arm) -> SimpleType:
    if isinstance(a, BaseArm):
        return a.base
    if isinstance(a, VarArm):
        return TyVar(a.name)
    return Arrow(a.binder, shape_of(a.dom), shape_of(a.cod))


def make_type(arms: Iterable[Arm]) -> LiquidType:
    """Canonicalize: flatten is implicit (arms are arms), dedupe, order by
    printed form, and require a common shape.  A base arm refined by Top is
    absorbed by any other base arm."""
    todo = list(arms)
    if not todo:
        raise IllFoundedType("empty intersection")
    shape = arm_shape(todo[0])
    seen: set[Arm] = set()
    uniq: list[Arm] = []
    for a in todo:
        if arm_shape(a) != shape:
            raise IllFoundedType(
                f"arm shapes differ: {render_simple_type(arm_shape(a))}"
                f" vs {render_simple_type(shape)}"
            )
        if a not in seen:
            seen.add(a)
            uniq.append(a)
    if len(uniq) > 1 and all(isinstance(a, BaseArm) for a in uniq):
        informative = [a for a in uniq if not isinstance(a.ref, TopRef)]
        if informative:
            uniq = informative
    uniq.sort(key=render_arm)
    return LiquidType(tuple(uniq))


def intersect(a: LiquidType, b: LiquidType) -> LiquidType:
    if shape_of(a) != shape_of(b):
        raise IllFoundedType("cannot intersect types of different shapes")
    return make_type(a.arms + b.arms)


def shape_of(t: Union[LiquidType, Scheme]) -> SimpleType:
    """The unique simple type T with t :: T; quantifiers are erased."""
    if isinstance(t, Scheme):
        return shape_of(t.body)
    shape = arm_shape(t.arms[0])
    for a in t.arms[1:]:
        if arm_shape(a) != shape:
            raise IllFoundedType("arms with differing shapes")
    return shape


def well_founded(t: Union[LiquidType, Scheme, Arm], shape: SimpleType) -> bool:
    """Derivability of t :: shape."""
    if isinstance(t, Scheme):
        return well_founded(t.body, shape)
    if isinstance(t, LiquidType):
        return all(well_founded(a, shape) for a in t.arms)
    if isinstance(t, BaseArm):
        return t.base == shape
    if isinstance(t, VarArm):
        return isinstance(shape, TyVar) and shape.name == t.name
    if isinstance(t, FunArm):
        return (
            isinstance(shape, Arrow)
            and well_founded(t.dom, shape.dom)
            and well_founded(t.cod, shape.cod)
        )
    return False


def base_top(base: Base) -> LiquidType:
    return LiquidType((BaseArm(base, TOP),))


def top_skeleton(shape: SimpleType) -> LiquidType:
    """The shape refined with Top at every base position."""
    if isinstance(shape, Base):
        return base_top(shape)
    if isinstance(shape, TyVar):
        return LiquidType((VarArm(shape.name),))
    return LiquidType(
        (FunArm(shape.binder, top_skeleton(shape.dom), top_skeleton(shape.cod)),)
    )


def mono(t: LiquidType) -> Scheme:
    return Scheme((), t)


def type_vars_of(t: Union[LiquidType, Scheme, Arm]) -> frozenset[str]:
    if isinstance(t, Scheme):
        return type_vars_of(t.body) - frozenset(t.qvars)
    if isinstance(t, LiquidType):
        return frozenset().union(*(type_vars_of(a) for a in t.arms))
    if isinstance(t, VarArm):
        return frozenset((t.name,))
    if isinstance(t, FunArm):
        return type_vars_of(t.dom) | type_vars_of(t.cod)
    return frozenset()


# ---------------------------------------------------------------------------
# Environments and substitutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Env:
    """Ordered bindings; order is significant (no exchange)."""

    bindings: tuple[tuple[str, Scheme], ...] = ()

    def extend(self, name: str, scheme: Scheme) -> "Env":
        return Env(self.bindings + ((name, scheme),))

    def lookup(self, name: str) -> Optional[Scheme]:
        for n, s in reversed(self.bindings):
            if n == name:
                return s
        return None

    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.bindings)


ValueSubst = Sequence[tuple[str, Term]]


def _subst_int_expr(e: IntExpr, rho: Mapping[str, Term]) -> IntExpr:
    if isinstance(e, IntExp):
        return e
    if isinstance(e, VarExp):
        t = rho.get(e.name)
        if t is None:
            return e
        if isinstance(t, Var):
            return VarExp(t.name)
        if isinstance(t, Const) and isinstance(t.const, IntConst):
            return IntExp(t.const.value)
        raise LiqError(f"cannot substitute a non-atomic term for {e.name} in a refinement")
    if isinstance(e, NegExp):
        return NegExp(_subst_int_expr(e.arg, rho))
    cls = type(e)
    return cls(_subst_int_expr(e.lhs, rho), _subst_int_expr(e.rhs, rho))


def subst_refinement(r: Refinement, rho: Mapping[str, Term]) -> Refinement:
    if isinstance(r, (TopRef, BoolRef)):
        return r
    if isinstance(r, CmpRef):
        return CmpRef(r.op, _subst_int_expr(r.lhs, rho), _subst_int_expr(r.rhs, rho))
    if isinstance(r, BoolVarRef):
        t = rho.get(r.name)
        if t is None:
            return r
        if isinstance(t, Var):
            return BoolVarRef(t.name)
        if isinstance(t, Const) and isinstance(t.const, BoolConst):
            return BoolRef(t.const.value)
        raise LiqError(f"cannot substitute a non-atomic term for {r.name} in a refinement")
    if isinstance(r, IffRef):
        return IffRef(subst_refinement(r.lhs, rho), subst_refinement(r.rhs, rho))
    return ConjRef(tuple(subst_refinement(p, rho) for p in r.parts))


def _subst_arm(a: Arm, rho: dict[str, Term]) -> Arm:
    if isinstance(a, BaseArm):
        return BaseArm(a.base, subst_refinement(a.ref, rho))
    if isinstance(a, VarArm):
        return a
    inner = {n: t for n, t in rho.items() if n != a.binder}
    return FunArm(a.binder, subst_liquid(a.dom, inner), subst_liquid(a.cod, inner))


def subst_liquid(t: LiquidType, rho: Mapping[str, Term]) -> LiquidType:
    d = dict(rho)
    if not d:
        return t
    return make_type(_subst_arm(a, d) for a in t.arms)


def subst_type(rho: ValueSubst, s: Scheme) -> Scheme:
    """Pointwise substitution of value terms inside refinement expressions;
    type variables are left unchanged."""
    names = [n for n, _ in rho]
    if len(set(names)) != len(names):
        raise LiqError("substitution domain variables must be distinct")
    return Scheme(s.qvars, subst_liquid(s.body, dict(rho)))


def subst_tyvar_liquid(t: LiquidType, name: str, repl: LiquidType) -> LiquidType:
    """Replace the type variable `name` with the type `repl` (arm splicing)."""
    arms: list[Arm] = []
    for a in t.arms:
        if isinstance(a, VarArm) and a.name == name:
            arms.extend(repl.arms)
        elif isinstance(a, FunArm):
            arms.append(
                FunArm(
                    a.binder,
                    subst_tyvar_liquid(a.dom, name, repl),
                    subst_tyvar_liquid(a.cod, name, repl),
                )
            )
        else:
            arms.append(a)
    return make_type(arms)


def subst_tyvar_scheme(s: Scheme, name: str, repl: LiquidType) -> Scheme:
    if name in s.qvars:
        return s
    return Scheme(s.qvars, subst_tyvar_liquid(s.body, name, repl))


# ---------------------------------------------------------------------------
# The constant table ty(c)
# ---------------------------------------------------------------------------


def _v() -> VarExp:
    return VarExp(VALUE_VAR)


def int_literal_expr(n: int) -> IntExpr:
    # negative literals are carried as negations so printing stays invertible
    return NegExp(IntExp(-n)) if n < 0 else IntExp(n)


def _base_eq(n: int) -> LiquidType:
    return LiquidType((BaseArm(INT, CmpRef("=", _v(), int_literal_expr(n))),))


def _ref_arm(ref: Refinement) -> LiquidType:
    return LiquidType((BaseArm(INT, ref),))


def _sign(op: str) -> LiquidType:
    return _ref_arm(CmpRef(op, _v(), IntExp(0)))


def _fun(binder: str, dom: LiquidType, cod: LiquidType) -> FunArm:
    return FunArm(binder, dom, cod)


def _cmp_prim(op: str) -> Scheme:
    result = LiquidType(
        (BaseArm(BOOL, IffRef(BoolVarRef(VALUE_VAR), CmpRef(op, VarExp("a"), VarExp("b")))),)
    )
    return mono(
        make_type([_fun("a", base_top(INT), make_type([_fun("b", base_top(INT), result)]))])
    )


def _arith_prim(expr: IntExpr) -> Scheme:
    result = _ref_arm(CmpRef("=", _v(), expr))
    return mono(
        make_type([_fun("a", base_top(INT), make_type([_fun("b", base_top(INT), result)]))])
    )


def _mul_scheme() -> Scheme:
    ge, le = _sign(">="), _sign("<=")
    exact = _fun(
        "a",
        base_top(INT),
        make_type([_fun("b", base_top(INT), _ref_arm(CmpRef("=", _v(), MulExp(VarExp("a"), VarExp("b")))))]),
    )
    signs = [
        _fun("a", ge, make_type([_fun("b", ge, ge)])),
        _fun("a", le, make_type([_fun("b", le, ge)])),
        _fun("a", ge, make_type([_fun("b", le, le)])),
        _fun("a", le, make_type([_fun("b", ge, le)])),
    ]
    return mono(make_type([exact] + signs))


class ConstantTable:
    """Maps constants to their refined type schemes."""

    def __init__(self) -> None:
        neg_cod = _ref_arm(CmpRef("=", _v(), NegExp(VarExp("a"))))
        self._prims: dict[str, Scheme] = {
            "neg": mono(make_type([_fun("a", base_top(INT), neg_cod)])),
            "add": _arith_prim(AddExp(VarExp("a"), VarExp("b"))),
            "sub": _arith_prim(SubExp(VarExp("a"), VarExp("b"))),
            "mul": _mul_scheme(),
            "le": _cmp_prim("<="),
            "ge": _cmp_prim(">="),
            "lt": _cmp_prim("<"),
            "gt": _cmp_prim(">"),
            "eq": _cmp_prim("="),
            "ite": Scheme(
                ("a",),
                make_type(
                    [
                        _fun(
                            "c",
                            base_top(BOOL),
                            make_type(
                                [
                                    _fun(
                                        "t",
                                        LiquidType((VarArm("a"),)),
                                        make_type(
                                            [
                                                _fun(
                                                    "e",
                                                    LiquidType((VarArm("a"),)),
                                                    LiquidType((VarArm("a"),)),
                                                )
                                            ]
                                        ),
                                    )
                                ]
                            ),
                        )
                    ]
                ),
            ),
            "fix": Scheme(
                ("a",),
                make_type(
                    [
                        _fun(
                            "f",
                            make_type(
                                [_fun("x", LiquidType((VarArm("a"),)), LiquidType((VarArm("a"),)))]
                            ),
                            LiquidType((VarArm("a"),)),
                        )
                    ]
                ),
            ),
        }

    def type_of(self, c: Constant) -> Scheme:
        if isinstance(c, IntConst):
            return mono(_base_eq(c.value))
        if isinstance(c, BoolConst):
            return mono(
                LiquidType((BaseArm(BOOL, IffRef(BoolVarRef(VALUE_VAR), BoolRef(c.value))),))
            )
        if isinstance(c, PrimConst):
            return self._prims[c.op]
        raise LiqError(f"no table entry for partially applied constant {c}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def render_int_expr(e: IntExpr) -> str:
    if isinstance(e, IntExp):
        return str(e.value)
    if isinstance(e, VarExp):
        return e.name
    if isinstance(e, NegExp):
        inner = render_int_expr(e.arg)
        if isinstance(e.arg, (IntExp, VarExp)):
            return f"-{inner}"
        return f"-({inner})"
    op = {AddExp: "+", SubExp: "-", MulExp: "*"}[type(e)]
    return f"({render_int_expr(e.lhs)} {op} {render_int_expr(e.rhs)})"


def render_refinement(r: Refinement) -> str:
    if isinstance(r, TopRef):
        return "true"
    if isinstance(r, BoolRef):
        return "true" if r.value else "false"
    if isinstance(r, CmpRef):
        return f"({render_int_expr(r.lhs)}{r.op}{render_int_expr(r.rhs)})"
    if isinstance(r, BoolVarRef):
        return r.name
    if isinstance(r, IffRef):
        return f"({render_refinement(r.lhs)} <=> {render_refinement(r.rhs)})"
    return "(" + " && ".join(render_refinement(p) for p in r.parts) + ")"


def render_arm(a: Arm) -> str:
    if isinstance(a, BaseArm):
        return f"{{{VALUE_VAR} : {a.base.name} | {render_refinement(a.ref)}}}"
    if isinstance(a, VarArm):
        return a.name
    return f"({a.binder}: {render_type(a.dom)} -> {render_type(a.cod)})"


def render_type(t: LiquidType) -> str:
    return " /\\ ".join(render_arm(a) for a in t.arms)


def render_scheme(s: Scheme) -> str:
    if s.qvars:
        return f"forall {' '.join(s.qvars)}. {render_type(s.body)}"
    return render_type(s.body)


def render_simple_type(t: SimpleType) -> str:
    if isinstance(t, Base):
        return t.name
    if isinstance(t, TyVar):
        return t.name
    dom = render_simple_type(t.dom)
    if isinstance(t.dom, Arrow):
        dom = f"({dom})"
    return f"{dom} -> {render_simple_type(t.cod)}"


def render_constant(c: Constant) -> str:
    if isinstance(c, IntConst):
        return str(c.value)
    if isinstance(c, BoolConst):
        return "true" if c.value else "false"
    if isinstance(c, PrimConst):
        return PRIM_SURFACE[c.op]
    inner = " ".join(render_term(a) for a in c.args)
    return f"<{PRIM_SURFACE[c.op]} {inner}>"


def _atom(t: Term) -> str:
    s = render_term(t)
    if isinstance(t, (Var, Const)):
        return s
    return f"({s})"


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return render_constant(t.const)
    if isinstance(t, Lam):
        return f"\\{t.binder}. {render_term(t.body)}"
    if isinstance(t, App):
        fun = render_term(t.fun) if isinstance(t.fun, (Var, Const, App)) else f"({render_term(t.fun)})"
        return f"{fun} {_atom(t.arg)}"
    if isinstance(t, Let):
        return f"let {t.binder} = {render_term(t.bound)} in {render_term(t.body)}"
    if isinstance(t, TyAbs):
        return f"[/\\{t.tyvar}]{_atom(t.body)}"
    return f"[{render_simple_type(t.ty)}]{_atom(t.body)}"


# ---------------------------------------------------------------------------
# Fresh names
# ---------------------------------------------------------------------------


class NameSource:
    """Deterministic fresh-name supply that avoids a set of taken names."""

    def __init__(self, prefix: str, used: Optional[Iterable[str]] = None) -> None:
        self.prefix = prefix
        self.used = set(used or ())
        self.counter = 0

    def reserve(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def fresh(self, base: Optional[str] = None) -> str:
        if base is not None:
            if base not in self.used:
                self.used.add(base)
                return base
            i = 0
            while f"{base}%{i}" in self.used:
                i += 1
            self.used.add(f"{base}%{i}")
            return f"{base}%{i}"
        while True:
            cand = f"{self.prefix}{self.counter}"
            self.counter += 1
            if cand not in self.used:
                self.used.add(cand)
                return cand


CONSTANTS = ConstantTable()  # instantiated last: the canonical arm order needs the printer
