import pytest

from liqinfer.anf import normalize
from liqinfer.inference import ArmCapExceeded, Inferencer, InferenceFailure, fresh
from liqinfer.metatheory import GenConfig, random_term
from liqinfer.parser import parse_term
from liqinfer.shapes import w_infer
from liqinfer.subtyping import SubtypeChecker
from liqinfer.syntax import (
    Arrow,
    BaseArm,
    CmpRef,
    Const,
    Env,
    FunArm,
    INT,
    IntConst,
    IntExp,
    LiquidType,
    NegExp,
    TOP,
    VarArm,
    VarExp,
    VALUE_VAR,
    make_type,
    mono,
    render_scheme,
    shape_of,
)
from liqinfer.validity import ValidityEngine

GE = CmpRef(">=", VarExp(VALUE_VAR), IntExp(0))
LE = CmpRef("<=", VarExp(VALUE_VAR), IntExp(0))
Y5 = CmpRef("=", VarExp("y"), IntExp(5))


def base(*refs):
    return make_type([BaseArm(INT, r) for r in refs])


def arm(dq, cq):
    return FunArm("x", base(dq), base(cq))


NEG_RESULT = make_type([arm(GE, LE), arm(LE, GE)])
MUL_RESULT = make_type([arm(GE, GE), arm(LE, GE)])


@pytest.fixture()
def inferencer(engine, sign_qualifiers):
    return Inferencer(sign_qualifiers, engine)


class TestFresh:
    def test_square_cardinality(self):
        shape = Arrow("x", INT, INT)
        for n in (1, 2, 3):
            quals = [CmpRef(">=", VarExp(VALUE_VAR), IntExp(k)) for k in range(n)]
            assert len(fresh(shape, quals).arms) == n * n

    def test_four_arm_listing(self, sign_qualifiers):
        got = fresh(Arrow("x", INT, INT), sign_qualifiers)
        expected = make_type([arm(GE, GE), arm(GE, LE), arm(LE, GE), arm(LE, LE)])
        assert got == expected

    def test_nine_arms_with_program_variable_qualifier(self, sign_qualifiers):
        quals = list(sign_qualifiers) + [Y5]
        got = fresh(Arrow("x", INT, INT), quals)
        assert len(got.arms) == 9

    def test_empty_qualifier_set_collapses_to_top(self):
        assert fresh(INT, []) == base(TOP)

    def test_type_variable_positions_unrefined(self, sign_qualifiers):
        from liqinfer.syntax import TyVar

        got = fresh(Arrow("x", TyVar("a"), TyVar("a")), sign_qualifiers)
        assert got == LiquidType(
            (FunArm("x", LiquidType((VarArm("a"),)), LiquidType((VarArm("a"),))),)
        )

    def test_cap_exceeded_names_the_cap(self, sign_qualifiers):
        shape = Arrow("x", INT, Arrow("y", INT, INT))
        with pytest.raises(ArmCapExceeded, match="cap of 4"):
            fresh(shape, sign_qualifiers, max_arms=4)


class TestInferGolden:
    def test_neg(self, inferencer):
        term = normalize(parse_term("\\x. - x"))
        got = inferencer.infer(Env(), term)
        assert got == mono(NEG_RESULT)

    def test_mul(self, inferencer):
        term = normalize(parse_term("\\x. * x x"))
        got = inferencer.infer(Env(), term)
        assert got == mono(MUL_RESULT)

    def test_integer_literal(self, inferencer):
        got = inferencer.infer(Env(), Const(IntConst(5)))
        assert got == mono(base(CmpRef("=", VarExp(VALUE_VAR), IntExp(5))))

    def test_filtering_stages(self, engine, sign_qualifiers):
        # 9 template arms -> 4 well-formed -> 2 after subtyping
        quals = list(sign_qualifiers) + [Y5]
        term = normalize(parse_term("\\x. - x"))
        shape = w_infer({}, term).ty
        template = fresh(shape, quals)
        assert len(template.arms) == 9
        checker = SubtypeChecker(engine)
        wf = [a for a in template.arms if checker.wf_check(Env(), LiquidType((a,)))]
        assert len(wf) == 4
        final = Inferencer(quals, engine).infer(Env(), term)
        assert final == mono(NEG_RESULT)
        assert len(final.body.arms) == 2


class TestApplyResult:
    def test_survivor_selection(self, inferencer):
        # one validity query per arm; {v=3} < {v>=0} holds (oracle-checked in
        # the metatheory suite), so only the nonnegative-domain arm survives
        arg = base(CmpRef("=", VarExp(VALUE_VAR), IntExp(3)))
        got = inferencer.apply_result(Env(), NEG_RESULT, arg, Const(IntConst(3)))
        assert got == base(LE)

    def test_single_arm_plain_substitution(self, inferencer):
        ident = LiquidType(
            (FunArm("x", base(TOP), base(CmpRef("=", VarExp(VALUE_VAR), VarExp("x")))),)
        )
        got = inferencer.apply_result(Env(), ident, base(CmpRef("=", VarExp(VALUE_VAR), IntExp(7))), Const(IntConst(7)))
        assert got == base(CmpRef("=", VarExp(VALUE_VAR), IntExp(7)))

    def test_empty_survivors_fail(self, inferencer):
        neg_only = make_type([arm(GE, LE)])
        arg = base(CmpRef("=", VarExp(VALUE_VAR), NegExp(IntExp(1))))
        with pytest.raises(InferenceFailure, match="no function arm"):
            inferencer.apply_result(Env(), neg_only, arg, Const(IntConst(-1)))


class TestInferForms:
    def test_application_of_neg(self, inferencer):
        term = normalize(parse_term("- 3"))
        got = inferencer.infer(Env(), term)
        assert got == mono(base(CmpRef("=", VarExp(VALUE_VAR), NegExp(IntExp(3)))))

    def test_let_result_filtered_by_templates(self, inferencer):
        term = normalize(parse_term("let x = 2 in + x x"))
        got = inferencer.infer(Env(), term)
        assert got == mono(base(GE))

    def test_polymorphic_identity(self, inferencer):
        term = normalize(parse_term("\\z. z"))
        got = inferencer.infer(Env(), term)
        assert len(got.qvars) == 1
        a = got.qvars[0]
        assert got.body == LiquidType(
            (FunArm("z", LiquidType((VarArm(a),)), LiquidType((VarArm(a),))),)
        )

    def test_instantiation_substitutes_wf_template(self, engine):
        # with Q = {v>=0} the instantiated identity keeps the qualifier
        quals = [GE]
        term = normalize(parse_term("let id = \\z. z in id 5"))
        got = Inferencer(quals, engine).infer(Env(), term)
        assert got == mono(base(GE))

    def test_conjunction_instantiation_rejects_unfit_argument(self, inferencer):
        # both sign qualifiers land on the instantiated domain; 5 fails v<=0
        term = normalize(parse_term("let id = \\z. z in id 5"))
        with pytest.raises(InferenceFailure):
            inferencer.infer(Env(), term)

    def test_variable_at_base_shape(self, inferencer):
        env = Env().extend("n", mono(base(GE)))
        got = inferencer.infer(env, parse_term("n"))
        assert got == mono(base(CmpRef("=", VarExp(VALUE_VAR), VarExp("n"))))

    def test_variable_at_function_shape(self, inferencer):
        env = Env().extend("f", mono(NEG_RESULT))
        got = inferencer.infer(env, parse_term("f"))
        assert got == mono(NEG_RESULT)

    def test_unbound_variable(self, inferencer):
        from liqinfer.shapes import ShapeError

        with pytest.raises(ShapeError):
            inferencer.infer(Env(), parse_term("ghost"))


class TestInvariants:
    def test_shape_preservation(self, inferencer, sign_qualifiers):
        import random

        rng = random.Random(23)
        checked = 0
        for _ in range(60):
            term = normalize(random_term(rng, GenConfig()))
            try:
                sch = inferencer.infer(Env(), term)
            except Exception:
                continue
            checked += 1
            w = w_infer({}, term)
            assert shape_of(sch.body) == w.ty
            assert len(sch.qvars) == len(w.qvars)
        assert checked > 20

    def test_determinism(self, engine, sign_qualifiers):
        term = normalize(parse_term("\\x. * x x"))
        one = Inferencer(sign_qualifiers, engine).infer(Env(), term)
        two = Inferencer(sign_qualifiers, ValidityEngine()).infer(Env(), term)
        assert render_scheme(one) == render_scheme(two)

    def test_monotone_under_larger_qualifier_set(self, engine, sign_qualifiers):
        import random

        rng = random.Random(29)
        q_small = [GE]
        q_large = list(sign_qualifiers)  # superset of q_small
        small = Inferencer(q_small, engine)
        large = Inferencer(q_large, engine)
        def qualifier_arms(scheme):
            # the invariant concerns arms drawn from the qualifier set; the
            # collapsed top skeleton does not count
            return {
                a for a in scheme.body.arms
                if not (isinstance(a, BaseArm) and isinstance(a.ref, TOP.__class__))
            }

        kept = 0
        for _ in range(40):
            term = normalize(random_term(rng, GenConfig(max_depth=3)))
            try:
                arms_small = qualifier_arms(small.infer(Env(), term))
                arms_large = qualifier_arms(large.infer(Env(), term))
            except Exception:
                continue
            kept += 1
            assert arms_small <= arms_large
        assert kept > 15

    def test_constraint_log_populated(self, engine, sign_qualifiers):
        log = []
        inf = Inferencer(sign_qualifiers, engine, constraint_log=log)
        inf.infer(Env(), normalize(parse_term("\\x. - x")))
        kinds = {e.kind for e in log}
        assert kinds == {"wf", "sub"}


class TestFixThroughPolymorphicScheme:
    def test_types_at_top_skeleton_with_empty_qualifiers(self, engine):
        term = normalize(parse_term("fix (\\f. \\n. + n 0)"))
        got = Inferencer((), engine).infer(Env(), term)
        assert render_scheme(got) == "(n: {v : int | true} -> {v : int | true})"

    def test_conjunction_domains_reject_sign_qualifiers(self, inferencer):
        # the instantiated intersection demands every qualifier at once;
        # recursion offers no escape hatch, so this fails cleanly
        term = normalize(parse_term("fix (\\f. \\n. + n 0)"))
        with pytest.raises(InferenceFailure):
            inferencer.infer(Env(), term)


class TestTemporaryType:
    def test_collapse_to_top_skeleton(self, engine, sign_qualifiers):
        from liqinfer.inference import temporary_type
        from liqinfer.subtyping import SubtypeChecker
        from liqinfer.syntax import top_skeleton

        checker = SubtypeChecker(engine)
        shape = Arrow("x", INT, INT)
        # every arm mentions the unbound y, so everything is filtered
        template = fresh(shape, [Y5])
        got = temporary_type(template, checker, Env(), shape)
        assert got == top_skeleton(shape)

    def test_survivors_kept(self, engine, sign_qualifiers):
        from liqinfer.inference import temporary_type
        from liqinfer.subtyping import SubtypeChecker

        checker = SubtypeChecker(engine)
        shape = Arrow("x", INT, INT)
        template = fresh(shape, list(sign_qualifiers) + [Y5])
        got = temporary_type(template, checker, Env(), shape)
        assert len(got.arms) == 4
