import random

from liqinfer.metatheory import GenConfig, random_term
from liqinfer.parser import parse_term
from liqinfer.semantics import (
    AtValue,
    Done,
    Next,
    Stuck,
    StuckAt,
    Timeout,
    delta,
    evaluate,
    is_value,
    step,
)
from liqinfer.syntax import (
    App,
    BoolConst,
    Const,
    IntConst,
    Lam,
    PartialPrim,
    PrimConst,
)


def run(src, fuel=100):
    return evaluate(parse_term(src), fuel)


class TestStep:
    def test_beta(self):
        out = step(parse_term("(\\x. - x) 3"))
        assert isinstance(out, Next)
        assert out.term == parse_term("- 3")

    def test_let(self):
        out = step(parse_term("let x = 2 in x"))
        assert isinstance(out, Next)
        assert out.term == Const(IntConst(2))

    def test_delta_neg(self):
        out = step(parse_term("- 3"))
        assert isinstance(out, Next)
        assert out.term == Const(IntConst(-3))

    def test_values_do_not_step(self):
        for src in ["3", "true", "\\x. x", "+"]:
            assert isinstance(step(parse_term(src)), AtValue)

    def test_deterministic_decomposition(self):
        term = parse_term("+ (- 1) (- 2)")
        first = step(term)
        second = step(term)
        assert isinstance(first, Next) and first.term == second.term

    def test_stuck_literal_head(self):
        out = step(parse_term("3 4"))
        assert isinstance(out, Stuck)

    def test_stuck_ill_typed_delta(self):
        out = step(parse_term("- true"))
        assert isinstance(out, Stuck)


class TestDelta:
    def test_add(self):
        partial = delta(PrimConst("add"), Const(IntConst(2)))
        assert partial == Const(PartialPrim("add", (Const(IntConst(2)),)))
        out = delta(partial.const, Const(IntConst(3)))
        assert out == Const(IntConst(5))

    def test_le(self):
        partial = delta(PrimConst("le"), Const(IntConst(1)))
        assert delta(partial.const, Const(IntConst(1))) == Const(BoolConst(True))

    def test_ite_selects(self):
        p1 = delta(PrimConst("ite"), Const(BoolConst(False)))
        p2 = delta(p1.const, Const(IntConst(1)))
        assert delta(p2.const, Const(IntConst(9))) == Const(IntConst(9))

    def test_fix_unrolls_eta_delayed(self):
        f = Lam("g", Const(IntConst(0)))
        out = delta(PrimConst("fix"), f)
        assert isinstance(out, App) and out.fun == f
        assert isinstance(out.arg, Lam)

    def test_fix_terminates_on_guarded_recursion(self):
        # factorial with thunked branches (ite is strict, so recursion must
        # hide behind a lambda); reaches a value within bounded fuel
        src = "fix (\\f. \\n. (if (<= n 1) (\\d. 1) (\\d. * n (f (sub n 1)))) 0) 4"
        res = run(src, 400)
        assert isinstance(res, Done)
        assert res.value == Const(IntConst(24))


class TestEvaluate:
    def test_neg_redex(self):
        res = run("(\\x. - x) 3", 10)
        assert isinstance(res, Done) and res.value == Const(IntConst(-3))

    def test_timeout_on_divergence(self):
        res = run("fix (\\f. \\n. f n) 1", 50)
        assert isinstance(res, Timeout)

    def test_let_add(self):
        # two delta steps: + 2 -> <+ 2>, then <+ 2> 2 -> 4
        res = run("let x = 2 in + x x", 10)
        assert isinstance(res, Done) and res.value == Const(IntConst(4))

    def test_stuck_reported_with_redex(self):
        res = run("+ 1 true", 10)
        assert isinstance(res, StuckAt)
        assert res.redex is not None

    def test_no_stuck_on_random_welltyped(self):
        from liqinfer.anf import normalize
        from liqinfer.shapes import w_infer

        rng = random.Random(21)
        checked = 0
        for _ in range(150):
            term = normalize(random_term(rng, GenConfig()))
            try:
                w_infer({}, term)
            except Exception:
                continue
            checked += 1
            assert not isinstance(evaluate(term, 200), StuckAt)
        assert checked > 100

    def test_value_identity(self):
        lam = parse_term("\\x. x")
        res = evaluate(lam, 5)
        assert isinstance(res, Done) and res.value == lam and is_value(lam)
