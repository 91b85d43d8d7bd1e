#!/usr/bin/env python3
"""Watch subject reduction at work: evaluate a term step by step and
re-check every reduct against the type inferred for the original.

    python demos/metatheory_walkthrough.py
"""

from liqinfer import Env, Inferencer, ValidityEngine, normalize, recheck, render_scheme, render_term
from liqinfer.anf import _all_names
from liqinfer.metatheory import default_qualifiers, run_oracle_agreement
from liqinfer.parser import parse_term
from liqinfer.semantics import AtValue, Next, step
from liqinfer.syntax import NameSource

qualifiers = default_qualifiers()
engine = ValidityEngine()
inferencer = Inferencer(qualifiers, engine)

term = normalize(parse_term("(\\x. - x) (* 3 4)"))
scheme = inferencer.infer(Env(), term)
print("term:    ", render_term(term))
print("inferred:", render_scheme(scheme))
print()

names = NameSource("fx", used=_all_names(term))
cur = term
for i in range(50):
    out = step(cur, names)
    if isinstance(out, AtValue):
        print(f"value after {i} steps: {render_term(cur)}")
        break
    assert isinstance(out, Next)
    cur = out.term
    ok = recheck(Env(), cur, scheme, qualifiers, inferencer=inferencer)
    print(f"step {i + 1}: {render_term(cur)}")
    print(f"         still has the original type: {ok}")
    assert ok

print()
print("finite-domain oracle vs built-in checker on 50 random implications:")
report = run_oracle_agreement(50, bound=4, seed=11, engine=engine)
print(f"  valid={report.valid} invalid={report.invalid}"
      f" unknown={report.unknown} unsound={report.unsound}")
