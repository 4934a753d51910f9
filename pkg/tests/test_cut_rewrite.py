import random

import pytest
from hypothesis import given, strategies as st

from goimall import corpus as corpus_mod
from goimall.cut_rewrite import (
    StepBudgetExceeded, classify, find_redexes, lift_step, normalize, normalize_lifted, reduce_step,
)
from goimall.indexed_logic import check_indexed_proof, fl_forward
from goimall.mall_syntax import check_proof, format_proof, is_cut_free, parse_proof, size
from goimall.rel_model import all_matched, interp_denotational

from helpers import MEDIUM_WITH_CUTS

# (proof, first redex, result of one step), frozen from the reference run
ONE_STEP = [
    ("(cut (ex (ax 1) 0 1) (ex (ax 1) 0 1))", "AxCut@root", "(ex (ax 1) 0 1)"),
    ("(cut (one) (ex (ex (bot (ax 1)) 1 2) 0 1))", "UnitCut@root", "(ax 1)"),
    ("(cut (one) (ex (bot (ax 1)) 0 1))", "CommuteOther(bot)@root", "(bot (cut (one) (ex (ax 1) 0 1)))"),
    ("(cut (one) (plus1 (ex (ax 1) 0 1) bot))", "CommuteOther(plus1)@root",
     "(plus1 (cut (one) (ex (ax 1) 0 1)) bot)"),
    ("(cut (one) (par (ex (ex (bot (ax 1)) 1 2) 0 1)))", "CommuteOther(par)@root",
     "(par (cut (one) (ex (ex (bot (ax 1)) 1 2) 0 1)))"),
    ("(cut (one) (tensor (ex (ax 1) 0 1) (ex (ax 1) 0 1)))", "CommuteOther(tensor)@root",
     "(tensor (cut (one) (ex (ax 1) 0 1)) (ex (ax 1) 0 1))"),
    ("(cut (one) (with (ex (ax 1) 0 1) (ex (ax 1) 0 1) ()))", "CommuteWith@root",
     "(with (cut (one) (ex (ax 1) 0 1)) (cut (one) (ex (ax 1) 0 1)) ())"),
    ("(cut (par (ax 1)) (ex (ex (tensor (ax 1) (ex (ax 1) 0 1)) 1 2) 0 1))", "TensorPar@root",
     "(ex (cut (ex (cut (ax 1) (ex (ex (ax 1) 0 1) 0 1)) 0 1) (ex (ax 1) 0 1)) 0 1)"),
    ("(cut (plus2 (ax 1) bot) (ex (with (ex (ax 1) 0 1) (ex (ax 1) 0 1) ()) 0 1))", "WithPlus(2)@root",
     "(cut (ax 1) (ex (ex (ax 1) 0 1) 0 1))"),
    ("(cut (top ()) (top (0)))", "CommuteOther(top)@root", "(top ())"),
]


@pytest.mark.parametrize("src, label, dst", ONE_STEP)
def test_single_steps(src, label, dst):
    p = parse_proof(src)
    r = find_redexes(p)[0]
    assert r.label() == label
    q = reduce_step(p, r)
    assert format_proof(q) == dst
    assert check_proof(q).context == check_proof(p).context


def test_prologue_lifted_trace(pi1, prologue_family):
    steps = normalize_lifted(pi1, prologue_family)
    assert [st.trace_line(k) for k, st in enumerate(steps, 1)] == [
        "step 1: WithPlus(1)@root  J: {1,2} -> {1}  dropped: {2}",
        "step 2: AxCut@root  J: {1} -> {1}  dropped: {}",
    ]
    assert format_proof(steps[0].after[0]) == "(cut (ex (ax 1) 0 1) (ex (ax 1) 0 1))"
    assert format_proof(steps[1].after[0]) == "(ex (ax 1) 0 1)"


def test_cut_free_proofs_have_no_redex():
    p = parse_proof("(ex (ax 1) 0 1)")
    assert find_redexes(p) == []
    assert normalize(p) == []


def test_classify_looks_through_exchanges():
    p = parse_proof("(cut (ex (ax 1) 0 1) (ex (ax 1) 0 1))")
    assert classify(p).kind == "AxCut"


def test_budget_is_enforced(pi1):
    with pytest.raises(StepBudgetExceeded):
        normalize(pi1, budget=1)


@given(st.sampled_from(MEDIUM_WITH_CUTS))
def test_every_step_preserves_conclusion_and_denotation(p):
    seq, d = check_proof(p), interp_denotational(p)
    for r in find_redexes(p):
        q = reduce_step(p, r)
        s2 = check_proof(q)
        assert s2.context == seq.context
        assert interp_denotational(q) == d


@given(st.sampled_from(MEDIUM_WITH_CUTS))
def test_normalization_reaches_a_cut_free_proof(p):
    steps = normalize(p)
    q = steps[-1][1]
    assert is_cut_free(q)
    assert len(steps) <= 10 * size(p) ** 2
    assert interp_denotational(q) == interp_denotational(p)


@given(st.sampled_from(MEDIUM_WITH_CUTS), st.integers(0, 2**16))
def test_lifting_is_index_diminishing(p, seed):
    fam = corpus_mod.random_family(p, random.Random(seed))
    if fam is None:
        return
    for r in find_redexes(p):
        st_ = lift_step(p, fam, r)
        q, mu = st_.after
        assert mu.J <= fam.J and st_.dropped == fam.J - mu.J
        check_indexed_proof(fl_forward(q, mu))
    steps = normalize_lifted(p, fam)
    final = steps[-1].after[1]
    assert final.J == frozenset(j for j in fam.J if all_matched(fam.values[j]))
