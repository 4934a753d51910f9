import random

import pytest
from hypothesis import given, strategies as st

from goimall import corpus as corpus_mod
from goimall.indexed_logic import (
    IFormula, IndexedFamily, IndexedProofError, TranslationUndefined, check_indexed_proof, erase,
    fl_backward, fl_forward, format_indexed_proof, idual, point_at, restrict_proof,
    translate_formula_family, translate_sequent, underlying, well_formed,
)
from goimall.mall_syntax import check_proof, parse_formula, parse_proof
from goimall.rel_model import STAR, In1, In2, NotAMember, Pair, PointVec, interp_formula

from helpers import SMALL_WITH_POINTS


def test_prologue_translation(pi1, prologue_family):
    seq = check_proof(pi1)
    isq = translate_sequent(seq.cuts, seq.context, prologue_family)
    assert str(isq) == "|-{1,2} [ (1{1} & 1{2}, bot{1,2} + bot{}) ] bot{1,2}, 1{1,2}"


def test_translation_of_a_family():
    f = parse_formula("((1 + 1) * bot)")
    a = translate_formula_family(f, {"1": Pair(In1(STAR), STAR), "2": Pair(In2(STAR), STAR)})
    assert str(a) == "(1{1} + 1{2}) * bot{1,2}"
    assert well_formed(a) and underlying(a) == f
    assert point_at(a, "2") == Pair(In2(STAR), STAR)
    assert str(idual(a)) == "(bot{1} & bot{2}) par 1{1,2}"


def test_translation_undefined_on_empty_webs():
    with pytest.raises(TranslationUndefined):
        translate_formula_family(parse_formula("(0 + 1)"), {"1": In1(STAR)})


def test_ill_formed_additive_domains():
    one = IFormula("1", frozenset({"1"}))
    assert not well_formed(IFormula("+", frozenset({"1"}), one, one))


def _families(p, rng):
    yield from corpus_mod.chunked_families(p)
    yield corpus_mod.random_family(p, rng)


@given(st.sampled_from(SMALL_WITH_POINTS), st.integers(0, 2**16))
def test_fundamental_lemma_round_trip(p, seed):
    rng = random.Random(seed)
    for fam in _families(p, rng):
        r = fl_forward(p, fam)
        seq = check_indexed_proof(r)
        plain = check_proof(p)
        assert seq == translate_sequent(plain.cuts, plain.context, fam)
        assert erase(r) == p
        assert erase(restrict_proof(r, ())) == p
        back, q = fl_backward(r)
        assert q == p and back.J == fam.J and dict(back.values) == dict(fam.values)


def test_fl_forward_rejects_non_members(pi1):
    bogus = IndexedFamily(frozenset({"1"}), {"1": PointVec((), (STAR, STAR))})
    with pytest.raises(NotAMember):
        fl_forward(pi1, bogus)


def test_restriction_drops_indices(pi1, prologue_family):
    r = fl_forward(pi1, prologue_family)
    seq = check_indexed_proof(restrict_proof(r, {"2"}))
    assert seq.J == frozenset({"2"})
    assert str(seq) == "|-{2} [ (1{} & 1{2}, bot{2} + bot{}) ] bot{2}, 1{2}"


def test_indexed_checker_reports_bad_axiom():
    from goimall.indexed_logic import IAx
    bad = IAx(IFormula("+", frozenset({"1"}), IFormula("1", frozenset({"1"})), IFormula("1", frozenset({"1"}))))
    with pytest.raises(IndexedProofError):
        check_indexed_proof(bad)


def test_indexed_proof_listing(pi1, prologue_family):
    text = format_indexed_proof(fl_forward(pi1, prologue_family))
    assert text.splitlines()[0] == "cut: |-{1,2} [ (1{1} & 1{2}, bot{1,2} + bot{}) ] bot{1,2}, 1{1,2}"
    assert len(text.splitlines()) == 9


def test_family_json_round_trip(prologue_family):
    again = IndexedFamily.from_json(prologue_family.to_json())
    assert again.J == prologue_family.J and dict(again.values) == dict(prologue_family.values)
    with pytest.raises(ValueError):
        IndexedFamily.from_json({"J": ["1", "2"], "values": {"1": prologue_family.to_json()["values"]["1"]}})
