import pickle

import pytest
from hypothesis import given, strategies as st

from goimall.mall_syntax import (
    Ax, Bot, CutI, Exch, One, ParseError, ProofError, Top, Zero, With, check_proof, dual,
    format_formula, format_proof, formula_size, is_cut_free, parse_formula, parse_proof, size,
    subterm, replace_at, walk,
)

from helpers import SMALL

units = st.sampled_from([One(), Bot(), Zero(), Top()])
formulas = st.recursive(
    units,
    lambda sub: st.builds(lambda op, a, b: parse_formula(f"({format_formula(a)} {op} {format_formula(b)})"),
                          st.sampled_from(["*", "par", "+", "&"]), sub, sub),
    max_leaves=6,
)
proofs = st.sampled_from(SMALL)


def test_formula_printing_and_dual():
    f = parse_formula("(1 * (bot par 0))")
    assert format_formula(f) == "(1 * (bot par 0))"
    assert format_formula(dual(f)) == "(bot par (1 * top))"
    assert formula_size(f) == 5


@given(formulas)
def test_dual_is_involutive(f):
    assert dual(dual(f)) == f
    assert dual(f) != f


@given(formulas)
def test_formula_round_trip(f):
    assert parse_formula(format_formula(f)) == f


@given(proofs)
def test_proof_round_trip(p):
    text = format_proof(p)
    assert parse_proof(text) == p
    assert format_proof(parse_proof(text)) == text


@given(proofs)
def test_pickle_keeps_equality_and_hash(p):
    q = pickle.loads(pickle.dumps(p))
    assert q == p and hash(q) == hash(p)


def test_prologue_sequent(pi1):
    seq = check_proof(pi1)
    assert str(seq) == "|- [((1 & 1), (bot + bot))] bot, 1"
    assert size(pi1) == 6
    assert not is_cut_free(pi1)


def test_axiom_orientation():
    seq = check_proof(Ax(parse_formula("(1 & bot)")))
    assert seq.context == (With(One(), Bot()), dual(With(One(), Bot())))


def test_exchange_not_counted():
    assert size(Exch(Ax(One()), 0, 1)) == size(Ax(One())) == 1


@pytest.mark.parametrize("text, offset", [
    ("(ax", 3),
    ("(ax 1))", 6),
    ("(foo 1)", 1),
    ("(ax (1 ? 1))", 7),
])
def test_parse_errors_carry_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse_proof(text)
    assert info.value.offset == offset


@pytest.mark.parametrize("text, message, path", [
    ("(ex (ax 1) 0 5)", "exchange positions 0,5 out of range for 2 formulas", ()),
    ("(cut (ax 1) (ax 0))", "cut formulas not dual: bot vs 0", ()),
    ("(with (ax 1) (ax 0) ())", "with premises have different contexts", ()),
    ("(bot (cut (ax 1) (ax 0)))", "cut formulas not dual: bot vs 0", (0,)),
])
def test_proof_errors_name_the_subterm(text, message, path):
    with pytest.raises(ProofError) as info:
        check_proof(parse_proof(text))
    assert info.value.message == message
    assert info.value.path == path


def test_top_rule_context():
    seq = check_proof(parse_proof("(top (0 1))"))
    assert seq.context == (Zero(), One(), Top())


@given(proofs)
def test_walk_and_replace(p):
    for path, q in walk(p):
        assert subterm(p, path) == q
        assert replace_at(p, path, q) == p


@given(proofs)
def test_cut_free_matches_walk(p):
    assert is_cut_free(p) == (not any(isinstance(q, CutI) for _, q in walk(p)))
