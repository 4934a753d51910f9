import pytest
from hypothesis import given, strategies as st

from goimall.cut_rewrite import find_redexes, reduce_step
from goimall.mall_syntax import parse_formula, parse_proof
from goimall.rel_model import (
    ABSENT, STAR, NotAMember, Pair, PointVec, Present, all_matched, decompose, execute_cuts_rel,
    experiments, format_point, format_pointvec, interp_denotational, interp_formula,
    interp_with_cuts, parse_point, parse_slot, format_slot, point_in, pointvec_from_json,
    pointvec_of, pointvec_to_json,
)

from helpers import SMALL, SMALL_WITH_CUTS

proofs = st.sampled_from(SMALL)


@pytest.mark.parametrize("text, web", [
    ("1", ["*"]),
    ("top", []),
    ("((1 + 1) * bot)", ["(1.*,*)", "(2.*,*)"]),
    ("(1 + (1 * 1))", ["1.*", "2.(*,*)"]),
    ("(bot & top)", ["1.*"]),
    ("(0 + top)", []),
])
def test_webs(text, web):
    f = parse_formula(text)
    assert sorted(format_point(x) for x in interp_formula(f)) == web
    assert all(point_in(x, f) for x in interp_formula(f))


def test_point_and_slot_syntax():
    assert format_point(parse_point("2.(*,1.*)")) == "2.(*,1.*)"
    assert format_slot(ABSENT) == "-"
    assert parse_slot("(*|*)") == Present(STAR, STAR)


def test_prologue_points(pi1):
    assert sorted(format_pointvec(x) for x in interp_with_cuts(pi1)) == [
        "[(1.*|1.*)] *, *",
        "[(2.*|1.*)] *, *",
    ]
    assert interp_denotational(pi1) == frozenset({(STAR, STAR)})


@given(proofs)
def test_decompose_inverts_pointvec_of(p):
    for e in experiments(p):
        x = pointvec_of(p, e)
        assert decompose(p, x) == e
        assert pointvec_from_json(pointvec_to_json(x)) == x


def test_decompose_rejects_strangers():
    p = parse_proof("(ex (ax 1) 0 1)")
    with pytest.raises(NotAMember):
        decompose(p, PointVec((), (STAR, Pair(STAR, STAR))))
    with pytest.raises(NotAMember):
        decompose(p, PointVec((ABSENT,), (STAR, STAR)))


@given(proofs)
def test_relational_execution_is_the_denotation(p):
    assert execute_cuts_rel(interp_with_cuts(p)) == interp_denotational(p)


@given(st.sampled_from(SMALL_WITH_CUTS))
def test_denotation_invariant_under_each_redex(p):
    d = interp_denotational(p)
    for r in find_redexes(p):
        assert interp_denotational(reduce_step(p, r)) == d


@given(proofs)
def test_cut_free_points_are_matched(p):
    pts = interp_with_cuts(p)
    if not any(x.cuts for x in pts):
        assert all(all_matched(x) for x in pts)


def _perturb(x, rng):
    """Replace one constituent or slot with another value of a nearby shape."""
    pool = [STAR, Pair(STAR, STAR), parse_point("1.*"), parse_point("2.*"), parse_point("(1.*,*)")]
    if x.cuts and rng.random() < 0.5:
        k = rng.randrange(len(x.cuts))
        new = rng.choice([ABSENT, Present(rng.choice(pool), rng.choice(pool))])
        return PointVec(x.cuts[:k] + (new,) + x.cuts[k + 1:], x.ctx)
    k = rng.randrange(len(x.ctx))
    return PointVec(x.cuts, x.ctx[:k] + (rng.choice(pool),) + x.ctx[k + 1:])


@given(proofs, st.integers(0, 2**16))
def test_decompose_accepts_exactly_the_points(p, seed):
    import random
    rng = random.Random(seed)
    pts = interp_with_cuts(p)
    for x in list(pts)[:3]:
        y = _perturb(x, rng)
        if y in pts:
            assert pointvec_of(p, decompose(p, y)) == y
        else:
            with pytest.raises(NotAMember):
                decompose(p, y)
