"""Finite relational semantics with the cut stack left visible.

A point of a proof is built from an *experiment*: one choice per active rule
node (a web element at each axiom, a branch at each &).  The experiment
determines the point vector, and every member of the interpretation arises
from exactly one experiment, so ``decompose`` inverts ``pointvec_of``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

from .mall_syntax import (
    Ax, Bot, BotI, CutI, CutPair, Exch, Formula, One, OneI, Par, ParI, Plus, Plus1I,
    Plus2I, ProofTerm, Sequent, Tensor, TensorI, Top, TopI, With, WithI, Zero,
    check_proof, hash_once,
)


# ---------------------------------------------------------------------------
# Points


@hash_once
@dataclass(frozen=True)
class Star:
    pass


@hash_once
@dataclass(frozen=True)
class Pair:
    left: Point
    right: Point


@hash_once
@dataclass(frozen=True)
class In1:
    body: Point


@hash_once
@dataclass(frozen=True)
class In2:
    body: Point


Point = Union[Star, Pair, In1, In2]
STAR = Star()


def inj(tag: int, body: Point) -> Point:
    return In1(body) if tag == 1 else In2(body)


def format_point(x: Point) -> str:
    if isinstance(x, Star):
        return "*"
    if isinstance(x, Pair):
        return f"({format_point(x.left)},{format_point(x.right)})"
    if isinstance(x, In1):
        return "1." + format_point(x.body)
    return "2." + format_point(x.body)


def parse_point(text: str) -> Point:
    text = text.replace(" ", "")
    x, rest = _read_point(text, 0)
    if rest != len(text):
        raise ValueError(f"trailing characters in point {text!r} at offset {rest}")
    return x


def _read_point(s: str, i: int) -> tuple[Point, int]:
    if s.startswith("*", i):
        return STAR, i + 1
    if s.startswith("1.", i) or s.startswith("2.", i):
        body, j = _read_point(s, i + 2)
        return inj(int(s[i]), body), j
    if s.startswith("(", i):
        a, j = _read_point(s, i + 1)
        if not s.startswith(",", j):
            raise ValueError(f"expected ',' in point {s!r} at offset {j}")
        b, k = _read_point(s, j + 1)
        if not s.startswith(")", k):
            raise ValueError(f"expected ')' in point {s!r} at offset {k}")
        return Pair(a, b), k + 1
    raise ValueError(f"malformed point {s!r} at offset {i}")


@lru_cache(maxsize=None)
def interp_formula(f: Formula) -> frozenset:
    """The web of a formula: units are {*} or empty, binary connectives pair or tag."""
    if isinstance(f, (One, Bot)):
        return frozenset({STAR})
    if isinstance(f, (Zero, Top)):
        return frozenset()
    left, right = interp_formula(f.left), interp_formula(f.right)
    if isinstance(f, (Tensor, Par)):
        return frozenset(Pair(a, b) for a in left for b in right)
    return frozenset({In1(a) for a in left} | {In2(b) for b in right})


def point_in(x: Point, f: Formula) -> bool:
    if isinstance(f, (One, Bot)):
        return isinstance(x, Star)
    if isinstance(f, (Zero, Top)):
        return False
    if isinstance(f, (Tensor, Par)):
        return isinstance(x, Pair) and point_in(x.left, f.left) and point_in(x.right, f.right)
    if isinstance(x, In1):
        return point_in(x.body, f.left)
    if isinstance(x, In2):
        return point_in(x.body, f.right)
    return False


# ---------------------------------------------------------------------------
# Cut slots and point vectors


@hash_once
@dataclass(frozen=True)
class Absent:
    pass


@hash_once
@dataclass(frozen=True)
class Present:
    left: Point
    right: Point

    @property
    def matched(self) -> bool:
        return self.left == self.right


Slot = Union[Absent, Present]
ABSENT = Absent()


@hash_once
@dataclass(frozen=True)
class PointVec:
    cuts: tuple[Slot, ...]
    ctx: tuple[Point, ...]


def format_slot(s: Slot) -> str:
    if isinstance(s, Absent):
        return "-"
    return f"({format_point(s.left)}|{format_point(s.right)})"


def parse_slot(text: str) -> Slot:
    text = text.replace(" ", "")
    if text == "-":
        return ABSENT
    if not (text.startswith("(") and text.endswith(")")) or "|" not in text:
        raise ValueError(f"malformed cut slot {text!r}")
    # the separator is the unique '|' outside nested brackets; points never contain '|'
    left, right = text[1:-1].split("|")
    return Present(parse_point(left), parse_point(right))


def format_pointvec(x: PointVec) -> str:
    cuts = ", ".join(format_slot(s) for s in x.cuts)
    ctx = ", ".join(format_point(p) for p in x.ctx)
    return f"[{cuts}] {ctx}"


def pointvec_to_json(x: PointVec) -> dict:
    return {"cuts": [format_slot(s) for s in x.cuts], "ctx": [format_point(p) for p in x.ctx]}


def pointvec_from_json(obj: dict) -> PointVec:
    return PointVec(tuple(parse_slot(s) for s in obj.get("cuts", [])),
                    tuple(parse_point(p) for p in obj["ctx"]))


def sublist_space(cuts: Iterable[CutPair]) -> frozenset:
    """All slot assignments: per pair either Absent or a pair of web elements."""
    per_pair = []
    for c in cuts:
        options = [ABSENT] + [Present(a, b) for a in sorted(interp_formula(c.left), key=format_point)
                              for b in sorted(interp_formula(c.right), key=format_point)]
        per_pair.append(options)
    return frozenset(itertools.product(*per_pair))


# ---------------------------------------------------------------------------
# Experiments


@hash_once
@dataclass(frozen=True)
class ExpLeaf:
    """Axiom (web element of the axiom formula) or the 1-rule (always *)."""
    point: Point


@hash_once
@dataclass(frozen=True)
class ExpStep:
    """Unary rules: bot, par, plus, exchange."""
    child: Experiment


@hash_once
@dataclass(frozen=True)
class ExpJoin:
    """Tensor and cut: one experiment per premise."""
    left: Experiment
    right: Experiment


@hash_once
@dataclass(frozen=True)
class ExpBranch:
    """With: the chosen premise and its experiment."""
    tag: int
    child: Experiment


Experiment = Union[ExpLeaf, ExpStep, ExpJoin, ExpBranch]


class NotAMember(ValueError):
    pass


@lru_cache(maxsize=200_000)
def conclusion(p: ProofTerm) -> Sequent:
    return check_proof(p)


def experiments(p: ProofTerm) -> Iterator[Experiment]:
    if isinstance(p, Ax):
        for b in sorted(interp_formula(p.formula), key=format_point):
            yield ExpLeaf(b)
    elif isinstance(p, OneI):
        yield ExpLeaf(STAR)
    elif isinstance(p, TopI):
        return
    elif isinstance(p, (BotI, ParI, Plus1I, Plus2I, Exch)):
        for e in experiments(p.premise):
            yield ExpStep(e)
    elif isinstance(p, (TensorI, CutI)):
        rights = list(experiments(p.right))
        for e1 in experiments(p.left):
            for e2 in rights:
                yield ExpJoin(e1, e2)
    elif isinstance(p, WithI):
        for e in experiments(p.left):
            yield ExpBranch(1, e)
        for e in experiments(p.right):
            yield ExpBranch(2, e)
    else:
        raise TypeError(p)


def with_slots(p: WithI, tag: int, premise_cuts: tuple[Slot, ...]) -> tuple[Slot, ...]:
    """Lay out a premise's slots in the &-conclusion stack, Absent for the other premise."""
    nl = len(conclusion(p.left).cuts)
    nr = len(conclusion(p.right).cuts)
    shared_l = {i for i, _ in p.sigma}
    shared_r = {j for _, j in p.sigma}
    if tag == 1:
        own = tuple(s for k, s in enumerate(premise_cuts) if k not in shared_l)
        return own + (ABSENT,) * (nr - len(shared_r)) + tuple(premise_cuts[i] for i, _ in p.sigma)
    own = tuple(s for k, s in enumerate(premise_cuts) if k not in shared_r)
    return (ABSENT,) * (nl - len(shared_l)) + own + tuple(premise_cuts[j] for _, j in p.sigma)


def pointvec_of(p: ProofTerm, e: Experiment) -> PointVec:
    if isinstance(p, Ax):
        return PointVec((), (e.point, e.point))
    if isinstance(p, OneI):
        return PointVec((), (STAR,))
    if isinstance(p, (BotI, ParI, Plus1I, Plus2I, Exch)):
        x = pointvec_of(p.premise, e.child)
        ctx = x.ctx
        if isinstance(p, BotI):
            ctx = ctx + (STAR,)
        elif isinstance(p, ParI):
            ctx = ctx[:-2] + (Pair(ctx[-2], ctx[-1]),)
        elif isinstance(p, Plus1I):
            ctx = ctx[:-1] + (In1(ctx[-1]),)
        elif isinstance(p, Plus2I):
            ctx = ctx[:-1] + (In2(ctx[-1]),)
        else:
            lst = list(ctx)
            lst[p.i], lst[p.j] = lst[p.j], lst[p.i]
            ctx = tuple(lst)
        return PointVec(x.cuts, ctx)
    if isinstance(p, TensorI):
        l, r = pointvec_of(p.left, e.left), pointvec_of(p.right, e.right)
        return PointVec(l.cuts + r.cuts, l.ctx[:-1] + r.ctx[:-1] + (Pair(l.ctx[-1], r.ctx[-1]),))
    if isinstance(p, CutI):
        l, r = pointvec_of(p.left, e.left), pointvec_of(p.right, e.right)
        return PointVec(l.cuts + r.cuts + (Present(l.ctx[-1], r.ctx[0]),), l.ctx[:-1] + r.ctx[1:])
    if isinstance(p, WithI):
        x = pointvec_of(p.left if e.tag == 1 else p.right, e.child)
        return PointVec(with_slots(p, e.tag, x.cuts), x.ctx[:-1] + (inj(e.tag, x.ctx[-1]),))
    raise TypeError(p)


def decompose(p: ProofTerm, x: PointVec) -> Experiment:
    """The experiment producing ``x``; raises NotAMember if ``x`` is not in the interpretation."""
    seq = conclusion(p)
    if len(x.cuts) != len(seq.cuts) or len(x.ctx) != len(seq.context):
        raise NotAMember("point vector does not fit the sequent shape")
    return _decompose(p, x)


def _decompose(p: ProofTerm, x: PointVec) -> Experiment:
    if isinstance(p, Ax):
        b, b2 = x.ctx
        if b != b2 or not point_in(b, p.formula):
            raise NotAMember("axiom constituents differ or leave the web")
        return ExpLeaf(b)
    if isinstance(p, OneI):
        if x.ctx != (STAR,):
            raise NotAMember("1-rule point must be *")
        return ExpLeaf(STAR)
    if isinstance(p, TopI):
        raise NotAMember("a top rule has no points")
    ctx = x.ctx
    if isinstance(p, BotI):
        if ctx[-1] != STAR:
            raise NotAMember("bot constituent must be *")
        return ExpStep(_decompose(p.premise, PointVec(x.cuts, ctx[:-1])))
    if isinstance(p, ParI):
        if not isinstance(ctx[-1], Pair):
            raise NotAMember("par constituent must be a pair")
        return ExpStep(_decompose(p.premise, PointVec(x.cuts, ctx[:-1] + (ctx[-1].left, ctx[-1].right))))
    if isinstance(p, (Plus1I, Plus2I)):
        want = In1 if isinstance(p, Plus1I) else In2
        if not isinstance(ctx[-1], want):
            raise NotAMember("plus constituent carries the wrong tag")
        return ExpStep(_decompose(p.premise, PointVec(x.cuts, ctx[:-1] + (ctx[-1].body,))))
    if isinstance(p, Exch):
        lst = list(ctx)
        lst[p.i], lst[p.j] = lst[p.j], lst[p.i]
        return ExpStep(_decompose(p.premise, PointVec(x.cuts, tuple(lst))))
    if isinstance(p, (TensorI, CutI)):
        ls, rs = conclusion(p.left), conclusion(p.right)
        nl = len(ls.cuts)
        n1 = len(ls.context)
        if isinstance(p, TensorI):
            last = ctx[-1]
            if not isinstance(last, Pair):
                raise NotAMember("tensor constituent must be a pair")
            lx = PointVec(x.cuts[:nl], ctx[:n1 - 1] + (last.left,))
            rx = PointVec(x.cuts[nl:], ctx[n1 - 1:-1] + (last.right,))
        else:
            slot = x.cuts[-1]
            if not isinstance(slot, Present):
                raise NotAMember("an active cut must have its slot present")
            lx = PointVec(x.cuts[:nl], ctx[:n1 - 1] + (slot.left,))
            rx = PointVec(x.cuts[nl:-1], (slot.right,) + ctx[n1 - 1:])
        return ExpJoin(_decompose(p.left, lx), _decompose(p.right, rx))
    if isinstance(p, WithI):
        last = ctx[-1]
        if not isinstance(last, (In1, In2)):
            raise NotAMember("with constituent must be tagged")
        tag = 1 if isinstance(last, In1) else 2
        prem = p.left if tag == 1 else p.right
        n_prem = len(conclusion(prem).cuts)
        nl = len(conclusion(p.left).cuts)
        nr = len(conclusion(p.right).cuts)
        shared = [i if tag == 1 else j for i, j in p.sigma]
        n_shared = len(p.sigma)
        if len(x.cuts) != nl + nr - n_shared:
            raise NotAMember("with stack has the wrong length")
        own_start = 0 if tag == 1 else nl - n_shared
        own_len = n_prem - n_shared
        other = x.cuts[nl - n_shared:nl + nr - 2 * n_shared] if tag == 1 else x.cuts[:nl - n_shared]
        if not all(isinstance(s, Absent) for s in other):
            raise NotAMember("slots of the inactive with premise must be absent")
        own = list(x.cuts[own_start:own_start + own_len])
        sh_vals = x.cuts[len(x.cuts) - n_shared:] if n_shared else ()
        slots: list = [None] * n_prem
        for k, idx in enumerate(shared):
            slots[idx] = sh_vals[k]
        it = iter(own)
        for k in range(n_prem):
            if slots[k] is None:
                slots[k] = next(it)
        return ExpBranch(tag, _decompose(prem, PointVec(tuple(slots), ctx[:-1] + (last.body,))))
    raise TypeError(p)


def interp_with_cuts(p: ProofTerm) -> frozenset:
    """Points of ``p`` with every cut kept as a visible slot."""
    return frozenset(pointvec_of(p, e) for e in experiments(p))


@lru_cache(maxsize=1 << 16)
def interp_denotational(p: ProofTerm) -> frozenset:
    """Standard relational semantics; cuts are composed away."""
    if isinstance(p, Ax):
        return frozenset((b, b) for b in interp_formula(p.formula))
    if isinstance(p, OneI):
        return frozenset({(STAR,)})
    if isinstance(p, TopI):
        return frozenset()
    if isinstance(p, BotI):
        return frozenset(g + (STAR,) for g in interp_denotational(p.premise))
    if isinstance(p, ParI):
        return frozenset(g[:-2] + (Pair(g[-2], g[-1]),) for g in interp_denotational(p.premise))
    if isinstance(p, Plus1I):
        return frozenset(g[:-1] + (In1(g[-1]),) for g in interp_denotational(p.premise))
    if isinstance(p, Plus2I):
        return frozenset(g[:-1] + (In2(g[-1]),) for g in interp_denotational(p.premise))
    if isinstance(p, Exch):
        out = set()
        for g in interp_denotational(p.premise):
            lst = list(g)
            lst[p.i], lst[p.j] = lst[p.j], lst[p.i]
            out.add(tuple(lst))
        return frozenset(out)
    if isinstance(p, TensorI):
        rs = interp_denotational(p.right)
        return frozenset(l[:-1] + r[:-1] + (Pair(l[-1], r[-1]),)
                         for l in interp_denotational(p.left) for r in rs)
    if isinstance(p, CutI):
        by_head: dict = {}
        for r in interp_denotational(p.right):
            by_head.setdefault(r[0], []).append(r[1:])
        return frozenset(l[:-1] + rest for l in interp_denotational(p.left)
                         for rest in by_head.get(l[-1], ()))
    if isinstance(p, WithI):
        return frozenset({l[:-1] + (In1(l[-1]),) for l in interp_denotational(p.left)}
                         | {r[:-1] + (In2(r[-1]),) for r in interp_denotational(p.right)})
    raise TypeError(p)


def all_matched(x: PointVec) -> bool:
    return all(isinstance(s, Absent) or s.matched for s in x.cuts)


def execute_cuts_rel(r: Iterable[PointVec]) -> frozenset:
    """Keep the point vectors whose present slots agree on both sides, then forget the stack."""
    return frozenset(x.ctx for x in r if all_matched(x))
