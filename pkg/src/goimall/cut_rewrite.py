"""Gentzen cut-elimination steps and their lifting to index families.

Each step rebuilds the redex from labelled pieces.  Context occurrences and
stack entries carry labels, so one construction produces the new proof term,
the old-to-new stack mapping (needed to repair superposition lists of
enclosing & rules), and the transformed experiment of every active index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .mall_syntax import (
    Ax, BotI, CutI, Exch, OneI, ParI, Plus1I, Plus2I, ProofTerm, TensorI, TopI, WithI,
    format_path, is_cut_free, premises, replace_premises, size, walk, with_stack,
)
from .rel_model import (
    ExpBranch, ExpJoin, ExpStep, Experiment, conclusion, decompose, pointvec_of,
)
from .indexed_logic import IndexedFamily, format_indices


class StepBudgetExceeded(RuntimeError):
    pass


class PatternMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Redex:
    path: tuple[int, ...]
    kind: str                 # AxCut | UnitCut | TensorPar | WithPlus | CommuteWith | CommuteOther
    param: str = ""           # plus index for WithPlus, rule name for CommuteOther
    side: str = ""            # which premise carries the rule being used: "left" or "right"

    def label(self) -> str:
        name = f"{self.kind}({self.param})" if self.param else self.kind
        return f"{name}@{format_path(self.path)}"


_DROP = object()


# ---------------------------------------------------------------------------
# Labelled pieces


@dataclass
class Piece:
    term: ProofTerm
    ctx: list
    stack: list
    exp: Optional[Experiment]


class _Fresh:
    def __init__(self):
        self._n = itertools.count()

    def __call__(self, hint: str = "f"):
        return (hint, next(self._n))


def _step(e):
    return None if e is None else ExpStep(e)


def arrange(pc: Piece, order: list) -> Piece:
    """Permute the context of a piece into ``order`` with exchange nodes."""
    cur = list(pc.ctx)
    if sorted(map(repr, cur)) != sorted(map(repr, order)):
        raise PatternMismatch("arrangement does not permute the context")
    term, exp = pc.term, pc.exp
    for t, lab in enumerate(order):
        s = cur.index(lab)
        if s != t:
            cur[s], cur[t] = cur[t], cur[s]
            term = Exch(term, t, s)
            exp = _step(exp)
    return Piece(term, cur, list(pc.stack), exp)


def _move_last(pc: Piece, lab) -> Piece:
    return arrange(pc, [x for x in pc.ctx if x != lab] + [lab])


def _move_first(pc: Piece, lab) -> Piece:
    return arrange(pc, [lab] + [x for x in pc.ctx if x != lab])


def peel(pc: Piece) -> Piece:
    """Strip the exchanges above a rule node, permuting labels accordingly."""
    term, ctx, exp = pc.term, list(pc.ctx), pc.exp
    while isinstance(term, Exch):
        ctx[term.i], ctx[term.j] = ctx[term.j], ctx[term.i]
        term = term.premise
        exp = None if exp is None else exp.child
    return Piece(term, ctx, list(pc.stack), exp)


def _children(core: Piece, fresh: _Fresh) -> list[Piece]:
    """Pieces for the premises of a non-exchange rule node."""
    t, L, S, e = core.term, core.ctx, core.stack, core.exp
    if isinstance(t, (BotI,)):
        return [Piece(t.premise, L[:-1], S, None if e is None else e.child)]
    if isinstance(t, ParI):
        return [Piece(t.premise, L[:-1] + [fresh("l"), fresh("r")], S, None if e is None else e.child)]
    if isinstance(t, (Plus1I, Plus2I)):
        return [Piece(t.premise, L[:-1] + [fresh("i")], S, None if e is None else e.child)]
    if isinstance(t, TensorI):
        n1 = len(conclusion(t.left).context)
        m1 = len(conclusion(t.left).cuts)
        return [Piece(t.left, L[:n1 - 1] + [fresh("l")], S[:m1], None if e is None else e.left),
                Piece(t.right, L[n1 - 1:-1] + [fresh("r")], S[m1:], None if e is None else e.right)]
    if isinstance(t, WithI):
        ml = len(conclusion(t.left).cuts)
        mr = len(conclusion(t.right).cuts)
        k = len(t.sigma)
        own_l = iter(S[:ml - k])
        own_r = iter(S[ml - k:ml - k + mr - k])
        shared = S[ml - k + mr - k:]
        sl = [None] * ml
        sr = [None] * mr
        for m, (i, j) in enumerate(t.sigma):
            sl[i] = shared[m]
            sr[j] = shared[m]
        sl = [x if x is not None else next(own_l) for x in sl]
        sr = [x if x is not None else next(own_r) for x in sr]
        e1 = e.child if e is not None and e.tag == 1 else None
        e2 = e.child if e is not None and e.tag == 2 else None
        return [Piece(t.left, L[:-1] + [fresh("w")], sl, e1),
                Piece(t.right, L[:-1] + [fresh("w")], sr, e2)]
    raise PatternMismatch(f"no premises to open at {type(t).__name__}")


def mk_cut(a: Piece, b: Piece, fresh: _Fresh) -> Piece:
    exp = None if a.exp is None or b.exp is None else ExpJoin(a.exp, b.exp)
    return Piece(CutI(a.term, b.term), a.ctx[:-1] + b.ctx[1:], a.stack + b.stack + [fresh("cut")], exp)


def mk_tensor(a: Piece, b: Piece, lab) -> Piece:
    exp = None if a.exp is None or b.exp is None else ExpJoin(a.exp, b.exp)
    return Piece(TensorI(a.term, b.term), a.ctx[:-1] + b.ctx[:-1] + [lab], a.stack + b.stack, exp)


def mk_unary(cls, a: Piece, lab, other=None) -> Piece:
    if cls is BotI:
        term, ctx = BotI(a.term), a.ctx + [lab]
    elif cls is ParI:
        term, ctx = ParI(a.term), a.ctx[:-2] + [lab]
    else:
        term, ctx = cls(a.term, other), a.ctx[:-1] + [lab]
    return Piece(term, ctx, list(a.stack), _step(a.exp))


def mk_with(a: Piece, b: Piece, sigma, lab) -> Piece:
    if a.ctx[:-1] != b.ctx[:-1]:
        raise PatternMismatch("with premises disagree on their contexts")
    for i, j in sigma:
        if a.stack[i] != b.stack[j]:
            raise PatternMismatch("superposed stack entries do not correspond")
    if a.exp is not None:
        exp = ExpBranch(1, a.exp)
    elif b.exp is not None:
        exp = ExpBranch(2, b.exp)
    else:
        exp = None
    return Piece(WithI(a.term, b.term, tuple(sigma)), a.ctx[:-1] + [lab],
                 list(with_stack(tuple(a.stack), tuple(b.stack), tuple(sigma))), exp)


# ---------------------------------------------------------------------------
# Classification


def _principal(t: ProofTerm, n: int) -> set:
    if isinstance(t, Ax):
        return {0, 1}
    if isinstance(t, OneI):
        return {0}
    if isinstance(t, CutI):
        return set()
    return {n - 1}


_RULE_NAME = {BotI: "bot", ParI: "par", Plus1I: "plus1", Plus2I: "plus2", TensorI: "tensor",
              TopI: "top", WithI: "with", OneI: "one", Ax: "ax", CutI: "cut"}


def _open(c: CutI, e: Optional[Experiment]):
    P, Q = c.left, c.right
    sp, sq = conclusion(P), conclusion(Q)
    nP, nQ, mP, mQ = len(sp.context), len(sq.context), len(sp.cuts), len(sq.cuts)
    Pc = Piece(P, [("p", k) for k in range(nP)], [("s", k) for k in range(mP)],
               None if e is None else e.left)
    Qc = Piece(Q, [("q", k) for k in range(nQ)], [("s", mP + k) for k in range(mQ)],
               None if e is None else e.right)
    return Pc, Qc, peel(Pc), peel(Qc)


def classify(c: CutI) -> Optional[Redex]:
    """Kind of the cut at the root of ``c``, or None when a premise ends in a cut."""
    Pc, Qc, RP, RQ = _open(c, None)
    A, B = Pc.ctx[-1], Qc.ctx[0]
    tp, tq = RP.term, RQ.term
    if isinstance(tp, Ax):
        return Redex((), "AxCut", "", "left")
    if isinstance(tq, Ax):
        return Redex((), "AxCut", "", "right")
    if isinstance(tp, CutI) or isinstance(tq, CutI):
        return None
    a_principal = RP.ctx.index(A) in _principal(tp, len(RP.ctx))
    b_principal = RQ.ctx.index(B) in _principal(tq, len(RQ.ctx))
    if not a_principal:
        return _commute_kind(tp, "left")
    if not b_principal:
        return _commute_kind(tq, "right")
    kinds = {type(tp), type(tq)}
    if kinds == {TensorI, ParI}:
        return Redex((), "TensorPar", "", "left" if isinstance(tp, TensorI) else "right")
    if WithI in kinds:
        plus = tq if isinstance(tp, WithI) else tp
        return Redex((), "WithPlus", "1" if isinstance(plus, Plus1I) else "2",
                     "left" if isinstance(tp, WithI) else "right")
    if kinds == {OneI, BotI}:
        return Redex((), "UnitCut", "", "left" if isinstance(tp, OneI) else "right")
    raise PatternMismatch("principal cut formulas of incompatible rules")


def _commute_kind(t: ProofTerm, side: str) -> Redex:
    if isinstance(t, WithI):
        return Redex((), "CommuteWith", "", side)
    return Redex((), "CommuteOther", _RULE_NAME[type(t)], side)


def find_redexes(p: ProofTerm) -> list[Redex]:
    """All classifiable cut nodes, innermost first and left to right."""
    out = []
    for path, q in walk(p):
        if isinstance(q, CutI):
            r = classify(q)
            if r is not None:
                out.append(Redex(path, r.kind, r.param, r.side))
    return out


# ---------------------------------------------------------------------------
# Local reduction


def _reduce_local(c: CutI, e: Optional[Experiment], r: Redex):
    """Return (piece, old_stack_labels) or _DROP when the active index does not survive."""
    fresh = _Fresh()
    Pc, Qc, RP, RQ = _open(c, e)
    A, B = Pc.ctx[-1], Qc.ctx[0]
    nP = len(Pc.ctx)
    target = Pc.ctx[:-1] + Qc.ctx[1:]
    old_stack = Pc.stack + Qc.stack + [("s", len(Pc.stack) + len(Qc.stack))]
    kind, side = r.kind, r.side

    def matched() -> bool:
        return pointvec_of(c, e).cuts[-1].matched

    if kind == "AxCut":
        if e is not None and not matched():
            return _DROP
        if side == "left":
            other = Pc.ctx[0]
            res = Piece(Qc.term, [other if x == B else x for x in Qc.ctx], Qc.stack, Qc.exp)
        else:
            other = Qc.ctx[1]
            res = Piece(Pc.term, [other if x == A else x for x in Pc.ctx], Pc.stack, Pc.exp)
        return arrange(res, target), old_stack

    if kind == "UnitCut":
        if side == "left":
            (inner,) = _children(RQ, fresh)
        else:
            (inner,) = _children(RP, fresh)
        return arrange(inner, target), old_stack

    if kind == "TensorPar":
        if side == "left":
            P1, P2 = _children(RP, fresh)
            (Qp,) = _children(RQ, fresh)
            b_star, c_star = Qp.ctx[-2], Qp.ctx[-1]
            t1 = mk_cut(P1, _move_first(Qp, b_star), fresh)
            t2 = mk_cut(P2, _move_first(t1, c_star), fresh)
        else:
            (Pp,) = _children(RP, fresh)
            Q1, Q2 = _children(RQ, fresh)
            b, cc = Pp.ctx[-2], Pp.ctx[-1]
            t1 = mk_cut(_move_last(Pp, cc), _move_first(Q2, Q2.ctx[-1]), fresh)
            t2 = mk_cut(_move_last(t1, b), _move_first(Q1, Q1.ctx[-1]), fresh)
        return arrange(t2, target), old_stack

    if kind == "WithPlus":
        i = int(r.param)
        if side == "left":
            branch = RP.exp.tag if RP.exp is not None else None
            if branch is not None and branch != i:
                return _DROP
            Pi = _children(RP, fresh)[i - 1]
            (Qp,) = _children(RQ, fresh)
            t = mk_cut(Pi, _move_first(Qp, Qp.ctx[-1]), fresh)
        else:
            branch = RQ.exp.tag if RQ.exp is not None else None
            if branch is not None and branch != i:
                return _DROP
            (Pp,) = _children(RP, fresh)
            Qi = _children(RQ, fresh)[i - 1]
            t = mk_cut(Pp, _move_first(Qi, Qi.ctx[-1]), fresh)
        return arrange(t, target), old_stack

    core = RP if side == "left" else RQ
    term = core.term
    lab = core.ctx[-1]

    def cut_with(piece: Piece) -> Piece:
        # cut the moving premise piece against the untouched other premise
        if side == "left":
            return mk_cut(_move_last(piece, A), Qc, fresh)
        return mk_cut(Pc, _move_first(piece, B), fresh)

    if isinstance(term, TopI):
        forms = {}
        for pc in (Pc, Qc):
            for k, f in enumerate(conclusion(pc.term).context):
                forms[pc.ctx[k]] = f
        rest = [x for x in target if x != lab]
        res = Piece(TopI(tuple(forms[x] for x in rest)), rest + [lab], [], None)
        return arrange(res, target), old_stack

    if kind == "CommuteWith":
        W1, W2 = _children(core, fresh)
        c1, c2 = cut_with(W1), cut_with(W2)
        f1, f2 = W1.ctx[-1], W2.ctx[-1]
        rest = [x for x in c1.ctx if x != f1]
        c1, c2 = arrange(c1, rest + [f1]), arrange(c2, rest + [f2])
        m1, m2 = len(W1.stack), len(W2.stack)
        if side == "left":
            mq = len(Qc.stack)
            xi = [(m1 + k, m2 + k) for k in range(mq)]
            omega = list(term.sigma)
        else:
            mp = len(Pc.stack)
            xi = [(k, k) for k in range(mp)]
            omega = [(mp + i, mp + j) for i, j in term.sigma]
        return arrange(mk_with(c1, c2, xi + omega, lab), target), old_stack

    if isinstance(term, TensorI):
        T1, T2 = _children(core, fresh)
        mover = A if side == "left" else B
        if mover in T1.ctx:
            moved = cut_with(T1)
            res = mk_tensor(_move_last(moved, T1.ctx[-1]), T2, lab)
        else:
            moved = cut_with(T2)
            res = mk_tensor(T1, _move_last(moved, T2.ctx[-1]), lab)
        return arrange(res, target), old_stack

    (inner,) = _children(core, fresh)
    moved = cut_with(inner)
    if isinstance(term, BotI):
        res = mk_unary(BotI, moved, lab)
    elif isinstance(term, ParI):
        l, rr = inner.ctx[-2], inner.ctx[-1]
        res = mk_unary(ParI, arrange(moved, [x for x in moved.ctx if x not in (l, rr)] + [l, rr]), lab)
    elif isinstance(term, (Plus1I, Plus2I)):
        res = mk_unary(type(term), _move_last(moved, inner.ctx[-1]), lab, term.other)
    else:
        raise PatternMismatch(f"cannot commute a cut past {type(term).__name__}")
    return arrange(res, target), old_stack


# ---------------------------------------------------------------------------
# Rebuilding the whole proof around a local step


def _stack_labels(node: ProofTerm, kids_labels: list[list]) -> list:
    if isinstance(node, WithI):
        return list(with_stack(tuple(kids_labels[0]), tuple(kids_labels[1]), node.sigma))
    if isinstance(node, TensorI):
        return kids_labels[0] + kids_labels[1]
    if isinstance(node, CutI):
        return kids_labels[0] + kids_labels[1] + [("own",)]
    if kids_labels:
        return kids_labels[0]
    return []


def _rebuild(p: ProofTerm, path: tuple[int, ...], new_sub: ProofTerm, sub_map: list):
    """Replace the subterm at ``path``; return the new term and old-to-new stack index map."""
    if not path:
        return new_sub, sub_map
    d = path[0]
    kids = list(premises(p))
    new_kid, kid_map = _rebuild(kids[d], path[1:], new_sub, sub_map)
    old_kid_labels = [[(k, n) for n in range(len(conclusion(q).cuts))] for k, q in enumerate(kids)]
    new_kid_len = len(conclusion(new_kid).cuts)
    renamed = [("new", n) for n in range(new_kid_len)]
    for n_old, n_new in enumerate(kid_map):
        if n_new is not None:
            renamed[n_new] = (d, n_old)
    new_kid_labels = list(old_kid_labels)
    new_kid_labels[d] = renamed
    kids[d] = new_kid
    node = replace_premises(p, tuple(kids))
    if isinstance(p, WithI):
        sigma = []
        for i, j in p.sigma:
            if d == 0:
                i = kid_map[i]
            else:
                j = kid_map[j]
            if i is not None and j is not None:
                sigma.append((i, j))
        node = WithI(node.left, node.right, tuple(sigma))
    old_labels = _stack_labels(p, old_kid_labels)
    new_labels = _stack_labels(node, new_kid_labels)
    index = {lab: n for n, lab in enumerate(new_labels)}
    return node, [index.get(lab) for lab in old_labels]


def _exp_at(p: ProofTerm, e: Experiment, path: tuple[int, ...]) -> Optional[Experiment]:
    for d in path:
        if isinstance(p, WithI):
            if e.tag - 1 != d:
                return None
            e = e.child
        elif isinstance(e, ExpJoin):
            e = e.left if d == 0 else e.right
        else:
            e = e.child
        p = premises(p)[d]
    return e


def _replace_exp(p: ProofTerm, e: Experiment, path: tuple[int, ...], new: Experiment) -> Experiment:
    if not path:
        return new
    d = path[0]
    q = premises(p)[d]
    if isinstance(p, WithI):
        if e.tag - 1 != d:
            return e
        return ExpBranch(e.tag, _replace_exp(q, e.child, path[1:], new))
    if isinstance(e, ExpJoin):
        if d == 0:
            return ExpJoin(_replace_exp(q, e.left, path[1:], new), e.right)
        return ExpJoin(e.left, _replace_exp(q, e.right, path[1:], new))
    return ExpStep(_replace_exp(q, e.child, path[1:], new))


def _local(p: ProofTerm, r: Redex, e: Optional[Experiment]):
    c = p
    for d in r.path:
        c = premises(c)[d]
    if not isinstance(c, CutI):
        raise PatternMismatch(f"no cut at {format_path(r.path)}")
    found = classify(c)
    if found is None or (found.kind, found.param, found.side) != (r.kind, r.param, r.side):
        raise PatternMismatch(f"redex {r.label()} does not match the proof")
    return _reduce_local(c, e, r)


def reduce_step(p: ProofTerm, r: Redex) -> ProofTerm:
    return _reduce_with_map(p, r)[0]


def _reduce_with_map(p: ProofTerm, r: Redex):
    piece, old_stack = _local(p, r, None)
    index = {lab: n for n, lab in enumerate(piece.stack)}
    sub_map = [index.get(lab) for lab in old_stack]
    return _rebuild(p, r.path, piece.term, sub_map)


# ---------------------------------------------------------------------------
# Lifting to families


@dataclass(frozen=True)
class LiftStep:
    redex: Redex
    before: tuple[ProofTerm, IndexedFamily]
    after: tuple[ProofTerm, IndexedFamily]
    dropped: frozenset = field(default_factory=frozenset)

    def trace_line(self, k: int) -> str:
        return (f"step {k}: {self.redex.label()}  J: {format_indices(self.before[1].J)} -> "
                f"{format_indices(self.after[1].J)}  dropped: {format_indices(self.dropped)}")


def lift_step(p: ProofTerm, nu: IndexedFamily, r: Redex) -> LiftStep:
    """One reduction together with the surviving indices and their new points."""
    new_p, _ = _reduce_with_map(p, r)
    values = {}
    for j in nu.ordered():
        e = decompose(p, nu.values[j])
        local = _exp_at(p, e, r.path)
        if local is None:
            values[j] = pointvec_of(new_p, e)
            continue
        out = _local(p, r, local)
        if out is _DROP:
            continue
        piece, _ = out
        values[j] = pointvec_of(new_p, _replace_exp(p, e, r.path, piece.exp))
    after = IndexedFamily(frozenset(values), values)
    return LiftStep(r, (p, nu), (new_p, after), nu.J - after.J)


def default_budget(p: ProofTerm) -> int:
    return 10 * size(p) ** 2


def normalize_lifted(p: ProofTerm, nu: IndexedFamily, budget: Optional[int] = None) -> list[LiftStep]:
    """Reduce leftmost-innermost until cut-free, lifting every step to the family."""
    if is_cut_free(p):
        return []
    limit = default_budget(p) if budget is None else budget
    steps: list[LiftStep] = []
    while True:
        rs = find_redexes(p)
        if not rs:
            return steps
        if len(steps) >= limit:
            raise StepBudgetExceeded(f"no normal form within {limit} steps")
        st = lift_step(p, nu, rs[0])
        steps.append(st)
        p, nu = st.after


def normalize(p: ProofTerm, budget: Optional[int] = None) -> list[tuple[Redex, ProofTerm]]:
    """Plain normalization: the sequence of (redex, result) pairs."""
    limit = default_budget(p) if budget is None else budget
    out = []
    while True:
        rs = find_redexes(p)
        if not rs:
            return out
        if len(out) >= limit:
            raise StepBudgetExceeded(f"no normal form within {limit} steps")
        p = reduce_step(p, rs[0])
        out.append((rs[0], p))
