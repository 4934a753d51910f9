"""Proof corpora: exhaustive enumeration by rule-node count, and random samples."""

from __future__ import annotations

import gc
import random
from contextlib import contextmanager
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from .mall_syntax import (
    Ax, Bot, BotI, CutI, Exch, Formula, One, OneI, ParI, Plus1I, Plus2I, ProofTerm, TensorI,
    TopI, WithI, Zero, dual,
)
from .rel_model import conclusion, format_pointvec, interp_with_cuts
from .indexed_logic import IndexedFamily


@dataclass(frozen=True)
class Signature:
    """Leaf choices for the enumerator."""
    axioms: tuple[Formula, ...] = (One(),)
    top_contexts: tuple[tuple[Formula, ...], ...] = ((), (Zero(),))
    plus_sides: tuple[Formula, ...] = (Bot(), One())
    superpose: tuple[str, ...] = ("none", "maximal")


DEFAULT_SIGNATURE = Signature()

# The leaner signature used for the exhaustive theorem corpus up to 7 rule nodes.
CRITERION_SIGNATURE = Signature(axioms=(One(),), top_contexts=((),), plus_sides=(Bot(),),
                                superpose=("maximal",))


def move_to(p: ProofTerm, src: int, dst: int) -> ProofTerm:
    """Bring the context occurrence at ``src`` to position ``dst`` by adjacent exchanges."""
    while src < dst:
        p = Exch(p, src, src + 1)
        src += 1
    while src > dst:
        p = Exch(p, src - 1, src)
        src -= 1
    return p


def _ctx(p: ProofTerm) -> tuple:
    return conclusion(p).context


def _reorder(p: ProofTerm, order: list[int]) -> ProofTerm:
    """Exchange so that the new context is ``[ctx[k] for k in order]``."""
    cur = list(range(len(order)))
    for t, want in enumerate(order):
        s = cur.index(want)
        if s != t:
            cur[s], cur[t] = cur[t], cur[s]
            p = Exch(p, t, s)
    return p


def maximal_sigma(left_cuts, right_cuts) -> tuple[tuple[int, int], ...]:
    """Greedy superposition of equal stack entries, in stack order."""
    used = set()
    out = []
    for i, c in enumerate(left_cuts):
        for j, d in enumerate(right_cuts):
            if j not in used and c == d:
                used.add(j)
                out.append((i, j))
                break
    return tuple(out)


def _align(p1: ProofTerm, k1: int, p2: ProofTerm, k2: int):
    """Exchange ``p2`` so both contexts agree outside the chosen formulas, or None."""
    rest1 = [f for i, f in enumerate(_ctx(p1)) if i != k1]
    idx2 = [i for i in range(len(_ctx(p2))) if i != k2]
    c2 = _ctx(p2)
    order = []
    avail = list(idx2)
    for f in rest1:
        hit = next((i for i in avail if c2[i] == f), None)
        if hit is None:
            return None
        avail.remove(hit)
        order.append(hit)
    if avail:
        return None
    return move_to(p1, k1, len(rest1)), _reorder(p2, order + [k2])


def _combine(n: int, by_size: dict, sig: Signature) -> Iterator[ProofTerm]:
    if n == 1:
        for f in sig.axioms:
            yield Ax(f)
        yield OneI()
        for ctx in sig.top_contexts:
            yield TopI(ctx)
        return
    for p in by_size[n - 1]:
        c = _ctx(p)
        yield BotI(p)
        for i, j in combinations(range(len(c)), 2):
            yield ParI(move_to(move_to(p, j, len(c) - 1), i, len(c) - 2))
        for k in range(len(c)):
            q = move_to(p, k, len(c) - 1)
            for g in sig.plus_sides:
                yield Plus1I(q, g)
                yield Plus2I(q, g)
    for n1 in range(1, n - 1):
        n2 = n - 1 - n1
        for p1 in by_size[n1]:
            c1 = _ctx(p1)
            for p2 in by_size[n2]:
                c2 = _ctx(p2)
                for k1 in range(len(c1)):
                    left = move_to(p1, k1, len(c1) - 1)
                    for k2 in range(len(c2)):
                        yield TensorI(left, move_to(p2, k2, len(c2) - 1))
                        if c2[k2] == dual(c1[k1]):
                            yield CutI(left, move_to(p2, k2, 0))
                        aligned = _align(p1, k1, p2, k2)
                        if aligned is not None:
                            a1, a2 = aligned
                            for mode in sig.superpose:
                                sigma = () if mode == "none" else maximal_sigma(
                                    conclusion(a1).cuts, conclusion(a2).cuts)
                                if mode == "maximal" and not sigma and "none" in sig.superpose:
                                    continue
                                yield WithI(a1, a2, sigma)


def enumerate_proofs(max_size: int, sig: Signature = DEFAULT_SIGNATURE) -> dict[int, list[ProofTerm]]:
    """All proofs of each rule-node count up to ``max_size`` (exchanges not counted)."""
    by_size: dict[int, list[ProofTerm]] = {}
    for n in range(1, max_size + 1):
        seen = set()
        out = []
        for p in _combine(n, by_size, sig):
            if p not in seen:
                seen.add(p)
                out.append(p)
        by_size[n] = out
    return by_size


def iter_proofs(max_size: int, sig: Signature = DEFAULT_SIGNATURE) -> Iterator[ProofTerm]:
    """Same proofs as enumerate_proofs, streaming the largest size instead of storing it."""
    if max_size < 1:
        return
    by = enumerate_proofs(max_size - 1, sig)
    for n in sorted(by):
        yield from by[n]
    seen = set()
    for p in _combine(max_size, by, sig):
        if p not in seen:
            seen.add(p)
            yield p


@contextmanager
def gc_paused():
    """Batch runs over the corpus create no reference cycles, so the cyclic
    collector only rescans the large live heap; pausing it saves about a fifth
    of the time without raising peak memory."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


def corpus(max_size: int, sig: Signature = DEFAULT_SIGNATURE) -> list[ProofTerm]:
    by = enumerate_proofs(max_size, sig)
    return [p for n in sorted(by) for p in by[n]]


def points_sorted(p: ProofTerm) -> list:
    return sorted(interp_with_cuts(p), key=format_pointvec)


def family_of(points) -> IndexedFamily:
    vals = {str(k + 1): x for k, x in enumerate(points)}
    return IndexedFamily(frozenset(vals), vals)


def chunked_families(p: ProofTerm, width: int = 4) -> list[IndexedFamily]:
    """The proof's points split into families of at most ``width`` indices."""
    pts = points_sorted(p)
    return [family_of(pts[i:i + width]) for i in range(0, len(pts), width)]


def random_family(p: ProofTerm, rng: random.Random, max_width: int = 4) -> Optional[IndexedFamily]:
    """Random member family; repeated points are allowed, as families are functions."""
    pts = points_sorted(p)
    if not pts:
        return None
    k = rng.randint(1, max_width)
    return family_of([rng.choice(pts) for _ in range(k)])


@dataclass
class MismatchPool:
    """Small proofs indexed by the formulas in their conclusions."""
    entries: list                 # (proof, position, formula)
    by_formula: dict

    @staticmethod
    def build(max_size: int = 4, sig: Signature = DEFAULT_SIGNATURE) -> "MismatchPool":
        entries, by = [], {}
        for p in corpus(max_size, sig):
            pts = interp_with_cuts(p)
            if not pts:
                continue
            for k, f in enumerate(_ctx(p)):
                entries.append((p, k, f))
                by.setdefault(f, []).append((p, k))
        return MismatchPool(entries, by)


def random_mismatched_cut(rng: random.Random, pool: MismatchPool, tries: int = 1000):
    """A cut of two pool proofs and a point whose cut slot has two different values."""
    from .rel_model import ExpJoin, decompose, pointvec_of
    for _ in range(tries):
        p1, k1, f = rng.choice(pool.entries)
        partners = pool.by_formula.get(dual(f))
        if not partners:
            continue
        p2, k2 = rng.choice(partners)
        left = move_to(p1, k1, len(_ctx(p1)) - 1)
        right = move_to(p2, k2, 0)
        xs = list(interp_with_cuts(left))
        ys = list(interp_with_cuts(right))
        rng.shuffle(xs)
        rng.shuffle(ys)
        for x in xs:
            y = next((y for y in ys if y.ctx[0] != x.ctx[-1]), None)
            if y is not None:
                cut = CutI(left, right)
                e = ExpJoin(decompose(left, x), decompose(right, y))
                return cut, pointvec_of(cut, e)
    raise ValueError("no mismatched pair found")
