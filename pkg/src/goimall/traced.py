"""Partial injections on bounded address words, with trace, and the trace-axiom checks.

A morphism U^m -> U^n is a finite injective table on tokens (wire, word),
where words over {l, r} have length at most ``depth``.  The coretraction
pushes a letter and is undefined on words that are already full.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Callable


def words(depth: int) -> list[str]:
    out = [""]
    for n in range(1, depth + 1):
        out += ["".join(t) for t in product("lr", repeat=n)]
    return out


@dataclass(frozen=True)
class PInj:
    dom: int
    cod: int
    depth: int
    table: frozenset          # pairs ((wire, word), (wire, word))

    def __post_init__(self):
        images = [b for _, b in self.table]
        if len(set(images)) != len(images):
            raise ValueError("table is not injective")

    def as_dict(self) -> dict:
        return dict(self.table)

    @property
    def is_zero(self) -> bool:
        return not self.table


def _mk(dom: int, cod: int, depth: int, d: dict) -> PInj:
    return PInj(dom, cod, depth, frozenset(d.items()))


def identity(n: int, depth: int) -> PInj:
    return _mk(n, n, depth, {(i, w): (i, w) for i in range(n) for w in words(depth)})


def zero(dom: int, cod: int, depth: int) -> PInj:
    return _mk(dom, cod, depth, {})


def sym(m: int, n: int, depth: int) -> PInj:
    """Symmetry U^m (x) U^n -> U^n (x) U^m."""
    d = {}
    for i in range(m + n):
        j = i + n if i < m else i - m
        for w in words(depth):
            d[(i, w)] = (j, w)
    return _mk(m + n, m + n, depth, d)


def retraction(depth: int) -> PInj:
    """k: U -> U (x) U, popping the first letter."""
    d = {}
    for w in words(depth):
        if w:
            d[(0, w)] = (0 if w[0] == "l" else 1, w[1:])
    return _mk(1, 2, depth, d)


def coretraction(depth: int) -> PInj:
    """j: U (x) U -> U, pushing a letter; undefined on full words."""
    d = {}
    for i, w in product((0, 1), words(depth)):
        if len(w) < depth:
            d[(i, w)] = (0, ("l" if i == 0 else "r") + w)
    return _mk(2, 1, depth, d)


def compose(g: PInj, f: PInj) -> PInj:
    """g after f."""
    if f.cod != g.dom:
        raise ValueError(f"cannot compose {f.dom}->{f.cod} with {g.dom}->{g.cod}")
    gd = g.as_dict()
    return _mk(f.dom, g.cod, f.depth, {a: gd[b] for a, b in f.table if b in gd})


def tensor(f: PInj, g: PInj) -> PInj:
    d = dict(f.table)
    for (i, w), (j, v) in g.table:
        d[(i + f.dom, w)] = (j + f.cod, v)
    return _mk(f.dom + g.dom, f.cod + g.cod, f.depth, d)


def trace(f: PInj, z: int) -> PInj:
    """Feed the last ``z`` output wires back into the last ``z`` inputs, token by token."""
    x, y = f.dom - z, f.cod - z
    if x < 0 or y < 0:
        raise ValueError("trace wider than the morphism")
    fd = f.as_dict()
    out = {}
    for i, w in product(range(x), words(f.depth)):
        tok = (i, w)
        seen = set()
        while tok in fd:
            o = fd[tok]
            if o[0] < y:
                out[(i, w)] = o
                break
            tok = (x + o[0] - y, o[1])
            if tok in seen:
                break
            seen.add(tok)
    return _mk(x, y, f.depth, out)


def trace_sum(f: PInj, z: int) -> PInj:
    """The same trace as the sum f_XY + f_ZY (f_ZZ)^n f_XZ over n, computed blockwise."""
    x, y = f.dom - z, f.cod - z
    xy, xz, zz, zy = {}, {}, {}, {}
    for a, b in f.table:
        src_x, dst_y = a[0] < x, b[0] < y
        a2 = a if src_x else (a[0] - x, a[1])
        b2 = b if dst_y else (b[0] - y, b[1])
        {(True, True): xy, (True, False): xz, (False, False): zz, (False, True): zy}[(src_x, dst_y)][a2] = b2
    out = dict(xy)
    frontier = dict(xz)
    while frontier:
        for a, b in frontier.items():
            if b in zy:
                out[a] = zy[b]
        frontier = {a: zz[b] for a, b in frontier.items() if b in zz}
    return _mk(x, y, f.depth, out)


# ---------------------------------------------------------------------------
# Random generator graphs


def _leaf(rng: random.Random, m: int, n: int, depth: int) -> PInj | None:
    if (m, n) == (1, 1):
        return rng.choice([identity(1, depth), zero(1, 1, depth),
                           compose(coretraction(depth), compose(sym(1, 1, depth), retraction(depth)))])
    if (m, n) == (2, 2):
        return rng.choice([sym(1, 1, depth), identity(2, depth),
                           compose(retraction(depth), coretraction(depth))])
    if (m, n) == (1, 2):
        return retraction(depth)
    if (m, n) == (2, 1):
        return coretraction(depth)
    return None


def _shrink(rng: random.Random, m: int, n: int, depth: int) -> PInj:
    """Reach arity n from m by (co)retractions on the first wires, then leaves."""
    if m > n:
        step = tensor(coretraction(depth), identity(m - 2, depth))
        return compose(_shrink(rng, m - 1, n, depth), step)
    if m < n:
        step = tensor(retraction(depth), identity(n - 2, depth))
        return compose(step, _shrink(rng, m, n - 1, depth))
    out = _leaf(rng, 1, 1, depth)
    for _ in range(m - 1):
        out = tensor(out, _leaf(rng, 1, 1, depth))
    return out


def random_morphism(rng: random.Random, m: int, n: int, depth: int, size: int = 4) -> PInj:
    """A random composite of symmetries, (co)retractions, identities and zeros."""
    if size <= 0 or rng.random() < 0.25:
        leaf = _leaf(rng, m, n, depth)
        if leaf is not None:
            return leaf
        if size <= 0:
            return _shrink(rng, m, n, depth)
    if m >= 2 and n >= 2 and rng.random() < 0.5:
        m1 = rng.randint(1, m - 1)
        n1 = rng.randint(1, n - 1)
        return tensor(random_morphism(rng, m1, n1, depth, size - 1),
                      random_morphism(rng, m - m1, n - n1, depth, size - 1))
    k = rng.randint(1, 4)
    return compose(random_morphism(rng, k, n, depth, size - 1), random_morphism(rng, m, k, depth, size - 1))


# ---------------------------------------------------------------------------
# Axioms: each takes an rng and returns (lhs, rhs)


def _r(rng, m, n, depth):
    return random_morphism(rng, m, n, depth)


def ax_naturality_x(rng, depth):
    x, x2, y, z = (rng.randint(1, 2) for _ in range(4))
    f, g = _r(rng, x + z, y + z, depth), _r(rng, x2, x, depth)
    return compose(trace(f, z), g), trace(compose(f, tensor(g, identity(z, depth))), z)


def ax_naturality_y(rng, depth):
    x, y, y2, z = (rng.randint(1, 2) for _ in range(4))
    f, g = _r(rng, x + z, y + z, depth), _r(rng, y, y2, depth)
    return compose(g, trace(f, z)), trace(compose(tensor(g, identity(z, depth)), f), z)


def ax_dinaturality(rng, depth):
    x, y, z, z2 = (rng.randint(1, 2) for _ in range(4))
    f, g = _r(rng, x + z, y + z2, depth), _r(rng, z2, z, depth)
    lhs = trace(compose(tensor(identity(y, depth), g), f), z)
    rhs = trace(compose(f, tensor(identity(x, depth), g)), z2)
    return lhs, rhs


def ax_vanishing_unit(rng, depth):
    x, y = rng.randint(1, 3), rng.randint(1, 3)
    f = _r(rng, x, y, depth)
    return trace(f, 0), f


def ax_vanishing_tensor(rng, depth):
    x, y, z, w = (rng.randint(1, 2) for _ in range(4))
    f = _r(rng, x + z + w, y + z + w, depth)
    return trace(f, z + w), trace(trace(f, w), z)


def ax_superposing(rng, depth):
    x, y, z, a, b = (rng.randint(1, 2) for _ in range(5))
    f, g = _r(rng, x + z, y + z, depth), _r(rng, a, b, depth)
    return tensor(g, trace(f, z)), trace(tensor(g, f), z)


def ax_yanking(rng, depth):
    return trace(sym(1, 1, depth), 1), identity(1, depth)


def ax_generalized_yanking(rng, depth):
    f, g = _r(rng, 1, 1, depth), _r(rng, 1, 1, depth)
    return trace(compose(sym(1, 1, depth), tensor(f, g)), 1), compose(g, f)


def ax_tracing_zero(rng, depth):
    n = rng.randint(1, 4)
    return trace(zero(n + 1, n + 1, depth), 1), zero(n, n, depth)


def ax_vanishing_with_zero(rng, depth):
    x, y = rng.randint(1, 3), rng.randint(1, 3)
    f = _r(rng, x + 1, y + 1, depth)
    lhs = trace(compose(tensor(identity(y, depth), zero(1, 1, depth)), f), 1)
    kill_out = tensor(identity(y, depth), zero(1, 0, depth))
    kill_in = tensor(identity(x, depth), zero(0, 1, depth))
    return lhs, compose(kill_out, compose(f, kill_in))


def ax_trace_schemes_agree(rng, depth):
    x, y, z = (rng.randint(1, 3) for _ in range(3))
    f = _r(rng, x + z, y + z, depth)
    return trace(f, z), trace_sum(f, z)


AXIOM_FAMILIES: dict[str, list[Callable]] = {
    "yanking": [ax_yanking, ax_generalized_yanking],
    "vanishing": [ax_vanishing_unit, ax_vanishing_tensor],
    "superposing": [ax_superposing],
    "dinaturality": [ax_dinaturality],
    "naturality": [ax_naturality_x, ax_naturality_y],
    "tracing zero": [ax_tracing_zero],
    "vanishing with zero": [ax_vanishing_with_zero],
}


@dataclass
class AxiomResult:
    name: str
    samples: int
    failures: int
    witness: str = ""

    @property
    def ok(self) -> bool:
        return self.failures == 0


def check_axioms(samples: int, seed: int, depth: int = 2) -> list[AxiomResult]:
    """Run every axiom instance ``samples`` times; both trace evaluators must agree too."""
    rng = random.Random(seed)
    results = []
    for family, checks in AXIOM_FAMILIES.items():
        fails, witness = 0, ""
        for _ in range(samples):
            for chk in checks + [ax_trace_schemes_agree]:
                lhs, rhs = chk(rng, depth)
                if lhs != rhs:
                    fails += 1
                    witness = witness or f"{chk.__name__}: {sorted(lhs.table)[:4]} vs {sorted(rhs.table)[:4]}"
        results.append(AxiomResult(family, samples, fails, witness))
    return results
