"""Indexed MALL with cut stacks: formulas carry index domains.

Families of points translate into indexed sequents, and a proof plus a member
family translates into an indexed proof (``fl_forward``).  ``fl_backward``
reads the family back off an indexed proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Union

from .mall_syntax import (
    Ax, Bot, BotI, CutI, Exch, Formula, One, OneI, Par, ParI, Plus, Plus1I,
    Plus2I, ProofTerm, Tensor, TensorI, Top, TopI, With, WithI, Zero, check_sigma,
    dual, format_path, hash_once, with_stack,
)
from .rel_model import (
    STAR, Experiment, ExpBranch, ExpJoin, ExpLeaf, ExpStep, In1, In2, NotAMember, Pair,
    Point, PointVec, Present, decompose, format_point, pointvec_from_json,
    pointvec_of, pointvec_to_json,
)

IndexSet = frozenset

EMPTY: IndexSet = frozenset()


def index_key(atom: str):
    return (0, int(atom), "") if atom.isdigit() else (1, 0, atom)


def format_indices(k) -> str:
    return "{" + ",".join(sorted(k, key=index_key)) + "}"


class TranslationUndefined(ValueError):
    pass


class IndexedProofError(ValueError):
    def __init__(self, message: str, path: tuple[int, ...] = ()):
        super().__init__(f"{message} (at {format_path(path)})")
        self.message = message
        self.path = path


# ---------------------------------------------------------------------------
# Indexed formulas

_KIND_OF = {One: "1", Bot: "bot", Zero: "0", Top: "top",
            Tensor: "*", Par: "par", Plus: "+", With: "&"}
_CLASS_OF = {v: k for k, v in _KIND_OF.items()}
_DUAL_KIND = {"1": "bot", "bot": "1", "0": "top", "top": "0",
              "*": "par", "par": "*", "+": "&", "&": "+"}
_UNITS = ("1", "bot", "0", "top")
_MULT = ("*", "par")
_ADD = ("+", "&")


@hash_once
@dataclass(frozen=True)
class IFormula:
    kind: str
    domain: IndexSet
    left: "IFormula | None" = None
    right: "IFormula | None" = None

    def __str__(self) -> str:
        return format_iformula(self, top=True)


def format_iformula(a: IFormula, top: bool = False) -> str:
    if a.kind in _UNITS:
        return a.kind + format_indices(a.domain)
    body = f"{format_iformula(a.left)} {a.kind} {format_iformula(a.right)}"
    return body if top else f"({body})"


def well_formed(a: IFormula) -> bool:
    if a.kind in ("0", "top"):
        return not a.domain
    if a.kind in ("1", "bot"):
        return True
    if not (well_formed(a.left) and well_formed(a.right)):
        return False
    if a.kind in _MULT:
        return a.left.domain == a.domain == a.right.domain
    return not (a.left.domain & a.right.domain) and (a.left.domain | a.right.domain) == a.domain


def underlying(a: IFormula) -> Formula:
    cls = _CLASS_OF[a.kind]
    if a.kind in _UNITS:
        return cls()
    return cls(underlying(a.left), underlying(a.right))


def idual(a: IFormula) -> IFormula:
    if a.kind in _UNITS:
        return IFormula(_DUAL_KIND[a.kind], a.domain)
    return IFormula(_DUAL_KIND[a.kind], a.domain, idual(a.left), idual(a.right))


def restrict_formula(a: IFormula, k) -> IFormula:
    """Intersect every domain with ``k``; 0 and top keep their empty domain."""
    k = frozenset(k)
    if a.kind in _UNITS:
        return IFormula(a.kind, a.domain & k)
    return IFormula(a.kind, a.domain & k, restrict_formula(a.left, k), restrict_formula(a.right, k))


def merge_formula(a: IFormula, b: IFormula) -> IFormula:
    """Glue two formulas over disjoint domains with the same shape."""
    if a.kind != b.kind:
        raise ValueError("cannot merge formulas of different shapes")
    if a.kind in _UNITS:
        return IFormula(a.kind, a.domain | b.domain)
    return IFormula(a.kind, a.domain | b.domain,
                    merge_formula(a.left, b.left), merge_formula(a.right, b.right))


def empty_lift(f: Formula) -> IFormula:
    """A plain formula with every domain empty."""
    return translate_formula_family(f, {})


def point_at(a: IFormula, j: str) -> Point:
    """The web element that index ``j`` selects in ``a``."""
    if a.kind in ("1", "bot"):
        return STAR
    if a.kind in _MULT:
        return Pair(point_at(a.left, j), point_at(a.right, j))
    if a.kind in _ADD:
        if j in a.left.domain:
            return In1(point_at(a.left, j))
        return In2(point_at(a.right, j))
    raise ValueError(f"index {j} does not occur in a formula of kind {a.kind}")


def translate_formula_family(f: Formula, a: Mapping[str, Point]) -> IFormula:
    """Translate a family of web elements of ``f`` into an indexed formula of domain keys(a)."""
    dom = frozenset(a)
    if isinstance(f, (One, Bot)):
        return IFormula(_KIND_OF[type(f)], dom)
    if isinstance(f, (Zero, Top)):
        if dom:
            raise TranslationUndefined(f"no element of {_KIND_OF[type(f)]} for indices {format_indices(dom)}")
        return IFormula(_KIND_OF[type(f)], EMPTY)
    kind = _KIND_OF[type(f)]
    if isinstance(f, (Tensor, Par)):
        for j, x in a.items():
            if not isinstance(x, Pair):
                raise TranslationUndefined(f"index {j}: {format_point(x)} is not a pair")
        return IFormula(kind, dom,
                        translate_formula_family(f.left, {j: x.left for j, x in a.items()}),
                        translate_formula_family(f.right, {j: x.right for j, x in a.items()}))
    lefts, rights = {}, {}
    for j, x in a.items():
        if isinstance(x, In1):
            lefts[j] = x.body
        elif isinstance(x, In2):
            rights[j] = x.body
        else:
            raise TranslationUndefined(f"index {j}: {format_point(x)} is not tagged")
    return IFormula(kind, dom, translate_formula_family(f.left, lefts),
                    translate_formula_family(f.right, rights))


def translate_cut_family(cuts, delta: Mapping[str, tuple]) -> tuple[tuple[IFormula, IFormula], ...]:
    """Each pair gets the domain of indices where its slot is present; empty domains are kept."""
    out = []
    for i, c in enumerate(cuts):
        present = {j: slots[i] for j, slots in delta.items() if isinstance(slots[i], Present)}
        out.append((translate_formula_family(c.left, {j: s.left for j, s in present.items()}),
                    translate_formula_family(c.right, {j: s.right for j, s in present.items()})))
    return tuple(out)


# ---------------------------------------------------------------------------
# Families and sequents


@dataclass(frozen=True)
class IndexedFamily:
    J: IndexSet
    values: Mapping[str, PointVec] = field(hash=False)

    def restrict(self, k) -> "IndexedFamily":
        keep = self.J & frozenset(k)
        return IndexedFamily(keep, {j: self.values[j] for j in keep})

    def ordered(self) -> list[str]:
        return sorted(self.J, key=index_key)

    def to_json(self) -> dict:
        return {"J": self.ordered(), "values": {j: pointvec_to_json(self.values[j]) for j in self.ordered()}}

    @staticmethod
    def from_json(obj: dict) -> "IndexedFamily":
        values = {str(j): pointvec_from_json(v) for j, v in obj["values"].items()}
        J = frozenset(str(j) for j in obj.get("J", values))
        if J != frozenset(values):
            raise ValueError("family values must be given for exactly the indices in J")
        return IndexedFamily(J, values)


@dataclass(frozen=True)
class ISequent:
    J: IndexSet
    cuts: tuple[tuple[IFormula, IFormula], ...]
    context: tuple[IFormula, ...]

    def __str__(self) -> str:
        stack = ", ".join(f"({format_iformula(a, True)}, {format_iformula(b, True)})" for a, b in self.cuts)
        ctx = ", ".join(format_iformula(a, True) for a in self.context)
        return f"|-{format_indices(self.J)} [ {stack} ] {ctx}".replace("[  ]", "[ ]").rstrip()

    def restrict(self, k) -> "ISequent":
        return ISequent(self.J & frozenset(k),
                        tuple((restrict_formula(a, k), restrict_formula(b, k)) for a, b in self.cuts),
                        tuple(restrict_formula(a, k) for a in self.context))


def translate_sequent(cuts, context, family: IndexedFamily) -> ISequent:
    delta = {j: x.cuts for j, x in family.values.items()}
    ctx = tuple(translate_formula_family(f, {j: x.ctx[k] for j, x in family.values.items()})
                for k, f in enumerate(context))
    return ISequent(family.J, translate_cut_family(cuts, delta), ctx)


# ---------------------------------------------------------------------------
# Indexed proofs


@hash_once
@dataclass(frozen=True)
class IAx:
    formula: IFormula


@hash_once
@dataclass(frozen=True)
class IOne:
    domain: IndexSet


@hash_once
@dataclass(frozen=True)
class ITop:
    context: tuple[IFormula, ...]


@hash_once
@dataclass(frozen=True)
class IBot:
    premise: "IndexedProof"


@hash_once
@dataclass(frozen=True)
class ITensor:
    left: "IndexedProof"
    right: "IndexedProof"


@hash_once
@dataclass(frozen=True)
class IPar:
    premise: "IndexedProof"


@hash_once
@dataclass(frozen=True)
class ICut:
    left: "IndexedProof"
    right: "IndexedProof"


@hash_once
@dataclass(frozen=True)
class IWith:
    left: "IndexedProof"
    right: "IndexedProof"
    sigma: tuple[tuple[int, int], ...] = ()


@hash_once
@dataclass(frozen=True)
class IPlus1:
    premise: "IndexedProof"
    other: IFormula


@hash_once
@dataclass(frozen=True)
class IPlus2:
    premise: "IndexedProof"
    other: IFormula


@hash_once
@dataclass(frozen=True)
class IExch:
    premise: "IndexedProof"
    i: int
    j: int


IndexedProof = Union[IAx, IOne, ITop, IBot, ITensor, IPar, ICut, IWith, IPlus1, IPlus2, IExch]


def _bad(msg: str, path) -> IndexedProofError:
    return IndexedProofError(msg, path)


def check_indexed_proof(r: IndexedProof, path: tuple[int, ...] = ()) -> ISequent:
    """Validate every rule with its domain side conditions and return the conclusion."""
    return _premise_sequent(r, path)


def _check_node(r: IndexedProof, path: tuple[int, ...]) -> ISequent:
    seq = _check(r, path)
    for a in seq.context:
        if a.domain != seq.J:
            raise _bad("a context formula does not span the sequent domain", path)
    for a, b in seq.cuts:
        if a.domain != b.domain or not a.domain <= seq.J:
            raise _bad("a cut pair leaves the sequent domain", path)
    return seq


@lru_cache(maxsize=1 << 16)
def _checked(r: IndexedProof) -> ISequent:
    return _check_node(r, ())


def _premise_sequent(r: IndexedProof, path: tuple[int, ...]) -> ISequent:
    try:
        return _checked(r)
    except IndexedProofError as exc:
        raise IndexedProofError(exc.message, path + exc.path) from None


def _check(r: IndexedProof, path) -> ISequent:
    sub = _premise_sequent
    if isinstance(r, IAx):
        if not well_formed(r.formula):
            raise _bad("axiom formula violates the domain grammar", path)
        return ISequent(r.formula.domain, (), (r.formula, idual(r.formula)))
    if isinstance(r, IOne):
        return ISequent(r.domain, (), (IFormula("1", r.domain),))
    if isinstance(r, ITop):
        for a in r.context:
            if a.domain or not well_formed(a):
                raise _bad("the top rule lives over the empty domain", path)
        return ISequent(EMPTY, (), tuple(r.context) + (IFormula("top", EMPTY),))
    if isinstance(r, IExch):
        s = sub(r.premise, path + (0,))
        n = len(s.context)
        if not (0 <= r.i < n and 0 <= r.j < n):
            raise _bad("exchange positions out of range", path)
        ctx = list(s.context)
        ctx[r.i], ctx[r.j] = ctx[r.j], ctx[r.i]
        return ISequent(s.J, s.cuts, tuple(ctx))
    if isinstance(r, IBot):
        s = sub(r.premise, path + (0,))
        return ISequent(s.J, s.cuts, s.context + (IFormula("bot", s.J),))
    if isinstance(r, IPar):
        s = sub(r.premise, path + (0,))
        if len(s.context) < 2:
            raise _bad("par needs two formulas", path)
        a, b = s.context[-2:]
        return ISequent(s.J, s.cuts, s.context[:-2] + (IFormula("par", s.J, a, b),))
    if isinstance(r, (IPlus1, IPlus2)):
        s = sub(r.premise, path + (0,))
        if not s.context:
            raise _bad("plus needs a formula", path)
        if r.other.domain or not well_formed(r.other):
            raise _bad("the unused side of a plus must have empty domain", path)
        a = s.context[-1]
        res = IFormula("+", s.J, a, r.other) if isinstance(r, IPlus1) else IFormula("+", s.J, r.other, a)
        return ISequent(s.J, s.cuts, s.context[:-1] + (res,))
    if isinstance(r, (ITensor, ICut)):
        l = sub(r.left, path + (0,))
        rr = sub(r.right, path + (1,))
        if l.J != rr.J:
            raise _bad("both premises must live over the same domain", path)
        if not l.context or not rr.context:
            raise _bad("missing principal formula", path)
        if isinstance(r, ITensor):
            a, b = l.context[-1], rr.context[-1]
            return ISequent(l.J, l.cuts + rr.cuts,
                            l.context[:-1] + rr.context[:-1] + (IFormula("*", l.J, a, b),))
        a, b = l.context[-1], rr.context[0]
        if underlying(b) != dual(underlying(a)):
            raise _bad("cut formulas not dual", path)
        return ISequent(l.J, l.cuts + rr.cuts + ((a, b),), l.context[:-1] + rr.context[1:])
    if isinstance(r, IWith):
        l = sub(r.left, path + (0,))
        rr = sub(r.right, path + (1,))
        if l.J & rr.J:
            raise _bad("with premises must have disjoint domains", path)
        if not l.context or not rr.context:
            raise _bad("missing principal formula", path)
        if [underlying(a) for a in l.context[:-1]] != [underlying(a) for a in rr.context[:-1]]:
            raise _bad("with premises have different contexts", path)
        same = lambda c1, c2: (underlying(c1[0]), underlying(c1[1])) == (underlying(c2[0]), underlying(c2[1]))
        problem = check_sigma(r.sigma, l.cuts, rr.cuts, eq=same)
        if problem:
            raise _bad(problem, path)
        J = l.J | rr.J
        ctx = tuple(merge_formula(a, b) for a, b in zip(l.context[:-1], rr.context[:-1]))
        shared = tuple((merge_formula(l.cuts[i][0], rr.cuts[j][0]), merge_formula(l.cuts[i][1], rr.cuts[j][1]))
                       for i, j in r.sigma)
        unshared = with_stack(l.cuts, rr.cuts, r.sigma)[:len(l.cuts) + len(rr.cuts) - 2 * len(r.sigma)]
        stack = unshared + shared
        last = IFormula("&", J, l.context[-1], rr.context[-1])
        return ISequent(J, stack, ctx + (last,))
    raise TypeError(r)


def _map_proof(r: IndexedProof, fa, fd) -> IndexedProof:
    """Rebuild ``r`` applying ``fa`` to stored formulas and ``fd`` to stored domains."""
    m = lambda q: _map_proof(q, fa, fd)
    if isinstance(r, IAx):
        return IAx(fa(r.formula))
    if isinstance(r, IOne):
        return IOne(fd(r.domain))
    if isinstance(r, ITop):
        return ITop(tuple(fa(a) for a in r.context))
    if isinstance(r, (IBot, IPar)):
        return type(r)(m(r.premise))
    if isinstance(r, (IPlus1, IPlus2)):
        return type(r)(m(r.premise), fa(r.other))
    if isinstance(r, IExch):
        return IExch(m(r.premise), r.i, r.j)
    if isinstance(r, IWith):
        return IWith(m(r.left), m(r.right), r.sigma)
    return type(r)(m(r.left), m(r.right))


def restrict_proof(r: IndexedProof, k) -> IndexedProof:
    k = frozenset(k)
    return _map_proof(r, lambda a: restrict_formula(a, k), lambda d: d & k)


def erase(r: IndexedProof) -> ProofTerm:
    """Forget the indices; the same as restricting to the empty domain."""
    if isinstance(r, IAx):
        return Ax(underlying(r.formula))
    if isinstance(r, IOne):
        return OneI()
    if isinstance(r, ITop):
        return TopI(tuple(underlying(a) for a in r.context))
    if isinstance(r, IBot):
        return BotI(erase(r.premise))
    if isinstance(r, IPar):
        return ParI(erase(r.premise))
    if isinstance(r, IPlus1):
        return Plus1I(erase(r.premise), underlying(r.other))
    if isinstance(r, IPlus2):
        return Plus2I(erase(r.premise), underlying(r.other))
    if isinstance(r, IExch):
        return Exch(erase(r.premise), r.i, r.j)
    if isinstance(r, ITensor):
        return TensorI(erase(r.left), erase(r.right))
    if isinstance(r, ICut):
        return CutI(erase(r.left), erase(r.right))
    if isinstance(r, IWith):
        return WithI(erase(r.left), erase(r.right), r.sigma)
    raise TypeError(r)


# ---------------------------------------------------------------------------
# Fundamental lemma, both directions


def family_experiments(p: ProofTerm, nu: IndexedFamily) -> dict[str, Experiment]:
    out = {}
    for j in nu.ordered():
        try:
            out[j] = decompose(p, nu.values[j])
        except NotAMember as exc:
            raise NotAMember(f"index {j}: {exc}") from None
    return out


def fl_forward(p: ProofTerm, nu: IndexedFamily) -> IndexedProof:
    """Indexed proof of the translated sequent whose erasure is ``p``."""
    return indexed_from_experiments(p, family_experiments(p, nu))


def indexed_from_experiments(p: ProofTerm, exps: Mapping[str, Experiment]) -> IndexedProof:
    J = frozenset(exps)
    if isinstance(p, Ax):
        return IAx(translate_formula_family(p.formula, {j: e.point for j, e in exps.items()}))
    if isinstance(p, OneI):
        return IOne(J)
    if isinstance(p, TopI):
        if J:
            raise NotAMember("a top rule has no points")
        return ITop(tuple(empty_lift(f) for f in p.context))
    if isinstance(p, (BotI, ParI, Plus1I, Plus2I, Exch)):
        child = indexed_from_experiments(p.premise, {j: e.child for j, e in exps.items()})
        if isinstance(p, BotI):
            return IBot(child)
        if isinstance(p, ParI):
            return IPar(child)
        if isinstance(p, Plus1I):
            return IPlus1(child, empty_lift(p.other))
        if isinstance(p, Plus2I):
            return IPlus2(child, empty_lift(p.other))
        return IExch(child, p.i, p.j)
    if isinstance(p, (TensorI, CutI)):
        l = indexed_from_experiments(p.left, {j: e.left for j, e in exps.items()})
        r = indexed_from_experiments(p.right, {j: e.right for j, e in exps.items()})
        return ITensor(l, r) if isinstance(p, TensorI) else ICut(l, r)
    if isinstance(p, WithI):
        l = indexed_from_experiments(p.left, {j: e.child for j, e in exps.items() if e.tag == 1})
        r = indexed_from_experiments(p.right, {j: e.child for j, e in exps.items() if e.tag == 2})
        return IWith(l, r, p.sigma)
    raise TypeError(p)


def experiment_at(r: IndexedProof, j: str) -> Experiment:
    """Read index ``j``'s experiment off an indexed proof in which ``j`` is active."""
    if isinstance(r, IAx):
        return ExpLeaf(point_at(r.formula, j))
    if isinstance(r, IOne):
        return ExpLeaf(STAR)
    if isinstance(r, ITop):
        raise ValueError("index reached a top rule")
    if isinstance(r, (IBot, IPar, IPlus1, IPlus2, IExch)):
        return ExpStep(experiment_at(r.premise, j))
    if isinstance(r, (ITensor, ICut)):
        return ExpJoin(experiment_at(r.left, j), experiment_at(r.right, j))
    if isinstance(r, IWith):
        if j in _checked(r.left).J:
            return ExpBranch(1, experiment_at(r.left, j))
        return ExpBranch(2, experiment_at(r.right, j))
    raise TypeError(r)


def fl_backward(r: IndexedProof) -> tuple[IndexedFamily, ProofTerm]:
    """Recover the member family and the plain proof from an indexed proof."""
    seq = check_indexed_proof(r)
    p = erase(r)
    values = {j: pointvec_of(p, experiment_at(r, j)) for j in seq.J}
    return IndexedFamily(seq.J, values), p


def format_indexed_proof(r: IndexedProof, indent: int = 0) -> str:
    """One line per rule node with its indexed conclusion, premises indented below."""
    seq = check_indexed_proof(r)
    name = type(r).__name__[1:].lower()
    lines = ["  " * indent + f"{name}: {seq}"]
    for q in _premises(r):
        lines.append(format_indexed_proof(q, indent + 1))
    return "\n".join(lines)


def _premises(r: IndexedProof) -> tuple:
    if isinstance(r, (ITensor, ICut, IWith)):
        return (r.left, r.right)
    if isinstance(r, (IBot, IPar, IPlus1, IPlus2, IExch)):
        return (r.premise,)
    return ()
