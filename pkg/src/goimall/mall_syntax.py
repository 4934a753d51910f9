"""Constant-only MALL formulas, proof terms with an explicit cut stack, and the checker.

Proof terms follow a principal-last convention: every rule acts on the last
formula(s) of its premise contexts, except the right premise of a cut, whose
cut formula comes first.  ``Exch`` swaps two context positions so any
occurrence can be moved into place.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union


def hash_once(cls):
    """Memoize the structural hash of a frozen dataclass; terms are hashed very often."""
    names = tuple(cls.__dataclass_fields__)
    tag = cls.__name__

    def __hash__(self):
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = hash((tag,) + tuple(getattr(self, n) for n in names))
            object.__setattr__(self, "_h", h)
            return h

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if k != "_h"}

    cls.__hash__ = __hash__
    cls.__getstate__ = __getstate__
    return cls


class ParseError(ValueError):
    """Malformed formula or proof text; ``offset`` is a 0-based character index."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset


class ProofError(ValueError):
    """A rule violation; ``path`` addresses the offending subterm from the root."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        where = format_path(path)
        super().__init__(f"{message} (at {where})")
        self.message = message
        self.path = path


def format_path(path: tuple[int, ...]) -> str:
    return "root" if not path else "root." + ".".join(str(i) for i in path)


# ---------------------------------------------------------------------------
# Formulas


@hash_once
@dataclass(frozen=True)
class One:
    pass


@hash_once
@dataclass(frozen=True)
class Bot:
    pass


@hash_once
@dataclass(frozen=True)
class Zero:
    pass


@hash_once
@dataclass(frozen=True)
class Top:
    pass


@hash_once
@dataclass(frozen=True)
class Tensor:
    left: Formula
    right: Formula


@hash_once
@dataclass(frozen=True)
class Par:
    left: Formula
    right: Formula


@hash_once
@dataclass(frozen=True)
class Plus:
    left: Formula
    right: Formula


@hash_once
@dataclass(frozen=True)
class With:
    left: Formula
    right: Formula


Formula = Union[One, Bot, Zero, Top, Tensor, Par, Plus, With]

_UNIT_NAMES = {One: "1", Bot: "bot", Zero: "0", Top: "top"}
_UNIT_BY_NAME = {name: cls() for cls, name in _UNIT_NAMES.items()}
_BINARY_SYMBOLS = {Tensor: "*", Par: "par", Plus: "+", With: "&"}
_BINARY_BY_SYMBOL = {sym: cls for cls, sym in _BINARY_SYMBOLS.items()}
_DUAL_CLASS = {One: Bot, Bot: One, Zero: Top, Top: Zero,
               Tensor: Par, Par: Tensor, Plus: With, With: Plus}


def dual(f: Formula) -> Formula:
    """De Morgan dual."""
    cls = _DUAL_CLASS[type(f)]
    if cls in _UNIT_NAMES:
        return cls()
    return cls(dual(f.left), dual(f.right))


def is_unit(f: Formula) -> bool:
    return type(f) in _UNIT_NAMES


def format_formula(f: Formula) -> str:
    if is_unit(f):
        return _UNIT_NAMES[type(f)]
    return f"({format_formula(f.left)} {_BINARY_SYMBOLS[type(f)]} {format_formula(f.right)})"


def formula_size(f: Formula) -> int:
    """Number of connectives and units."""
    if is_unit(f):
        return 1
    return 1 + formula_size(f.left) + formula_size(f.right)


# ---------------------------------------------------------------------------
# Tokenizer and s-expression reader shared by both grammars

_TOKEN_CHARS = "()"


def _tokens(text: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in _TOKEN_CHARS:
            out.append((c, i))
            i += 1
        elif c == ";":
            # comment to end of line
            while i < len(text) and text[i] != "\n":
                i += 1
        else:
            start = i
            while i < len(text) and not text[i].isspace() and text[i] not in _TOKEN_CHARS:
                i += 1
            out.append((text[start:i], start))
    return out


@dataclass(frozen=True)
class _Atom:
    text: str
    offset: int


@dataclass(frozen=True)
class _List:
    items: tuple
    offset: int


def _read_sexpr(text: str):
    toks = _tokens(text)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of input", len(text))
        tok, off = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(toks):
                    raise ParseError("unexpected end of input", len(text))
                if toks[pos][0] == ")":
                    pos += 1
                    return _List(tuple(items), off)
                items.append(read())
        if tok == ")":
            raise ParseError("unexpected ')'", off)
        return _Atom(tok, off)

    node = read()
    if pos != len(toks):
        raise ParseError("trailing input", toks[pos][1])
    return node


def _formula_from_sexpr(node) -> Formula:
    if isinstance(node, _Atom):
        if node.text in _UNIT_BY_NAME:
            return _UNIT_BY_NAME[node.text]
        raise ParseError(f"unknown formula atom {node.text!r}", node.offset)
    if len(node.items) != 3:
        raise ParseError("binary formula must have the shape (F op G)", node.offset)
    left, op, right = node.items
    if not isinstance(op, _Atom) or op.text not in _BINARY_BY_SYMBOL:
        raise ParseError("expected one of * par + &", getattr(op, "offset", node.offset))
    return _BINARY_BY_SYMBOL[op.text](_formula_from_sexpr(left), _formula_from_sexpr(right))


def parse_formula(text: str) -> Formula:
    """Parse ``1 | bot | 0 | top | (F * G) | (F par G) | (F + G) | (F & G)``."""
    return _formula_from_sexpr(_read_sexpr(text))


# ---------------------------------------------------------------------------
# Proof terms


@hash_once
@dataclass(frozen=True)
class Ax:
    formula: Formula


@hash_once
@dataclass(frozen=True)
class OneI:
    pass


@hash_once
@dataclass(frozen=True)
class TopI:
    context: tuple[Formula, ...]


@hash_once
@dataclass(frozen=True)
class BotI:
    premise: ProofTerm


@hash_once
@dataclass(frozen=True)
class TensorI:
    left: ProofTerm
    right: ProofTerm


@hash_once
@dataclass(frozen=True)
class ParI:
    premise: ProofTerm


@hash_once
@dataclass(frozen=True)
class CutI:
    left: ProofTerm
    right: ProofTerm


@hash_once
@dataclass(frozen=True)
class WithI:
    left: ProofTerm
    right: ProofTerm
    sigma: tuple[tuple[int, int], ...] = ()


@hash_once
@dataclass(frozen=True)
class Plus1I:
    premise: ProofTerm
    other: Formula


@hash_once
@dataclass(frozen=True)
class Plus2I:
    premise: ProofTerm
    other: Formula


@hash_once
@dataclass(frozen=True)
class Exch:
    premise: ProofTerm
    i: int
    j: int


ProofTerm = Union[Ax, OneI, TopI, BotI, TensorI, ParI, CutI, WithI, Plus1I, Plus2I, Exch]

_BINARY_RULES = (TensorI, CutI, WithI)


def premises(p: ProofTerm) -> tuple[ProofTerm, ...]:
    if isinstance(p, _BINARY_RULES):
        return (p.left, p.right)
    if isinstance(p, (BotI, ParI, Plus1I, Plus2I, Exch)):
        return (p.premise,)
    return ()


def replace_premises(p: ProofTerm, new: tuple[ProofTerm, ...]) -> ProofTerm:
    if isinstance(p, WithI):
        return WithI(new[0], new[1], p.sigma)
    if isinstance(p, _BINARY_RULES):
        return type(p)(new[0], new[1])
    if isinstance(p, (BotI, ParI)):
        return type(p)(new[0])
    if isinstance(p, (Plus1I, Plus2I)):
        return type(p)(new[0], p.other)
    if isinstance(p, Exch):
        return Exch(new[0], p.i, p.j)
    return p


def size(p: ProofTerm) -> int:
    """Rule-node count; exchanges are bookkeeping and do not count."""
    own = 0 if isinstance(p, Exch) else 1
    return own + sum(size(q) for q in premises(p))


def subterm(p: ProofTerm, path: tuple[int, ...]) -> ProofTerm:
    for i in path:
        p = premises(p)[i]
    return p


def replace_at(p: ProofTerm, path: tuple[int, ...], new: ProofTerm) -> ProofTerm:
    if not path:
        return new
    kids = list(premises(p))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return replace_premises(p, tuple(kids))


def walk(p: ProofTerm, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], ProofTerm]]:
    """Post-order traversal yielding (path, subterm), left premises first."""
    for i, q in enumerate(premises(p)):
        yield from walk(q, path + (i,))
    yield path, p


@lru_cache(maxsize=1 << 16)
def is_cut_free(p: ProofTerm) -> bool:
    if isinstance(p, CutI):
        return False
    return all(is_cut_free(q) for q in premises(p))


# ---------------------------------------------------------------------------
# Printing and parsing proofs


def format_proof(p: ProofTerm) -> str:
    f = format_formula
    if isinstance(p, Ax):
        return f"(ax {f(p.formula)})"
    if isinstance(p, OneI):
        return "(one)"
    if isinstance(p, TopI):
        return "(top (" + " ".join(f(g) for g in p.context) + "))"
    if isinstance(p, BotI):
        return f"(bot {format_proof(p.premise)})"
    if isinstance(p, TensorI):
        return f"(tensor {format_proof(p.left)} {format_proof(p.right)})"
    if isinstance(p, ParI):
        return f"(par {format_proof(p.premise)})"
    if isinstance(p, CutI):
        return f"(cut {format_proof(p.left)} {format_proof(p.right)})"
    if isinstance(p, WithI):
        pairs = " ".join(f"({i} {j})" for i, j in p.sigma)
        return f"(with {format_proof(p.left)} {format_proof(p.right)} ({pairs}))"
    if isinstance(p, Plus1I):
        return f"(plus1 {format_proof(p.premise)} {f(p.other)})"
    if isinstance(p, Plus2I):
        return f"(plus2 {format_proof(p.premise)} {f(p.other)})"
    if isinstance(p, Exch):
        return f"(ex {format_proof(p.premise)} {p.i} {p.j})"
    raise TypeError(p)


_ARITY = {"ax": 1, "one": 0, "top": 1, "bot": 1, "tensor": 2, "par": 1, "cut": 2,
          "with": 3, "plus1": 2, "plus2": 2, "ex": 3}


def _int_atom(node) -> int:
    if isinstance(node, _Atom) and node.text.isdigit():
        return int(node.text)
    raise ParseError("expected a non-negative integer", node.offset)


def _proof_from_sexpr(node) -> ProofTerm:
    if not isinstance(node, _List) or not node.items or not isinstance(node.items[0], _Atom):
        raise ParseError("expected a proof node (keyword ...)", node.offset)
    head = node.items[0].text
    args = node.items[1:]
    if head not in _ARITY:
        raise ParseError(f"unknown proof rule {head!r}", node.items[0].offset)
    if len(args) != _ARITY[head]:
        raise ParseError(f"rule {head!r} takes {_ARITY[head]} argument(s), got {len(args)}",
                         node.offset)
    sub = _proof_from_sexpr
    form = _formula_from_sexpr
    if head == "ax":
        return Ax(form(args[0]))
    if head == "one":
        return OneI()
    if head == "top":
        if not isinstance(args[0], _List):
            raise ParseError("top expects a parenthesised formula list", args[0].offset)
        return TopI(tuple(form(g) for g in args[0].items))
    if head == "bot":
        return BotI(sub(args[0]))
    if head == "tensor":
        return TensorI(sub(args[0]), sub(args[1]))
    if head == "par":
        return ParI(sub(args[0]))
    if head == "cut":
        return CutI(sub(args[0]), sub(args[1]))
    if head == "with":
        listing = args[2]
        if not isinstance(listing, _List):
            raise ParseError("with expects a superposition list ((i j) ...)", listing.offset)
        pairs = []
        for item in listing.items:
            if not isinstance(item, _List) or len(item.items) != 2:
                raise ParseError("superposition entries have the shape (i j)", item.offset)
            pairs.append((_int_atom(item.items[0]), _int_atom(item.items[1])))
        return WithI(sub(args[0]), sub(args[1]), tuple(pairs))
    if head == "plus1":
        return Plus1I(sub(args[0]), form(args[1]))
    if head == "plus2":
        return Plus2I(sub(args[0]), form(args[1]))
    return Exch(sub(args[0]), _int_atom(args[1]), _int_atom(args[2]))


def parse_proof(text: str) -> ProofTerm:
    """Parse the proof s-expression syntax; no type checking happens here."""
    return _proof_from_sexpr(_read_sexpr(text))


# ---------------------------------------------------------------------------
# Sequents and the checker


@dataclass(frozen=True)
class CutPair:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Sequent:
    cuts: tuple[CutPair, ...]
    context: tuple[Formula, ...]

    def __str__(self) -> str:
        stack = ", ".join(f"({format_formula(c.left)}, {format_formula(c.right)})" for c in self.cuts)
        ctx = ", ".join(format_formula(f) for f in self.context)
        return f"|- [{stack}] {ctx}".rstrip()


def with_stack(left: tuple, right: tuple, sigma: tuple[tuple[int, int], ...]) -> tuple:
    """Stack of a &-conclusion: unshared left entries, unshared right entries, shared entries."""
    shared_left = {i for i, _ in sigma}
    shared_right = {j for _, j in sigma}
    return (tuple(c for k, c in enumerate(left) if k not in shared_left)
            + tuple(c for k, c in enumerate(right) if k not in shared_right)
            + tuple(left[i] for i, _ in sigma))


def check_sigma(sigma, left_stack: tuple, right_stack: tuple, eq=None) -> str | None:
    """Return an error message if the superposition list is ill-formed, else None."""
    lefts = [i for i, _ in sigma]
    rights = [j for _, j in sigma]
    if len(set(lefts)) != len(lefts) or len(set(rights)) != len(rights):
        return "superposition list repeats a cut entry"
    for i, j in sigma:
        if not (0 <= i < len(left_stack)) or not (0 <= j < len(right_stack)):
            return f"superposition entry ({i} {j}) out of range"
        same = eq(left_stack[i], right_stack[j]) if eq else left_stack[i] == right_stack[j]
        if not same:
            return f"superposition entry ({i} {j}) pairs different cut formulas"
    return None


@lru_cache(maxsize=1 << 17)
def _checked(p: ProofTerm) -> Sequent:
    return check_proof(p)


def _premise_sequent(p: ProofTerm, path: tuple[int, ...]) -> Sequent:
    # premises are shared between many terms, so their conclusions are memoized
    try:
        return _checked(p)
    except ProofError as exc:
        raise ProofError(exc.message, path + exc.path) from None


def check_proof(p: ProofTerm, path: tuple[int, ...] = ()) -> Sequent:
    """Return the conclusion of ``p`` or raise ProofError naming the offending subterm."""
    if isinstance(p, Ax):
        return Sequent((), (p.formula, dual(p.formula)))
    if isinstance(p, OneI):
        return Sequent((), (One(),))
    if isinstance(p, TopI):
        return Sequent((), tuple(p.context) + (Top(),))
    if isinstance(p, Exch):
        s = _premise_sequent(p.premise, path + (0,))
        n = len(s.context)
        if not (0 <= p.i < n and 0 <= p.j < n):
            raise ProofError(f"exchange positions {p.i},{p.j} out of range for {n} formulas", path)
        ctx = list(s.context)
        ctx[p.i], ctx[p.j] = ctx[p.j], ctx[p.i]
        return Sequent(s.cuts, tuple(ctx))
    if isinstance(p, BotI):
        s = _premise_sequent(p.premise, path + (0,))
        return Sequent(s.cuts, s.context + (Bot(),))
    if isinstance(p, ParI):
        s = _premise_sequent(p.premise, path + (0,))
        if len(s.context) < 2:
            raise ProofError("par needs two formulas in the premise", path)
        a, b = s.context[-2:]
        return Sequent(s.cuts, s.context[:-2] + (Par(a, b),))
    if isinstance(p, (Plus1I, Plus2I)):
        s = _premise_sequent(p.premise, path + (0,))
        if not s.context:
            raise ProofError("plus needs a formula in the premise", path)
        a = s.context[-1]
        res = Plus(a, p.other) if isinstance(p, Plus1I) else Plus(p.other, a)
        return Sequent(s.cuts, s.context[:-1] + (res,))
    if isinstance(p, TensorI):
        l = _premise_sequent(p.left, path + (0,))
        r = _premise_sequent(p.right, path + (1,))
        if not l.context or not r.context:
            raise ProofError("tensor premises need a principal formula", path)
        return Sequent(l.cuts + r.cuts,
                       l.context[:-1] + r.context[:-1] + (Tensor(l.context[-1], r.context[-1]),))
    if isinstance(p, CutI):
        l = _premise_sequent(p.left, path + (0,))
        r = _premise_sequent(p.right, path + (1,))
        if not l.context or not r.context:
            raise ProofError("cut premises need a cut formula", path)
        a, b = l.context[-1], r.context[0]
        if b != dual(a):
            raise ProofError(
                f"cut formulas not dual: {format_formula(a)} vs {format_formula(b)}", path)
        return Sequent(l.cuts + r.cuts + (CutPair(a, b),), l.context[:-1] + r.context[1:])
    if isinstance(p, WithI):
        l = _premise_sequent(p.left, path + (0,))
        r = _premise_sequent(p.right, path + (1,))
        if not l.context or not r.context:
            raise ProofError("with premises need a principal formula", path)
        if l.context[:-1] != r.context[:-1]:
            raise ProofError("with premises have different contexts", path)
        problem = check_sigma(p.sigma, l.cuts, r.cuts)
        if problem:
            raise ProofError(problem, path)
        return Sequent(with_stack(l.cuts, r.cuts, p.sigma),
                       l.context[:-1] + (With(l.context[-1], r.context[-1]),))
    raise TypeError(f"not a proof term: {p!r}")
