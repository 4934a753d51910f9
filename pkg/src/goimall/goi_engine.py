"""Execution formula for points of MALL proofs with cut stacks.

Morphisms live in the category of partial injections on address tokens.
The reflexive object U is realised by words over {l, r}: the retraction
pops a letter, the coretraction pushes one.  A point's box is a flat port
graph; the trace over the cut ports is run as feedback by a token machine.
"""

from __future__ import annotations

import os
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Optional

from .mall_syntax import (
    Ax, BotI, CutI, Exch, OneI, ParI, Plus1I, Plus2I, ProofTerm, TensorI, TopI, WithI, is_cut_free,
)
from .rel_model import (
    Experiment, In1, In2, Pair, Point, PointVec, STAR,
    all_matched, decompose, execute_cuts_rel, interp_denotational,
)
from .indexed_logic import IndexedFamily, format_indices

SYM, ID, RET, CORET, SIGMA, IN, OUT = "sym", "id", "ret", "coret", "sigma", "in", "out"


class Divergent(RuntimeError):
    """A token did not reach an open port within the budget."""


class MalformedToken(ValueError):
    pass


ABSORBED = "ABSORBED"
DIVERGENT = "DIVERGENT"
LOOP = "LOOP"


@lru_cache(maxsize=4096)
def leaf_addresses(x: Point) -> tuple[str, ...]:
    """Addresses of the leaves of a point; additive tags consume no letters."""
    if isinstance(x, Pair):
        return tuple("l" + w for w in leaf_addresses(x.left)) + tuple("r" + w for w in leaf_addresses(x.right))
    if isinstance(x, (In1, In2)):
        return leaf_addresses(x.body)
    return ("",)


# ---------------------------------------------------------------------------
# Networks


@dataclass(slots=True)
class Node:
    kind: str
    role: str = ""
    path: tuple = ()
    matched: bool = True      # meaningful for sigma nodes
    group: int = -1           # annihilation group for ret/coret pairs and unit gates

    @property
    def label(self) -> str:
        if not self.path and self.kind in (IN, OUT):
            return self.role
        return f"{self.role}@root" + "".join(f".{d}" for d in self.path)


@dataclass(frozen=True)
class SigmaEntry:
    node: int
    port_a: int
    port_a_dual: int
    matched: bool


@dataclass
class Network:
    """Generator occurrences wired output-to-input; ports are conclusion occurrences."""
    nodes: list[Node] = field(default_factory=list)
    fwd: dict = field(default_factory=dict)      # (node, out) -> (node, in)
    bwd: dict = field(default_factory=dict)      # (node, in) -> (node, out)
    wire_point: dict = field(default_factory=dict)   # (node, out) -> point carried
    port_in: list[int] = field(default_factory=list)    # IN pin node per conclusion port
    port_out: list[int] = field(default_factory=list)   # OUT pin node per conclusion port
    port_point: list = field(default_factory=list)
    sigma: list[SigmaEntry] = field(default_factory=list)
    groups: dict = field(default_factory=dict)   # group id -> list of node ids

    def add(self, kind: str, role: str = "", path: tuple = (), **kw) -> int:
        self.nodes.append(Node(kind, role, path, **kw))
        return len(self.nodes) - 1

    def connect(self, src: tuple[int, int], dst: tuple[int, int], point: Point) -> None:
        if src in self.fwd or dst in self.bwd:
            raise ValueError(f"wire endpoint reused: {src} -> {dst}")
        self.fwd[src] = dst
        self.bwd[dst] = src
        self.wire_point[src] = point

    def generator_count(self) -> int:
        return len(self.nodes) - 2 * len(self.port_in)

    def token_domain(self) -> list[tuple[int, str]]:
        return [(k, w) for k, x in enumerate(self.port_point) for w in leaf_addresses(x)]


@dataclass
class _Open:
    """A partially built box: dangling endpoints per conclusion occurrence."""
    ins: list            # (node, inport) receiving tokens entering the port
    outs: list           # (node, outport) emitting tokens leaving the port
    points: list


def build_box(p: ProofTerm, x: PointVec) -> tuple[Network, list[SigmaEntry]]:
    """Network and cut pairing for the point ``x`` of ``p``."""
    e = decompose(p, x)
    net = Network()
    counter = iter(range(1 << 30))
    box = _build(net, p, e, counter, ())
    for k, (dst, src, pt) in enumerate(zip(box.ins, box.outs, box.points)):
        i = net.add(IN, f"in{k}")
        o = net.add(OUT, f"out{k}")
        net.connect((i, 0), dst, pt)
        net.connect(src, (o, 0), pt)
        net.port_in.append(i)
        net.port_out.append(o)
        net.port_point.append(pt)
    return net, net.sigma


def _build(net: Network, p: ProofTerm, e: Experiment, counter, path) -> _Open:
    where = path
    if isinstance(p, Ax):
        n = net.add(SYM, "ax", where)
        pt = e.point
        return _Open([(n, 0), (n, 1)], [(n, 0), (n, 1)], [pt, pt])
    if isinstance(p, OneI):
        n = net.add(ID, "one", where)
        return _Open([(n, 0)], [(n, 0)], [e.point])
    if isinstance(p, Exch):
        b = _build(net, p.premise, e.child, counter, path + (0,))
        for lst in (b.ins, b.outs, b.points):
            lst[p.i], lst[p.j] = lst[p.j], lst[p.i]
        return b
    if isinstance(p, (Plus1I, Plus2I)):
        b = _build(net, p.premise, e.child, counter, path + (0,))
        tag = 1 if isinstance(p, Plus1I) else 2
        b.points[-1] = In1(b.points[-1]) if tag == 1 else In2(b.points[-1])
        return b
    if isinstance(p, WithI):
        q = p.left if e.tag == 1 else p.right
        b = _build(net, q, e.child, counter, path + (e.tag - 1,))
        b.points[-1] = In1(b.points[-1]) if e.tag == 1 else In2(b.points[-1])
        return b
    if isinstance(p, BotI):
        b = _build(net, p.premise, e.child, counter, path + (0,))
        g = next(counter)
        members = []
        ins, outs = [], []
        for k, pt in enumerate(b.points):
            ti = net.add(ID, f"tap-in{k}", where, group=g)
            to = net.add(ID, f"tap-out{k}", where, group=g)
            net.connect((ti, 0), b.ins[k], pt)
            net.connect(b.outs[k], (to, 0), pt)
            ins.append((ti, 0))
            outs.append((to, 0))
            members += [ti, to]
        gate = net.add(ID, "bot", where, group=g)
        members.append(gate)
        net.groups[g] = members
        return _Open(ins + [(gate, 0)], outs + [(gate, 0)], list(b.points) + [STAR])
    if isinstance(p, (TensorI, ParI)):
        if isinstance(p, TensorI):
            l = _build(net, p.left, e.left, counter, path + (0,))
            r = _build(net, p.right, e.right, counter, path + (1,))
            a_in, a_out, a_pt = l.ins.pop(), l.outs.pop(), l.points.pop()
            b_in, b_out, b_pt = r.ins.pop(), r.outs.pop(), r.points.pop()
            ins, outs, pts = l.ins + r.ins, l.outs + r.outs, l.points + r.points
            name = "tensor"
        else:
            b = _build(net, p.premise, e.child, counter, path + (0,))
            b_in, b_out, b_pt = b.ins.pop(), b.outs.pop(), b.points.pop()
            a_in, a_out, a_pt = b.ins.pop(), b.outs.pop(), b.points.pop()
            ins, outs, pts = b.ins, b.outs, b.points
            name = "par"
        g = next(counter)
        ret = net.add(RET, f"{name}-ret", where, group=g)
        coret = net.add(CORET, f"{name}-coret", where, group=g)
        net.groups[g] = [ret, coret]
        net.connect((ret, 0), a_in, a_pt)
        net.connect((ret, 1), b_in, b_pt)
        net.connect(a_out, (coret, 0), a_pt)
        net.connect(b_out, (coret, 1), b_pt)
        return _Open(ins + [(ret, 0)], outs + [(coret, 0)], pts + [Pair(a_pt, b_pt)])
    if isinstance(p, CutI):
        l = _build(net, p.left, e.left, counter, path + (0,))
        r = _build(net, p.right, e.right, counter, path + (1,))
        a_in, a_out, a = l.ins.pop(), l.outs.pop(), l.points.pop()
        d_in, d_out, d = r.ins.pop(0), r.outs.pop(0), r.points.pop(0)
        matched = a == d
        s = net.add(SIGMA, "cut", where, matched=matched)
        net.connect(a_out, (s, 0), a)
        net.connect((s, 1), d_in, d)
        net.connect(d_out, (s, 1), d)
        net.connect((s, 0), a_in, a)
        net.sigma.append(SigmaEntry(s, len(net.sigma) * 2, len(net.sigma) * 2 + 1, matched))
        return _Open(l.ins + r.ins, l.outs + r.outs, l.points + r.points)
    if isinstance(p, TopI):
        raise ValueError("top has no points")
    raise TypeError(f"not a proof term: {p!r}")


# ---------------------------------------------------------------------------
# Token machine

KEEP, ANNIHILATE = "keep", "annihilate"


def _dead(net: Network, eps: dict, node: int) -> bool:
    return eps.get(net.nodes[node].group) == ANNIHILATE


def step_forward(net: Network, eps: dict, node: int, port: int, addr: str):
    """Move a token sitting at an input port through ``node``: (node, outport, addr) or a verdict."""
    kind = net.nodes[node].kind
    if kind == OUT:
        return ("exit", node, addr)
    if net.nodes[node].group >= 0 and _dead(net, eps, node):
        return ABSORBED
    if kind == SYM:
        return (node, 1 - port, addr)
    if kind == ID:
        return (node, 0, addr)
    if kind == RET:
        if not addr:
            raise MalformedToken(f"empty address at {net.nodes[node].label}")
        return (node, 0 if addr[0] == "l" else 1, addr[1:])
    if kind == CORET:
        return (node, 0, ("l" if port == 0 else "r") + addr)
    if kind == SIGMA:
        if not net.nodes[node].matched:
            return ABSORBED
        return (node, 1 - port, addr)
    raise ValueError(f"token stuck at {kind}")


def step_backward(net: Network, eps: dict, node: int, port: int, addr: str):
    """Inverse of step_forward for a token sitting at an output port."""
    kind = net.nodes[node].kind
    if kind == IN:
        return ("enter", node, addr)
    if net.nodes[node].group >= 0 and _dead(net, eps, node):
        return ABSORBED
    if kind == SYM:
        return (node, 1 - port, addr)
    if kind == ID:
        return (node, 0, addr)
    if kind == RET:
        return (node, 0, ("l" if port == 0 else "r") + addr)
    if kind == CORET:
        if not addr:
            raise MalformedToken(f"empty address at {net.nodes[node].label}")
        return (node, 0 if addr[0] == "l" else 1, addr[1:])
    if kind == SIGMA:
        if not net.nodes[node].matched:
            return ABSORBED
        return (node, 1 - port, addr)
    raise ValueError(f"token stuck at {kind}")


def run_forward(net: Network, eps: dict, src: tuple[int, int], addr: str, budget: int):
    """Follow a token leaving ``src``; returns ("exit", port, addr), ABSORBED, LOOP or DIVERGENT."""
    seen = set()
    state = (src[0], src[1], addr)
    for _ in range(budget):
        if state in seen:
            return LOOP
        seen.add(state)
        node, port = net.fwd[(state[0], state[1])]
        nxt = step_forward(net, eps, node, port, state[2])
        if nxt == ABSORBED:
            return ABSORBED
        if nxt[0] == "exit":
            return ("exit", net.port_out.index(nxt[1]), nxt[2])
        state = nxt
    return DIVERGENT


def run_backward(net: Network, eps: dict, dst: tuple[int, int], addr: str, budget: int):
    """Trace a token arriving at ``dst`` back to where it entered."""
    seen = set()
    state = (dst[0], dst[1], addr)
    for _ in range(budget):
        if state in seen:
            return LOOP
        seen.add(state)
        node, port = net.bwd[(state[0], state[1])]
        nxt = step_backward(net, eps, node, port, state[2])
        if nxt == ABSORBED:
            return ABSORBED
        if nxt[0] == "enter":
            return ("enter", net.port_in.index(nxt[1]), nxt[2])
        state = nxt
    return DIVERGENT


def default_budget(net: Network) -> int:
    env = os.environ.get("GOIMALL_BUDGET")
    if env:
        return int(env)
    tokens = max([len(leaf_addresses(x)) for x in net.port_point] + [1])
    return 4 * (net.generator_count() + 1) * tokens


# ---------------------------------------------------------------------------
# Zero action


def _forward_dead(net, eps, src, budget) -> bool:
    outcomes = [run_forward(net, eps, src, w, budget) for w in leaf_addresses(net.wire_point[src])]
    if DIVERGENT in outcomes:
        raise Divergent(f"dead-wire analysis diverged at {net.nodes[src[0]].label}")
    return all(o == ABSORBED for o in outcomes)


def _backward_dead(net, eps, dst, budget) -> bool:
    src = net.bwd[dst]
    outcomes = [run_backward(net, eps, dst, w, budget) for w in leaf_addresses(net.wire_point[src])]
    if DIVERGENT in outcomes:
        raise Divergent(f"dead-wire analysis diverged at {net.nodes[dst[0]].label}")
    return all(o == ABSORBED for o in outcomes)


def _group_dead(net: Network, eps: dict, members: list[int], budget: int) -> bool:
    for n in members:
        kind = net.nodes[n].kind
        if kind == RET:
            if any(_forward_dead(net, eps, (n, o), budget) for o in (0, 1)):
                return True
        elif kind == CORET:
            if any(_backward_dead(net, eps, (n, i), budget) for i in (0, 1)):
                return True
        elif kind == ID:
            if _forward_dead(net, eps, (n, 0), budget) or _backward_dead(net, eps, (n, 0), budget):
                return True
    return False


def zero_action(net: Network, budget: Optional[int] = None, cascade: bool = True) -> dict:
    """Map each retraction group to keep or annihilate, iterating to a fixpoint."""
    eps = {g: KEEP for g in net.groups}
    if all(s.matched for s in net.sigma):
        return eps
    limit = default_budget(net) if budget is None else budget
    while True:
        fresh = [g for g, members in net.groups.items()
                 if eps[g] == KEEP and _group_dead(net, eps, members, limit)]
        for g in fresh:
            eps[g] = ANNIHILATE
        if not fresh or not cascade:
            return eps


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class MorphismValue:
    """A partial injection on tokens over a declared domain, or the zero morphism."""
    domain: frozenset
    table: tuple                 # sorted ((port, addr), (port, addr)) pairs

    @property
    def is_zero(self) -> bool:
        return not self.table

    def mapping(self) -> dict:
        return dict(self.table)

    def format(self) -> str:
        if self.is_zero:
            return "ZERO"
        return "\n".join(f"({a[0]},{a[1] or 'e'}) -> ({b[0]},{b[1] or 'e'})" for a, b in self.table)

    def to_json(self):
        if self.is_zero:
            return "ZERO"
        return [[list(a), list(b)] for a, b in self.table]


def eval_token(net: Network, eps: dict, token: tuple[int, str], budget: Optional[int] = None):
    """Run one token from an open input; returns the output token or ABSORBED."""
    port, addr = token
    if port >= len(net.port_point) or addr not in leaf_addresses(net.port_point[port]):
        raise MalformedToken(f"token {token} outside the domain of port {port}")
    limit = default_budget(net) if budget is None else budget
    out = run_forward(net, eps, (net.port_in[port], 0), addr, limit)
    if out == DIVERGENT or out == LOOP:
        raise Divergent(f"token {token} did not exit within {limit} moves")
    if out == ABSORBED:
        return ABSORBED
    return (out[1], out[2])


def execute_network(net: Network, eps: dict, budget: Optional[int] = None) -> MorphismValue:
    dom = net.token_domain()
    budget = default_budget(net) if budget is None else budget
    table = []
    for t in dom:
        o = eval_token(net, eps, t, budget)
        if o != ABSORBED:
            table.append((t, o))
    return MorphismValue(frozenset(dom), tuple(sorted(table)))


@dataclass
class Execution:
    value: MorphismValue
    net: Network
    eps: dict
    single_pass_value: MorphismValue

    @property
    def cascade_differs(self) -> bool:
        return self.value != self.single_pass_value


def execute_point_full(p: ProofTerm, x: PointVec, budget: Optional[int] = None) -> Execution:
    net, _ = build_box(p, x)
    eps = zero_action(net, budget)
    once = zero_action(net, budget, cascade=False)
    value = execute_network(net, eps, budget)
    single = value if once == eps else execute_network(net, once, budget)
    return Execution(value, net, eps, single)


def execute_point(p: ProofTerm, x: PointVec, budget: Optional[int] = None) -> MorphismValue:
    net, _ = build_box(p, x)
    return execute_network(net, zero_action(net, budget), budget)


def execute_family(p: ProofTerm, nu: IndexedFamily, budget: Optional[int] = None) -> dict:
    return {j: execute_point(p, nu.values[j], budget) for j in nu.ordered()}


def denotation_morphism(p: ProofTerm, x: PointVec) -> MorphismValue:
    if not is_cut_free(p):
        raise ValueError("denotation_morphism needs a cut-free proof")
    return execute_point(p, x)


def morphisms_equal(a: MorphismValue, b: MorphismValue) -> bool:
    if {t[0] for t in a.domain} != {t[0] for t in b.domain}:
        raise ValueError("morphisms over different port signatures")
    return a.domain == b.domain and a.table == b.table


# ---------------------------------------------------------------------------
# Main theorem check


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    final_J: frozenset = frozenset()
    final_values: dict = field(default_factory=dict)
    cascade_flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, ok, detail))

    def format(self) -> str:
        lines = list(self.trace)
        for c in self.checks:
            if not c.ok:
                lines.append(f"FAIL {c.name}: {c.detail}")
        for f in self.cascade_flags:
            lines.append(f"note: {f}")
        lines.append(f"checks: {sum(c.ok for c in self.checks)}/{len(self.checks)}")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def verify_main_theorem(p: ProofTerm, nu: IndexedFamily, budget: Optional[int] = None) -> Report:
    """Normalize with lifting and check invariance, diminution and the final denotation."""
    from .cut_rewrite import normalize_lifted

    rep = Report()
    memo: dict = {}

    def ex_at(q, x):
        key = (q, x)
        if key not in memo:
            memo[key] = execute_point(q, x, budget)
        return memo[key]

    try:
        start = {}
        for j in nu.ordered():
            ex = execute_point_full(p, nu.values[j], budget)
            memo[(p, nu.values[j])] = ex.value
            start[j] = ex.value
            if ex.cascade_differs:
                rep.cascade_flags.append(f"index {j}: single-pass zero action differs from fixpoint")
        steps = normalize_lifted(p, nu)
        current = dict(start)
        for k, st in enumerate(steps, 1):
            rep.trace.append(st.trace_line(k))
            q, mu = st.after
            for j in st.dropped:
                rep.add(f"step {k} dropped {j} is ZERO", current[j].is_zero, current[j].format())
            nxt = {}
            for j in mu.ordered():
                v = ex_at(q, mu.values[j])
                same = morphisms_equal(v, current[j])
                rep.add(f"step {k} index {j} invariant", same,
                        f"before {current[j].format()!r} after {v.format()!r}")
                nxt[j] = v
            current = nxt
        final_p, final_nu = (steps[-1].after if steps else (p, nu))
        rep.final_J = final_nu.J
        rep.final_values = current
        nonzero = frozenset(j for j in nu.J if not start[j].is_zero)
        rep.add("final J is the nonzero indices", final_nu.J == nonzero,
                f"J_final {format_indices(final_nu.J)} nonzero {format_indices(nonzero)}")
        for j in final_nu.ordered():
            if not is_cut_free(final_p):
                raise ValueError("normal form still has cuts")
            d = ex_at(final_p, final_nu.values[j])
            rep.add(f"final index {j} equals denotation", morphisms_equal(d, start[j]),
                    f"Ex {start[j].format()!r} denotation {d.format()!r}")
        matched = frozenset(j for j in nu.J if all_matched(nu.values[j]))
        rep.add("final J agrees with matched points", matched == final_nu.J,
                f"matched {format_indices(matched)}")
        selected = execute_cuts_rel(nu.values[j] for j in nu.J)
        finals = frozenset(tuple(final_nu.values[j].ctx) for j in final_nu.J)
        rep.add("final points agree with relational execution", selected == finals,
                f"{len(selected)} vs {len(finals)}")
        rep.add("final points lie in the denotation", finals <= interp_denotational(p))
    except Divergent as exc:
        rep.add("no divergence", False, str(exc))
    except Exception as exc:  # a failed check must not escape as an exception
        rep.add("verification ran", False, f"{type(exc).__name__}: {exc}")
    return rep
