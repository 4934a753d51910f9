"""Command-line front end: ``goimall <command> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from .mall_syntax import ParseError, ProofError, check_proof, format_proof, parse_proof
from .rel_model import format_point, format_pointvec, interp_denotational, interp_with_cuts, pointvec_to_json
from .indexed_logic import IndexedFamily, format_indexed_proof, fl_forward, translate_sequent
from .cut_rewrite import StepBudgetExceeded, find_redexes, normalize, normalize_lifted
from .goi_engine import Divergent, build_box, execute_family, verify_main_theorem, zero_action
from . import corpus as corpus_mod


class UsageError(Exception):
    pass


def _load_proof(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    p = parse_proof(text)
    check_proof(p)
    return p


def _load_family(path: Optional[str], p) -> IndexedFamily:
    if path is None:
        return corpus_mod.family_of(corpus_mod.points_sorted(p))
    try:
        with open(path) as fh:
            fam = IndexedFamily.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise UsageError(f"bad family file {path}: {exc}") from exc
    pts = interp_with_cuts(p)
    for j in fam.ordered():
        if fam.values[j] not in pts:
            raise UsageError(f"index {j}: {format_pointvec(fam.values[j])} is not a point of the proof")
    return fam


def _emit(args, text: str, obj) -> None:
    if args.json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_check(args) -> int:
    p = parse_proof(open(args.file).read())
    try:
        seq = check_proof(p)
    except ProofError as exc:
        _emit(args, f"FAIL {exc}", {"ok": False, "error": str(exc)})
        return 1
    _emit(args, str(seq), {"ok": True, "sequent": str(seq)})
    return 0


def cmd_interp(args) -> int:
    p = _load_proof(args.file)
    if args.mode == "cutlist":
        pts = corpus_mod.points_sorted(p)
        _emit(args, "\n".join(format_pointvec(x) for x in pts), [pointvec_to_json(x) for x in pts])
    else:
        rel = sorted(tuple(format_point(a) for a in g) for g in interp_denotational(p))
        _emit(args, "\n".join(", ".join(g) for g in rel), [list(g) for g in rel])
    return 0


def cmd_translate(args) -> int:
    p = _load_proof(args.file)
    fam = _load_family(args.family, p)
    seq = check_proof(p)
    isq = translate_sequent(seq.cuts, seq.context, fam)
    text = str(isq)
    if args.proof:
        text += "\n" + format_indexed_proof(fl_forward(p, fam))
    _emit(args, text, {"sequent": str(isq)})
    return 0


def cmd_normalize(args) -> int:
    p = _load_proof(args.file)
    if args.family is not None or args.trace:
        fam = _load_family(args.family, p)
        steps = normalize_lifted(p, fam, args.budget)
        final = steps[-1].after if steps else (p, fam)
        lines = [st.trace_line(k) for k, st in enumerate(steps, 1)] if args.trace else []
        lines.append(format_proof(final[0]))
        obj = {"normal_form": format_proof(final[0]), "J": final[1].ordered(),
               "trace": [st.trace_line(k) for k, st in enumerate(steps, 1)]}
        _emit(args, "\n".join(lines), obj)
        return 0
    steps = normalize(p, args.budget)
    q = steps[-1][1] if steps else p
    _emit(args, format_proof(q), {"normal_form": format_proof(q), "steps": len(steps)})
    return 0


def cmd_exec(args) -> int:
    p = _load_proof(args.file)
    fam = _load_family(args.family, p)
    values = execute_family(p, fam)
    text = "\n".join(f"index {j}:\n{values[j].format()}" for j in fam.ordered())
    _emit(args, text, {j: values[j].to_json() for j in fam.ordered()})
    return 0


def _verify_job(item):
    p, fam = item
    rep = verify_main_theorem(p, fam)
    return rep.ok, len(rep.cascade_flags), (None if rep.ok else f"{format_proof(p)}\n{rep.format()}")


def _verify_jobs(items, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            yield from ex.map(_verify_job, items, chunksize=64)
    else:
        yield from map(_verify_job, items)


def enumerate_jobs(n: int, samples: int, seed: int):
    """Chunked families over the whole corpus, then ``samples`` random families."""
    with_points = []
    for p in corpus_mod.iter_proofs(n, corpus_mod.CRITERION_SIGNATURE):
        fams = corpus_mod.chunked_families(p)
        if fams:
            with_points.append(p)
        for fam in fams:
            yield p, fam
    rng = random.Random(seed)
    for _ in range(samples):
        p = rng.choice(with_points)
        yield p, corpus_mod.random_family(p, rng)


def cmd_verify(args) -> int:
    if args.enumerate is not None:
        total = passed = flags = 0
        first_failure = None
        with corpus_mod.gc_paused():
            for ok, nflags, failure in _verify_jobs(enumerate_jobs(args.enumerate, args.samples, args.seed),
                                                    args.jobs):
                total += 1
                passed += ok
                flags += nflags
                if failure and first_failure is None:
                    first_failure = failure
        verdict = "PASS" if passed == total else "FAIL"
        lines = [f"families: {total}", f"passed: {passed}", f"zero-action cascade differences: {flags}"]
        if first_failure:
            lines.append(first_failure)
        lines.append(verdict)
        _emit(args, "\n".join(lines), {"families": total, "passed": passed, "cascade_flags": flags,
                                       "verdict": verdict})
        return 0 if verdict == "PASS" else 1
    if args.file is None:
        raise UsageError("verify needs FILE or --enumerate N")
    p = _load_proof(args.file)
    fam = _load_family(args.family, p)
    rep = verify_main_theorem(p, fam)
    obj = {"verdict": "PASS" if rep.ok else "FAIL", "trace": rep.trace,
           "J_final": sorted(rep.final_J), "checks": [[c.name, c.ok] for c in rep.checks]}
    _emit(args, rep.format(), obj)
    return 0 if rep.ok else 1


def cmd_axioms(args) -> int:
    from .traced import check_axioms
    results = check_axioms(args.samples, args.seed)
    good = sum(r.ok for r in results)
    lines = [f"{r.name}: {'PASS' if r.ok else 'FAIL'} ({r.samples - r.failures}/{r.samples})"
             + (f" {r.witness}" if r.witness else "") for r in results]
    lines.append(f"{good}/{len(results)} axiom families PASS")
    _emit(args, "\n".join(lines), {r.name: r.ok for r in results})
    return 0 if good == len(results) else 1


def cmd_diagram(args) -> int:
    from .diagram import to_dot
    p = _load_proof(args.file)
    fam = _load_family(args.family, p)
    if args.index not in fam.J:
        raise UsageError(f"no index {args.index} in the family")
    net, _ = build_box(p, fam.values[args.index])
    dot = to_dot(net, zero_action(net))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(dot)
    else:
        sys.stdout.write(dot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="goimall", description="Indexed cut elimination and GoI execution for MALL.")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")

    s = sub.add_parser("check", parents=[common], help="parse and type-check a proof")
    s.add_argument("file")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("interp", parents=[common], help="relational interpretation")
    s.add_argument("file")
    s.add_argument("--mode", choices=["cutlist", "denot"], default="cutlist")
    s.set_defaults(fn=cmd_interp)

    s = sub.add_parser("translate", parents=[common], help="indexed sequent of a family")
    s.add_argument("file")
    s.add_argument("--family")
    s.add_argument("--proof", action="store_true", help="also print the indexed proof")
    s.set_defaults(fn=cmd_translate)

    s = sub.add_parser("normalize", parents=[common], help="cut elimination, optionally lifted to a family")
    s.add_argument("file")
    s.add_argument("--family")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--budget", type=int)
    s.set_defaults(fn=cmd_normalize)

    s = sub.add_parser("exec", parents=[common], help="execution formula per index")
    s.add_argument("file")
    s.add_argument("--family")
    s.set_defaults(fn=cmd_exec)

    s = sub.add_parser("verify", parents=[common], help="check the main theorem")
    s.add_argument("file", nargs="?")
    s.add_argument("--family")
    s.add_argument("--enumerate", type=int, metavar="N", help="all corpus proofs up to N rule nodes")
    s.add_argument("--samples", type=int, default=100, help="random families added to --enumerate")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("axioms", parents=[common], help="trace-axiom property suite")
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_axioms)

    s = sub.add_parser("diagram", parents=[common], help="DOT drawing of one index's network")
    s.add_argument("file")
    s.add_argument("--family")
    s.add_argument("--index", required=True)
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_diagram)
    return ap


def run(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.fn(args)
    except (UsageError, ParseError, OSError) as exc:
        print(f"goimall: {exc}", file=sys.stderr)
        return 2
    except ProofError as exc:
        print(f"goimall: invalid proof: {exc}", file=sys.stderr)
        return 1
    except (StepBudgetExceeded, Divergent) as exc:
        print(f"goimall: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
