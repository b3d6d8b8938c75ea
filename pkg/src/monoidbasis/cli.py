"""Batch command-line surface.

Every command is a thin adapter over one module operation and is
non-interactive.  Exit codes: 0 = computed, 1 = negative verdict where the
result is boolean, 2 = input error.  ``--json`` switches to
machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import derivation as dv
from . import fb as fbmod
from .identities import (
    Identity,
    classify,
    parse_identity,
    unstable_pairs,
)
from .monoids import (
    FiniteMonoid,
    build_A01,
    build_reflexive_relations,
    build_SW,
    direct_product,
    is_isoterm_bounded,
    load_monoid,
    monoid_to_json,
    satisfies,
)
from .words import (
    Word,
    blocks,
    blocks12,
    format_word,
    is_compact,
    is_x_compact,
    is_xy_compact,
    parse_word,
    scattered_subwords,
    simon_equiv,
)

OK, NEGATIVE, INPUT_ERROR = 0, 1, 2


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


def _parse_w(args, text: str) -> Word:
    return parse_word(text, compact_powers=args.compact_powers)


def _parse_id(args, text: str) -> Identity:
    return parse_identity(text, compact_powers=args.compact_powers)


def _monoid_from_spec(args, spec: str) -> FiniteMonoid:
    """Monoid spec grammar: ``a01``, ``s2``..``s4``, ``sw(w1,w2,...)``,
    a JSON file path, or products of these joined with ``*``."""
    parts = [p.strip() for p in spec.split("*")]

    def one(p: str) -> FiniteMonoid:
        low = p.lower()
        if low == "a01":
            return build_A01()
        if low in ("s2", "s3", "s4"):
            return build_reflexive_relations(int(low[1]))
        if low.startswith("sw(") and p.endswith(")"):
            inner = p[3:-1]
            ws = [_parse_w(args, t) for t in inner.split(",") if t.strip()]
            return build_SW(ws)
        if os.path.exists(p):
            return load_monoid(p)
        raise ValueError(f"cannot interpret monoid spec {p!r}")

    out = one(parts[0])
    for p in parts[1:]:
        out = direct_product(out, one(p))
    return out


def _words_arg(args, text: str) -> list[Word]:
    """Inline comma/space separated words, or a file with one word per line."""
    if os.path.exists(text):
        with open(text) as fh:
            items = [line.strip() for line in fh if line.strip()]
    else:
        items = [t for t in text.replace(",", " ").split() if t]
    return [_parse_w(args, t) for t in items]


def _system_from_name(name: str) -> dv.RewriteSystem:
    table = {
        "sigma": dv.sigma_system(),
        "sigma12": dv.sigma_system(("sigma_1", "sigma_2")),
        "compact": dv.compact_system(),
        "axil": dv.axil_system(),
        "j3": dv.j3_system(),
    }
    if name in table:
        return table[name]
    raise ValueError(f"unknown system {name!r} (choose from {sorted(table)})")


def _maybe_emit_trace(args, trace: dv.DerivationTrace) -> None:
    if getattr(args, "emit_trace", None):
        with open(args.emit_trace, "w") as fh:
            fh.write(dv.trace_to_jsonl(trace))


def _trace_payload(trace: dv.DerivationTrace) -> dict:
    return {"start": str(trace.start), "end": str(trace.end),
            "steps": [{"rule": s.rule,
                       "direction": "forward" if s.forward else "backward",
                       "pos": s.pos,
                       "subst": {v: " ".join(img) for v, img in s.subst}}
                      for s in trace.steps]}


# -- command handlers ----------------------------------------------------------


def cmd_word_blocks(args) -> int:
    w = _parse_w(args, args.word)
    dec = blocks12(w) if args.twelve else blocks(w)
    payload = {"word": str(w),
               "blocks": [str(b) for b in dec.blocks],
               "separators": list(dec.separators)}
    _emit(args, payload, " | ".join(
        (f"[{b}]" if kind == "block" else b)
        for kind, b in ((s.kind, format_word(w[s.start:s.end])) for s in dec.segments)))
    return OK


def cmd_word_compact(args) -> int:
    w = _parse_w(args, args.word)
    if args.pair:
        result = is_xy_compact(w, args.pair[0], args.pair[1])
        label = f"{args.pair[0]}{args.pair[1]}-compact"
    elif args.var:
        result = is_x_compact(w, args.var)
        label = f"{args.var}-compact"
    else:
        result = is_compact(w)
        label = "compact"
    _emit(args, {"word": str(w), "predicate": label, "result": result},
          f"{w}: {label} = {result}")
    return OK if result else NEGATIVE


def cmd_word_subwords(args) -> int:
    w = _parse_w(args, args.word)
    subs = sorted(scattered_subwords(w, args.m), key=lambda s: (len(s), s.letters))
    _emit(args, {"word": str(w), "m": args.m, "subwords": [str(s) for s in subs]},
          f"{len(subs)} scattered subwords of length <= {args.m}: "
          + " ".join(str(s) for s in subs))
    return OK


def cmd_identity_classify(args) -> int:
    ident = _parse_id(args, args.identity)
    report = classify(ident, n=args.n)
    flat = report.as_dict()
    human = ", ".join(f"{k}={v}" for k, v in flat.items() if k != "reasons")
    _emit(args, {"identity": str(ident), **flat}, f"{ident}: {human}")
    return OK


def cmd_identity_pairs(args) -> int:
    ident = _parse_id(args, args.identity)
    pairs = unstable_pairs(ident)
    payload = {"identity": str(ident),
               "unstable": [{"left": repr(p.left), "right": repr(p.right),
                             "critical": p.critical} for p in pairs]}
    human = "; ".join(f"{{{p.left!r}, {p.right!r}}}" + (" (critical)" if p.critical else "")
                      for p in pairs) or "stable (trivial identity)"
    _emit(args, payload, f"{ident}: {human}")
    return OK


def cmd_monoid_build(args) -> int:
    M = _monoid_from_spec(args, args.monoid)
    data = monoid_to_json(M)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh)
        _emit(args, {"monoid": M.name, "size": M.size, "written": args.out},
              f"{M.name}: order {M.size} -> {args.out}")
    else:
        _emit(args, data, f"{M.name}: order {M.size}, identity index {M.one}")
    return OK


def cmd_monoid_satisfies(args) -> int:
    M = _monoid_from_spec(args, args.monoid)
    ident = _parse_id(args, args.identity)
    result = satisfies(M, ident, jobs=args.jobs)
    _emit(args, {"monoid": M.name, "identity": str(ident), "satisfies": result},
          f"{M.name} |= {ident}: {result}")
    return OK if result else NEGATIVE


def cmd_monoid_isoterm(args) -> int:
    M = _monoid_from_spec(args, args.monoid)
    w = _parse_w(args, args.word)
    verdict = is_isoterm_bounded(M, w, args.bound, jobs=args.jobs)
    payload = {"monoid": M.name, "word": str(w), "bound": args.bound,
               "isoterm": verdict.is_isoterm(), "widened": verdict.widened,
               "witness": None if verdict.witness is None else str(verdict.witness)}
    _emit(args, payload, f"{M.name}: {verdict!r}")
    return OK if verdict.is_isoterm() else NEGATIVE


def cmd_monoid_product(args) -> int:
    M = _monoid_from_spec(args, args.left)
    N = _monoid_from_spec(args, args.right)
    P = direct_product(M, N)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(monoid_to_json(P), fh)
    _emit(args, {"monoid": P.name, "size": P.size,
                 "written": args.out},
          f"{P.name}: order {P.size}")
    return OK


def cmd_derive_search(args) -> int:
    ident = _parse_id(args, args.identity)
    system = _system_from_name(args.system)
    trace = dv.derivable(ident, system, max_len=args.max_len,
                         max_depth=args.max_depth)
    if trace is None:
        _emit(args, {"identity": str(ident), "derivable": False},
              f"{ident}: not found within bounds")
        return NEGATIVE
    _maybe_emit_trace(args, trace)
    _emit(args, {"identity": str(ident), "derivable": True,
                 "trace": _trace_payload(trace)},
          f"{ident}: derived in {len(trace)} steps")
    return OK


def _cmd_derive_with(args, fn, ident) -> int:
    trace = fn(ident)
    _maybe_emit_trace(args, trace)
    _emit(args, {"identity": str(ident), "steps": len(trace),
                 "trace": _trace_payload(trace)},
          f"{ident}: derived in {len(trace)} steps")
    return OK


def cmd_derive_block_balanced(args) -> int:
    return _cmd_derive_with(args, dv.derive_block_balanced,
                            _parse_id(args, args.identity))


def cmd_derive_p12(args) -> int:
    return _cmd_derive_with(args, dv.derive_P12_block_balanced,
                            _parse_id(args, args.identity))


def cmd_derive_j3(args) -> int:
    return _cmd_derive_with(args, dv.derive_J3, _parse_id(args, args.identity))


def cmd_derive_compact(args) -> int:
    w = _parse_w(args, args.word)
    normal, trace = dv.compact_normal_form(w)
    _maybe_emit_trace(args, trace)
    _emit(args, {"word": str(w), "compact": str(normal), "steps": len(trace),
                 "trace": _trace_payload(trace)},
          f"{w} -> {normal} in {len(trace)} steps")
    return OK


def cmd_derive_replay(args) -> int:
    with open(args.file) as fh:
        trace = dv.trace_from_jsonl(fh.read())
    system = _system_from_name(args.system)
    trace.replay(system)
    _emit(args, {"file": args.file, "valid": True, "start": str(trace.start),
                 "end": str(trace.end), "steps": len(trace)},
          f"trace {args.file}: {len(trace)} steps replay {trace.start} -> {trace.end}")
    return OK


def cmd_jm_check(args) -> int:
    ident = _parse_id(args, args.identity)
    result = simon_equiv(ident.lhs, ident.rhs, args.m)
    _emit(args, {"identity": str(ident), "m": args.m, "equivalent": result},
          f"{ident} in J_{args.m}: {result}")
    return OK if result else NEGATIVE


def cmd_fb_check_w12(args) -> int:
    fam = fbmod.wfamily(_words_arg(args, args.words))
    ok, violation = fbmod.fact_w12_check(fam)
    _emit(args, {"family": repr(fam), "holds": ok, "violation": violation},
          f"{fam}: adjacency condition {ok}"
          + (f" (violation: {violation})" if violation else ""))
    return OK if ok else NEGATIVE


def cmd_fb_decide(args) -> int:
    fam = fbmod.wfamily(_words_arg(args, args.words))
    verdict = fbmod.theorem_alg_decide(fam)
    _emit(args, {"family": repr(fam), **verdict.as_dict()},
          f"{fam}: {verdict.decision} (m={verdict.m}, d={verdict.witness_d})")
    return OK if verdict.decision == "FB" else NEGATIVE


def cmd_fb_chain(args) -> int:
    fam = fbmod.chain_monoid(args.k)
    verdict = fbmod.theorem_alg_decide(fam)
    _emit(args, {"k": args.k, "family": repr(fam), **verdict.as_dict()},
          f"M_{args.k} = A_0^1 x S({fam}): {verdict.decision}")
    return OK if verdict.decision == "FB" else NEGATIVE


def cmd_fb_hypotheses(args) -> int:
    M = _monoid_from_spec(args, args.monoid)
    if args.theorem == "fbS3":
        report = fbmod.check_fbS3(M, search_bound=args.bound or 6)
    elif args.theorem == "fbtlem1":
        report = fbmod.check_fbtlem1(M, k_bound=args.k or 3,
                                     isoterm_bound=args.bound or 8)
    elif args.theorem == "fbtlem":
        report = fbmod.check_fbtlem(M, m=args.k or 2,
                                    isoterm_bound=args.bound)
    else:
        report = fbmod.check_abtab(M, isoterm_bound=args.bound or 7)
    human = "\n".join(f"  [{c.status}] {c.clause}"
                      + (f" -- {'; '.join(map(str, c.witnesses))}" if c.witnesses else "")
                      for c in report.clauses)
    _emit(args, report.as_dict(),
          f"{report.theorem} on {M.name}: applicable={report.applicable}\n{human}")
    return OK if report.applicable else NEGATIVE


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="monoidbasis",
        description="equational theories of finite monoids: classify, check, derive")
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    ap.add_argument("--jobs", type=int, default=1, help="parallel workers")
    ap.add_argument("--compact-powers", action="store_true",
                    help="parse digit suffixes as powers (a2ta -> a a t a)")
    sub = ap.add_subparsers(dest="command", required=True)

    word = sub.add_parser("word", help="word combinatorics").add_subparsers(
        dest="sub", required=True)
    p = word.add_parser("blocks")
    p.add_argument("word")
    p.add_argument("--twelve", action="store_true",
                   help="12-block decomposition (first/last separators)")
    p.set_defaults(fn=cmd_word_blocks)
    p = word.add_parser("compact")
    p.add_argument("word")
    p.add_argument("--var")
    p.add_argument("--pair", nargs=2)
    p.set_defaults(fn=cmd_word_compact)
    p = word.add_parser("subwords")
    p.add_argument("word")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(fn=cmd_word_subwords)

    ident = sub.add_parser("identity", help="identity classification").add_subparsers(
        dest="sub", required=True)
    p = ident.add_parser("classify")
    p.add_argument("identity")
    p.add_argument("--n", type=int)
    p.set_defaults(fn=cmd_identity_classify)
    p = ident.add_parser("pairs")
    p.add_argument("identity")
    p.set_defaults(fn=cmd_identity_pairs)

    mon = sub.add_parser("monoid", help="finite monoids").add_subparsers(
        dest="sub", required=True)
    p = mon.add_parser("build")
    p.add_argument("monoid")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_monoid_build)
    p = mon.add_parser("satisfies")
    p.add_argument("monoid")
    p.add_argument("identity")
    p.set_defaults(fn=cmd_monoid_satisfies)
    p = mon.add_parser("isoterm")
    p.add_argument("monoid")
    p.add_argument("word")
    p.add_argument("--bound", type=int, required=True)
    p.set_defaults(fn=cmd_monoid_isoterm)
    p = mon.add_parser("product")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_monoid_product)

    der = sub.add_parser("derive", help="derivations and traces").add_subparsers(
        dest="sub", required=True)
    p = der.add_parser("search")
    p.add_argument("identity")
    p.add_argument("--system", default="sigma")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--max-depth", type=int, default=12)
    p.add_argument("--emit-trace")
    p.set_defaults(fn=cmd_derive_search)
    for nm, fn in (("block-balanced", cmd_derive_block_balanced),
                   ("p12", cmd_derive_p12), ("j3", cmd_derive_j3)):
        p = der.add_parser(nm)
        p.add_argument("identity")
        p.add_argument("--emit-trace")
        p.set_defaults(fn=fn)
    p = der.add_parser("compact")
    p.add_argument("word")
    p.add_argument("--emit-trace")
    p.set_defaults(fn=cmd_derive_compact)
    p = der.add_parser("replay")
    p.add_argument("file")
    p.add_argument("--system", default="sigma")
    p.set_defaults(fn=cmd_derive_replay)

    jm = sub.add_parser("jm", help="Simon equivalence").add_subparsers(
        dest="sub", required=True)
    p = jm.add_parser("check")
    p.add_argument("identity")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(fn=cmd_jm_check)

    fb = sub.add_parser("fb", help="finite basis classification").add_subparsers(
        dest="sub", required=True)
    p = fb.add_parser("check-w12")
    p.add_argument("--words", required=True)
    p.set_defaults(fn=cmd_fb_check_w12)
    p = fb.add_parser("decide")
    p.add_argument("--words", required=True)
    p.set_defaults(fn=cmd_fb_decide)
    p = fb.add_parser("chain")
    p.add_argument("k", type=int)
    p.set_defaults(fn=cmd_fb_chain)
    p = fb.add_parser("hypotheses")
    p.add_argument("monoid")
    p.add_argument("--theorem", required=True,
                   choices=["fbS3", "fbtlem1", "fbtlem", "abtab"])
    p.add_argument("--k", type=int)
    p.add_argument("--bound", type=int)
    p.set_defaults(fn=cmd_fb_hypotheses)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
