"""Command line front end.

Exit codes: 0 success, 2 parse error, 3 ill-formed input, 4 budget
exhaustion, 5 a checked property does not hold.
"""

import argparse
import sys

from .dot import lts_dot, net_dot
from .equiv import (IncompleteLtsError, bisimilar, isomorphic, net_bisimilar)
from .lts import Budget, build_lts, format_label
from .nets import (build_net, format_marking, format_pnet, is_reduced,
                   is_safe, marking_graph, parse_pnet)
from .net2term import TranslationError, is_ccs_net, translate
from .parser import ParseError, format_program, parse_program
from .sync import SyncMode, sync_outcomes
from .terms import (MccsError, act_in, act_out, TAU_ACT, check_wellformed,
                    classify_finite_net, format_sequence, format_term)

OK, EPARSE, EILL, EBUDGET, EPROP = 0, 2, 3, 4, 5


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _stem(path: str) -> str:
    import os.path
    return os.path.splitext(os.path.basename(path))[0]


def _looks_like_net(text: str) -> bool:
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            return line.split()[0] == "net"
    return False


def _load_program(path: str):
    program = parse_program(_read(path), name=_stem(path))
    report = check_wellformed(program)
    if not report.ok:
        for issue in report.issues:
            print(issue, file=sys.stderr)
        raise SystemExit(EILL)
    return program


def _load_net(path: str):
    return parse_pnet(_read(path))


def _budget(args) -> Budget:
    return Budget(max_states=args.max_states, max_places=args.max_places,
                  max_transitions=args.max_trans, max_seq_len=args.max_seq_len)


def _mode(args, program) -> SyncMode:
    if args.mode == "general":
        return SyncMode.GENERAL
    if args.mode == "finite-net":
        return SyncMode.FINITE_NET
    flag, _ = classify_finite_net(program)
    return SyncMode.FINITE_NET if flag else SyncMode.GENERAL


def _add_common(sub, mode=True):
    sub.add_argument("--max-states", type=int, default=10000)
    sub.add_argument("--max-places", type=int, default=5000)
    sub.add_argument("--max-trans", type=int, default=20000)
    sub.add_argument("--max-seq-len", type=int, default=16)
    if mode:
        sub.add_argument("--mode", choices=["auto", "general", "finite-net"],
                         default="auto")
        sub.add_argument("--strict", action="store_true",
                         help="keep dead components and unused restrictions"
                              " distinct when normalizing states")


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    program = parse_program(_read(args.file), name=_stem(args.file))
    report = check_wellformed(program)
    print("definitions: %d" % len(program.env.defs))
    print("well-formed: %s" % ("yes" if report.ok else "no"))
    for issue in report.issues:
        print("  %s" % issue)
    flag, reason = classify_finite_net(program)
    print("finite-net fragment: %s%s"
          % ("yes" if flag else "no", "" if flag else " (%s)" % reason))
    return OK if report.ok else EILL


def cmd_lts(args) -> int:
    program = _load_program(args.file)
    lts = build_lts(program, _mode(args, program), _budget(args), args.strict)
    print("states: %d" % len(lts.states))
    print("transitions: %d" % len(lts.transitions))
    print("complete: %s" % ("yes" if lts.complete else "no"))
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(lts_dot(lts, name=args.file))
    if not args.quiet:
        for i, key in enumerate(lts.states):
            print("q%d = %s" % (i, key))
        for src, label, tgt in sorted(
                lts.transitions,
                key=lambda t: (t[0], tuple(a.key() for a in t[1]), t[2])):
            print("q%d --%s--> q%d" % (src, format_label(label), tgt))
    return OK if lts.complete else EBUDGET


def cmd_net(args) -> int:
    if _looks_like_net(_read(args.file)):
        net = _load_net(args.file)
    else:
        program = _load_program(args.file)
        net = build_net(program, None if args.mode == "auto"
                        else _mode(args, program), _budget(args))
    print("net %s: %s" % (net.name, net.summary()))
    for i, pname in enumerate(net.place_names):
        term = ""
        if net.place_terms is not None:
            term = " = %s" % format_term(net.place_terms[i])
        print("%s%s" % (pname, term))
    print("initial: %s" % format_marking(net.initial, net.place_names))
    for j, (pre, label, post) in enumerate(net.transitions):
        print("%s: %s --%s--> %s"
              % (net.trans_names[j], format_marking(pre, net.place_names),
                 format_label(label), format_marking(post, net.place_names)))
    if args.analyse:
        print("reduced: %s" % is_reduced(net, _budget(args)))
        print("safe: %s" % is_safe(net, _budget(args)))
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(net_dot(net))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_pnet(net))
    return OK if net.complete else EBUDGET


def cmd_translate(args) -> int:
    net = _load_net(args.file)
    program = translate(net)
    text = format_program(program)
    print("ccs-shaped: %s" % ("yes" if is_ccs_net(net) else "no"))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return OK


def cmd_roundtrip(args) -> int:
    net = _load_net(args.file)
    program = translate(net)
    rebuilt = build_net(program, budget=_budget(args))
    print("original: %s" % net.summary())
    print("rebuilt: %s" % rebuilt.summary())
    if not rebuilt.complete:
        print("rebuilt net is truncated; raise the budget")
        return EBUDGET
    iso = isomorphic(net, rebuilt)
    print("isomorphic: %s" % ("yes" if iso.found else "no"))
    if iso.found:
        for old, new in sorted(iso.mapping(net, rebuilt).items()):
            print("  %s -> %s" % (old, new))
        return OK
    print("  (is the input reduced? reduced: %s)" % is_reduced(net))
    return EPROP


def cmd_bisim(args) -> int:
    program = _load_program(args.file)
    budget = _budget(args)
    mode = _mode(args, program)
    lts1 = build_lts(program, mode, budget, args.strict)
    if args.against_net:
        net = build_net(program, mode, budget)
        if not net.complete:
            print("net construction hit the budget", file=sys.stderr)
            return EBUDGET
        lts2 = marking_graph(net, budget)
        other = "marking graph of its net"
    else:
        if not args.other:
            print("bisim needs a second file or --against-net",
                  file=sys.stderr)
            return EPARSE
        program2 = _load_program(args.other)
        lts2 = build_lts(program2, _mode(args, program2), budget, args.strict)
        other = args.other
    try:
        res = bisimilar(lts1, lts2)
    except IncompleteLtsError as e:
        print(str(e), file=sys.stderr)
        return EBUDGET
    print("comparing %s with %s" % (args.file, other))
    print("bisimilar: %s" % ("yes" if res.equivalent else "no"))
    if not res.equivalent:
        print("distinguishing formula (holds on the left, fails on the"
              " right): %s" % res.counterexample())
        return EPROP
    return OK


def cmd_iso(args) -> int:
    n1, n2 = _load_net(args.file), _load_net(args.other)
    iso = isomorphic(n1, n2)
    print("isomorphic: %s" % ("yes" if iso.found else "no"))
    if iso.found:
        for old, new in sorted(iso.mapping(n1, n2).items()):
            print("  %s -> %s" % (old, new))
        return OK
    return EPROP


def cmd_netbisim(args) -> int:
    n1, n2 = _load_net(args.file), _load_net(args.other)
    try:
        res = net_bisimilar(n1, n2, _budget(args))
    except IncompleteLtsError as e:
        print(str(e), file=sys.stderr)
        return EBUDGET
    print("marking graphs bisimilar: %s" % ("yes" if res.equivalent else "no"))
    if not res.equivalent:
        print("distinguishing formula: %s" % res.counterexample())
        return EPROP
    return OK


def _parse_seq(text: str):
    acts = []
    for word in text.split():
        if word == "tau":
            acts.append(TAU_ACT)
        elif word.startswith("~"):
            acts.append(act_out(word[1:]))
        else:
            acts.append(act_in(word))
    if not acts:
        raise ParseError("empty action sequence", 1, 1)
    return tuple(acts)


def cmd_sync(args) -> int:
    mode = SyncMode.FINITE_NET if args.mode == "finite-net" else SyncMode.GENERAL
    s1, s2 = _parse_seq(args.left), _parse_seq(args.right)
    outcomes = sync_outcomes(s1, s2, mode)
    if not outcomes:
        print("(no synchronization)")
    for seq in sorted(outcomes, key=lambda s: tuple(a.key() for a in s)):
        print(format_sequence(seq))
    return OK


def cmd_step(args) -> int:
    from .lts import StepEngine, step
    from .normalform import normalize

    program = _load_program(args.file)
    mode = _mode(args, program)
    engine = StepEngine(program.env, mode, args.max_seq_len, args.strict)
    state = normalize(program.main, program.env, args.strict)
    out = sys.stdout
    while True:
        print("state: %s" % state.key(), file=out)
        moves = step(state, program.env, mode, _budget(args), args.strict,
                     engine)
        if not moves:
            print("no moves (deadlock)", file=out)
            return OK
        for i, (label, target) in enumerate(moves):
            print("  [%d] --%s--> %s" % (i, format_label(label),
                                         target.key()), file=out)
        line = sys.stdin.readline()
        if not line or line.strip() in ("q", "quit"):
            return OK
        try:
            choice = int(line)
        except ValueError:
            print("enter a move number or q", file=out)
            continue
        if not 0 <= choice < len(moves):
            print("no such move", file=out)
            continue
        state = moves[choice][1]


def cmd_dot(args) -> int:
    text = _read(args.file)
    if _looks_like_net(text):
        output = net_dot(_load_net(args.file))
    else:
        program = _load_program(args.file)
        if args.net:
            output = net_dot(build_net(program, None if args.mode == "auto"
                                       else _mode(args, program),
                                       _budget(args)))
        else:
            output = lts_dot(build_lts(program, _mode(args, program),
                                       _budget(args), args.strict),
                             name=args.file)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(output)
    else:
        print(output, end="")
    return OK


# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="multiccs",
        description="Process calculus toolkit: transition systems,"
                    " place/transition nets, and translations between them.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and well-formedness report")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("lts", help="build the labeled transition system")
    p.add_argument("file")
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--quiet", action="store_true")
    _add_common(p)
    p.set_defaults(fn=cmd_lts)

    p = sub.add_parser("net", help="build or load a place/transition net")
    p.add_argument("file")
    p.add_argument("--dot", metavar="PATH")
    p.add_argument("--out", metavar="PATH", help="write in net syntax")
    p.add_argument("--analyse", action="store_true",
                   help="also report reducedness and safety")
    _add_common(p)
    p.set_defaults(fn=cmd_net)

    p = sub.add_parser("translate", help="net file to process program")
    p.add_argument("file")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("roundtrip",
                       help="net -> program -> net, check isomorphism")
    p.add_argument("file")
    _add_common(p, mode=False)
    p.set_defaults(fn=cmd_roundtrip)

    p = sub.add_parser("bisim", help="bisimilarity of two programs, or of a"
                                     " program and its own net")
    p.add_argument("file")
    p.add_argument("other", nargs="?")
    p.add_argument("--against-net", action="store_true")
    _add_common(p)
    p.set_defaults(fn=cmd_bisim)

    p = sub.add_parser("iso", help="isomorphism of two nets")
    p.add_argument("file")
    p.add_argument("other")
    p.set_defaults(fn=cmd_iso)

    p = sub.add_parser("net-bisim", help="bisimilarity of two nets'"
                                         " marking graphs")
    p.add_argument("file")
    p.add_argument("other")
    _add_common(p, mode=False)
    p.set_defaults(fn=cmd_netbisim)

    p = sub.add_parser("sync", help="synchronization outcomes of two"
                                    " action sequences")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--mode", choices=["general", "finite-net"],
                   default="general")
    p.set_defaults(fn=cmd_sync)

    p = sub.add_parser("step", help="interactive stepping")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(fn=cmd_step)

    p = sub.add_parser("dot", help="render a system or net for graphviz")
    p.add_argument("file")
    p.add_argument("--net", action="store_true",
                   help="for a program: render its net, not its"
                        " transition system")
    p.add_argument("--out", metavar="PATH")
    _add_common(p)
    p.set_defaults(fn=cmd_dot)

    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as e:
        raise e
    except OSError as e:
        print(str(e), file=sys.stderr)
        return EPARSE
    except ParseError as e:
        print("parse error: %s" % e, file=sys.stderr)
        return EPARSE
    except IncompleteLtsError as e:
        print(str(e), file=sys.stderr)
        return EBUDGET
    except TranslationError as e:
        print(str(e), file=sys.stderr)
        return EILL
    except MccsError as e:
        print(str(e), file=sys.stderr)
        return EILL


if __name__ == "__main__":
    sys.exit(main())
