"""Text format for Multi-CCS programs.

    program ::= { DEF } "main" "=" term ";"
    DEF     ::= UCIDENT "=" term ";"
    term    ::= "new" "(" name { "," name } ")" term | par
    par     ::= sum { "|" sum }
    sum     ::= seq { "+" seq }
    seq     ::= "0" | prefix "." seq | "(" term ")" | UCIDENT
    prefix  ::= act | "<" act ">"
    act     ::= "tau" | name | "~" name

Prefixing binds tighter than +, which binds tighter than |; "new" scopes
maximally to the right.  Strong prefixes are written in angle brackets,
outputs with a leading "~".  "#" starts a comment running to end of line.
Whitespace is insignificant.  The keywords new, main and tau are reserved
and cannot be used as action names.
"""

from __future__ import annotations

import re

from .terms import (
    NIL, Action, Const, Env, MccsError, Par, Prefix, Program, Restrict,
    StrongPrefix, Sum, Term, TAU_ACT, act_in, act_out, format_term,
)

KEYWORDS = {"new", "main", "tau"}

_TOKEN_RE = re.compile(r"""
      (?P<ws>\s+|\#[^\n]*)
    | (?P<name>[a-z][a-z0-9_]*)
    | (?P<ucname>[A-Z][A-Za-z0-9_]*)
    | (?P<nat>\d+)
    | (?P<punct>[()|+.~<>=;:,])
""", re.VERBOSE)


class ParseError(MccsError):
    def __init__(self, msg, line, col):
        super().__init__("%d:%d: %s" % (line, col, msg))
        self.line = line
        self.col = col


def tokenize(text: str):
    """Yields (kind, value, line, col); kind in name/ucname/nat/punct/eof."""
    pos, line, bol = 0, 1, 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, pos - bol + 1)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            out.append((kind, value, line, pos - bol + 1))
        nl = value.count("\n")
        if nl:
            line += nl
            bol = pos + value.rindex("\n") + 1
        pos = m.end()
    out.append(("eof", "", line, len(text) - bol + 1))
    return out


class _Tokens:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        if t[0] != "eof":
            self.i += 1
        return t

    def error(self, msg):
        _, value, line, col = self.peek()
        shown = value if value else "end of input"
        raise ParseError("%s (found %r)" % (msg, shown), line, col)

    def expect(self, kind, value=None):
        k, v, _, _ = self.peek()
        if k != kind or (value is not None and v != value):
            self.error("expected %s" % (value if value is not None else kind))
        return self.next()

    def at_punct(self, value):
        k, v, _, _ = self.peek()
        return k == "punct" and v == value

    def at_name(self, value=None):
        k, v, _, _ = self.peek()
        return k == "name" and (value is None or v == value)


def parse_program(text: str, name: str = "main") -> Program:
    ts = _Tokens(text)
    env = Env()
    while ts.peek()[0] == "ucname":
        cname = ts.next()[1]
        if cname in env.defs:
            ts.error("constant %s defined twice" % cname)
        ts.expect("punct", "=")
        env.define(cname, _term(ts))
        ts.expect("punct", ";")
    ts.expect("name", "main")
    ts.expect("punct", "=")
    main = _term(ts)
    ts.expect("punct", ";")
    ts.expect("eof")
    return Program(env, main, name)


def parse_term(text: str, env: Env | None = None) -> Term:
    """A bare term, for tests and the REPL; constants resolve in env."""
    ts = _Tokens(text)
    t = _term(ts)
    ts.expect("eof")
    return t


def _term(ts) -> Term:
    if ts.at_name("new"):
        ts.next()
        ts.expect("punct", "(")
        names = [_restriction_name(ts)]
        while ts.at_punct(","):
            ts.next()
            names.append(_restriction_name(ts))
        ts.expect("punct", ")")
        body = _term(ts)
        for n in reversed(names):
            body = Restrict(n, body)
        return body
    return _par(ts)


def _restriction_name(ts) -> str:
    k, v, _, _ = ts.peek()
    if k != "name" or v in KEYWORDS:
        ts.error("expected a name to restrict")
    return ts.next()[1]


def _par(ts) -> Term:
    t = _sum(ts)
    while ts.at_punct("|"):
        ts.next()
        t = Par(t, _sum(ts))
    return t


def _sum(ts) -> Term:
    t = _seq(ts)
    while ts.at_punct("+"):
        ts.next()
        t = Sum(t, _seq(ts))
    return t


def _seq(ts) -> Term:
    k, v, _, _ = ts.peek()
    if k == "nat" and v == "0":
        ts.next()
        return NIL
    if k == "punct" and v == "(":
        ts.next()
        t = _term(ts)
        ts.expect("punct", ")")
        return t
    if k == "ucname":
        return Const(ts.next()[1])
    if k == "punct" and v == "<":
        ts.next()
        act = _act(ts)
        ts.expect("punct", ">")
        ts.expect("punct", ".")
        return StrongPrefix(act, _seq(ts))
    if k == "name" or (k == "punct" and v == "~"):
        act = _act(ts)
        ts.expect("punct", ".")
        return Prefix(act, _seq(ts))
    ts.error("expected a process")


def _act(ts) -> Action:
    k, v, _, _ = ts.peek()
    if k == "punct" and v == "~":
        ts.next()
        return act_out(_action_name(ts))
    if k == "name":
        if v == "tau":
            ts.next()
            return TAU_ACT
        return act_in(_action_name(ts))
    ts.error("expected an action")


def _action_name(ts) -> str:
    k, v, _, _ = ts.peek()
    if k != "name" or v in KEYWORDS:
        ts.error("expected an action name")
    return ts.next()[1]


def format_program(p: Program) -> str:
    lines = ["%s = %s;" % (n, format_term(b)) for n, b in p.env.defs.items()]
    lines.append("main = %s;" % format_term(p.main))
    return "\n".join(lines) + "\n"
