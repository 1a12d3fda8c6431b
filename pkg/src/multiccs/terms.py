"""Core syntax of Multi-CCS: actions, terms, constant environments.

Terms are immutable and hashable.  A process is a pair (Env, Term): the
environment maps constant names to defining bodies, the term is the main
process.  Action names live in two disjoint namespaces: user-written names
(lowercase identifiers) and internal restricted names, which contain '#'
and are produced by the net decomposition when a restriction is opened.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class MccsError(Exception):
    pass


class UndefinedConstantError(MccsError):
    pass


class GuardednessError(MccsError):
    """Raised when constant unfolding fails to reach a normal prefix."""


# ---------------------------------------------------------------------------
# actions

IN = "in"
OUT = "out"
TAU = "tau"

_KIND_RANK = {TAU: 0, IN: 1, OUT: 2}


@dataclass(frozen=True)
class Action:
    kind: str
    name: str = ""

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError("bad action kind %r" % (self.kind,))
        if (self.kind == TAU) != (self.name == ""):
            raise ValueError("tau carries no name, visible actions need one")

    @property
    def is_tau(self) -> bool:
        return self.kind == TAU

    @property
    def is_restricted(self) -> bool:
        return "#" in self.name

    def complement(self) -> "Action":
        if self.kind == TAU:
            raise ValueError("tau has no complement")
        return Action(OUT if self.kind == IN else IN, self.name)

    def key(self):
        return (_KIND_RANK[self.kind], self.name)

    def __str__(self) -> str:
        if self.kind == TAU:
            return "tau"
        return "~" + self.name if self.kind == OUT else self.name


TAU_ACT = Action(TAU)


def act_in(name: str) -> Action:
    return Action(IN, name)


def act_out(name: str) -> Action:
    return Action(OUT, name)


# A transition label is a non-empty tuple of actions.
Sequence = tuple  # tuple[Action, ...]


def format_sequence(seq) -> str:
    return " ".join(str(a) for a in seq)


def sequence_names(seq) -> frozenset:
    return frozenset(a.name for a in seq if not a.is_tau)


# ---------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Nil(Term):
    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Prefix(Term):
    action: Action
    body: Term

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class StrongPrefix(Term):
    """Atomic prefix: the action fuses with the first move of the body."""

    action: Action
    body: Term

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Par(Term):
    left: Term
    right: Term

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Restrict(Term):
    name: str
    body: Term

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Const(Term):
    """Constant occurrence under a finite renaming of its free names.

    `renaming` is a canonical map (sorted tuple of (old, new) pairs, no
    identity pairs) over the free names of the base definition.  Renamed
    occurrences behave like derived constants with a substituted body.
    """

    name: str
    renaming: tuple = ()

    def display_name(self) -> str:
        if not self.renaming:
            return self.name
        inner = ",".join("%s/%s" % (new, old) for old, new in self.renaming)
        return "%s{%s}" % (self.name, inner)

    def __str__(self):
        return format_term(self)


NIL = Nil()

_TAG_RANK = {Nil: 0, Prefix: 1, StrongPrefix: 2, Sum: 3, Par: 4, Restrict: 5, Const: 6}


def _cached_hash(self):
    # terms are hashed constantly (markings and caches are keyed by them);
    # the generated dataclass hash walks the whole subtree every call
    h = self.__dict__.get("_h")
    if h is None:
        fields = tuple(getattr(self, f) for f in self.__dataclass_fields__)
        h = hash((type(self).__name__,) + fields)
        object.__setattr__(self, "_h", h)
    return h


for _cls in (Nil, Prefix, StrongPrefix, Sum, Par, Restrict, Const):
    _cls.__hash__ = _cached_hash


_KEY_CACHE: dict = {}


def term_key(t: Term):
    """Total structural order on terms (used for canonical sorting)."""
    k = _KEY_CACHE.get(t)
    if k is None:
        k = _term_key(t)
        _KEY_CACHE[t] = k
    return k


def _term_key(t: Term):
    if isinstance(t, Nil):
        return (0,)
    if isinstance(t, Prefix):
        return (1, t.action.key(), term_key(t.body))
    if isinstance(t, StrongPrefix):
        return (2, t.action.key(), term_key(t.body))
    if isinstance(t, Sum):
        return (3, term_key(t.left), term_key(t.right))
    if isinstance(t, Par):
        return (4, term_key(t.left), term_key(t.right))
    if isinstance(t, Restrict):
        return (5, t.name, term_key(t.body))
    if isinstance(t, Const):
        return (6, t.name, t.renaming)
    raise TypeError("not a term: %r" % (t,))


def is_sequential(t: Term) -> bool:
    """Sequential processes: 0, prefixes, and sums of sequential processes."""
    if isinstance(t, (Nil, Prefix, StrongPrefix)):
        return True
    if isinstance(t, Sum):
        return is_sequential(t.left) and is_sequential(t.right)
    return False


def iter_subterms(t: Term):
    yield t
    if isinstance(t, (Prefix, StrongPrefix, Restrict)):
        yield from iter_subterms(t.body)
    elif isinstance(t, (Sum, Par)):
        yield from iter_subterms(t.left)
        yield from iter_subterms(t.right)


# ---------------------------------------------------------------------------
# printing
#
# Binding strength: prefix > + > |.  "new" scopes maximally to the right.
# The printer emits the minimal parenthesisation that reparses to the same
# tree; sums and parallels are printed left-nested without parentheses, so
# right-nested trees keep explicit parentheses.


def par_fold(parts) -> Term:
    """Parallel composition of a list, shaped as a balanced tree: wide
    states (thousands of components) must not overflow the structural
    recursion in hashing, keys, and printing."""
    parts = list(parts)
    if not parts:
        return NIL
    while len(parts) > 1:
        parts = [Par(parts[i], parts[i + 1]) if i + 1 < len(parts) else parts[i]
                 for i in range(0, len(parts), 2)]
    return parts[0]


def format_term(t: Term) -> str:
    return _fmt(t, 0)


# context levels: 0 = term, 1 = par operand, 2 = sum operand, 3 = prefix body
def _fmt(t: Term, level: int) -> str:
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Const):
        return t.display_name()
    if isinstance(t, (Prefix, StrongPrefix)):
        act = str(t.action)
        if isinstance(t, StrongPrefix):
            act = "<%s>" % act
        return "%s.%s" % (act, _fmt(t.body, 3))
    if isinstance(t, Sum):
        s = "%s + %s" % (_fmt(t.left, 2), _fmt(t.right, 3))
        return "(%s)" % s if level >= 3 else s
    if isinstance(t, Par):
        parts = []
        stack = [t]
        while stack:
            u = stack.pop()
            if isinstance(u, Par):
                stack.append(u.right)
                stack.append(u.left)
            else:
                parts.append(_fmt(u, 2))
        s = " | ".join(parts)
        return "(%s)" % s if level >= 2 else s
    if isinstance(t, Restrict):
        names = [t.name]
        body = t.body
        while isinstance(body, Restrict):
            names.append(body.name)
            body = body.body
        s = "new(%s) %s" % (", ".join(names), _fmt(body, 0))
        return "(%s)" % s if level >= 1 else s
    raise TypeError("not a term: %r" % (t,))


# ---------------------------------------------------------------------------
# environments


@dataclass
class Env:
    """Constant definitions plus caches for derived (renamed) bodies."""

    defs: dict = field(default_factory=dict)
    _bodies: dict = field(default_factory=dict, repr=False, compare=False)
    _base_free: dict = field(default_factory=dict, repr=False, compare=False)

    def define(self, name: str, body: Term):
        self.defs[name] = body
        self._bodies.clear()
        self._base_free.clear()

    def base_body(self, name: str) -> Term:
        try:
            return self.defs[name]
        except KeyError:
            raise UndefinedConstantError("constant %s is not defined" % name) from None

    def body_of(self, c: Const) -> Term:
        """Defining body of a (possibly renamed) constant occurrence."""
        if not c.renaming:
            return self.base_body(c.name)
        key = (c.name, c.renaming)
        hit = self._bodies.get(key)
        if hit is None:
            hit = subst_map(self.base_body(c.name), dict(c.renaming), self)
            self._bodies[key] = hit
        return hit

    def const_free(self, name: str) -> frozenset:
        """Free names of a base constant, solved by fixpoint over the
        constant dependency graph (definitions may be mutually recursive)."""
        hit = self._base_free.get(name)
        if hit is not None:
            return hit
        group = {name}
        stack = [name]
        while stack:
            for ref in _const_refs(self.base_body(stack.pop())):
                if ref not in group:
                    group.add(ref)
                    stack.append(ref)
        table = {n: frozenset() for n in group}
        lookup = lambda n: self._base_free.get(n, table.get(n, frozenset()))
        changed = True
        while changed:
            changed = False
            for n in group:
                s = _free(self.defs[n], lookup)
                if s != table[n]:
                    table[n] = s
                    changed = True
        self._base_free.update(table)
        return table[name]


def _const_refs(t: Term) -> set:
    return {s.name for s in iter_subterms(t) if isinstance(s, Const)}


def _free(t: Term, lookup) -> frozenset:
    if isinstance(t, Nil):
        return frozenset()
    if isinstance(t, (Prefix, StrongPrefix)):
        base = _free(t.body, lookup)
        return base if t.action.is_tau else base | {t.action.name}
    if isinstance(t, (Sum, Par)):
        return _free(t.left, lookup) | _free(t.right, lookup)
    if isinstance(t, Restrict):
        return _free(t.body, lookup) - {t.name}
    if isinstance(t, Const):
        ren = dict(t.renaming)
        return frozenset(ren.get(n, n) for n in lookup(t.name))
    raise TypeError("not a term: %r" % (t,))


def free_names(t: Term, env: Env) -> frozenset:
    """All free action names of t, unfolding constants through env."""
    return _free(t, env.const_free)


# ---------------------------------------------------------------------------
# substitution
#
# Substitution follows the convention that a renaming applied to a
# restriction whose binder is being renamed converts the bound name as well:
# (new(a) q){b/a} = new(b) (q{b/a}), provided b is not free in q.  This way
# a renaming always reaches the constants inside, where it is recorded in
# the occurrence's renaming map.  Callers must substitute towards fresh
# names; clashes with other binders are resolved by alpha-converting the
# inner binder.


def subst_map(t: Term, mapping: dict, env: Env) -> Term:
    mapping = {old: new for old, new in mapping.items() if old != new}
    if not mapping:
        return t
    return _subst(t, mapping, env)


def substitute(t: Term, old: str, new: str, env: Env) -> Term:
    return subst_map(t, {old: new}, env)


def _subst(t: Term, m: dict, env: Env) -> Term:
    if isinstance(t, Nil):
        return t
    if isinstance(t, (Prefix, StrongPrefix)):
        a = t.action
        if not a.is_tau and a.name in m:
            a = Action(a.kind, m[a.name])
        body = _subst(t.body, m, env)
        if a is t.action and body is t.body:
            return t
        return type(t)(a, body)
    if isinstance(t, (Sum, Par)):
        left = _subst(t.left, m, env)
        right = _subst(t.right, m, env)
        if left is t.left and right is t.right:
            return t
        return type(t)(left, right)
    if isinstance(t, Restrict):
        if t.name in m:
            # bound name converted together with the free occurrences
            return Restrict(m[t.name], _subst(t.body, m, env))
        if t.name in m.values():
            # the binder would capture an incoming name: alpha-convert first
            fresh = _fresh_binder(t.name, t.body, m, env)
            body = _subst(t.body, {t.name: fresh}, env)
            return Restrict(fresh, _subst(body, m, env))
        body = _subst(t.body, m, env)
        return t if body is t.body else Restrict(t.name, body)
    if isinstance(t, Const):
        ren = dict(t.renaming)
        pairs = []
        for base_name in env.const_free(t.name):
            img = ren.get(base_name, base_name)
            img = m.get(img, img)
            if img != base_name:
                pairs.append((base_name, img))
        new_ren = tuple(sorted(pairs))
        return t if new_ren == t.renaming else Const(t.name, new_ren)
    raise TypeError("not a term: %r" % (t,))


def _fresh_binder(base: str, body: Term, m: dict, env: Env) -> str:
    taken = set(free_names(body, env)) | set(m) | set(m.values())
    i = 1
    while "%s_%d" % (base, i) in taken:
        i += 1
    return "%s_%d" % (base, i)


# ---------------------------------------------------------------------------
# programs and well-formedness


@dataclass
class Program:
    env: Env
    main: Term
    name: str = "main"


@dataclass(frozen=True)
class WfIssue:
    code: str
    where: str
    detail: str

    def __str__(self):
        return "[%s] %s: %s" % (self.code, self.where, self.detail)


@dataclass
class WfReport:
    issues: list

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self):
        if self.ok:
            return "well-formed"
        return "\n".join(str(i) for i in self.issues)


def check_wellformed(program: Program) -> WfReport:
    """Closedness, guardedness, and sequential sum operands.

    - every constant mentioned anywhere must be defined;
    - inside definition bodies, every constant occurrence must sit under at
      least one normal (non-strong) prefix;
    - both operands of + must be sequential processes.
    """
    env, issues = program.env, []
    scopes = [("main", program.main, False)] + [
        ("def %s" % n, b, True) for n, b in sorted(env.defs.items())
    ]
    for where, body, need_guard in scopes:
        for sub in iter_subterms(body):
            if isinstance(sub, Const) and sub.name not in env.defs:
                issues.append(WfIssue("undefined", where, "constant %s has no definition" % sub.name))
            if isinstance(sub, Sum):
                for side, operand in (("left", sub.left), ("right", sub.right)):
                    if not is_sequential(operand):
                        issues.append(WfIssue(
                            "sum-operand", where,
                            "%s operand of + is not sequential: %s" % (side, format_term(operand))))
        if need_guard:
            _check_guards(body, False, where, issues)
    return WfReport(issues)


def _check_guards(t: Term, guarded: bool, where: str, issues: list):
    if isinstance(t, Const):
        if not guarded:
            issues.append(WfIssue(
                "unguarded", where,
                "constant %s not under a normal prefix" % t.display_name()))
    elif isinstance(t, Prefix):
        _check_guards(t.body, True, where, issues)
    elif isinstance(t, StrongPrefix):
        # strong prefixes do not count as guards
        _check_guards(t.body, guarded, where, issues)
    elif isinstance(t, (Sum, Par)):
        _check_guards(t.left, guarded, where, issues)
        _check_guards(t.right, guarded, where, issues)
    elif isinstance(t, Restrict):
        _check_guards(t.body, guarded, where, issues)


def classify_finite_net(program: Program):
    """Does the program lie in the finite-net fragment?

    In that fragment restriction may appear only at the outermost level of
    the main term (above parallel composition), never under a prefix and
    never inside a definition body.  Returns (flag, reason); reason points
    at the first offending restriction when the answer is False.
    """
    for name, body in sorted(program.env.defs.items()):
        r = _find_restrict(body)
        if r is not None:
            return False, "def %s contains restriction %s" % (name, format_term(r))
    offender = _nested_restrict(program.main, True)
    if offender is not None:
        return False, "main has a nested restriction: %s" % format_term(offender)
    return True, "finite-net"


def _find_restrict(t: Term):
    for sub in iter_subterms(t):
        if isinstance(sub, Restrict):
            return sub
    return None


def _nested_restrict(t: Term, top: bool):
    """First restriction that is not in the outermost restrict/par region."""
    if isinstance(t, Restrict):
        return t if not top else _nested_restrict(t.body, True)
    if isinstance(t, Par):
        return _nested_restrict(t.left, top) or _nested_restrict(t.right, top)
    if isinstance(t, Sum):
        return _nested_restrict(t.left, False) or _nested_restrict(t.right, False)
    if isinstance(t, (Prefix, StrongPrefix)):
        return _nested_restrict(t.body, False)
    return None
