"""Place/transition net semantics.

A term decomposes into a finite multiset of sequential processes (the
initial marking); the places and transitions of its net are produced by a
least fixpoint that alternates coverability analysis with transition
derivation.  Transition derivation mirrors the move composition of the
transition-system semantics, except that restricted names (the '#' name
family, substituted for restriction binders during decomposition) take the
place of bound names: moves labeled with restricted actions may take part
in synchronizations but never surface as net transitions.

Coverability is computed with a Karp-Miller tree over the transitions
discovered so far, so transitions are admitted exactly when their preset
is covered by some reachable marking, which keeps the net reduced and also
handles unbounded nets such as the semi-counter.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .lts import Budget, DEFAULT_BUDGET, Lts, _label_key, _MAX_ITEMS
from .parser import ParseError, _Tokens
from .sync import SyncMode, sync_outcomes
from .terms import (
    Action, Const, Env, GuardednessError, MccsError, Nil, Par, Prefix,
    Program, Restrict, StrongPrefix, Sum, Term, act_in, act_out,
    format_term, substitute, term_key, TAU_ACT,
)

OMEGA = float("inf")


# ---------------------------------------------------------------------------
# markings

def marking_key(m: Counter, keyfn=None):
    keyfn = keyfn or (lambda x: x)
    return tuple(sorted(((keyfn(s), n) for s, n in m.items() if n), key=lambda kv: kv[0]))


def marking_leq(a: Counter, b: Counter) -> bool:
    return all(b[s] >= n for s, n in a.items())


def fire(m: Counter, pre: Counter, post: Counter) -> Counter:
    out = Counter()
    for s in set(m) | set(post):
        n = m.get(s, 0) - pre.get(s, 0) + post.get(s, 0)
        if n:
            out[s] = n
    return out


def format_marking(m: Counter, names=None) -> str:
    if not m:
        return "(empty)"
    parts = []
    for s, n in sorted(m.items(), key=lambda kv: kv[0] if names else term_key(kv[0])):
        label = names[s] if names else format_term(s)
        parts.append(label if n == 1 else "%s*%s" % ("w" if n == OMEGA else n, label))
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# nets


@dataclass
class PTNet:
    name: str
    place_names: list                 # display names, index order
    initial: Counter                  # Counter[int]
    transitions: list                 # (Counter[int] pre, label, Counter[int] post)
    trans_names: list = field(default_factory=list)
    complete: bool = True
    place_terms: list | None = None   # for built nets: the sequential terms

    def summary(self) -> str:
        return "%d places, %d transitions, %s" % (
            len(self.place_names), len(self.transitions),
            "complete" if self.complete else "truncated")

    def labels(self) -> set:
        return {label for _, label, _ in self.transitions}


class FreshAllocator:
    """Deterministic source of restricted names: a#1, b#2, ... in
    allocation order (the counter is global to one construction)."""

    def __init__(self):
        self.n = 0

    def fresh(self, base: str) -> str:
        self.n += 1
        return "%s#%d" % (base.split("#")[0], self.n)


def dec(t: Term, env: Env, alloc: FreshAllocator | None = None,
        _busy: set | None = None) -> Counter:
    """Decomposition of a term into a marking of sequential places.

    0 vanishes, parallel composition is multiset union, a restriction is
    opened by substituting a fresh restricted name, constants unfold."""
    alloc = alloc or FreshAllocator()
    busy = _busy if _busy is not None else set()
    if isinstance(t, Nil):
        return Counter()
    if isinstance(t, (Prefix, StrongPrefix, Sum)):
        return Counter({t: 1})
    if isinstance(t, Par):
        out = dec(t.left, env, alloc, busy)
        out.update(dec(t.right, env, alloc, busy))
        return out
    if isinstance(t, Restrict):
        fresh = alloc.fresh(t.name)
        return dec(substitute(t.body, t.name, fresh, env), env, alloc, busy)
    if isinstance(t, Const):
        if t in busy:
            raise GuardednessError("unguarded constant %s in decomposition" % t.display_name())
        busy.add(t)
        try:
            return dec(env.body_of(t), env, alloc, busy)
        finally:
            busy.discard(t)
    raise MccsError("cannot decompose %r" % (t,))


def _label_visible(label) -> bool:
    return all(not a.is_restricted for a in label)


def _acts(label) -> frozenset:
    return frozenset(a.key() for a in label if not a.is_tau)


def _coacts(label) -> frozenset:
    return frozenset(a.complement().key() for a in label if not a.is_tau)


def _freeze(m: Counter):
    return tuple(sorted(((term_key(s), s, n) for s, n in m.items() if n),
                        key=lambda kv: kv[0]))


class NetBuilder:
    """Least-fixpoint net construction for one program."""

    def __init__(self, env: Env, mode: SyncMode, budget: Budget = DEFAULT_BUDGET):
        self.env = env
        self.mode = mode
        self.budget = budget
        self.alloc = FreshAllocator()
        self._moves: dict = {}
        self._derived: dict = {}
        self._busy: set = set()
        self.item_cap = max(512, 4 * budget.max_transitions)

    # -- moves of a single place (labels may contain restricted actions) ----

    def place_moves(self, p: Term) -> tuple:
        hit = self._moves.get(p)
        if hit is not None:
            return hit
        if p in self._busy:
            raise GuardednessError("unguarded recursion at place %s" % p)
        self._busy.add(p)
        try:
            moves = self._place_moves(p)
        finally:
            self._busy.discard(p)
        self._moves[p] = moves
        return moves

    def _place_moves(self, p: Term) -> tuple:
        if isinstance(p, Prefix):
            return (((p.action,), dec(p.body, self.env, self.alloc)),)
        if isinstance(p, StrongPrefix):
            marking = dec(p.body, self.env, self.alloc)
            out = {}
            for used, label, produced in self.derive_items(marking):
                rest = marking - used
                rest.update(produced)
                out[((p.action,) + label, _freeze(rest))] = rest
            return tuple((label, rest) for (label, _), rest in out.items())
        if isinstance(p, Sum):
            merged = {}
            for side in (p.left, p.right):
                for label, produced in self.place_moves(side):
                    merged[(label, _freeze(produced))] = produced
            return tuple((label, produced) for (label, _), produced in merged.items())
        if isinstance(p, Nil):
            return ()
        raise MccsError("not a place: %s" % format_term(p))

    # -- transitions derivable inside a marking ------------------------------

    def derive_items(self, seed: Counter) -> list:
        """All (used, label, produced) with used below the seed, including
        intermediate items whose label mentions restricted actions."""
        frozen_seed = _freeze(seed)
        hit = self._derived.get(frozen_seed)
        if hit is not None:
            items, truncated = hit
            self.truncated_items = self.truncated_items or truncated
            return items

        items: dict = {}
        queue = deque()
        truncated = False

        def add(used, label, produced):
            nonlocal truncated
            key = (_freeze(used), label, _freeze(produced))
            if key in items:
                return
            if len(items) >= self.item_cap:
                truncated = True
                return
            items[key] = (used, label, produced, _acts(label), _coacts(label))
            queue.append(key)

        for place in sorted(seed, key=term_key):
            for label, produced in self.place_moves(place):
                add(Counter({place: 1}), label, produced)

        while queue:
            k1 = queue.popleft()
            used1, lab1, prod1, _, co1 = items[k1]
            for k2 in list(items):
                used2, lab2, prod2, acts2, _ = items[k2]
                if not co1 & acts2:
                    # every synchronization cancels at least one
                    # complementary pair of visible actions
                    continue
                merged = used1 + used2
                if any(merged[s] > seed.get(s, 0) for s in merged):
                    continue
                for lab3 in sorted(sync_outcomes(lab1, lab2, self.mode),
                                   key=_label_key):
                    if (self.mode is SyncMode.GENERAL
                            and len(lab3) > self.budget.max_seq_len):
                        continue
                    add(merged, lab3, prod1 + prod2)
        out = [(used, label, produced) for used, label, produced, _, _ in items.values()]
        self._derived[frozen_seed] = (out, truncated)
        self.truncated_items = self.truncated_items or truncated
        return out

    # -- the fixpoint --------------------------------------------------------

    def build(self, main: Term, name: str = "net") -> PTNet:
        m0 = dec(main, self.env, self.alloc)
        place_index: dict = {}
        order: list = []

        def register(p) -> bool:
            if p in place_index:
                return True
            if len(order) >= self.budget.max_places:
                return False
            place_index[p] = len(order)
            order.append(p)
            return True

        complete = True
        for p in m0:
            if not register(p):
                complete = False
        transitions: dict = {}
        self.truncated_items = False

        while True:
            markings, km_complete = self._coverability(m0, transitions.values())
            complete = complete and km_complete
            grew = False
            known_places = len(order)
            for seed in markings:
                for used, label, produced in self.derive_items(seed):
                    if not _label_visible(label):
                        continue
                    key = (_freeze(used), label, _freeze(produced))
                    if key in transitions:
                        continue
                    if len(transitions) >= self.budget.max_transitions:
                        complete = False
                        continue
                    ok = all(register(p) for p in list(used) + list(produced))
                    if not ok:
                        complete = False
                        continue
                    transitions[key] = (used, label, produced)
                    grew = True
            complete = complete and not self.truncated_items
            if not grew or not complete:
                break

        if (not complete and len(order) == known_places
                and not self.truncated_items):
            # the structure stopped growing before the marking search could
            # saturate: decide enabledness exactly instead
            fixed = self._backward_closure(m0, transitions, register, order)
            if fixed is not None:
                transitions = fixed
                complete = True

        trans = sorted(
            ((Counter({place_index[s]: n for s, n in used.items()}),
              label,
              Counter({place_index[s]: n for s, n in produced.items()}))
             for used, label, produced in transitions.values()),
            key=lambda t: (marking_key(t[0]), tuple(a.key() for a in t[1]),
                           marking_key(t[2])))
        net = PTNet(
            name=name,
            place_names=["s%d" % (i + 1) for i in range(len(order))],
            initial=Counter({place_index[s]: n for s, n in m0.items()}),
            transitions=trans,
            trans_names=["t%d" % (i + 1) for i in range(len(trans))],
            complete=complete,
            place_terms=list(order),
        )
        return net

    def _coverability(self, m0: Counter, transitions) -> tuple:
        """Karp-Miller: the maximal coverable (omega-)markings, and whether
        the tree stayed within budget."""
        tlist = sorted(transitions,
                       key=lambda t: (marking_key(t[0], term_key),
                                      tuple(a.key() for a in t[1])))
        # the tree compares markings constantly: work on dense int vectors
        # over the fixed universe of places mentioned by m0 or a transition
        ids: dict = {}
        for m in [m0] + [x for pre, _, post in tlist for x in (pre, post)]:
            for s in sorted(m, key=term_key):
                ids.setdefault(s, len(ids))
        n = len(ids)

        def vec(m: Counter) -> tuple:
            v = [0] * n
            for s, c in m.items():
                v[ids[s]] = c
            return tuple(v)

        vm0 = vec(m0)
        vtlist = [(vec(pre), vec(post)) for pre, _, post in tlist]

        def antichain(markings) -> list:
            keep: list = []
            for m in markings:
                if any(all(x <= y for x, y in zip(m, o)) for o in keep):
                    continue
                keep = [o for o in keep
                        if not all(x <= y for x, y in zip(o, m))] + [m]
            return keep

        def counters(maximal) -> list:
            rev = {i: s for s, i in ids.items()}
            out = [Counter({rev[i]: c for i, c in enumerate(m) if c})
                   for m in maximal]
            out.sort(key=lambda m: marking_key(m, term_key))
            return out

        # Nodes with equal (omega-)markings are merged globally, not only
        # along the current branch: the first occurrence explores every
        # continuation, and a pump loop that would have accelerated against
        # the merged-away ancestry re-fires concretely one level deeper and
        # accelerates there.  Without the merge, wide diamonds of
        # independent firings blow the tree up exponentially.  On bounded
        # nets no acceleration can fire, so this degenerates to an exact
        # reachability search.
        complete = True
        seen = {vm0}
        order = [vm0]
        stack = [(vm0, None)]
        while stack:
            if len(seen) > self.budget.max_states:
                complete = False
                break
            marking, parent = stack.pop()
            for pre, post in vtlist:
                if any(p > m for p, m in zip(pre, marking)):
                    continue
                nxt = [m - p + q for m, p, q in zip(marking, pre, post)]
                # accelerate to a fixpoint against every ancestor
                changed = True
                while changed:
                    changed = False
                    anc = (marking, parent)
                    while anc is not None:
                        a = anc[0]
                        for i in range(n):
                            if a[i] > nxt[i]:
                                break
                        else:
                            for i in range(n):
                                if nxt[i] > a[i] and nxt[i] != OMEGA:
                                    nxt[i] = OMEGA
                                    changed = True
                        anc = anc[1]
                nxt = tuple(nxt)
                if nxt in seen:
                    continue
                seen.add(nxt)
                order.append(nxt)
                stack.append((nxt, (marking, parent)))
        return counters(antichain(order)), complete

    def _backward_closure(self, m0: Counter, transitions: dict, register,
                          order: list):
        """Exact enabledness for nets whose marking space defeats the
        forward search.

        Re-derives every candidate item against an unbounded seed, then
        keeps exactly those whose consumption is coverable from the initial
        marking.  Coverability is decided backwards -- pred-basis saturation
        terminates whether or not the net is bounded -- and iterated to a
        least fixpoint, since each kept transition unlocks markings that may
        enable further candidates.  Returns the new transition table, or
        None when a budget trips (the truncated forward result then stands).
        """
        known = list(order)
        members = set(known)
        cand: list = []
        for _ in range(64):
            seed = Counter({p: OMEGA for p in known})
            cand = [it for it in self.derive_items(seed)
                    if _label_visible(it[1])]
            if self.truncated_items:
                return None
            fresh = [p for _, _, produced in cand
                     for p in sorted(produced, key=term_key)
                     if p not in members]
            if not fresh:
                break
            for p in fresh:
                if p in members:
                    continue
                if len(known) >= self.budget.max_places:
                    return None
                members.add(p)
                known.append(p)
        else:
            return None

        ids = {p: i for i, p in enumerate(known)}
        width = len(known)

        def vec(m: Counter) -> tuple:
            v = [0] * width
            for s, c in m.items():
                v[ids[s]] = c
            return tuple(v)

        vm0 = vec(m0)
        cap = self.budget.max_states

        def coverable(target, vt):
            if all(x <= y for x, y in zip(target, vm0)):
                return True
            basis = [target]
            queue = [target]
            adds = 0
            while queue:
                b = queue.pop()
                for pre, post in vt:
                    pb = tuple(p + (x - q if x > q else 0)
                               for p, x, q in zip(pre, b, post))
                    if any(all(x <= y for x, y in zip(o, pb))
                           for o in basis):
                        continue
                    if all(x <= y for x, y in zip(pb, vm0)):
                        return True
                    basis = [o for o in basis
                             if not all(x <= y for x, y in zip(pb, o))]
                    basis.append(pb)
                    queue.append(pb)
                    adds += 1
                    if adds > cap:
                        return None
            return False

        kept: dict = {}
        pending = cand
        while pending:
            vt = [(vec(used), vec(produced))
                  for used, _, produced in kept.values()]
            rest = []
            hit = False
            for used, label, produced in pending:
                verdict = coverable(vec(used), vt)
                if verdict is None:
                    return None
                if verdict:
                    key = (_freeze(used), label, _freeze(produced))
                    kept[key] = (used, label, produced)
                    hit = True
                else:
                    rest.append((used, label, produced))
            if not hit:
                break
            pending = rest

        if len(kept) > self.budget.max_transitions:
            return None
        if any(key not in kept for key in transitions):
            # the forward search saw a transition the filter rejected; do
            # not emit a net missing observed behaviour
            return None
        for used, _, produced in kept.values():
            for p in list(used) + list(produced):
                if not register(p):
                    return None
        return kept


def build_net(program: Program, mode: SyncMode | None = None,
              budget: Budget = DEFAULT_BUDGET) -> PTNet:
    """The net of a program.  mode=None selects finite-net synchronization
    when the program lies in the finite-net fragment, general otherwise."""
    if mode is None:
        from .terms import classify_finite_net
        flag, _ = classify_finite_net(program)
        mode = SyncMode.FINITE_NET if flag else SyncMode.GENERAL
    return NetBuilder(program.env, mode, budget).build(program.main, program.name)


# ---------------------------------------------------------------------------
# net analyses


def marking_graph(net: PTNet, budget: Budget = DEFAULT_BUDGET) -> Lts:
    """Reachability graph: states are markings, edges are transition labels."""
    names = net.place_names

    def key(m):
        return format_marking(m, names)

    init = Counter(net.initial)
    states = [key(init)]
    index = {states[0]: 0}
    store = {0: init}
    frontier = deque([0])
    transitions = {}
    complete = True
    while frontier:
        i = frontier.popleft()
        m = store[i]
        for pre, label, post in net.transitions:
            if not marking_leq(pre, m):
                continue
            nxt = fire(m, pre, post)
            k = key(nxt)
            j = index.get(k)
            if j is None:
                if len(states) >= budget.max_states:
                    complete = False
                    continue
                j = len(states)
                index[k] = j
                states.append(k)
                store[j] = nxt
                frontier.append(j)
            transitions[(i, label, j)] = None
    return Lts(states, list(transitions), 0, complete, "marking")


def _explore(net: PTNet, budget: Budget):
    """Reachable markings up to the state budget: (markings, complete)."""
    init = Counter(net.initial)
    seen = {marking_key(init): init}
    frontier = deque([init])
    complete = True
    while frontier:
        m = frontier.popleft()
        for pre, _, post in net.transitions:
            if not marking_leq(pre, m):
                continue
            nxt = fire(m, pre, post)
            k = marking_key(nxt)
            if k in seen:
                continue
            if len(seen) >= budget.max_states:
                complete = False
                continue
            seen[k] = nxt
            frontier.append(nxt)
    return list(seen.values()), complete


def is_reduced(net: PTNet, budget: Budget = DEFAULT_BUDGET) -> str:
    """'yes' / 'no' / 'unknown': every place marked in some reachable
    marking and every transition enabled at some reachable marking."""
    if any(not pre for pre, _, _ in net.transitions):
        return "no"
    places_left = set(range(len(net.place_names)))
    trans_left = set(range(len(net.transitions)))
    init = Counter(net.initial)
    seen = {marking_key(init)}
    frontier = deque([init])
    complete = True
    while frontier:
        m = frontier.popleft()
        places_left -= {s for s in m if m[s]}
        trans_left -= {i for i in trans_left
                       if marking_leq(net.transitions[i][0], m)}
        if not places_left and not trans_left:
            return "yes"
        for pre, _, post in net.transitions:
            if not marking_leq(pre, m):
                continue
            nxt = fire(m, pre, post)
            k = marking_key(nxt)
            if k in seen:
                continue
            if len(seen) >= budget.max_states:
                complete = False
                continue
            seen.add(k)
            frontier.append(nxt)
    if not places_left and not trans_left:
        return "yes"
    return "no" if complete else "unknown"


def is_safe(net: PTNet, budget: Budget = DEFAULT_BUDGET) -> str:
    """'yes' / 'no' / 'unknown': no reachable marking puts 2 tokens on a place."""
    init = Counter(net.initial)
    if any(n > 1 for n in init.values()):
        return "no"
    seen = {marking_key(init)}
    frontier = deque([init])
    complete = True
    while frontier:
        m = frontier.popleft()
        for pre, _, post in net.transitions:
            if not marking_leq(pre, m):
                continue
            nxt = fire(m, pre, post)
            if any(n > 1 for n in nxt.values()):
                return "no"
            k = marking_key(nxt)
            if k in seen:
                continue
            if len(seen) >= budget.max_states:
                complete = False
                continue
            seen.add(k)
            frontier.append(nxt)
    return "yes" if complete else "unknown"


# ---------------------------------------------------------------------------
# text format
#
#   net     ::= "net" IDENT { placedecl } { transdecl }
#   placedecl ::= "place" IDENT "init" NAT
#   transdecl ::= "trans" IDENT "label" LBL "in" { IDENT ":" NAT }
#                                       "out" { IDENT ":" NAT }
#   LBL     ::= act { "." act }         act ::= "tau" | name | "~" name
#
# The words net/place/init/trans/label/in/out are reserved. Every
# transition needs a non-empty preset; weights are positive.

_NET_KEYWORDS = {"net", "place", "init", "trans", "label", "in", "out"}


def parse_pnet(text: str) -> PTNet:
    ts = _Tokens(text)
    ts.expect("name", "net")
    kind, value, _, _ = ts.peek()
    if kind not in ("name", "ucname"):
        ts.error("expected a net name")
    name = ts.next()[1]
    place_names, initial, index = [], Counter(), {}
    while ts.at_name("place"):
        ts.next()
        pname = _net_ident(ts)
        if pname in index:
            ts.error("place %s declared twice" % pname)
        ts.expect("name", "init")
        tokens = ts.expect("nat")
        index[pname] = len(place_names)
        if int(tokens[1]):
            initial[len(place_names)] = int(tokens[1])
        place_names.append(pname)
    transitions, trans_names, seen_triples = [], [], set()
    while ts.at_name("trans"):
        ts.next()
        tname = _net_ident(ts)
        if tname in trans_names:
            ts.error("transition %s declared twice" % tname)
        ts.expect("name", "label")
        label = [_net_act(ts)]
        while ts.at_punct("."):
            ts.next()
            label.append(_net_act(ts))
        ts.expect("name", "in")
        pre = _arc_list(ts, index)
        ts.expect("name", "out")
        post = _arc_list(ts, index)
        if not pre:
            ts.error("transition %s has an empty preset" % tname)
        triple = (marking_key(pre), tuple(label), marking_key(post))
        if triple in seen_triples:
            ts.error("transition %s duplicates another transition" % tname)
        seen_triples.add(triple)
        transitions.append((pre, tuple(label), post))
        trans_names.append(tname)
    ts.expect("eof")
    return PTNet(name, place_names, initial, transitions, trans_names)


def _net_ident(ts) -> str:
    kind, value, _, _ = ts.peek()
    if kind not in ("name", "ucname") or value in _NET_KEYWORDS:
        ts.error("expected an identifier")
    return ts.next()[1]


def _net_act(ts) -> Action:
    if ts.at_punct("~"):
        ts.next()
        return act_out(_act_name(ts))
    kind, value, _, _ = ts.peek()
    if kind == "name" and value == "tau":
        ts.next()
        return TAU_ACT
    return act_in(_act_name(ts))


def _act_name(ts) -> str:
    kind, value, _, _ = ts.peek()
    if kind != "name" or value in _NET_KEYWORDS:
        ts.error("expected an action name")
    return ts.next()[1]


def _arc_list(ts, index) -> Counter:
    arcs = Counter()
    while True:
        kind, value, _, _ = ts.peek()
        if kind not in ("name", "ucname") or value in _NET_KEYWORDS:
            return arcs
        pname = ts.next()[1]
        if pname not in index:
            ts.error("unknown place %s" % pname)
        ts.expect("punct", ":")
        weight = int(ts.expect("nat")[1])
        if weight < 1:
            ts.error("arc weight must be positive")
        if index[pname] in arcs:
            ts.error("place %s repeated in arc list" % pname)
        arcs[index[pname]] = weight


def format_pnet(net: PTNet) -> str:
    # the header must reparse as an identifier whatever the net was named
    name = "".join(c if c.isalnum() or c == "_" else "_" for c in net.name)
    if not name or not name[0].isalpha():
        name = "n_" + name if name else "net1"
    lines = ["net %s" % name]
    for i, pname in enumerate(net.place_names):
        lines.append("place %s init %d" % (pname, net.initial.get(i, 0)))
    for i, (pre, label, post) in enumerate(net.transitions):
        tname = net.trans_names[i] if i < len(net.trans_names) else "t%d" % (i + 1)
        lbl = ".".join(str(a) for a in label)
        pres = " ".join("%s:%d" % (net.place_names[s], n)
                        for s, n in sorted(pre.items()))
        posts = " ".join("%s:%d" % (net.place_names[s], n)
                         for s, n in sorted(post.items()))
        lines.append("trans %s label %s in %s out%s" %
                     (tname, lbl, pres, (" " + posts) if posts else ""))
    return "\n".join(lines) + "\n"
