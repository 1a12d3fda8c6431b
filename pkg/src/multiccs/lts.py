"""Labeled transition system semantics.

A state is a canonical normal form.  Its moves are computed from the
flattened component multiset: every component contributes base moves
(prefix, strong prefix, summand selection, constant unfolding), composed
moves come from synchronizing disjoint sub-multisets pairwise, and a move
escapes a restriction scope only if its label does not mention a bound
name.  Because components live in one flattened multiset, all parallel
association orders are covered without rewriting terms.

A strong prefix contributes the head of an atomic sequence: the rest of
the label comes from a move of its body, so a strong prefix whose body
cannot move is a dead end.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field

from .normalform import NormalForm, normalize
from .sync import SyncMode, sync_outcomes
from .terms import (
    Const, Env, GuardednessError, MccsError, Nil, Par, Prefix, Program,
    Restrict, StrongPrefix, Sum, Term, format_sequence, free_names,
    par_fold, sequence_names, substitute, term_key,
)


@dataclass(frozen=True)
class Budget:
    max_states: int = 10000
    max_places: int = 5000
    max_transitions: int = 20000
    max_seq_len: int = 16


DEFAULT_BUDGET = Budget()

# hard cap on the pairwise closure at a single state
_MAX_ITEMS = 200000


def _label_key(label):
    return tuple(a.key() for a in label)


@dataclass
class Lts:
    states: list          # canonical state keys, index 0 is the initial state
    transitions: list     # (source index, label sequence, target index)
    initial: int = 0
    complete: bool = True
    kind: str = "term"    # "term" or "marking"

    def labels(self) -> set:
        return {label for _, label, _ in self.transitions}

    def successors(self, i: int):
        return [(label, j) for src, label, j in self.transitions if src == i]

    def summary(self) -> str:
        return "%d states, %d transitions, %s" % (
            len(self.states), len(self.transitions),
            "complete" if self.complete else "truncated")


class StepEngine:
    """Move computation with per-term caches.

    Caches are only filled with finished results; re-entering a term that
    is still being computed means constant unfolding does not pass a
    normal prefix, i.e. the input violates guardedness.
    """

    def __init__(self, env: Env, mode: SyncMode = SyncMode.GENERAL,
                 max_seq_len: int = 16, strict: bool = False):
        self.env = env
        self.mode = mode
        self.max_seq_len = max_seq_len
        self.strict = strict
        self._seq_cache: dict = {}
        self._term_cache: dict = {}
        self._busy: set = set()
        self._placeholders = 0

    # -- base moves of a sequential or constant component ------------------

    def seq_moves(self, t: Term) -> tuple:
        hit = self._seq_cache.get(t)
        if hit is not None:
            return hit
        if isinstance(t, Nil):
            moves = ()
        elif isinstance(t, Prefix):
            moves = (((t.action,), t.body),)
        elif isinstance(t, StrongPrefix):
            moves = tuple(((t.action,) + label, cont)
                          for label, cont in self.term_moves(t.body))
        elif isinstance(t, Sum):
            seen = dict.fromkeys(self.seq_moves(t.left))
            seen.update(dict.fromkeys(self.seq_moves(t.right)))
            moves = tuple(seen)
        elif isinstance(t, Const):
            moves = self.term_moves(self.env.body_of(t))
        else:
            raise MccsError("component is not sequential: %s" % t)
        self._seq_cache[t] = moves
        return moves

    # -- moves of an arbitrary term ----------------------------------------

    def term_moves(self, t: Term) -> tuple:
        hit = self._term_cache.get(t)
        if hit is not None:
            return hit
        if t in self._busy:
            raise GuardednessError(
                "constant unfolding does not reach a normal prefix in %s" % t)
        self._busy.add(t)
        try:
            binders, comps = self._flatten(t)
            moves = self._compose(binders, comps)
        finally:
            self._busy.discard(t)
        self._term_cache[t] = moves
        return moves

    def _flatten(self, t: Term):
        binders: list = []
        comps: Counter = Counter()

        def walk(u):
            if isinstance(u, Par):
                walk(u.left)
                walk(u.right)
            elif isinstance(u, Restrict):
                if not self.strict and u.name not in free_names(u.body, self.env):
                    walk(u.body)
                    return
                # globally unique placeholder: nested flattenings (strong
                # prefix bodies) must never shadow an enclosing binder
                self._placeholders += 1
                ph = "?%d" % self._placeholders
                binders.append(ph)
                walk(substitute(u.body, u.name, ph, self.env))
            elif isinstance(u, Nil):
                if self.strict:
                    comps[u] += 1
            else:
                comps[u] += 1

        walk(t)
        return binders, comps

    def _compose(self, binders: list, comps: Counter) -> tuple:
        """All (label, continuation term) moves of new(binders)(comps)."""
        items: dict = {}
        queue = deque()

        def add(used, label, conts):
            key = (tuple(sorted(used.items(), key=lambda kv: term_key(kv[0]))),
                   label,
                   tuple(sorted(conts.items(),
                                key=lambda kv: (term_key(kv[0][0]), term_key(kv[0][1])))))
            if key in items:
                return
            if len(items) >= _MAX_ITEMS:
                raise MccsError("move closure exceeded %d items" % _MAX_ITEMS)
            items[key] = (used, label, conts)
            queue.append(key)

        for src in sorted(comps, key=term_key):
            for label, cont in self.seq_moves(src):
                add(Counter({src: 1}), label, Counter({(src, cont): 1}))

        while queue:
            k1 = queue.popleft()
            used1, lab1, conts1 = items[k1]
            for k2 in list(items):
                used2, lab2, conts2 = items[k2]
                merged = used1 + used2
                if any(merged[s] > comps[s] for s in merged):
                    continue
                for lab3 in sorted(sync_outcomes(lab1, lab2, self.mode),
                                   key=_label_key):
                    if (self.mode is SyncMode.GENERAL
                            and len(lab3) > self.max_seq_len):
                        continue
                    add(merged, lab3, conts1 + conts2)

        blocked = set(binders)
        moves = {}
        for used, label, conts in items.values():
            if sequence_names(label) & blocked:
                continue
            parts: list = []
            for (src, cont), n in sorted(
                    conts.items(),
                    key=lambda kv: (term_key(kv[0][0]), term_key(kv[0][1]))):
                parts.extend([cont] * n)
            rest = comps - used
            for src in sorted(rest, key=term_key):
                parts.extend([src] * rest[src])
            target = par_fold(parts)
            for name in reversed(binders):
                target = Restrict(name, target)
            moves[(label, target)] = None
        return tuple(moves)


def step(state, env: Env, mode: SyncMode = SyncMode.GENERAL,
         budget: Budget = DEFAULT_BUDGET, strict: bool = False,
         engine: StepEngine | None = None):
    """Moves of a term or normal form: a sorted tuple of
    (label, target NormalForm) pairs."""
    if engine is None:
        engine = StepEngine(env, mode, budget.max_seq_len, strict)
    t = state.to_term() if isinstance(state, NormalForm) else state
    out = {}
    for label, target in engine.term_moves(t):
        out[(label, normalize(target, env, strict))] = None
    return tuple(sorted(out, key=lambda m: (tuple(a.key() for a in m[0]), m[1].key())))


def build_lts(program: Program, mode: SyncMode = SyncMode.GENERAL,
              budget: Budget = DEFAULT_BUDGET, strict: bool = False) -> Lts:
    """Breadth-first state space construction from the main term."""
    engine = StepEngine(program.env, mode, budget.max_seq_len, strict)
    init = normalize(program.main, program.env, strict)
    keys = [init.key()]
    index = {keys[0]: 0}
    frontier = deque([init])
    transitions = []
    complete = True
    while frontier:
        nf = frontier.popleft()
        src = index[nf.key()]
        for label, target in step(nf, program.env, mode, budget, strict, engine):
            k = target.key()
            j = index.get(k)
            if j is None:
                if len(keys) >= budget.max_states:
                    complete = False
                    continue
                j = len(keys)
                index[k] = j
                keys.append(k)
                frontier.append(target)
            transitions.append((src, label, j))
    return Lts(keys, transitions, 0, complete, "term")


def format_label(label) -> str:
    return format_sequence(label)
