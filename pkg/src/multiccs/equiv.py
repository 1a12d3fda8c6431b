"""Equivalence checking: strong bisimilarity of labelled transition
systems (with distinguishing-formula counterexamples) and isomorphism of
place/transition nets (with an explicit witness).

Bisimilarity runs signature-based partition refinement over the disjoint
union of the two systems.  The refinement history doubles as a proof
recorder: when the initial states end up in different blocks, the stage
at which any two states first separated drives the construction of a
modal formula that holds in one system and fails in the other.

Both semantic checks refuse truncated inputs: a system cut short by a
budget proves nothing about the states it never explored.
"""

from collections import defaultdict
from dataclasses import dataclass

from .lts import Budget, DEFAULT_BUDGET, Lts, format_label
from .nets import PTNet, marking_graph, marking_key
from .terms import MccsError

__all__ = [
    "IncompleteLtsError", "Formula", "FTrue", "Diamond", "FAnd", "FNot",
    "render_formula", "formula_holds", "BisimResult", "bisimilar",
    "is_bisimulation_partition", "net_bisimilar",
    "IsoResult", "isomorphic", "verify_isomorphism",
]


class IncompleteLtsError(MccsError):
    """Raised when a semantic comparison is attempted on truncated input."""


# ---------------------------------------------------------------------------
# modal formulas (diamond / conjunction / negation / truth)


class Formula:
    pass


@dataclass(frozen=True)
class FTrue(Formula):
    pass


@dataclass(frozen=True)
class Diamond(Formula):
    label: tuple
    sub: Formula


@dataclass(frozen=True)
class FAnd(Formula):
    subs: tuple


@dataclass(frozen=True)
class FNot(Formula):
    sub: Formula


TRUE = FTrue()


def render_formula(f: Formula) -> str:
    if isinstance(f, FTrue):
        return "true"
    if isinstance(f, Diamond):
        return "<%s>%s" % (format_label(f.label), render_formula(f.sub))
    if isinstance(f, FAnd):
        if not f.subs:
            return "true"
        return "(" + " and ".join(render_formula(s) for s in f.subs) + ")"
    if isinstance(f, FNot):
        return "not " + render_formula(f.sub)
    raise TypeError(f)


def _succ_of(lts: Lts, side: int, table):
    for i, lab, j in lts.transitions:
        table[(side, i)][lab].add((side, j))


def formula_holds(lts: Lts, state: int, f: Formula) -> bool:
    """Model check a formula at a state of one system (used to replay
    counterexamples independently of the refiner)."""
    succ = defaultdict(lambda: defaultdict(set))
    _succ_of(lts, 0, succ)
    return _holds(succ, (0, state), f)


def _holds(succ, node, f) -> bool:
    if isinstance(f, FTrue):
        return True
    if isinstance(f, Diamond):
        return any(_holds(succ, m, f.sub)
                   for m in succ[node].get(f.label, ()))
    if isinstance(f, FAnd):
        return all(_holds(succ, node, s) for s in f.subs)
    if isinstance(f, FNot):
        return not _holds(succ, node, f.sub)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# bisimilarity


@dataclass
class BisimResult:
    equivalent: bool
    blocks: dict            # (side, state) -> final block id
    formula: Formula | None

    def counterexample(self) -> str | None:
        return None if self.formula is None else render_formula(self.formula)


def _label_key(lab):
    return tuple(a.key() for a in lab)


def bisimilar(a: Lts, b: Lts, require_complete: bool = True) -> BisimResult:
    """Strong bisimilarity of the initial states of two systems."""
    for tag, l in (("first", a), ("second", b)):
        if require_complete and not l.complete:
            raise IncompleteLtsError(
                "the %s system was truncated by a budget; "
                "bisimilarity over it would be unsound" % tag)

    nodes = ([(0, i) for i in range(len(a.states))]
             + [(1, j) for j in range(len(b.states))])
    succ = defaultdict(lambda: defaultdict(set))
    _succ_of(a, 0, succ)
    _succ_of(b, 1, succ)

    block = {n: 0 for n in nodes}
    history = [block]
    while True:
        ids: dict = {}
        nxt = {}
        for n in nodes:
            sig = (block[n],
                   frozenset((lab, block[m])
                             for lab, ms in succ[n].items() for m in ms))
            if sig not in ids:
                ids[sig] = len(ids)
            nxt[n] = ids[sig]
        if len(ids) == len(set(block.values())):
            break
        block = nxt
        history.append(block)

    na, nb = (0, a.initial), (1, b.initial)
    if block[na] == block[nb]:
        return BisimResult(True, block, None)
    return BisimResult(False, block, _distinguish(na, nb, history, succ))


def _distinguish(s, t, history, succ) -> Formula:
    """A formula holding at s and failing at t, for any pair the
    refinement separated."""
    k = next(i for i, blk in enumerate(history) if blk[s] != blk[t])
    prev = history[k - 1]

    def sig(n):
        return {(lab, prev[m]) for lab, ms in succ[n].items() for m in ms}

    diff = sig(s) - sig(t)
    if not diff:
        return FNot(_distinguish(t, s, history, succ))
    lab, blk = min(diff, key=lambda p: (_label_key(p[0]), p[1]))
    s2 = min(m for m in succ[s][lab] if prev[m] == blk)
    subs = tuple(_distinguish(s2, t2, history, succ)
                 for t2 in sorted(succ[t].get(lab, ())))
    if not subs:
        return Diamond(lab, TRUE)
    return Diamond(lab, subs[0] if len(subs) == 1 else FAnd(subs))


def is_bisimulation_partition(a: Lts, b: Lts, blocks: dict) -> bool:
    """Replay check, independent of the refiner: the block relation is a
    bisimulation containing the pair of initial states."""
    if blocks[(0, a.initial)] != blocks[(1, b.initial)]:
        return False
    succ = defaultdict(lambda: defaultdict(set))
    _succ_of(a, 0, succ)
    _succ_of(b, 1, succ)
    by_block = defaultdict(list)
    for n, bid in blocks.items():
        by_block[bid].append(n)
    for members in by_block.values():
        for n in members:
            for m in members:
                if n == m:
                    continue
                for lab, targets in succ[n].items():
                    for n2 in targets:
                        if not any(blocks[m2] == blocks[n2]
                                   for m2 in succ[m].get(lab, ())):
                            return False
    return True


def net_bisimilar(n1: PTNet, n2: PTNet,
                  budget: Budget = DEFAULT_BUDGET) -> BisimResult:
    """Bisimilarity of the reachability graphs of two nets."""
    for tag, net in (("first", n1), ("second", n2)):
        if not net.complete:
            raise IncompleteLtsError(
                "the %s net was truncated by a budget" % tag)
    return bisimilar(marking_graph(n1, budget), marking_graph(n2, budget))


# ---------------------------------------------------------------------------
# net isomorphism


@dataclass
class IsoResult:
    found: bool
    place_map: list | None   # index into n1.place_names -> index into n2's

    def mapping(self, n1: PTNet, n2: PTNet) -> dict | None:
        if self.place_map is None:
            return None
        return {n1.place_names[i]: n2.place_names[j]
                for i, j in enumerate(self.place_map)}


def _canon_transitions(net: PTNet, perm=None):
    out = []
    for pre, lab, post in net.transitions:
        if perm is not None:
            pre = {perm[s]: n for s, n in pre.items()}
            post = {perm[s]: n for s, n in post.items()}
        out.append((marking_key(pre), _label_key(lab), marking_key(post)))
    out.sort()
    return out


def _place_colors(net: PTNet):
    """Iterated invariant refinement: colors any isomorphism must respect."""
    n = len(net.place_names)
    color = {s: net.initial.get(s, 0) for s in range(n)}
    while True:
        tcol = []
        for pre, lab, post in net.transitions:
            tcol.append((_label_key(lab),
                         tuple(sorted((color[s], w) for s, w in pre.items())),
                         tuple(sorted((color[s], w) for s, w in post.items()))))
        sig = {}
        for s in range(n):
            ins = tuple(sorted((tcol[i], pre[s])
                               for i, (pre, _, _) in enumerate(net.transitions)
                               if pre.get(s, 0)))
            outs = tuple(sorted((tcol[i], post[s])
                                for i, (_, _, post) in enumerate(net.transitions)
                                if post.get(s, 0)))
            sig[s] = (color[s], ins, outs)
        # Renumber by sorted-signature rank, not first-seen order: the new
        # colors must not depend on the net's own place numbering, or the
        # signatures of two isomorphic nets drift apart after one round.
        ranked = {sg: i for i, sg in enumerate(sorted(set(sig.values())))}
        nxt = {s: ranked[sig[s]] for s in range(n)}
        if len(ranked) == len(set(color.values())):
            return nxt, {s: sig[s] for s in range(n)}
        color = nxt


def isomorphic(n1: PTNet, n2: PTNet) -> IsoResult:
    """Exact isomorphism check: a place bijection preserving the initial
    marking and mapping the transition set onto the other's."""
    if (len(n1.place_names) != len(n2.place_names)
            or len(n1.transitions) != len(n2.transitions)):
        return IsoResult(False, None)

    _, sig1 = _place_colors(n1)
    _, sig2 = _place_colors(n2)
    from collections import Counter as _C
    if _C(sig1.values()) != _C(sig2.values()):
        return IsoResult(False, None)

    target = _canon_transitions(n2)
    init2 = dict(n2.initial)
    candidates = {s: sorted(t for t in sig2 if sig2[t] == sig1[s])
                  for s in sig1}
    order = sorted(sig1, key=lambda s: len(candidates[s]))
    used: set = set()
    perm: dict = {}

    def assign(i) -> bool:
        if i == len(order):
            if {perm[s]: n for s, n in n1.initial.items() if n} != init2:
                return False
            return _canon_transitions(n1, perm) == target
        s = order[i]
        for t in candidates[s]:
            if t in used:
                continue
            if n1.initial.get(s, 0) != init2.get(t, 0):
                continue
            perm[s] = t
            used.add(t)
            if assign(i + 1):
                return True
            used.discard(t)
            del perm[s]
        return False

    if assign(0):
        return IsoResult(True, [perm[s] for s in range(len(n1.place_names))])
    return IsoResult(False, None)


def verify_isomorphism(n1: PTNet, n2: PTNet, place_map: list) -> bool:
    """Independent witness check for an isomorphism candidate."""
    n = len(n1.place_names)
    if (len(place_map) != n or len(n2.place_names) != n
            or sorted(place_map) != list(range(n))):
        return False
    perm = dict(enumerate(place_map))
    if {perm[s]: c for s, c in n1.initial.items() if c} != \
            {s: c for s, c in n2.initial.items() if c}:
        return False
    return _canon_transitions(n1, perm) == _canon_transitions(n2)
