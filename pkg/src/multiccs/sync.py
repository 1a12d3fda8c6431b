"""Synchronization of transition label sequences.

Two sequences synchronize by cancelling complementary actions and
interleaving the rest, subject to: the heads may cancel outright; a head
may be kept (visible actions only, never tau); leading taus are absorbed;
and at least one cancellation happens in every derivation, so a pure
shuffle of two sequences is never an outcome.  Restricted names take part
in cancellation exactly like visible ones.

In finite-net mode a synchronization is only allowed when one of the two
operands has length 1; this is the semantic restriction that keeps nets of
finite-net processes finite.
"""

from __future__ import annotations

import enum
from functools import lru_cache

from .terms import TAU_ACT


class SyncMode(enum.Enum):
    GENERAL = "general"
    FINITE_NET = "finite-net"


@lru_cache(maxsize=None)
def _outcomes(s1, s2) -> frozenset:
    if not s1 or not s2:
        return frozenset()
    a, rest1 = s1[0], s1[1:]
    b, rest2 = s2[0], s2[1:]
    out = set()
    heads_cancel = (not a.is_tau) and (not b.is_tau) and a.complement() == b
    if heads_cancel:
        if not rest1 and not rest2:
            out.add((TAU_ACT,))
        elif rest1 and not rest2:
            out.add(rest1)
        elif rest2 and not rest1:
            out.add(rest2)
        else:
            out |= _outcomes(rest1, rest2)
    if rest1:
        if a.is_tau:
            out |= _outcomes(rest1, s2)
        else:
            out |= {(a,) + s for s in _outcomes(rest1, s2)}
    if rest2:
        if b.is_tau:
            out |= _outcomes(s1, rest2)
        else:
            out |= {(b,) + s for s in _outcomes(s1, rest2)}
    return frozenset(out)


def sync_outcomes(s1, s2, mode: SyncMode = SyncMode.GENERAL) -> frozenset:
    """All sequences the pair may synchronize to (empty if they cannot)."""
    s1, s2 = tuple(s1), tuple(s2)
    if mode is SyncMode.FINITE_NET and len(s1) != 1 and len(s2) != 1:
        return frozenset()
    return _outcomes(s1, s2)


def is_sync(s1, s2, result, mode: SyncMode = SyncMode.GENERAL) -> bool:
    return tuple(result) in sync_outcomes(s1, s2, mode)
