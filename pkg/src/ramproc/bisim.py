"""Rooted branching bisimilarity on finite transition systems.

The non-rooted relation is computed by signature refinement: states are
repeatedly partitioned by the set of moves they can make after silent steps
inside their own block, with silent moves that stay in the block treated as
invisible and termination capability tracked through the same closure.  The
root condition is then checked directly: initial moves must be matched
label-for-label (silent steps included) into branching-equivalent states,
and the roots must agree on immediate termination.
"""

from __future__ import annotations

from .semantics import Lts, UndecidedError
from .terms import Tau

_DONE = ("<done>",)


class _Merged:
    def __init__(self, l1: Lts, l2: Lts):
        off = len(l1.states)
        self.n = off + len(l2.states)
        self.out = [
            [(lab, dst) for lab, dst in l1.out(i)] for i in range(len(l1.states))
        ] + [
            [(lab, dst + off) for lab, dst in l2.out(i)] for i in range(len(l2.states))
        ]
        self.success = l1.success | {s + off for s in l2.success}
        self.root1 = l1.initial
        self.root2 = l2.initial + off


def _signature(m: _Merged, s: int, block) -> frozenset:
    mine = block[s]
    closure = [s]
    seen = {s}
    sig = set()
    k = 0
    while k < len(closure):
        u = closure[k]
        k += 1
        if u in m.success:
            sig.add(_DONE)
        for lab, v in m.out[u]:
            if isinstance(lab, Tau) and block[v] == mine:
                if v not in seen:
                    seen.add(v)
                    closure.append(v)
            else:
                sig.add((lab, block[v]))
    return frozenset(sig)


def _branching_blocks(m: _Merged):
    block = [0] * m.n
    while True:
        keys = [(block[s], _signature(m, s, block)) for s in range(m.n)]
        remap = {}
        new = [0] * m.n
        for s in range(m.n):
            new[s] = remap.setdefault(keys[s], len(remap))
        if new == block:
            return block
        block = new


def rb_bisim(l1: Lts, l2: Lts) -> bool:
    """Are the initial states rooted branching bisimilar?"""
    if l1.exploded or l2.exploded:
        raise UndecidedError("cannot compare a truncated transition system")
    m = _Merged(l1, l2)
    block = _branching_blocks(m)

    if (m.root1 in m.success) != (m.root2 in m.success):
        return False

    def root_moves_match(a, b):
        for lab, dst in m.out[a]:
            if not any(lab == lab2 and block[dst] == block[dst2] for lab2, dst2 in m.out[b]):
                return False
        return True

    return root_moves_match(m.root1, m.root2) and root_moves_match(m.root2, m.root1)
