"""Operational semantics: stepping, transition-system construction, halting,
depth, basic-term normalization, and the synchronizing-merge expansion.

States are process terms themselves; a term under evaluation carries its
valuation in the Eval node, so structural equality of terms is state
identity.  All exploration is deterministic: summands left to right, left
argument before right, communication pairs in that induced order.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as T
from .terms import (
    Assignment, DataAction, Plain, Tau, TAU_LABEL,
    EMPTY_VALUATION, Valuation, eval_cond, eval_data, mentions_of, subst_rec,
)


class SemanticsError(ValueError):
    pass


class UndecidedError(SemanticsError):
    """Raised when a question cannot be settled within the exploration bound."""


@dataclass(frozen=True, slots=True)
class CommFunction:
    """Commutative partial function pairing action names into a joint name."""

    pairs: tuple  # ((a, b), c) with a <= b

    @classmethod
    def make(cls, mapping):
        norm = {}
        for (a, b), c in mapping.items():
            key = (a, b) if a <= b else (b, a)
            if norm.get(key, c) != c:
                raise ValueError("conflicting communication for %s|%s" % key)
            norm[key] = c
        return cls(tuple(sorted(norm.items())))

    def pair(self, a: str, b: str):
        key = (a, b) if a <= b else (b, a)
        for k, c in self.pairs:
            if k == key:
                return c
        return None


DEFAULT_GAMMA = CommFunction.make({("sync", "sync"): "synced"})

_SYNC_RENAME = T.ActionMap.make({"synced": "sync"})


def sync_merge_expand(l, r):
    """The synchronizing merge as a derived operator: rename, interleave with
    communication, block lone handshakes, rename the joint action back."""
    return T.Rename(
        _SYNC_RENAME,
        T.Encap(
            T.ActionSet.labels(("sync",)),
            T.Par(T.Rename(_SYNC_RENAME, l), T.Rename(_SYNC_RENAME, r)),
        ),
    )


def _communicate(a, b, gamma: CommFunction):
    if isinstance(a, Plain) and isinstance(b, Plain):
        c = gamma.pair(a.name, b.name)
        return Plain(c) if c is not None else None
    if isinstance(a, DataAction) and isinstance(b, DataAction):
        c = gamma.pair(a.name, b.name)
        if c is not None and a.args == b.args:
            return DataAction(c, a.args)
    return None


def _eval_data(e, env):
    try:
        return eval_data(e, env)
    except LookupError as err:
        raise SemanticsError("data not ground: %s" % err) from None


def step(t, rho: Valuation | None = None, gamma: CommFunction = DEFAULT_GAMMA):
    """One-step behavior of t under an ambient valuation.

    Returns (success, moves): whether t can terminate now, and the ordered
    deduplicated (label, successor) pairs.
    """
    env = rho if rho is not None else EMPTY_VALUATION

    if isinstance(t, T.Empty):
        return True, ()
    if isinstance(t, T.Dead):
        return False, ()
    if isinstance(t, T.Silent):
        return False, ((TAU_LABEL, T.EPS),)
    if isinstance(t, T.Act):
        return False, ((Plain(t.name), T.EPS),)
    if isinstance(t, T.DataAct):
        args = tuple(_eval_data(e, env) for e in t.args)
        return False, ((DataAction(t.name, args), T.EPS),)
    if isinstance(t, T.Assign):
        val = _eval_data(t.e, env)
        return False, ((Assignment(t.var, val, mentions_of(t)), T.EPS),)

    if isinstance(t, T.Alt):
        sl, ml = step(t.l, rho, gamma)
        sr, mr = step(t.r, rho, gamma)
        return sl or sr, _dedup(ml + mr)

    if isinstance(t, T.Seq):
        sl, ml = step(t.l, rho, gamma)
        moves = [(a, T.Seq(l2, t.r)) for a, l2 in ml]
        sr = False
        if sl:
            sr, mr = step(t.r, rho, gamma)
            moves.extend(mr)
        return sl and sr, _dedup(moves)

    if isinstance(t, T.Par):
        sl, ml = step(t.l, rho, gamma)
        sr, mr = step(t.r, rho, gamma)
        moves = [(a, T.Par(l2, t.r)) for a, l2 in ml]
        moves.extend((b, T.Par(t.l, r2)) for b, r2 in mr)
        for a, l2 in ml:
            for b, r2 in mr:
                c = _communicate(a, b, gamma)
                if c is not None:
                    moves.append((c, T.Par(l2, r2)))
        return sl and sr, _dedup(moves)

    if isinstance(t, T.LeftMerge):
        _, ml = step(t.l, rho, gamma)
        return False, _dedup([(a, T.Par(l2, t.r)) for a, l2 in ml])

    if isinstance(t, T.CommMerge):
        _, ml = step(t.l, rho, gamma)
        _, mr = step(t.r, rho, gamma)
        moves = []
        for a, l2 in ml:
            for b, r2 in mr:
                c = _communicate(a, b, gamma)
                if c is not None:
                    moves.append((c, T.Par(l2, r2)))
        return False, _dedup(moves)

    if isinstance(t, T.Guard):
        try:
            hold = eval_cond(t.cond, env)
        except LookupError as err:
            raise SemanticsError("condition not decidable without valuation: %s" % err) from None
        if not hold:
            return False, ()
        s, m = step(t.body, rho, gamma)
        return s, m

    if isinstance(t, T.Encap):
        s, m = step(t.body, rho, gamma)
        return s, tuple((a, T.Encap(t.acts, u)) for a, u in m if not t.acts.contains_label(a))

    if isinstance(t, T.Abstr):
        s, m = step(t.body, rho, gamma)
        return s, _dedup(
            [
                (TAU_LABEL if t.acts.contains_label(a) else a, T.Abstr(t.acts, u))
                for a, u in m
            ]
        )

    if isinstance(t, T.Eval):
        s, m = step(t.body, t.rho, gamma)
        moves = []
        for a, u in m:
            rho2 = t.rho.set(a.var, a.value) if isinstance(a, Assignment) else t.rho
            moves.append((a, T.Eval(rho2, u)))
        return s, _dedup(moves)

    if isinstance(t, T.Proj):
        s, m = step(t.body, rho, gamma)
        moves = []
        has_visible = False
        for a, u in m:
            if isinstance(a, Tau):
                moves.append((a, T.Proj(t.n, u)))
            elif t.n > 0:
                moves.append((a, T.Proj(t.n - 1, u)))
            else:
                has_visible = True
        return s or (t.n == 0 and has_visible), _dedup(moves)

    if isinstance(t, T.Rename):
        s, m = step(t.body, rho, gamma)
        return s, _dedup([(t.f.apply_label(a), T.Rename(t.f, u)) for a, u in m])

    if isinstance(t, T.SyncMerge):
        return step(sync_merge_expand(t.l, t.r), rho, gamma)

    if isinstance(t, T.Rec):
        u, n = t, 0
        while isinstance(u, T.Rec):
            u = subst_rec(u, u.spec)
            n += 1
            if n > 1000:
                raise SemanticsError("recursion does not reach a guarded form")
        return step(u, rho, gamma)

    if isinstance(t, T.Var):
        raise SemanticsError("free recursion variable %s" % t.name)

    raise SemanticsError("cannot step %r" % (t,))


def _dedup(moves):
    seen = set()
    out = []
    for mv in moves:
        if mv not in seen:
            seen.add(mv)
            out.append(mv)
    return tuple(out)


# ---------------------------------------------------------------------------
# Transition systems

class Lts:
    """A finite labeled transition graph with explicit termination states.

    When exploration hits the state cap, `exploded` is set and the graph is
    partial; consumers must treat it as inconclusive.
    """

    def __init__(self):
        self.states = []
        self.index = {}
        self.success = set()
        self.transitions = []
        self.initial = 0
        self.exploded = False
        self._out = None

    def add_state(self, term) -> int:
        sid = self.index.get(term)
        if sid is None:
            sid = len(self.states)
            self.index[term] = sid
            self.states.append(term)
        return sid

    def out(self, sid: int):
        if self._out is None:
            adj = [[] for _ in self.states]
            for src, lab, dst in self.transitions:
                adj[src].append((lab, dst))
            self._out = adj
        return self._out[sid]

    def __len__(self):
        return len(self.states)


def build_lts(t, rho: Valuation | None = None, max_states: int = 10000,
              gamma: CommFunction = DEFAULT_GAMMA) -> Lts:
    """Explore the reachable states of t (wrapped in an evaluation context
    when a valuation is given)."""
    root = T.Eval(rho, t) if rho is not None else t
    l = Lts()
    l.add_state(root)
    frontier = 0
    while frontier < len(l.states):
        sid = frontier
        frontier += 1
        succ, moves = step(l.states[sid], None, gamma)
        if succ:
            l.success.add(sid)
        for lab, u in moves:
            if u not in l.index and len(l.states) >= max_states:
                l.exploded = True
                return l
            l.transitions.append((sid, lab, l.add_state(u)))
    return l


def _check_bounded(l: Lts):
    if l.exploded:
        raise UndecidedError(
            "undecided at this bound: exploration stopped at %d states" % len(l.states)
        )


def _cyclic(l: Lts) -> bool:
    color = [0] * len(l.states)  # 0 unseen, 1 on stack, 2 done
    for start in range(len(l.states)):
        if color[start]:
            continue
        stack = [(start, iter([d for _, d in l.out(start)]))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            for dst in it:
                if color[dst] == 1:
                    return True
                if color[dst] == 0:
                    color[dst] = 1
                    stack.append((dst, iter([d for _, d in l.out(dst)])))
                    break
            else:
                color[node] = 2
                stack.pop()
    return False


def eventually_halts(l: Lts) -> bool:
    """True iff every maximal run is finite and ends able to terminate."""
    _check_bounded(l)
    if _cyclic(l):
        return False
    for sid in range(len(l.states)):
        if not l.out(sid) and sid not in l.success:
            return False
    return True


def _topo_order(l: Lts):
    order = []
    color = [0] * len(l.states)
    for start in range(len(l.states)):
        if color[start]:
            continue
        stack = [(start, iter([d for _, d in l.out(start)]))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            for dst in it:
                if color[dst] == 1:
                    raise SemanticsError("depth undefined: the graph has a cycle")
                if color[dst] == 0:
                    color[dst] = 1
                    stack.append((dst, iter([d for _, d in l.out(dst)])))
                    break
            else:
                color[node] = 2
                order.append(node)
                stack.pop()
    return order  # reverse-topological (successors first)


def depth(l: Lts, count=None) -> int:
    """Longest-path length from the initial state, counting only labels
    accepted by `count` (default: everything but the silent step)."""
    _check_bounded(l)
    if count is None:
        count = lambda lab: not isinstance(lab, Tau)
    best = {}
    for sid in _topo_order(l):
        best[sid] = max(
            ((1 if count(lab) else 0) + best[dst] for lab, dst in l.out(sid)),
            default=0,
        )
    return best[l.initial]


def count_maximal_paths(l: Lts) -> int:
    """Number of maximal runs (ending in a state with no outgoing step)."""
    _check_bounded(l)
    total = {}
    for sid in _topo_order(l):
        outs = l.out(sid)
        total[sid] = sum(total[d] for _, d in outs) if outs else 1
    return total[l.initial]


def terminal_valuations(l: Lts):
    """Valuations carried by termination-capable states, in state order."""
    out = []
    for sid in sorted(l.success):
        term = l.states[sid]
        if isinstance(term, T.Eval):
            out.append(term.rho)
    return tuple(out)


# ---------------------------------------------------------------------------
# Basic-term normalization

def _label_term(lab):
    if isinstance(lab, Tau):
        return T.TAU
    if isinstance(lab, Plain):
        return T.Act(lab.name)
    if isinstance(lab, DataAction):
        return T.DataAct(lab.name, tuple(T.MemLiteral(m) for m in lab.args))
    if isinstance(lab, Assignment):
        return T.Assign(lab.var, T.MemLiteral(lab.value))
    raise ValueError("not a label: %r" % (lab,))


def normalize_basic(t, rho: Valuation | None = None, bound: int = 10000,
                    gamma: CommFunction = DEFAULT_GAMMA):
    """Rebuild t's behavior as a basic term: alternatives of guarded action
    prefixes and guarded termination, with all guards True.

    The shape is canonical: one summand per transition in exploration order,
    the termination summand last, deadlock as the inaction constant.
    """
    l = build_lts(t, rho, bound, gamma)
    _check_bounded(l)
    if _cyclic(l):
        raise SemanticsError("no finite basic form: the behavior loops")
    built = {}
    for sid in _topo_order(l):
        parts = [
            T.Guard(T.TRUE, T.Seq(_label_term(lab), built[dst])) for lab, dst in l.out(sid)
        ]
        if sid in l.success:
            parts.append(T.Guard(T.TRUE, T.EPS))
        if not parts:
            built[sid] = T.DELTA
        else:
            acc = parts[0]
            for p in parts[1:]:
                acc = T.Alt(acc, p)
            built[sid] = acc
    return built[l.initial]


# ---------------------------------------------------------------------------
# Export

def lts_to_json(l: Lts) -> dict:
    from .syntax import format_term
    from .terms import format_label

    return {
        "initial": l.initial,
        "exploded": l.exploded,
        "states": [
            {"id": i, "term": format_term(s), "success": i in l.success}
            for i, s in enumerate(l.states)
        ],
        "transitions": [
            {"from": src, "label": format_label(lab), "to": dst}
            for src, lab, dst in l.transitions
        ],
    }


def lts_to_dot(l: Lts) -> str:
    from .terms import format_label

    lines = ["digraph lts {"]
    for i in range(len(l.states)):
        shape = "doublecircle" if i in l.success else "circle"
        lines.append('  s%d [shape=%s, label="%d"];' % (i, shape, i))
    lines.append("  init [shape=point];")
    lines.append("  init -> s%d;" % l.initial)
    for src, lab, dst in l.transitions:
        lines.append('  s%d -> s%d [label="%s"];' % (src, dst, _dot_escape(format_label(lab))))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')
