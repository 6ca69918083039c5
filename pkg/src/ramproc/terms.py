"""Process-term language: data expressions, conditions, process constructors,
action labels, valuations, and recursion specifications.

Process terms form the usual algebra (choice, sequencing, merges, renaming,
encapsulation, abstraction, projection) extended with imperative pieces:
assignments to flexible variables, guarded commands, data-carrying actions,
and an evaluation operator that pushes a valuation through a term.

The data sort is fixed to MemState: every data expression denotes a RAM
memory, and flexible variables (RM, RM_1, ...) hold memories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .memory import MemState, format_mem
from . import ramops
from .ramops import CmpOp, Ini, Load, Store, apply_ini, apply_op, apply_prop, apply_shared


# ---------------------------------------------------------------------------
# Data expressions

@dataclass(frozen=True, slots=True)
class FlexVar:
    name: str


@dataclass(frozen=True, slots=True)
class MemLiteral:
    mem: MemState


@dataclass(frozen=True, slots=True)
class Upd:
    base: object
    idx: int
    val: str


@dataclass(frozen=True, slots=True)
class Apply1:
    """A single-memory operator (or ini) applied to a memory expression."""

    op: object
    e: object

    def __post_init__(self):
        if not isinstance(self.op, ramops.SINGLE_MEM + (Ini,)):
            raise ValueError("Apply1 takes a single-memory operator or ini")


@dataclass(frozen=True, slots=True)
class Apply2:
    """Load/store applied to (private, shared) memory expressions."""

    op: object
    e_priv: object
    e_shared: object

    def __post_init__(self):
        if not isinstance(self.op, (Load, Store)):
            raise ValueError("Apply2 takes load or store")


def eval_data(e, rho: "Valuation") -> MemState:
    if isinstance(e, FlexVar):
        return rho.get(e.name)
    if isinstance(e, MemLiteral):
        return e.mem
    if isinstance(e, Upd):
        return eval_data(e.base, rho).set(e.idx, e.val)
    if isinstance(e, Apply1):
        if isinstance(e.op, Ini):
            return apply_ini(e.op.i)
        return apply_op(e.op, eval_data(e.e, rho))
    if isinstance(e, Apply2):
        return apply_shared(e.op, eval_data(e.e_priv, rho), eval_data(e.e_shared, rho))
    raise ValueError("not a data expression: %r" % (e,))


def flexvars_expr(e) -> frozenset:
    if isinstance(e, FlexVar):
        return frozenset((e.name,))
    if isinstance(e, MemLiteral):
        return frozenset()
    if isinstance(e, Upd):
        return flexvars_expr(e.base)
    if isinstance(e, Apply1):
        return flexvars_expr(e.e)
    if isinstance(e, Apply2):
        return flexvars_expr(e.e_priv) | flexvars_expr(e.e_shared)
    raise ValueError("not a data expression: %r" % (e,))


# ---------------------------------------------------------------------------
# Conditions (quantifier-free)

@dataclass(frozen=True, slots=True)
class TrueC:
    pass


@dataclass(frozen=True, slots=True)
class FalseC:
    pass


@dataclass(frozen=True, slots=True)
class PropAtom:
    """A register-comparison applied to a memory expression, tested against
    an expected bit."""

    p: CmpOp
    e: object
    expected: int

    def __post_init__(self):
        if not isinstance(self.p, CmpOp):
            raise ValueError("PropAtom takes a comparison descriptor")
        if self.expected not in (0, 1):
            raise ValueError("expected bit must be 0 or 1")


@dataclass(frozen=True, slots=True)
class DataEq:
    e1: object
    e2: object


@dataclass(frozen=True, slots=True)
class Not:
    c: object


@dataclass(frozen=True, slots=True)
class And:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class Or:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class Implies:
    l: object
    r: object


TRUE = TrueC()
FALSE = FalseC()


def eval_cond(c, rho: "Valuation") -> bool:
    if isinstance(c, TrueC):
        return True
    if isinstance(c, FalseC):
        return False
    if isinstance(c, PropAtom):
        return apply_prop(c.p, eval_data(c.e, rho)) == c.expected
    if isinstance(c, DataEq):
        return eval_data(c.e1, rho) == eval_data(c.e2, rho)
    if isinstance(c, Not):
        return not eval_cond(c.c, rho)
    if isinstance(c, And):
        return eval_cond(c.l, rho) and eval_cond(c.r, rho)
    if isinstance(c, Or):
        return eval_cond(c.l, rho) or eval_cond(c.r, rho)
    if isinstance(c, Implies):
        return (not eval_cond(c.l, rho)) or eval_cond(c.r, rho)
    raise ValueError("not a condition: %r" % (c,))


def flexvars_cond(c) -> frozenset:
    if isinstance(c, (TrueC, FalseC)):
        return frozenset()
    if isinstance(c, PropAtom):
        return flexvars_expr(c.e)
    if isinstance(c, DataEq):
        return flexvars_expr(c.e1) | flexvars_expr(c.e2)
    if isinstance(c, Not):
        return flexvars_cond(c.c)
    if isinstance(c, (And, Or, Implies)):
        return flexvars_cond(c.l) | flexvars_cond(c.r)
    raise ValueError("not a condition: %r" % (c,))


def subst_data(e, rho: "Valuation"):
    """Apply a valuation to a data expression, collapsing it to a literal."""
    return MemLiteral(eval_data(e, rho))


def subst_cond(c, rho: "Valuation"):
    """Apply a valuation to a condition; collapses to the ground constant."""
    return TRUE if eval_cond(c, rho) else FALSE


# ---------------------------------------------------------------------------
# Valuations

@dataclass(frozen=True, slots=True)
class Valuation:
    """Immutable flexible-variable environment (name -> MemState)."""

    entries: tuple = ()

    @classmethod
    def make(cls, mapping):
        items = tuple(sorted(mapping.items()))
        for _, mem in items:
            if not isinstance(mem, MemState):
                raise ValueError("valuations map names to memories")
        return cls(items)

    def get(self, name: str) -> MemState:
        for k, v in self.entries:
            if k == name:
                return v
        raise LookupError("flexible variable %r is unbound" % (name,))

    def set(self, name: str, mem: MemState) -> "Valuation":
        kept = tuple((k, v) for k, v in self.entries if k != name)
        return Valuation(tuple(sorted(kept + ((name, mem),))))

    def names(self):
        return tuple(k for k, _ in self.entries)

    def __contains__(self, name):
        return any(k == name for k, _ in self.entries)

    def __str__(self):
        return ", ".join("%s = %s" % (k, format_mem(v)) for k, v in self.entries)


EMPTY_VALUATION = Valuation()


# ---------------------------------------------------------------------------
# Action labels (transition decorations) and action sets

@dataclass(frozen=True, slots=True)
class Tau:
    pass


@dataclass(frozen=True, slots=True)
class Plain:
    name: str


@dataclass(frozen=True, slots=True)
class DataAction:
    name: str
    args: tuple  # evaluated MemState arguments


@dataclass(frozen=True, slots=True)
class Assignment:
    """A performed assignment: the flexible variable and its new value.

    `mentions` records which flexible variables the original instruction
    touched (target plus the expression's variables).  It is bookkeeping for
    per-component step counting and does not participate in label equality.
    """

    var: str
    value: MemState
    mentions: frozenset = field(compare=False)


TAU_LABEL = Tau()


def format_label(l) -> str:
    if isinstance(l, Tau):
        return "tau"
    if isinstance(l, Plain):
        return l.name
    if isinstance(l, DataAction):
        return "%s(%s)" % (l.name, ", ".join(format_mem(a) for a in l.args))
    if isinstance(l, Assignment):
        return "%s := %s" % (l.var, format_mem(l.value))
    raise ValueError("not a label: %r" % (l,))


@dataclass(frozen=True, slots=True)
class ActionSet:
    """A set of actions for encapsulation/abstraction.

    kind: "labels" (extensional, by action name), "all" (every non-silent
    action), "alltau" (everything), "allbut" (every non-silent action except
    the named ones), "mentioning" / "notmentioning" (assignment steps
    touching, or non-silent steps not touching, a flexible variable).
    """

    kind: str
    data: object = None

    def __post_init__(self):
        if self.kind not in ("labels", "all", "alltau", "allbut", "mentioning", "notmentioning"):
            raise ValueError("unknown action-set kind %r" % (self.kind,))
        if self.kind in ("labels", "allbut") and not isinstance(self.data, frozenset):
            raise ValueError("%s needs a frozenset of names" % (self.kind,))
        if self.kind in ("mentioning", "notmentioning") and not isinstance(self.data, str):
            raise ValueError("%s needs a variable name" % (self.kind,))

    @classmethod
    def labels(cls, names):
        return cls("labels", frozenset(names))

    @classmethod
    def allbut(cls, names):
        return cls("allbut", frozenset(names))

    @classmethod
    def mentioning(cls, var):
        return cls("mentioning", var)

    @classmethod
    def not_mentioning(cls, var):
        return cls("notmentioning", var)

    def contains_label(self, l) -> bool:
        if self.kind == "alltau":
            return True
        if isinstance(l, Tau):
            return False
        if self.kind == "all":
            return True
        if self.kind == "labels":
            return isinstance(l, (Plain, DataAction)) and l.name in self.data
        if self.kind == "allbut":
            return not (isinstance(l, (Plain, DataAction)) and l.name in self.data)
        mentions = l.mentions if isinstance(l, Assignment) else frozenset()
        if self.kind == "mentioning":
            return self.data in mentions
        return self.data not in mentions  # notmentioning


# ---------------------------------------------------------------------------
# Renaming maps (plain/data action names; assignments and silence are fixed)

@dataclass(frozen=True, slots=True)
class ActionMap:
    entries: tuple = ()  # sorted (old, new) name pairs

    @classmethod
    def make(cls, mapping):
        return cls(tuple(sorted(mapping.items())))

    def apply_name(self, name: str) -> str:
        for old, new in self.entries:
            if old == name:
                return new
        return name

    def apply_label(self, l):
        if isinstance(l, Plain):
            return Plain(self.apply_name(l.name))
        if isinstance(l, DataAction):
            return DataAction(self.apply_name(l.name), l.args)
        return l


# ---------------------------------------------------------------------------
# Process terms

@dataclass(frozen=True, slots=True)
class Empty:
    pass


@dataclass(frozen=True, slots=True)
class Dead:
    pass


@dataclass(frozen=True, slots=True)
class Silent:
    pass


@dataclass(frozen=True, slots=True)
class Act:
    name: str


@dataclass(frozen=True, slots=True)
class DataAct:
    name: str
    args: tuple  # DataExpr tuple


@dataclass(frozen=True, slots=True)
class Assign:
    var: str
    e: object


@dataclass(frozen=True, slots=True)
class Alt:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class Seq:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class Par:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class LeftMerge:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class CommMerge:
    l: object
    r: object


@dataclass(frozen=True, slots=True)
class Encap:
    acts: ActionSet
    body: object


@dataclass(frozen=True, slots=True)
class Abstr:
    acts: ActionSet
    body: object


@dataclass(frozen=True, slots=True)
class Guard:
    cond: object
    body: object


@dataclass(frozen=True, slots=True)
class Eval:
    rho: Valuation
    body: object


@dataclass(frozen=True, slots=True)
class Var:
    """A recursion variable occurrence inside an equation right-hand side."""

    name: str


@dataclass(frozen=True, slots=True)
class RecSpec:
    """A finite set of recursion equations, in declaration order."""

    equations: tuple  # (name, ProcTerm) pairs

    def __post_init__(self):
        names = [n for n, _ in self.equations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate equation variable")

    @classmethod
    def make(cls, pairs):
        return cls(tuple(pairs))

    def rhs(self, name: str):
        for n, t in self.equations:
            if n == name:
                return t
        raise KeyError("no equation for %r" % (name,))

    def vars(self):
        return tuple(n for n, _ in self.equations)

    def __contains__(self, name):
        return any(n == name for n, _ in self.equations)


@dataclass(frozen=True, slots=True)
class Rec:
    """The constant denoting variable `var`'s solution of spec `spec`."""

    var: str
    spec: RecSpec

    def __post_init__(self):
        if self.var not in self.spec:
            raise ValueError("recursion constant for unknown variable %r" % (self.var,))


@dataclass(frozen=True, slots=True)
class Proj:
    n: int
    body: object

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("projection depth is a natural")


@dataclass(frozen=True, slots=True)
class Rename:
    f: ActionMap
    body: object


@dataclass(frozen=True, slots=True)
class SyncMerge:
    l: object
    r: object


EPS = Empty()
DELTA = Dead()
TAU = Silent()

_BINARY = (Alt, Seq, Par, LeftMerge, CommMerge, SyncMerge)
_UNARY_BODY = (Encap, Abstr, Guard, Eval, Proj, Rename)


def is_atomic(t) -> bool:
    """Atomic action terms: plain actions, data actions, assignments."""
    return isinstance(t, (Act, DataAct, Assign))


def is_atomic_or_silent(t) -> bool:
    return is_atomic(t) or isinstance(t, Silent)


def flexvars_term(t) -> frozenset:
    """All flexible variables occurring in data positions of t (not counting
    bindings by inner valuations)."""
    if isinstance(t, (Empty, Dead, Silent, Act, Var)):
        return frozenset()
    if isinstance(t, DataAct):
        out = frozenset()
        for e in t.args:
            out |= flexvars_expr(e)
        return out
    if isinstance(t, Assign):
        return frozenset((t.var,)) | flexvars_expr(t.e)
    if isinstance(t, _BINARY):
        return flexvars_term(t.l) | flexvars_term(t.r)
    if isinstance(t, Guard):
        return flexvars_cond(t.cond) | flexvars_term(t.body)
    if isinstance(t, _UNARY_BODY):
        return flexvars_term(t.body)
    if isinstance(t, Rec):
        out = frozenset()
        for _, rhs in t.spec.equations:
            out |= flexvars_term(rhs)
        return out
    raise ValueError("not a process term: %r" % (t,))


def mentions_of(t) -> frozenset:
    """Flexible variables an atomic instruction touches: the assignment
    target plus everything read by its expression or arguments."""
    if isinstance(t, Assign):
        return frozenset((t.var,)) | flexvars_expr(t.e)
    if isinstance(t, DataAct):
        out = frozenset()
        for e in t.args:
            out |= flexvars_expr(e)
        return out
    return frozenset()


# ---------------------------------------------------------------------------
# Recursion plumbing

def subst_vars(t, mapping):
    """Replace Var(X) occurrences per `mapping` (name -> ProcTerm)."""
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, (Empty, Dead, Silent, Act, DataAct, Assign)):
        return t
    if isinstance(t, _BINARY):
        return type(t)(subst_vars(t.l, mapping), subst_vars(t.r, mapping))
    if isinstance(t, Guard):
        return Guard(t.cond, subst_vars(t.body, mapping))
    if isinstance(t, Encap):
        return Encap(t.acts, subst_vars(t.body, mapping))
    if isinstance(t, Abstr):
        return Abstr(t.acts, subst_vars(t.body, mapping))
    if isinstance(t, Eval):
        return Eval(t.rho, subst_vars(t.body, mapping))
    if isinstance(t, Proj):
        return Proj(t.n, subst_vars(t.body, mapping))
    if isinstance(t, Rename):
        return Rename(t.f, subst_vars(t.body, mapping))
    if isinstance(t, Rec):
        # inner specs bind their own variables; do not substitute under them
        return t
    raise ValueError("not a process term: %r" % (t,))


def subst_rec(t, E: RecSpec):
    """One-step unfolding: a recursion constant becomes its right-hand side
    with every variable occurrence Y closed off as the constant for Y."""
    if isinstance(t, Rec):
        E = t.spec
        t = E.rhs(t.var)
    mapping = {name: Rec(name, E) for name in E.vars()}
    return subst_vars(t, mapping)


def rename_rec_vars(t, mapping):
    """Consistently rename recursion variables (specs and occurrences)."""
    if isinstance(t, Var):
        return Var(mapping.get(t.name, t.name))
    if isinstance(t, (Empty, Dead, Silent, Act, DataAct, Assign)):
        return t
    if isinstance(t, _BINARY):
        return type(t)(rename_rec_vars(t.l, mapping), rename_rec_vars(t.r, mapping))
    if isinstance(t, Guard):
        return Guard(t.cond, rename_rec_vars(t.body, mapping))
    if isinstance(t, Encap):
        return Encap(t.acts, rename_rec_vars(t.body, mapping))
    if isinstance(t, Abstr):
        return Abstr(t.acts, rename_rec_vars(t.body, mapping))
    if isinstance(t, Eval):
        return Eval(t.rho, rename_rec_vars(t.body, mapping))
    if isinstance(t, Proj):
        return Proj(t.n, rename_rec_vars(t.body, mapping))
    if isinstance(t, Rename):
        return Rename(t.f, rename_rec_vars(t.body, mapping))
    if isinstance(t, Rec):
        eqs = tuple(
            (mapping.get(n, n), rename_rec_vars(rhs, mapping)) for n, rhs in t.spec.equations
        )
        return Rec(mapping.get(t.var, t.var), RecSpec(eqs))
    raise ValueError("not a process term: %r" % (t,))


def canonical_rename(t):
    """Rename every recursion spec's variables to V1, V2, ... in declaration
    order, so terms equal up to consistent renaming compare structurally."""
    if isinstance(t, Rec):
        mapping = {n: "V%d" % (k + 1) for k, n in enumerate(t.spec.vars())}
        eqs = tuple(
            (mapping[n], canonical_rename(rename_rec_vars(rhs, mapping)))
            for n, rhs in t.spec.equations
        )
        return Rec(mapping[t.var], RecSpec(eqs))
    if isinstance(t, (Empty, Dead, Silent, Act, DataAct, Assign, Var)):
        return t
    if isinstance(t, _BINARY):
        return type(t)(canonical_rename(t.l), canonical_rename(t.r))
    if isinstance(t, Guard):
        return Guard(t.cond, canonical_rename(t.body))
    if isinstance(t, Encap):
        return Encap(t.acts, canonical_rename(t.body))
    if isinstance(t, Abstr):
        return Abstr(t.acts, canonical_rename(t.body))
    if isinstance(t, Eval):
        return Eval(t.rho, canonical_rename(t.body))
    if isinstance(t, Proj):
        return Proj(t.n, canonical_rename(t.body))
    if isinstance(t, Rename):
        return Rename(t.f, canonical_rename(t.body))
    raise ValueError("not a process term: %r" % (t,))


# ---------------------------------------------------------------------------
# Grammar validators

def validate_linear(t) -> bool:
    """Linear terms: deadlock, a guarded success, a guarded action prefix
    into a variable, or an alternative of linear terms."""
    if isinstance(t, Dead):
        return True
    if isinstance(t, Guard):
        if isinstance(t.body, Empty):
            return True
        return (
            isinstance(t.body, Seq)
            and is_atomic_or_silent(t.body.l)
            and isinstance(t.body.r, Var)
        )
    if isinstance(t, Alt):
        return validate_linear(t.l) and validate_linear(t.r)
    return False


def _linear_summands(t):
    if isinstance(t, Alt):
        yield from _linear_summands(t.l)
        yield from _linear_summands(t.r)
    else:
        yield t


def validate_guarded(E: RecSpec) -> bool:
    """A linear spec is guarded when no cycle of silent-prefixed summands
    exists: edges X -> Y for summands of shape (cond :-> tau . Y)."""
    for name, rhs in E.equations:
        if not validate_linear(rhs):
            raise ValueError("right-hand side for %s is not linear" % (name,))
    edges = {}
    for name, rhs in E.equations:
        outs = set()
        for s in _linear_summands(rhs):
            if (
                isinstance(s, Guard)
                and isinstance(s.body, Seq)
                and isinstance(s.body.l, Silent)
            ):
                outs.add(s.body.r.name)
        edges[name] = outs
    # cycle detection over the tau-edge graph
    state = {}  # 0 in progress, 1 done

    def visit(n):
        if state.get(n) == 0:
            return False
        if state.get(n) == 1:
            return True
        state[n] = 0
        for m in edges.get(n, ()):
            if not visit(m):
                return False
        state[n] = 1
        return True

    return all(visit(n) for n in edges)


def _match_op_equation(rhs, memvar):
    """cond True, assignment memvar := o(memvar), next variable.  Returns
    (descriptor, successor) or None."""
    if not (isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC)):
        return None
    b = rhs.body
    if not (isinstance(b, Seq) and isinstance(b.r, Var) and isinstance(b.l, Assign)):
        return None
    a = b.l
    if a.var != memvar or not isinstance(a.e, Apply1):
        return None
    if not isinstance(a.e.op, ramops.SINGLE_MEM):
        return None
    if a.e.e != FlexVar(memvar):
        return None
    return a.e.op, b.r.name


def _match_test_equation(rhs, memvar):
    """Two-summand jump test over memvar.  Returns (descriptor, target-if-1,
    target-if-0) or None."""
    if not isinstance(rhs, Alt):
        return None
    summands = list(_linear_summands(rhs))
    if len(summands) != 2:
        return None

    def read(s):
        if not (isinstance(s, Guard) and isinstance(s.cond, PropAtom)):
            return None
        c = s.cond
        if c.e != FlexVar(memvar):
            return None
        b = s.body
        if not (isinstance(b, Seq) and isinstance(b.r, Var) and isinstance(b.l, Assign)):
            return None
        if b.l.var != memvar or b.l.e != FlexVar(memvar):
            return None
        return c.p, c.expected, b.r.name

    r1, r2 = read(summands[0]), read(summands[1])
    if r1 is None or r2 is None:
        return None
    if r1[0] != r2[0] or {r1[1], r2[1]} != {0, 1}:
        return None
    taken = r1[2] if r1[1] == 1 else r2[2]
    fallthrough = r1[2] if r1[1] == 0 else r2[2]
    return r1[0], taken, fallthrough


def _match_halt_equation(rhs):
    return isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC) and isinstance(rhs.body, Empty)


def validate_ramp(t) -> bool:
    """Single sequential machine shape: a recursion constant whose equations,
    in declaration order, each compile from one instruction over memory RM.

    Operator equations fall through to the next equation; tests fall through
    on 0 and may jump anywhere on 1; the control flow never runs past the
    last equation.
    """
    if not isinstance(t, Rec):
        return False
    eqs = t.spec.equations
    if t.var != eqs[0][0]:
        return False
    names = [n for n, _ in eqs]
    index = {n: k for k, n in enumerate(names)}
    for k, (name, rhs) in enumerate(eqs):
        m = _match_op_equation(rhs, "RM")
        if m is not None:
            nxt = m[1]
            if nxt not in index or index[nxt] != k + 1:
                return False
            continue
        m = _match_test_equation(rhs, "RM")
        if m is not None:
            _, taken, fall = m
            if taken not in index:
                return False
            if fall not in index or index[fall] != k + 1:
                return False
            continue
        if _match_halt_equation(rhs):
            continue
        return False
    return True


def _match_ini_equation(rhs):
    """Root shape: True :-> RM_i := ini(...) . successor.  Returns (i,
    private variable name, successor) or None."""
    if not (isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC)):
        return None
    b = rhs.body
    if not (isinstance(b, Seq) and isinstance(b.r, Var) and isinstance(b.l, Assign)):
        return None
    a = b.l
    if not (isinstance(a.e, Apply1) and isinstance(a.e.op, Ini)):
        return None
    if a.e.e != FlexVar(a.var):
        return None
    return a.e.op.i, a.var, b.r.name


def _match_load_equation(rhs, memvar):
    if not (isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC)):
        return None
    b = rhs.body
    if not (isinstance(b, Seq) and isinstance(b.r, Var) and isinstance(b.l, Assign)):
        return None
    a = b.l
    if a.var != memvar or not isinstance(a.e, Apply2):
        return None
    if not isinstance(a.e.op, Load):
        return None
    if a.e.e_priv != FlexVar(memvar) or a.e.e_shared != FlexVar("RM"):
        return None
    return a.e.op, b.r.name


def _match_store_equation(rhs, memvar):
    if not (isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC)):
        return None
    b = rhs.body
    if not (isinstance(b, Seq) and isinstance(b.r, Var) and isinstance(b.l, Assign)):
        return None
    a = b.l
    if a.var != "RM" or not isinstance(a.e, Apply2):
        return None
    if not isinstance(a.e.op, Store):
        return None
    if a.e.e_priv != FlexVar(memvar) or a.e.e_shared != FlexVar("RM"):
        return None
    return a.e.op, b.r.name


def _validate_async_component(t) -> int:
    """Check one asynchronous shared-memory component; returns its number."""
    if not isinstance(t, Rec):
        raise ValueError("component is not a recursion constant")
    eqs = t.spec.equations
    root_name, root_rhs = eqs[0]
    if t.var != root_name:
        raise ValueError("component does not start at its first equation")
    m = _match_ini_equation(root_rhs)
    if m is None:
        raise ValueError("root equation %s lacks the ini step" % (root_name,))
    comp, memvar, succ = m
    if memvar != "RM_%d" % comp:
        raise ValueError("component %d uses private memory %s" % (comp, memvar))
    names = [n for n, _ in eqs]
    index = {n: k for k, n in enumerate(names)}
    if succ not in index or index[succ] != 1:
        raise ValueError("root equation %s must continue at the next equation" % (root_name,))
    for k, (name, rhs) in enumerate(eqs[1:], start=1):
        for matcher in (
            lambda r: _match_op_equation(r, memvar),
            lambda r: _match_load_equation(r, memvar),
            lambda r: _match_store_equation(r, memvar),
        ):
            m = matcher(rhs)
            if m is not None:
                nxt = m[1]
                if nxt not in index or index[nxt] != k + 1:
                    raise ValueError("equation %s must fall through to the next" % (name,))
                break
        else:
            m = _match_test_equation(rhs, memvar)
            if m is not None:
                _, taken, fall = m
                if taken not in index or index[taken] == 0:
                    raise ValueError("equation %s jumps out of range" % (name,))
                if fall not in index or index[fall] != k + 1:
                    raise ValueError("equation %s must fall through to the next" % (name,))
                continue
            if _match_halt_equation(rhs):
                continue
            raise ValueError("equation %s matches no machine shape" % (name,))
    return comp


def _flatten(t, node):
    if isinstance(t, node):
        yield from _flatten(t.l, node)
        yield from _flatten(t.r, node)
    else:
        yield t


def validate_apramp(t) -> int:
    """Asynchronous parallel machine: an interleaving composition of
    components numbered 1..n in order.  Returns n."""
    comps = list(_flatten(t, Par))
    for k, c in enumerate(comps, start=1):
        got = _validate_async_component(c)
        if got != k:
            raise ValueError("component %d carries number %d" % (k, got))
    return len(comps)


def _match_sync_equation(rhs):
    """True :-> sync . successor.  Returns the successor name or None."""
    if not (isinstance(rhs, Guard) and isinstance(rhs.cond, TrueC)):
        return None
    b = rhs.body
    if not (isinstance(b, Seq) and isinstance(b.r, Var)):
        return None
    if b.l != Act("sync"):
        return None
    return b.r.name


def _validate_sync_component(t) -> int:
    """Check one synchronous component; returns its number.

    Beyond the asynchronous shapes, successors must alternate: every edge of
    the equation graph joins a sync equation and a non-sync equation.
    """
    if not isinstance(t, Rec):
        raise ValueError("component is not a recursion constant")
    eqs = t.spec.equations
    root_name, root_rhs = eqs[0]
    if t.var != root_name:
        raise ValueError("component does not start at its first equation")
    m = _match_ini_equation(root_rhs)
    if m is None:
        raise ValueError("root equation %s lacks the ini step" % (root_name,))
    comp, memvar, _ = m
    if memvar != "RM_%d" % comp:
        raise ValueError("component %d uses private memory %s" % (comp, memvar))
    names = [n for n, _ in eqs]
    index = {n: k for k, n in enumerate(names)}

    is_sync = {}
    successors = {}
    for k, (name, rhs) in enumerate(eqs):
        s = _match_sync_equation(rhs)
        if s is not None:
            is_sync[name] = True
            successors[name] = [s]
            if s not in index or index[s] != k + 1:
                raise ValueError("sync equation %s must fall through to the next" % (name,))
            continue
        is_sync[name] = False
        if k == 0:
            succ = _match_ini_equation(rhs)[2]
            successors[name] = [succ]
            if succ not in index or index[succ] != 1:
                raise ValueError("root must continue at the next equation")
            continue
        for matcher in (
            lambda r: _match_op_equation(r, memvar),
            lambda r: _match_load_equation(r, memvar),
            lambda r: _match_store_equation(r, memvar),
        ):
            m2 = matcher(rhs)
            if m2 is not None:
                nxt = m2[1]
                if nxt not in index or index[nxt] != k + 1:
                    raise ValueError("equation %s must fall through to the next" % (name,))
                successors[name] = [nxt]
                break
        else:
            m2 = _match_test_equation(rhs, memvar)
            if m2 is not None:
                _, taken, fall = m2
                if taken not in index or index[taken] == 0:
                    raise ValueError("equation %s jumps out of range" % (name,))
                if fall not in index or index[fall] != k + 1:
                    raise ValueError("equation %s must fall through to the next" % (name,))
                successors[name] = [taken, fall]
                continue
            if _match_halt_equation(rhs):
                successors[name] = []
                continue
            raise ValueError("equation %s matches no machine shape" % (name,))
    for name, outs in successors.items():
        for s in outs:
            if is_sync[name] == is_sync[s]:
                raise ValueError(
                    "edge %s -> %s does not alternate with the synchronization rounds"
                    % (name, s)
                )
    return comp


def validate_spramp(t) -> int:
    """Synchronous parallel machine: a synchronizing composition of
    components numbered 1..n in order.  Returns n."""
    comps = list(_flatten(t, SyncMerge))
    for k, c in enumerate(comps, start=1):
        got = _validate_sync_component(c)
        if got != k:
            raise ValueError("component %d carries number %d" % (k, got))
    return len(comps)
