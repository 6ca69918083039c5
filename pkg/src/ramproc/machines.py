"""Register-machine programs and their process-term translations.

A program is a nonempty instruction list: operator applications, conditional
jumps (1-based targets), and halt.  The basic kind runs over one memory; the
shared-memory kind adds load/store and runs any number of numbered copies
against a common memory.  Each compiler emits one recursion equation per
instruction (the synchronous one: a handshake equation plus a work equation),
so control positions and equations correspond one to one.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ramops
from . import terms as T
from .memory import MemState
from .ramops import BinOp, CmpOp, Ini, Load, Store, UnOp, apply_op, apply_prop


@dataclass(frozen=True, slots=True)
class Op:
    o: object

    def __post_init__(self):
        if isinstance(self.o, CmpOp):
            raise ValueError("comparison outside jmp")
        if isinstance(self.o, Ini):
            raise ValueError("ini is not a program instruction")
        if not isinstance(self.o, (BinOp, UnOp, Load, Store)):
            raise ValueError("not an instruction operator: %r" % (self.o,))


@dataclass(frozen=True, slots=True)
class Jmp:
    p: CmpOp
    target: int

    def __post_init__(self):
        if not isinstance(self.p, CmpOp):
            raise ValueError("jmp takes a comparison")
        if self.target < 1:
            raise ValueError("jump targets are 1-based")


@dataclass(frozen=True, slots=True)
class Halt:
    pass


HALT = Halt()

BBRAM = "bbram"
SMBRAM = "smbram"


@dataclass(frozen=True, slots=True)
class Program:
    instrs: tuple
    kind: str = BBRAM

    def __post_init__(self):
        if self.kind not in (BBRAM, SMBRAM):
            raise ValueError("unknown machine kind %r" % (self.kind,))
        if not self.instrs:
            raise ValueError("empty program")
        for k, ins in enumerate(self.instrs, start=1):
            if isinstance(ins, Jmp):
                if ins.target > len(self.instrs):
                    raise ValueError(
                        "line %d: target %d > length %d" % (k, ins.target, len(self.instrs))
                    )
            elif isinstance(ins, Op):
                if self.kind == BBRAM and isinstance(ins.o, (Load, Store)):
                    raise ValueError("line %d: load/store needs the shared-memory kind" % (k,))
            elif not isinstance(ins, Halt):
                raise ValueError("line %d: not an instruction: %r" % (k, ins))

    def __len__(self):
        return len(self.instrs)


def format_instr(ins) -> str:
    if isinstance(ins, Halt):
        return "halt"
    if isinstance(ins, Jmp):
        return "jmp:%s:%d" % (ramops.format_op(ins.p), ins.target)
    return ramops.format_op(ins.o)


def parse_instr(line: str):
    line = line.strip()
    if line == "halt":
        return HALT
    if line.startswith("jmp:"):
        parts = line.split(":")
        if len(parts) != 5:
            raise ValueError("jmp takes a two-operand comparison and a target")
        p = ramops.parse_op(":".join(parts[1:4]))
        return Jmp(p, int(parts[4]))
    o = ramops.parse_op(line)
    if isinstance(o, CmpOp):
        raise ValueError("comparison outside jmp")
    return Op(o)


def parse_program(text: str, kind: str = BBRAM) -> Program:
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            instrs.append(parse_instr(line))
        except ValueError as e:
            raise ValueError("line %d: %s" % (lineno, e)) from None
    return Program(tuple(instrs), kind)


def format_program(prog: Program) -> str:
    return "\n".join(format_instr(i) for i in prog.instrs) + "\n"


# ---------------------------------------------------------------------------
# Compilers

def _require_trailing_halt(prog: Program):
    if not isinstance(prog.instrs[-1], Halt):
        raise ValueError(
            "last instruction must be halt: control would run past the end"
        )


def _op_expr(o, memvar: str):
    if isinstance(o, (Load, Store)):
        return T.Apply2(o, T.FlexVar(memvar), T.FlexVar("RM"))
    return T.Apply1(o, T.FlexVar(memvar))


def _op_equation(o, memvar: str, nxt: str):
    target = "RM" if isinstance(o, Store) else memvar
    return T.Guard(T.TRUE, T.Seq(T.Assign(target, _op_expr(o, memvar)), T.Var(nxt)))


def _jmp_equation(p, memvar: str, taken: str, fallthrough: str):
    self_step = T.Assign(memvar, T.FlexVar(memvar))
    return T.Alt(
        T.Guard(T.PropAtom(p, T.FlexVar(memvar), 1), T.Seq(self_step, T.Var(taken))),
        T.Guard(T.PropAtom(p, T.FlexVar(memvar), 0), T.Seq(self_step, T.Var(fallthrough))),
    )


_HALT_EQUATION = T.Guard(T.TRUE, T.EPS)


def proc_of_bbram(prog: Program):
    """One equation per instruction over memory RM, starting at the first."""
    if prog.kind != BBRAM:
        raise ValueError("expected a basic program")
    _require_trailing_halt(prog)
    names = ["X%d" % (k + 1) for k in range(len(prog))]
    eqs = []
    for k, ins in enumerate(prog.instrs):
        if isinstance(ins, Halt):
            eqs.append((names[k], _HALT_EQUATION))
        elif isinstance(ins, Jmp):
            eqs.append(
                (names[k], _jmp_equation(ins.p, "RM", names[ins.target - 1], names[k + 1]))
            )
        else:
            eqs.append((names[k], _op_equation(ins.o, "RM", names[k + 1])))
    return T.Rec(names[0], T.RecSpec(tuple(eqs)))


def proc_of_smbram_async(i: int, prog: Program):
    """Component i of an interleaved shared-memory machine: an ini step on
    the private memory RM_i, then one equation per instruction."""
    if prog.kind != SMBRAM:
        raise ValueError("expected a shared-memory program")
    if i < 1:
        raise ValueError("component numbers start at 1")
    _require_trailing_halt(prog)
    memvar = "RM_%d" % i
    names = ["Y%d" % (k + 1) for k in range(len(prog))]
    root = "X%d" % i
    ini_eq = T.Guard(
        T.TRUE, T.Seq(T.Assign(memvar, T.Apply1(Ini(i), T.FlexVar(memvar))), T.Var(names[0]))
    )
    eqs = [(root, ini_eq)]
    for k, ins in enumerate(prog.instrs):
        if isinstance(ins, Halt):
            eqs.append((names[k], _HALT_EQUATION))
        elif isinstance(ins, Jmp):
            eqs.append(
                (names[k], _jmp_equation(ins.p, memvar, names[ins.target - 1], names[k + 1]))
            )
        else:
            eqs.append((names[k], _op_equation(ins.o, memvar, names[k + 1])))
    return T.Rec(root, T.RecSpec(tuple(eqs)))


def proc_of_smbram_sync(i: int, prog: Program):
    """Component i of a lockstep shared-memory machine: each instruction gets
    a handshake equation followed by its work equation; jumps land on the
    target's handshake."""
    if prog.kind != SMBRAM:
        raise ValueError("expected a shared-memory program")
    if i < 1:
        raise ValueError("component numbers start at 1")
    _require_trailing_halt(prog)
    memvar = "RM_%d" % i
    root = "X%d" % i

    def sync_name(j):  # 1-based instruction j
        return "Y%d" % (2 * j - 1)

    def work_name(j):
        return "Y%d" % (2 * j)

    ini_eq = T.Guard(
        T.TRUE, T.Seq(T.Assign(memvar, T.Apply1(Ini(i), T.FlexVar(memvar))), T.Var(sync_name(1)))
    )
    eqs = [(root, ini_eq)]
    for k, ins in enumerate(prog.instrs):
        j = k + 1
        eqs.append((sync_name(j), T.Guard(T.TRUE, T.Seq(T.Act("sync"), T.Var(work_name(j))))))
        if isinstance(ins, Halt):
            eqs.append((work_name(j), _HALT_EQUATION))
        elif isinstance(ins, Jmp):
            eqs.append(
                (
                    work_name(j),
                    _jmp_equation(ins.p, memvar, sync_name(ins.target), sync_name(j + 1)),
                )
            )
        else:
            eqs.append((work_name(j), _op_equation(ins.o, memvar, sync_name(j + 1))))
    return T.Rec(root, T.RecSpec(tuple(eqs)))


def compose_async(components):
    """Left-nested interleaving of compiled components."""
    acc = None
    for c in components:
        acc = c if acc is None else T.Par(acc, c)
    if acc is None:
        raise ValueError("no components")
    return acc


def compose_sync(components):
    """Left-nested synchronizing merge of compiled components."""
    acc = None
    for c in components:
        acc = c if acc is None else T.SyncMerge(acc, c)
    if acc is None:
        raise ValueError("no components")
    return acc


# ---------------------------------------------------------------------------
# Inverse extraction

def program_of_ramp(t) -> Program:
    """Recover the program a sequential-machine term was compiled from.

    Equation order gives instruction order, so compiling the result yields
    the input back up to consistent renaming of the equation variables.
    """
    if not T.validate_ramp(t):
        raise ValueError("not a sequential-machine term")
    eqs = t.spec.equations
    index = {name: k for k, (name, _) in enumerate(eqs)}
    instrs = []
    for name, rhs in eqs:
        m = T._match_op_equation(rhs, "RM")
        if m is not None:
            instrs.append(Op(m[0]))
            continue
        m = T._match_test_equation(rhs, "RM")
        if m is not None:
            p, taken, _ = m
            instrs.append(Jmp(p, index[taken] + 1))
            continue
        instrs.append(HALT)
    return Program(tuple(instrs), BBRAM)


# ---------------------------------------------------------------------------
# Direct interpreter (independent of the process semantics)

@dataclass(frozen=True, slots=True)
class RunResult:
    """Outcome of a direct run: final memory (None when the run did not
    halt), and how many operator and jump instructions were executed."""

    mem: object
    op_steps: int
    jmp_steps: int

    @property
    def halted(self) -> bool:
        return self.mem is not None


def run_bbram(prog: Program, sigma: MemState, fuel: int) -> RunResult:
    """Program-counter interpreter for basic programs.

    Running off the end of the sequence counts as not halting; `fuel` bounds
    the number of executed instructions.
    """
    if prog.kind != BBRAM:
        raise ValueError("expected a basic program")
    pc = 1
    ops = jmps = 0
    for _ in range(fuel):
        if pc < 1 or pc > len(prog):
            return RunResult(None, ops, jmps)
        ins = prog.instrs[pc - 1]
        if isinstance(ins, Halt):
            return RunResult(sigma, ops, jmps)
        if isinstance(ins, Jmp):
            jmps += 1
            pc = ins.target if apply_prop(ins.p, sigma) == 1 else pc + 1
        else:
            ops += 1
            sigma = apply_op(ins.o, sigma)
            pc += 1
    return RunResult(None, ops, jmps)
