import random

import pytest

from ramproc import terms as T
from ramproc.machines import (
    BBRAM,
    HALT,
    SMBRAM,
    Halt,
    Jmp,
    Op,
    Program,
    compose_async,
    compose_sync,
    format_program,
    parse_instr,
    parse_program,
    proc_of_bbram,
    proc_of_smbram_async,
    proc_of_smbram_sync,
    program_of_ramp,
    run_bbram,
)
from ramproc.memory import EMPTY_MEM, MemState
from ramproc.ramops import BinOp, CmpOp, Dir, Imm, Ind, Ini, Load, Store, UnOp
from ramproc.semantics import build_lts, depth, eventually_halts, terminal_valuations
from ramproc.syntax import format_term, parse_term

import sample_terms

IMS = MemState({0: "11", 1: "1101", 6: "011"})


def test_parse_program():
    p = parse_program("halt\n")
    assert p.instrs == (HALT,)
    p = parse_program("jmp:eq:0:#0:1\nhalt\n")
    assert p.instrs[0] == Jmp(CmpOp("eq", Dir(0), Imm(0)), 1)
    assert p.instrs[1] == HALT
    with pytest.raises(ValueError, match="target 9 > length 2"):
        parse_program("jmp:eq:0:#0:9\nhalt\n")
    with pytest.raises(ValueError):
        parse_program("")
    with pytest.raises(ValueError, match="line 1"):
        parse_program("frobnicate\n")


def test_program_kind_checks():
    with pytest.raises(ValueError):
        parse_program("loa:@1:0\nhalt\n")  # shared ops need the shared kind
    parse_program("loa:@1:0\nhalt\n", SMBRAM)
    with pytest.raises(ValueError):
        Op(CmpOp("eq", Dir(0), Dir(1)))
    with pytest.raises(ValueError):
        Jmp(CmpOp("eq", Dir(0), Dir(1)), 0)


def test_instr_roundtrip():
    for line in ("halt", "add:#1:@2:0", "jmp:gt:1:#0:1", "mov:1:2"):
        assert format_program(Program((parse_instr(line),) if line == "halt"
                                      else (parse_instr(line), HALT))).splitlines()[0] == line


def test_proc_of_bbram_shapes():
    t = proc_of_bbram(parse_program("halt\n"))
    assert format_term(t) == "rec X1 {X1 = True :-> eps}"
    t = proc_of_bbram(parse_program("add:#1:#1:0\nhalt\n"))
    assert T.validate_ramp(t)
    eqs = t.spec.equations
    assert [n for n, _ in eqs] == ["X1", "X2"]
    assert eqs[1][1] == T.Guard(T.TRUE, T.EPS)
    with pytest.raises(ValueError, match="last instruction must be halt"):
        proc_of_bbram(Program((Op(BinOp("add", Dir(0), Dir(0), Dir(0))),)))
    with pytest.raises(ValueError):
        proc_of_bbram(parse_program("loa:@0:1\nhalt\n", SMBRAM))


def test_jmp_equation_shape():
    t = proc_of_bbram(parse_program("jmp:eq:0:#0:1\nhalt\n"))
    rhs = t.spec.rhs("X1")
    assert isinstance(rhs, T.Alt)
    taken, fall = rhs.l, rhs.r
    assert taken.cond == T.PropAtom(CmpOp("eq", Dir(0), Imm(0)), T.FlexVar("RM"), 1)
    assert taken.body.l == T.Assign("RM", T.FlexVar("RM"))
    assert taken.body.r == T.Var("X1")
    assert fall.cond.expected == 0
    assert fall.body.r == T.Var("X2")


def test_proc_of_smbram_async_shapes():
    t = proc_of_smbram_async(1, parse_program("halt\n", SMBRAM))
    assert t.var == "X1"
    eqs = dict(t.spec.equations)
    ini = eqs["X1"]
    assert ini.body.l == T.Assign("RM_1", T.Apply1(Ini(1), T.FlexVar("RM_1")))
    assert ini.body.r == T.Var("Y1")
    assert eqs["Y1"] == T.Guard(T.TRUE, T.EPS)

    t = proc_of_smbram_async(2, parse_program("sto:#1:@0\nhalt\n", SMBRAM))
    eqs = dict(t.spec.equations)
    store = eqs["Y1"]
    assert store.body.l.var == "RM"  # store writes the shared memory
    assert store.body.l.e == T.Apply2(Store(Imm(1), Ind(0)), T.FlexVar("RM_2"), T.FlexVar("RM"))
    load_t = proc_of_smbram_async(1, parse_program("loa:@0:1\nhalt\n", SMBRAM))
    eqs = dict(load_t.spec.equations)
    assert eqs["Y1"].body.l.var == "RM_1"  # load writes the private memory


def test_proc_of_smbram_sync_shapes():
    t = proc_of_smbram_sync(1, parse_program("halt\n", SMBRAM))
    eqs = dict(t.spec.equations)
    assert set(eqs) == {"X1", "Y1", "Y2"}
    assert eqs["Y1"] == T.Guard(T.TRUE, T.Seq(T.Act("sync"), T.Var("Y2")))
    assert eqs["Y2"] == T.Guard(T.TRUE, T.EPS)
    # jump at instruction 2 targeting 1 goes back to the sync step Y1
    t = proc_of_smbram_sync(1, parse_program("add:0:0:0\njmp:eq:#0:#0:1\nhalt\n", SMBRAM))
    eqs = dict(t.spec.equations)
    assert eqs["Y4"].l.body.r == T.Var("Y1")
    assert eqs["Y4"].r.body.r == T.Var("Y5")


def test_compiled_components_validate():
    progs = [parse_program("add:1:1:1\nhalt\n", SMBRAM),
             parse_program("loa:@0:2\nsto:2:@1\nhalt\n", SMBRAM)]
    ta = compose_async([proc_of_smbram_async(i, p) for i, p in enumerate(progs, 1)])
    assert T.validate_apramp(ta) == 2
    ts = compose_sync([proc_of_smbram_sync(i, p) for i, p in enumerate(progs, 1)])
    assert T.validate_spramp(ts) == 2


def test_program_of_ramp():
    assert program_of_ramp(parse_term("rec X1 {X1 = True :-> eps}")).instrs == (HALT,)
    src = sample_terms.DIVISION_PROGRAM
    t = proc_of_bbram(parse_program(src))
    assert format_program(program_of_ramp(t)) == src
    with pytest.raises(ValueError, match="not a sequential-machine term"):
        program_of_ramp(T.EPS)
    with pytest.raises(ValueError):
        program_of_ramp(parse_term("rec X1 {X1 = True :-> a . X1}"))


def _random_program(rng, n_ops):
    instrs = []
    for i in range(n_ops):
        roll = rng.random()
        r = lambda: rng.choice([Dir(rng.randint(0, 3)), Imm(rng.randint(0, 3))])
        if roll < 0.6:
            name = rng.choice(["add", "sub", "and", "or"])
            instrs.append(Op(BinOp(name, r(), r(), Dir(rng.randint(0, 3)))))
        elif roll < 0.75:
            name = rng.choice(["not", "shl", "shr", "mov"])
            instrs.append(Op(UnOp(name, r(), Dir(rng.randint(0, 3)))))
        else:
            p = CmpOp(rng.choice(["eq", "gt", "beq"]), r(), r())
            instrs.append(Jmp(p, rng.randint(1, n_ops + 1)))
    instrs.append(HALT)
    return Program(tuple(instrs))


def _random_mem(rng):
    return MemState({i: rng.choice(["", "1", "01", "11", "101"])
                     for i in range(rng.randint(0, 3))})


def test_bijection_random_smoke():
    rng = random.Random(42)
    for _ in range(150):
        prog = _random_program(rng, rng.randint(0, 6))
        t = proc_of_bbram(prog)
        assert T.validate_ramp(t)
        assert program_of_ramp(t) == prog
        # and the other direction, modulo canonical names
        assert T.canonical_rename(proc_of_bbram(program_of_ramp(t))) == T.canonical_rename(t)


def test_run_bbram():
    res = run_bbram(parse_program("halt\n"), IMS, 10)
    assert res.halted and res.mem == IMS and res.op_steps == 0

    res = run_bbram(parse_program("add:#1:#1:0\nhalt\n"), EMPTY_MEM, 10)
    assert res.halted and res.mem == MemState({0: "01"})
    res = run_bbram(parse_program("add:#1:#1:0\nhalt\n"), IMS, 10)
    assert res.mem == MemState({0: "01", 1: "1101", 6: "011"})

    res = run_bbram(Program((Jmp(CmpOp("eq", Imm(0), Imm(0)), 1),)), IMS, 100)
    assert not res.halted and res.mem is None
    assert res.jmp_steps == 100


def test_oracle_equivalence_smoke():
    rng = random.Random(20260826)
    checked = 0
    for _ in range(120):
        prog = _random_program(rng, rng.randint(0, 5))
        sigma = _random_mem(rng)
        res = run_bbram(prog, sigma, 200)
        t = proc_of_bbram(prog)
        l = build_lts(t, T.Valuation.make({"RM": sigma}), max_states=3000)
        if l.exploded:
            assert not res.halted
            continue
        halts = eventually_halts(l)
        assert halts == res.halted
        if halts:
            vals = terminal_valuations(l)
            mems = {v.get("RM") for v in vals}
            assert mems == {res.mem}
            assert depth(l) == res.op_steps + res.jmp_steps
            checked += 1
    assert checked > 30
