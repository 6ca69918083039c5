"""Hand-built terms shared across tests: the absolute-difference term and
the repeated-subtraction division term, with their worked-example inputs."""

from ramproc import terms as T
from ramproc.memory import EMPTY_MEM, MemState
from ramproc.ramops import BinOp, CmpOp, Dir, Imm, Ind, Load

# Two-register view of a pair of one-register memories: reg 0 from the
# private side, reg 1 pulled in from the shared side (address register 7
# is empty, so it points at shared register 0).
PAIR = Load(Ind(7), Dir(1))
FIRST = Load(Ind(7), Dir(0))
GT = CmpOp("gt", Dir(1), Dir(0))


def pair_of(priv, shared):
    return T.Apply2(PAIR, priv, shared)


def extract0(e):
    return T.Apply2(FIRST, T.MemLiteral(EMPTY_MEM), e)


def abs_diff_term():
    m = pair_of(T.FlexVar("d"), T.FlexVar("j"))
    sub01 = T.Apply1(BinOp("sub", Dir(0), Dir(1), Dir(0)), m)
    sub10 = T.Apply1(BinOp("sub", Dir(1), Dir(0), Dir(0)), m)
    return T.Seq(
        T.Assign("d", T.FlexVar("i")),
        T.Alt(
            T.Guard(T.PropAtom(GT, m, 0), T.Assign("d", extract0(sub01))),
            T.Guard(T.PropAtom(GT, m, 1), T.Assign("d", extract0(sub10))),
        ),
    )


def abs_diff_valuation(i="1101", j="11"):
    return T.Valuation.make({
        "i": MemState({0: i}),
        "j": MemState({0: j}),
        "d": EMPTY_MEM,
    })


def division_term():
    m = pair_of(T.FlexVar("r"), T.FlexVar("j"))
    inc_q = T.Apply1(BinOp("add", Dir(0), Imm(1), Dir(0)), T.FlexVar("q"))
    sub_rj = extract0(T.Apply1(BinOp("sub", Dir(0), Dir(1), Dir(0)), m))
    spec = T.RecSpec((
        ("Q", T.Alt(
            T.Guard(T.PropAtom(GT, m, 0), T.Seq(T.Assign("q", inc_q), T.Var("R"))),
            T.Guard(T.PropAtom(GT, m, 1), T.EPS),
        )),
        ("R", T.Guard(T.TRUE, T.Seq(T.Assign("r", sub_rj), T.Var("Q")))),
    ))
    return T.Seq(
        T.Assign("q", T.MemLiteral(MemState({0: "0"}))),
        T.Seq(T.Assign("r", T.FlexVar("i")), T.Rec("Q", spec)),
    )


def division_valuation(i="1101", j="11"):
    return T.Valuation.make({
        "i": MemState({0: i}),
        "j": MemState({0: j}),
        "q": EMPTY_MEM,
        "r": EMPTY_MEM,
    })


DIVISION_PROGRAM = """\
mov:1:3
jmp:gt:2:3:6
sub:3:2:3
add:0:#1:0
jmp:eq:#0:#0:2
halt
"""

ADDITION_PROGRAM = "add:1:2:0\nhalt\n"
BROKEN_ADDITION_PROGRAM = "add:1:1:0\nhalt\n"
