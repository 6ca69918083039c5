"""Step-count measures over evaluated terms, and checkers for "computes a
function within a step bound" at enumerable scale.

All measures are longest-path lengths of the evaluated transition system
with a label filter: sequential time counts every non-silent step, the
asynchronous-parallel time takes a per-component maximum over steps touching
that component's memory, and the synchronous-parallel pair splits steps into
handshakes and computational work.  A measure is defined only when the
evaluated term eventually halts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import terms as T
from .memory import EMPTY_MEM
from .semantics import (
    Lts, SemanticsError, build_lts, depth, eventually_halts, terminal_valuations,
)


class MeasureUndefinedError(SemanticsError):
    """The term does not eventually halt, so no step count exists."""


@dataclass(frozen=True, slots=True)
class MeasureReport:
    measure: str
    value: int
    per_component: tuple = ()  # (component number, value) pairs, if any
    states: int = 0
    transitions: int = 0

    def to_json(self) -> dict:
        out = {
            "measure": self.measure,
            "value": self.value,
            "states": self.states,
            "transitions": self.transitions,
        }
        if self.per_component:
            out["per_component"] = {str(i): v for i, v in self.per_component}
        return out


def _halting_lts(t, rho, max_states) -> Lts:
    l = build_lts(t, rho, max_states)
    if not eventually_halts(l):
        raise MeasureUndefinedError("measure undefined: the term does not eventually halt")
    return l


def _report(name, l: Lts, value, per_component=()) -> MeasureReport:
    return MeasureReport(name, value, tuple(per_component), len(l.states), len(l.transitions))


def sutm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Sequential time: every non-silent step counts."""
    l = _halting_lts(t, rho, max_states)
    return _report("sutm", l, depth(l))


def swm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Sequential work; a sequential machine does one unit per step."""
    r = sutm(t, rho, max_states)
    return MeasureReport("swm", r.value, (), r.states, r.transitions)


def aputm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Asynchronous-parallel time: the slowest component's own steps.

    A step belongs to component i when its label touches RM_i (as target or
    inside the assigned expression).
    """
    n = T.validate_apramp(t)
    l = _halting_lts(t, rho, max_states)
    per = []
    for i in range(1, n + 1):
        sel = T.ActionSet.mentioning("RM_%d" % i)
        per.append((i, depth(l, count=sel.contains_label)))
    return _report("aputm", l, max(v for _, v in per), per)


def apwm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Asynchronous-parallel work: all non-silent steps along a longest run."""
    T.validate_apramp(t)
    l = _halting_lts(t, rho, max_states)
    return _report("apwm", l, depth(l))


def sputm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Synchronous-parallel time: handshake rounds only."""
    T.validate_spramp(t)
    l = _halting_lts(t, rho, max_states)
    sync = T.Plain("sync")
    return _report("sputm", l, depth(l, count=lambda lab: lab == sync))


def spwm(t, rho: T.Valuation, max_states: int = 100000) -> MeasureReport:
    """Synchronous-parallel work: computational (non-handshake) steps."""
    T.validate_spramp(t)
    l = _halting_lts(t, rho, max_states)
    sync = T.Plain("sync")
    return _report(
        "spwm", l, depth(l, count=lambda lab: not isinstance(lab, T.Tau) and lab != sync)
    )


MEASURES = {
    "sutm": sutm,
    "swm": swm,
    "aputm": aputm,
    "apwm": apwm,
    "sputm": sputm,
    "spwm": spwm,
}

_MEASURE_CLASS = {
    "sutm": ("sequential machine", T.validate_ramp),
    "swm": ("sequential machine", T.validate_ramp),
    "aputm": ("interleaved parallel machine", T.validate_apramp),
    "apwm": ("interleaved parallel machine", T.validate_apramp),
    "sputm": ("lockstep parallel machine", T.validate_spramp),
    "spwm": ("lockstep parallel machine", T.validate_spramp),
}


def check_measure_class(measure: str, t):
    """Raise unless t has the machine shape the measure is defined for."""
    kind, validator = _MEASURE_CLASS[measure]
    try:
        ok = validator(t)
    except ValueError:
        ok = False
    if not ok:
        raise ValueError("measure %s requires a %s term" % (measure, kind))


# ---------------------------------------------------------------------------
# Computing functions on bit strings

@dataclass(frozen=True, slots=True)
class FunctionSpec:
    """A partial function on bit-string tuples with an input enumeration.

    oracle(args) returns the result string, or None where the function is
    undefined.
    """

    arity: int
    oracle: object
    inputs: tuple = ()
    name: str = ""


def all_inputs(arity: int, max_len: int):
    """Every tuple of bit strings (empty string included) up to max_len."""
    pool = [""]
    for ln in range(1, max_len + 1):
        pool.extend(_strings_of(ln))
    out = [()]
    for _ in range(arity):
        out = [prev + (w,) for prev in out for w in pool]
    return tuple(out)


def _strings_of(ln):
    if ln == 0:
        return [""]
    return [w + b for w in _strings_of(ln - 1) for b in "01"]


def input_valuation(args, extra_vars=()) -> T.Valuation:
    """The starting environment: argument k in register k of RM, every other
    flexible variable empty."""
    mem = EMPTY_MEM
    for k, w in enumerate(args, start=1):
        mem = mem.set(k, w)
    env = {"RM": mem}
    for v in extra_vars:
        env.setdefault(v, EMPTY_MEM)
    return T.Valuation.make(env)


@dataclass(frozen=True, slots=True)
class CheckRow:
    args: tuple
    expected: object  # str | None
    got: object  # str | None when a unique result exists
    steps: object  # int | None
    bound: object  # int | None
    status: str  # "pass" | "fail" | "undecided"
    note: str = ""


@dataclass(frozen=True, slots=True)
class Verdict:
    rows: tuple

    @property
    def all_pass(self) -> bool:
        return all(r.status == "pass" for r in self.rows)

    @property
    def failures(self):
        return tuple(r for r in self.rows if r.status == "fail")

    @property
    def undecided(self):
        return tuple(r for r in self.rows if r.status == "undecided")


def check_computes(t, f: FunctionSpec, w_bound=None, inputs=None,
                   max_states: int = 100000) -> Verdict:
    """Does t compute f within w_bound steps on the given inputs?

    Defined inputs must halt with register 0 of RM equal to the oracle's
    answer in every terminal state, within w_bound(total input length) steps.
    Undefined inputs must not halt; when exploration can't settle that, the
    row is undecided rather than passed.
    """
    if inputs is None:
        inputs = f.inputs
    rows = []
    extra = sorted(T.flexvars_term(t))
    for args in inputs:
        size = sum(len(w) for w in args)
        bound = w_bound(size) if w_bound is not None else None
        try:
            expected = f.oracle(args)
        except Exception as e:
            rows.append(CheckRow(args, None, None, None, bound, "fail",
                                 "oracle error: %s" % e))
            continue
        rho = input_valuation(args, extra)
        rows.append(_check_one(t, rho, args, expected, bound, max_states))
    return Verdict(tuple(rows))


def _check_one(t, rho, args, expected, bound, max_states) -> CheckRow:
    try:
        l = build_lts(t, rho, max_states)
    except SemanticsError as e:
        return CheckRow(args, expected, None, None, bound, "fail", str(e))
    if l.exploded:
        return CheckRow(
            args, expected, None, None, bound, "undecided",
            "exploration stopped at %d states" % len(l.states),
        )
    halts = eventually_halts(l)
    if expected is None:
        if halts:
            return CheckRow(args, None, _unique_result(l), depth(l), bound, "fail",
                            "halts where the function is undefined")
        return CheckRow(args, None, None, None, bound, "pass")
    if not halts:
        return CheckRow(args, expected, None, None, bound, "fail", "does not halt")
    results = {rho2.get("RM").get(0) for rho2 in terminal_valuations(l)}
    steps = depth(l)
    if results != {expected}:
        return CheckRow(args, expected, "|".join(sorted(results)), steps, bound, "fail",
                        "wrong result")
    if bound is not None and steps > bound:
        return CheckRow(args, expected, expected, steps, bound, "fail", "over the step bound")
    return CheckRow(args, expected, expected, steps, bound, "pass")


def _unique_result(l):
    results = {rho.get("RM").get(0) for rho in terminal_valuations(l)}
    return "|".join(sorted(results)) if results else None


def is_of_complexity(t, f: FunctionSpec, v_bound, measure: str, inputs=None,
                     max_states: int = 100000) -> Verdict:
    """t computes f, and the named measure stays within v_bound per input."""
    if measure not in MEASURES:
        raise ValueError("unknown measure %r" % (measure,))
    check_measure_class(measure, t)
    if inputs is None:
        inputs = f.inputs
    base = check_computes(t, f, None, inputs, max_states)
    rows = []
    extra = sorted(T.flexvars_term(t))
    for row in base.rows:
        if row.status != "pass" or row.expected is None:
            rows.append(row)
            continue
        rho = input_valuation(row.args, extra)
        size = sum(len(w) for w in row.args)
        bound = v_bound(size)
        value = MEASURES[measure](t, rho, max_states).value
        if value <= bound:
            rows.append(CheckRow(row.args, row.expected, row.got, value, bound, "pass"))
        else:
            rows.append(CheckRow(row.args, row.expected, row.got, value, bound, "fail",
                                 "measure over the bound"))
    return Verdict(tuple(rows))


# ---------------------------------------------------------------------------
# Affine step bounds

_AFFINE = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?(n)?\s*(?:\+?\s*(\d+))?\s*$")


def parse_affine(text: str):
    """Parse `a*n+b` (each piece optional, e.g. `3*n`, `n+7`, `12`)."""
    m = _AFFINE.match(text)
    if not m or not any(m.groups()):
        raise ValueError("expected an affine bound like 'a*n+b', got %r" % (text,))
    a_txt, n_txt, b_txt = m.groups()
    if a_txt is not None and n_txt is None:
        raise ValueError("coefficient without n in %r" % (text,))
    a = int(a_txt) if a_txt is not None else (1 if n_txt else 0)
    b = int(b_txt) if b_txt is not None else 0
    return lambda n: a * n + b


def format_check_table(verdict: Verdict) -> str:
    """Human-readable per-input table for the checkers."""
    lines = ["%-24s %-12s %-12s %8s %8s  %s" % ("input", "expected", "got", "steps", "bound", "status")]
    for r in verdict.rows:
        args = "(" + ", ".join(w or "e" for w in r.args) + ")"
        lines.append(
            "%-24s %-12s %-12s %8s %8s  %s%s"
            % (
                args,
                _cell(r.expected), _cell(r.got), _cell(r.steps), _cell(r.bound),
                r.status, " (%s)" % r.note if r.note else "",
            )
        )
    return "\n".join(lines)


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, str):
        return v if v else "e"
    return str(v)
