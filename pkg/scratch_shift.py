"""Scratch experiment: validate shift-machine table variants against closed forms."""
import numpy as np
from naivetm.simplex import SymbolSet, Distribution, dirac
from naivetm.machine import (
    TuringMachine, DiscreteConfig, det_run, det_step, TapeBelief, ConfigBelief,
    naive_run, standard_run,
)

DIGITS = [str(i) for i in range(10)]
ALPHA = SymbolSet(["#", "A", "B"] + DIGITS)  # '#' is the blank
STATES = SymbolSet(["q_start", "q_halt", "goR", "goLA", "goLB"])


def shift_machine(fill="halt", digit_goR="halt", start_dec=True, halt_on_return="0"):
    delta = {}
    # fill everything with the chosen default first, then overwrite
    for sym in ALPHA:
        for st in STATES:
            if fill == "halt":
                delta[(sym, st)] = (sym, "q_halt", "stay")
            else:
                delta[(sym, st)] = (sym, st, "stay")
    for sym in ALPHA:
        delta[(sym, "q_halt")] = (sym, "q_halt", "stay")
    for d in range(1, 10):
        if start_dec:
            delta[(str(d), "q_start")] = (str(d - 1), "goR", "right")
        else:
            delta[(str(d), "q_start")] = (str(d), "goR", "right")
    delta[("0", "q_start")] = ("0", "q_halt", "stay")
    for i in ["A", "B"]:
        delta[(i, "q_start")] = (i, "goR", "right")
        delta[(i, "goR")] = (i, "goR", "right")
    delta[("#", "goR")] = ("#", "goLA", "left")
    if digit_goR == "right":
        for d in range(10):
            delta[(str(d), "goR")] = (str(d), "goR", "right")
    for i in ["A", "B"]:
        for j in ["A", "B"]:
            delta[(i, "goL" + j)] = (j, "goL" + i, "left")
    if halt_on_return == "0":
        for d in range(1, 10):
            for i in ["A", "B"]:
                delta[(str(d), "goL" + i)] = (str(d - 1), "goR", "right")
        for i in ["A", "B"]:
            delta[("0", "goL" + i)] = ("0", "q_halt", "stay")
    else:  # paper-literal: halt when reading 1
        for d in range(2, 10):
            for i in ["A", "B"]:
                delta[(str(d), "goL" + i)] = (str(d - 1), "goR", "right")
        for i in ["A", "B"]:
            delta[("1", "goL" + i)] = ("0", "q_halt", "stay")
    return TuringMachine(ALPHA, STATES, delta, "q_start", "q_halt")


def det_trace_check(m):
    tape = {0: "2"}
    for i, ch in enumerate("BABBABAB"):
        tape[i + 1] = ch
    cfg = DiscreteConfig(tape, "q_start", blank="#")
    final = det_run(m, cfg, 40)
    out = "".join(final.cell(i, "#") for i in range(0, 9))
    return out, final.state


def cell1(m, h, k, a2, a3, t):
    c0 = np.zeros(len(ALPHA)); c0[ALPHA.index("0")] = 1 - h; c0[ALPHA.index("2")] = h
    c1 = np.zeros(len(ALPHA)); c1[ALPHA.index("B")] = 1 - k; c1[ALPHA.index("A")] = k
    cells = {
        0: Distribution(ALPHA, c0),
        1: Distribution(ALPHA, c1),
        2: dirac(ALPHA, a2),
        3: dirac(ALPHA, a3),
    }
    belief = ConfigBelief(TapeBelief(ALPHA, cells), dirac(STATES, "q_start"))
    out = naive_run(m, belief, t)
    d = out.tape.cell(1)
    return d["A"], d["B"], out


def grid_check(m, t, n=9):
    hs = np.linspace(0.0, 1.0, n)
    worstAA = 0.0
    worstAB = 0.0
    for h in hs:
        for k in hs:
            a, b, _ = cell1(m, h, k, "A", "A", t)
            expect_a = 1 - (1 - h) ** 2 * (1 - k)
            worstAA = max(worstAA, abs(a - expect_a))
            a, b, _ = cell1(m, h, k, "A", "B", t)
            ea = (1 - h) ** 2 * k + 2 * h * (1 - h)
            eb = (1 - h) ** 2 * (1 - k) + h * h
            worstAB = max(worstAB, abs(a - ea), abs(b - eb))
    return worstAA, worstAB


for variant in [
    dict(fill="halt", digit_goR="halt", start_dec=True, halt_on_return="0"),
    dict(fill="halt", digit_goR="right", start_dec=True, halt_on_return="0"),
    dict(fill="loop", digit_goR="halt", start_dec=True, halt_on_return="0"),
    dict(fill="halt", digit_goR="halt", start_dec=False, halt_on_return="1"),
]:
    m = shift_machine(**variant)
    trace, st = det_trace_check(m)
    marks = []
    for t in (20, 30, 40, 60):
        wAA, wAB = grid_check(m, t, n=7)
        marks.append(f"t={t}: AA={wAA:.3e} AB={wAB:.3e}")
    print(variant)
    print(f"  det trace: {trace} state={st}")
    for s in marks:
        print("  " + s)

# standard run closed form on the best variant
m = shift_machine()
h, k = 0.3, 0.6
c0sub = SymbolSet(["0", "2"]); c1sub = SymbolSet(["B", "A"])
unc = {0: Distribution(c0sub, [1 - h, h]), 1: Distribution(c1sub, [1 - k, k])}
base = DiscreteConfig({2: "A", 3: "A"}, "q_start", blank="#")
res = standard_run(m, base, unc, 25)
sa = res.cell_marginal(1)["A"]
print("standard (A,A) cell1 A:", sa, "expected", (1 - h) * k + h)
