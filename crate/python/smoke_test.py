"""Smoke test for the gridlambda extension module.

Build and place the module next to this script:

    cargo build -p gridlambda-py --features extension-module --release
    cp target/release/libgridlambda.so python/gridlambda.so
    python3 python/smoke_test.py
"""

import cmath
import math
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

import gridlambda  # noqa: E402

CORPUS = HERE.parent / "corpus"


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print("ok", what)


def workbook_basics():
    wb = gridlambda.Workbook()
    wb.define_name("Addλ", "=LAMBDA(x, y, x + y)")
    wb.set("A1", "=SEQUENCE(3)")
    wb.set("B1", "=SCAN(0, A1#, Addλ)")
    report = wb.recalculate()
    check(report["errors"] == [], "no errors after recalculation")
    check(wb.values("B1#") == [[1.0], [3.0], [6.0]], "SCAN over a spill reference")
    check(wb.spill_region("A1") == "A1:A3", "spill region of A1")

    stale = wb.set("A2", "x")
    check("Sheet1!B1" in stale, "blocking a spill marks dependents stale")
    wb.recalculate()
    err = wb.value("A1")
    check(isinstance(err, gridlambda.CellError) and err.kind == "#SPILL!", "blocked anchor shows #SPILL!")

    wb.trace = True
    check(wb.evaluate("=LET(x, 2, x * x + x)") == 6.0, "LET through evaluate")
    check(wb.trace_count("repl", "x") == 1, "LET binding evaluated once")


def corpus_workbooks():
    wb = gridlambda.Workbook.open(str(CORPUS / "corkscrew" / "model.wb"))
    wb.recalculate()
    balances = [round(v) for v in wb.values("balance#")[0]]
    check(balances == [-30000, -44750, -43988, -27437, 5191, 54201], "corkscrew balances")
    again = gridlambda.Workbook.from_text(wb.to_text())
    again.recalculate()
    check(again.values("balance#") == wb.values("balance#"), "workbook text round trip")

    rows = gridlambda.run_corpus(str(CORPUS))
    check(len(rows) >= 9 and all(m == 0 for _, _, m in rows), "golden corpus passes")

    try:
        gridlambda.Workbook.from_text("A1 := =SUM(1,\n")
    except ValueError as e:
        check("line 1" in str(e), "format error names the line")
    else:
        raise AssertionError("expected a ValueError")


def standalone():
    check(gridlambda.evaluate("=SUM({1,2;3,4})") == 10.0, "standalone evaluate")
    check(gridlambda.evaluate("=1/0").kind == "#DIV/0!", "error values")
    check(gridlambda.evaluate("=LAMBDA(x, x)").kind == "#CALC!", "bare lambda is #CALC!")


def numerics():
    spectrum = gridlambda.fft([1, 1, 1, 1])
    check(abs(spectrum[0] - 4) < 1e-12 and all(abs(z) < 1e-12 for z in spectrum[1:]), "fft of a constant")
    x = [complex(math.sin(k), math.cos(3 * k)) for k in range(8)]
    back = gridlambda.fft(gridlambda.fft(x), inverse=True)
    check(max(abs(a - b) for a, b in zip(x, back)) < 1e-12, "inverse fft")
    try:
        gridlambda.fft([1, 2, 3])
    except ValueError:
        check(True, "fft rejects length 3")
    else:
        raise AssertionError("expected a ValueError for length 3")

    check(gridlambda.convolve([1, 2], [3, 4], method="direct") == [3.0, 10.0, 8.0], "direct convolution")
    fast = gridlambda.convolve([1, 2], [3, 4])
    check(max(abs(a - b) for a, b in zip(fast, [3, 10, 8])) < 1e-12, "fft convolution")

    traj = gridlambda.rk4(lambda x, t: [-x[0]], [1.0], 0.0, 0.1, 10)
    check(len(traj) == 11 and abs(traj[-1][0] - math.exp(-1)) < 1e-6, "rk4 decay")

    f, fx = gridlambda.minimize(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    check(abs(f - 0.3) < 1e-6, "golden-section minimum")

    best = gridlambda.crane_optimal_fraction()
    check(abs(best - (math.cos(2) - math.cos(4)) / (1 - math.cos(2))) < 1e-15, "closed-form crane fraction")
    f, energy = gridlambda.minimize(gridlambda.crane_residual_energy, 0.0, 0.5, 1e-9)
    check(abs(f - best) < 1e-3, "optimized crane fraction")
    check(gridlambda.crane_residual_energy(0.5) / energy >= 1e6, "residual energy reduction")
    check(cmath.isclose(gridlambda.crane_residual_energy(0.3, epsilon=2.0), gridlambda.crane_residual_energy(0.3)), "energy ignores coupling")


if __name__ == "__main__":
    workbook_basics()
    corpus_workbooks()
    standalone()
    numerics()
    print("smoke test passed")
