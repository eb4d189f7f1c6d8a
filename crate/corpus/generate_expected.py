"""Writes every corpus expect.tsv from plain-Python computations.

Nothing here calls the engine. Reference table values are asserted against
the computed grids before anything is written.

    python3 corpus/generate_expected.py
"""

import datetime as dt
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent
EPOCH = dt.date(1899, 12, 30)


def serial(d):
    return (d - EPOCH).days


def iso(d):
    return d.isoformat()


def eomonth(d, months):
    m = d.month - 1 + months
    y, m = d.year + m // 12, m % 12 + 1
    first_next = dt.date(y + (m == 12), m % 12 + 1, 1)
    return first_next - dt.timedelta(days=1)


def round_half_away(x):
    return math.copysign(math.floor(abs(x) + 0.5), x)


def cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, float) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def section(target, rows):
    lines = [f"target {target}"]
    lines += ["\t".join(cell(v) for v in row) for row in rows]
    return lines


def write(case, blocks):
    text = []
    for mode, sections in blocks:
        text.append(f"mode {mode}")
        for target, rows in sections:
            text += section(target, rows)
    (ROOT / case / "expect.tsv").write_text("\n".join(text) + "\n")


def col(values):
    return [[v] for v in values]


def growth():
    write("growth", [("reltol 1e-12", [("A1#", col([10000 * 1.05**k for k in range(13)]))])])


RATES = [0.035, 0.0375, 0.04, 0.045, 0.0525, 0.05, 0.0425, 0.039, 0.036, 0.032]


def recursion():
    path = [250000.0]
    for r in RATES:
        path.append(path[-1] * (1 + r))
    write(
        "recursion",
        [
            ("reltol 1e-12", [("D3#", col(path)), ("E3#", col(path))]),
            ("abstol 1e-9", [("F3", [[0.0]])]),
        ],
    )


def portfolio():
    a = [500 * 1.05**k for k in range(6)]
    b = [480 * 1.04**k for k in range(6)]
    yearly = [x + y for x, y in zip(a, b)]
    totals = [sum(a), sum(b), sum(a) + sum(b)]
    rounded = [round_half_away(v) for v in yearly]
    assert rounded == [980, 1024, 1070, 1119, 1169, 1222], rounded
    assert [round_half_away(v) for v in totals] == [3401, 3184, 6585]
    table = [['""', '""']] + [[x, y] for x, y in zip(a, b)] + [['""', '""'], totals[:2]]
    column = [[0.0]] + col(yearly) + [[0.0], [totals[2]]]
    write(
        "portfolio",
        [
            ("round", [("D4#", [[round_half_away(v) if isinstance(v, float) else v for v in r] for r in table]),
                       ("G4#", [[round_half_away(r[0])] for r in column])]),
            ("reltol 1e-12", [("G4#", column)]),
            ("abstol 1e-9", [("I4", [[0.0]])]),
        ],
    )


def corkscrew():
    revenue = [105000 * 1.05**k for k in range(6)]
    cogs = [135000, 125000, 115000, 105000, 95000, 85000]
    balance, acc = [], 0.0
    for r, c in zip(revenue, cogs):
        acc += r - c
        balance.append(acc)
    rb = [round_half_away(v) for v in balance]
    assert rb == [-30000, -44750, -43988, -27437, 5191, 54201], rb
    assert [round_half_away(v) for v in revenue] == [105000, 110250, 115763, 121551, 127628, 134010]
    dates = [iso(eomonth(dt.date(2023, 1, 31), k)) for k in range(1, 7)]
    write(
        "corkscrew",
        [
            ("round", [("balance#", [rb]), ("Revenue", [[round_half_away(v) for v in revenue]])]),
            ("reltol 1e-12", [("balance#", [balance])]),
            ("exact", [("B1#", [dates])]),
        ],
    )


def seasonality():
    sales = [120, 150, 170, 210, 130, 160, 185, 225, 140, 172, 195, 240]
    total = sum(sales)
    shares = [sum(sales[y * 4 + q] for y in range(3)) / total for q in range(4)]
    write("seasonality", [("reltol 1e-12", [("A3#", [shares]), ("A5", [[1.0]])])])


def payments():
    def place(start, occurrences, periodicity, amount, n):
        due = {start + i * periodicity for i in range(occurrences)}
        return [float(amount) if k in due else 0.0 for k in range(1, n + 1)]

    row = place(3, 2, 4, 100, 8)
    assert row == [0, 0, 100, 0, 0, 0, 100, 0]
    write(
        "payments",
        [("exact", [("A2#", [row]), ("A5#", [place(2, 3, 3, 50, 12)]), ("A6#", [place(1, 4, 3, 25, 12)])])],
    )


def rowlambda():
    write("rowlambda", [("exact", [("E3", [[3]]), ("F3#", col(range(1, 7))), ("G3", [[6]])])])


def rk4_crane(f, dt_, steps, eps=0.1):
    def u(t):
        if t < 2:
            return 1.0
        if t < 4:
            return -f
        if t < 6:
            return f
        if t < 8:
            return -1.0
        return 0.0

    def d(x, t):
        return [x[1], eps * x[2] + u(t), x[3], -x[2] - u(t)]

    traj = [[0.0, 0.0, 0.0, 0.0]]
    for r in range(steps):
        t = r * dt_
        x = traj[-1]
        d1 = [dt_ * v for v in d(x, t)]
        d2 = [dt_ * v for v in d([a + b / 2 for a, b in zip(x, d1)], t + dt_ / 2)]
        d3 = [dt_ * v for v in d([a + b / 2 for a, b in zip(x, d2)], t + dt_ / 2)]
        d4 = [dt_ * v for v in d([a + b for a, b in zip(x, d3)], t + dt_)]
        traj.append([x[i] + (d1[i] + 2 * d2[i] + 2 * d3[i] + d4[i]) / 6 for i in range(4)])
    return traj


def crane():
    traj = rk4_crane(0.5, 0.005, 1600)
    end = traj[-1]
    write(
        "crane",
        [("reltol 1e-9", [("trajectory#", traj), ("F1#", [end]), ("F2", [[end[2] ** 2 + end[3] ** 2]])])],
    )


def modeloff():
    start = dt.date(2013, 10, 1)
    ends = [eomonth(start, k) for k in range(12)]
    starts = [e.replace(day=1) for e in ends]
    assert [e.isoformat() for e in (ends[0], ends[-1])] == ["2013-10-31", "2014-09-30"]
    timing = [
        [float(k) for k in range(1, 13)],
        [float(serial(s)) for s in starts],
        [float(serial(e)) for e in ends],
        [float(e.year) for e in ends],
        [float(1 + (e.month - 1) // 3) for e in ends],
    ]
    assert timing[3] == [2013.0] * 3 + [2014.0] * 9
    assert timing[4] == [4, 4, 4, 1, 1, 1, 2, 2, 2, 3, 3, 3]

    revenue = [612296.0] * 3 + [363879.0] * 3 + [272909.0] * 3 + [545818.0] * 3
    costs = [350000.0 + 5000 * k for k in range(12)]

    def conv(a, b):
        out = [0.0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return out

    def working_capital(amounts, weights):
        change = [-v for v in conv(weights, amounts)[:12]]
        closing, acc = [], 0.0
        for a, c in zip(amounts, change):
            acc += a + c
            closing.append(acc)
        opening = [cl - (a + c) for cl, a, c in zip(closing, amounts, change)]
        return [opening, amounts, change, closing]

    receipts = [0.0, 0.6, 0.25, 0.15]
    diag = conv(receipts, revenue)
    expected_diagonals = [612296, 463246, 401141, 363879, 309297]
    assert all(abs(x - y) <= 1 for x, y in zip(diag[3:8], expected_diagonals))
    write(
        "modeloff",
        [
            ("exact", [("Forecast!F6#", timing)]),
            (
                "abstol 1e-6",
                [
                    ("Forecast!F12#", working_capital(revenue, receipts)),
                    ("Forecast!F17#", working_capital([-c for c in costs], [0.0, 0.5, 0.5, 0.0])),
                    ("Forecast!F22#", [diag]),
                ],
            ),
            ("abstol 1", [("TAKE(DROP(Forecast!F22#, , 3), , 5)", [[float(v) for v in expected_diagonals]])]),
        ],
    )


if __name__ == "__main__":
    for fn in (growth, recursion, portfolio, corkscrew, seasonality, payments, rowlambda, crane, modeloff):
        fn()
