import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

from alphacent.errors import DimensionMismatch
from alphacent.helpers.formats import counted, fmt, key_values, render_table
from alphacent.helpers.utils import exact_col_sums, exact_dot, exact_matvec, exact_row_sums, exact_sum
from alphacent.trace import RoundTrace


def test_exact_sum_is_order_independent(rng):
    values = rng.normal(size=1000) * 10.0 ** rng.integers(-8, 8, size=1000)
    assert exact_sum(values.tolist()) == exact_sum(values[::-1].tolist())
    assert exact_sum([1e16, 1.0, -1e16]) == 1.0


def test_exact_matvec(rng):
    m = rng.uniform(size=(5, 4))
    v = rng.uniform(size=4)
    assert_array_equal(exact_matvec(m, v), [math.fsum(row * v) for row in m])
    assert exact_dot(m[0], v) == exact_matvec(m, v)[0]
    assert_array_equal(exact_row_sums(m), [math.fsum(row) for row in m])
    assert_array_equal(exact_col_sums(m), exact_row_sums(m.T))


def test_counted():
    assert counted(1, "round") == "1 round"
    assert counted(3, "round") == "3 rounds"
    assert counted(0, "entry", "entries") == "0 entries"


def test_fmt_and_key_values():
    assert fmt(1 / 3) == "0.333333333333333"
    assert fmt(True) == "True"
    assert fmt("x") == "x"
    text = key_values({"rounds": 4, "c": np.array([1.0, 2.5]), "ok": False})
    assert text == "rounds = 4\nc = 1 2.5\nok = False\n"


def test_render_table():
    frame = pd.DataFrame({"agent": [1, 2], "c": [2.0, 1 / 3]})
    lines = render_table(frame, digits=3).splitlines()
    assert len(lines) == 3
    assert lines[0].split() == ["agent", "c"]
    assert lines[2].split() == ["2", "0.333"]


def test_trace_frame(tmp_path):
    trace = RoundTrace("estimate", ("c", "x"))
    trace.record(c=np.zeros(3), x=np.ones(3))
    trace.record(c=np.ones(3), x=np.full(3, 2.0))

    frame = trace.to_frame(["c"])
    assert list(frame.columns) == ["t", "agent", "c"]
    assert list(frame["agent"]) == [1, 2, 3, 1, 2, 3]
    assert_array_equal(trace.series("x")[:, 0], [1.0, 2.0])
    assert trace.last_round == 1

    trace.to_csv(tmp_path / "trace.csv")
    assert list(pd.read_csv(tmp_path / "trace.csv").columns) == ["t", "agent", "c", "x"]


def test_trace_requires_every_observable():
    trace = RoundTrace("consensus", ("c", "x"))
    with pytest.raises(DimensionMismatch):
        trace.record(c=np.zeros(2))
