import io
import json

import numpy as np
import pytest

from bplt.exceptions import ValidationError
from bplt.utils import ScalarTable, format_float, format_row, parallel_map, parse_sweep, thread_count, write_csv


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(np.pi)) == np.pi
    assert format_float(3) == "3"
    assert format_float(np.int64(4)) == "4"
    assert format_float(None) == ""
    assert format_float(True) == "true"
    assert format_float(np.bool_(False)) == "false"
    assert format_row([1, 0.5, "x", None]) == "1,0.5,x,"


def test_parse_sweep():
    assert parse_sweep("0:1:5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_sweep("0.3:0.3:1").tolist() == [0.3]
    for text in ("0:1", "a:1:2", "0:1:0", "1:0:3"):
        with pytest.raises(ValidationError):
            parse_sweep(text)


def test_thread_count(monkeypatch):
    monkeypatch.delenv("BPLT_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("BPLT_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("BPLT_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("BPLT_THREADS", "many")
    with pytest.raises(ValidationError):
        thread_count()


def test_parallel_map_keeps_order():
    items = list(range(12))
    assert parallel_map(lambda x: x * x, items, threads=1) == [x * x for x in items]
    assert parallel_map(lambda x: x * x, items, threads=3) == [x * x for x in items]
    # a second run with the same pool size must not reuse a closed pool
    assert parallel_map(lambda x: x + 1, items, threads=3) == [x + 1 for x in items]


def test_write_csv():
    out = io.StringIO()
    write_csv(["c", "rate"], [[0.5, -0.25], [1, None]], out, comments=["formula: test"])
    assert out.getvalue() == "# formula: test\nc,rate\n0.5,-0.25\n1,\n"


def test_scalar_table():
    table = ScalarTable(rate=-0.5, count=np.int64(3), flag=np.bool_(True), big=np.inf, name="K3")
    assert str(table).splitlines() == ["key,value", "rate,-0.5", "count,3", "flag,true", "big,inf", "name,K3"]
    assert json.loads(table.as_json()) == {"rate": -0.5, "count": 3, "flag": True, "big": "inf", "name": "K3"}
