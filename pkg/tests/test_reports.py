import json
import math

import numpy as np
import pytest

from rieszlab import reports as rep
from rieszlab.errors import ParameterError, ValidationError


def test_rzfm_roundtrip():
    rng = np.random.default_rng(3)
    e = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
    raw = rep.rzfm_bytes(e)
    assert raw[:4] == b"RZFM"
    assert raw[4] == 1
    assert int.from_bytes(raw[5:9], "little") == 7
    assert len(raw) == 9 + 8 * 49
    back = rep.read_rzfm(raw)
    np.testing.assert_array_equal(back, e.astype(np.complex64))


def test_rzfm_rejects_bad_input():
    raw = rep.rzfm_bytes(np.eye(3))
    with pytest.raises(ValidationError):
        rep.read_rzfm(b"XXXX" + raw[4:])
    with pytest.raises(ValidationError):
        rep.read_rzfm(raw[:4] + bytes([2]) + raw[5:])
    with pytest.raises(ValidationError):
        rep.read_rzfm(raw[:-8])
    with pytest.raises(ParameterError):
        rep.rzfm_bytes(np.zeros((2, 3)))


def test_config_hash_is_key_order_free():
    a = rep.config_hash({"a": 1, "b": [1, 2]})
    assert a == rep.config_hash({"b": [1, 2], "a": 1})
    assert a != rep.config_hash({"a": 2, "b": [1, 2]})
    assert len(a) == 16
    assert rep.header_line(a).endswith(f"config={a}")


def test_csv_text_layout():
    text = rep.csv_text(("k", "x", "ok"), [(1, 0.1, True), (2, math.nan, False), (3, -math.inf, True)], "hdr")
    lines = text.split("\r\n")
    assert lines[0] == "# hdr"
    assert lines[1] == "k,x,ok"
    assert lines[2] == "1,0.1,true"
    assert lines[3] == "2,nan,false"
    assert lines[4] == "3,-inf,true"


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, np.float64(7.0)):
        assert float(rep.fmt(x)) == float(x)
    assert rep.fmt(np.int64(4)) == "4"


def test_json_text_cleans_values():
    body = json.loads(rep.json_text({"z": 1 + 2j, "v": np.arange(2), "n": math.inf, "b": np.bool_(True)}, "h"))
    assert list(body) == ["_header", "z", "v", "n", "b"]
    assert body["z"] == [1.0, 2.0]
    assert body["v"] == [0, 1]
    assert body["n"] == "inf"
    assert body["b"] is True


def test_write_and_read_csv(tmp_path):
    p = rep.write_csv(tmp_path / "sub" / "a.csv", ("a", "b"), [(1, 2.5)], "h")
    cols, rows = rep.read_csv(p)
    assert cols == ["a", "b"]
    assert rows == [["1", "2.5"]]
    assert not [f for f in p.parent.iterdir() if f.name.endswith(".tmp")]


def test_plot_text_and_polylines():
    assert rep.plot_text([1, 2], [3.5, 4], ["h"]) == "# h\n1 3.5\n2 4\n"
    text = rep.polyline_text([[(0, 0), (1, 1)], [(2, 2)]])
    assert text == "0 0\n1 1\n\n2 2\n"


def test_worker_count(monkeypatch):
    monkeypatch.delenv(rep.THREADS_ENV, raising=False)
    assert rep.worker_count() == 1
    monkeypatch.setenv(rep.THREADS_ENV, "4")
    assert rep.worker_count() == 4
    for bad in ("0", "-2", "two"):
        monkeypatch.setenv(rep.THREADS_ENV, bad)
        with pytest.raises(ValidationError):
            rep.worker_count()


def test_parallel_map_preserves_order(monkeypatch):
    items = list(range(50))
    monkeypatch.setenv(rep.THREADS_ENV, "4")
    par = rep.parallel_map(lambda x: x * x, items)
    monkeypatch.setenv(rep.THREADS_ENV, "1")
    assert par == rep.parallel_map(lambda x: x * x, items) == [x * x for x in items]
