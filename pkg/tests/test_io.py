import numpy as np
import pytest

from pvc import io
from pvc.tensor import Rng


def test_round_trip_bitwise(tmp_path):
    x = Rng(1).normal((2, 3, 5))
    path = tmp_path / "t.pvct"
    io.write_tensor(path, x)
    assert np.array_equal(io.read_tensor(path), x)


def test_round_trip_scalar_and_1d(tmp_path):
    for x in (np.array(3.5), np.arange(7.0)):
        p = tmp_path / "x.pvct"
        io.write_tensor(p, x)
        back = io.read_tensor(p)
        assert back.shape == x.shape
        assert np.array_equal(back, x)


def test_header_layout(tmp_path):
    path = tmp_path / "t.pvct"
    io.write_tensor(path, np.zeros((2, 3)))
    raw = path.read_bytes()
    assert raw[:4] == b"PVCT"
    assert int.from_bytes(raw[4:8], "little") == 1       # version
    assert int.from_bytes(raw[8:12], "little") == 2      # ndim
    assert int.from_bytes(raw[12:20], "little") == 2     # extent 0
    assert int.from_bytes(raw[20:28], "little") == 3     # extent 1
    assert len(raw) == 28 + 8 * 6


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.pvct"
    path.write_bytes(b"NOPE" + b"\0" * 32)
    with pytest.raises(io.PvctError):
        io.read_tensor(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.pvct"
    io.write_tensor(path, np.zeros(4))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(io.PvctError):
        io.read_tensor(path)


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "m.manifest"
    io.write_manifest(path, {"a": 1, "b.c": "hello world"})
    assert io.read_manifest(path) == {"a": "1", "b.c": "hello world"}


def test_manifest_comments_and_blanks(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("# header\n\nkey = value  # trailing\n")
    assert io.read_manifest(path) == {"key": "value"}


def test_manifest_malformed(tmp_path):
    path = tmp_path / "m.manifest"
    path.write_text("not a pair\n")
    with pytest.raises(io.PvctError):
        io.read_manifest(path)
