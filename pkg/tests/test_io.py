import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aloha import io
from conftest import crandn


def test_grid_golden_bytes():
    g = io.GridFile(np.array([1 + 2j, -0.5 + 0j]), ("kx",))
    expect = (b"ALOHAKS1" + struct.pack("<HH", 1, 1) + struct.pack("<Q", 2) + bytes([0])
              + bytes([1]) + struct.pack("<4d", 1.0, 2.0, -0.5, 0.0))
    assert io.encode_grid(g) == expect


def test_mask_golden_bytes():
    m = np.array([[1, 0, 1], [0, 0, 1]], dtype=bool)
    expect = b"ALOHAMSK" + struct.pack("<H", 2) + struct.pack("<2Q", 2, 3) + bytes([1, 0, 1, 0, 0, 1])
    assert io.encode_mask(m) == expect
    assert np.array_equal(io.decode_mask(expect), m)


def test_roundtrip_files(tmp_path, rng):
    data = crandn(rng, 3, 5, 4)
    p = tmp_path / "a.ks"
    io.write_grid(p, io.GridFile(data, ("coil", "kx", "ky")))
    g = io.read_grid(p)
    assert g.roles == ("coil", "kx", "ky") and g.coils == 3
    assert np.array_equal(g.data, data)
    q = tmp_path / "b.ks"
    io.write_grid(q, g)
    assert p.read_bytes() == q.read_bytes()
    m = rng.uniform(size=(6, 7)) > 0.5
    io.write_mask(tmp_path / "m.msk", m)
    assert np.array_equal(io.read_mask(tmp_path / "m.msk"), m)


def test_default_roles(tmp_path):
    io.write_grid(tmp_path / "a.ks", np.zeros((2, 3, 4), complex))
    assert io.read_grid(tmp_path / "a.ks").roles == ("kx", "ky", "t")
    assert io.default_roles(3, coils=True) == ("coil", "kx", "ky")


def test_errors_are_distinct(rng):
    good = io.encode_grid(io.GridFile(crandn(rng, 4, 4), ("kx", "ky")))
    cases = {
        io.BadMagic: b"NOTALOHA" + good[8:],
        io.Truncated: good[:-3],
        io.BadPayload: good + b"\x00",
        io.DimOverflow: b"ALOHAKS1" + struct.pack("<HH", 1, 2) + struct.pack("<2Q", 2 ** 40, 2 ** 40),
        io.BadHeader: b"ALOHAKS1" + struct.pack("<HH", 1, 0) + bytes([1]),
    }
    codes = set()
    for exc, buf in cases.items():
        with pytest.raises(exc) as info:
            io.decode_grid(buf)
        codes.add(info.value.code)
    assert len(codes) == len(cases)
    with pytest.raises(io.Truncated):
        io.decode_grid(good[:10])
    with pytest.raises(io.BadHeader):
        io.decode_grid(good[:12] + struct.pack("<Q", 0) + good[20:])


def test_header_validation(rng):
    good = io.encode_grid(io.GridFile(crandn(rng, 2), ("kx",)))
    bad_role = good[:20] + bytes([9]) + good[21:]
    with pytest.raises(io.BadHeader):
        io.decode_grid(bad_role)
    bad_dtype = good[:21] + bytes([7]) + good[22:]
    with pytest.raises(io.BadHeader):
        io.decode_grid(bad_dtype)
    bad_version = good[:8] + struct.pack("<H", 2) + good[10:]
    with pytest.raises(io.BadHeader):
        io.decode_grid(bad_version)
    with pytest.raises(io.BadHeader):
        io.GridFile(np.array(1.0 + 0j), ())
    with pytest.raises(io.BadHeader):
        io.GridFile(np.zeros((2, 2)), ("kx", "depth"))


def test_mask_errors():
    good = io.encode_mask(np.ones((2, 2), bool))
    with pytest.raises(io.BadMagic):
        io.decode_mask(b"ALOHAKS1" + good[8:])
    with pytest.raises(io.Truncated):
        io.decode_mask(good[:-1])
    with pytest.raises(io.BadPayload):
        io.decode_mask(good[:-1] + bytes([2]))
    with pytest.raises(io.BadHeader):
        io.decode_mask(b"ALOHAMSK" + struct.pack("<H", 0))
    with pytest.raises(io.BadHeader):
        io.encode_mask(np.bool_(True))


@settings(max_examples=50, deadline=None)
@given(shape=st.lists(st.integers(1, 5), min_size=1, max_size=4), seed=st.integers(0, 2 ** 16))
def test_roundtrip_property(shape, seed):
    rng = np.random.default_rng(seed)
    data = crandn(rng, *shape)
    roles = tuple(io.ROLES[i % 4] for i in range(len(shape)))
    buf = io.encode_grid(io.GridFile(data, roles))
    g = io.decode_grid(buf)
    assert np.array_equal(g.data, data) and g.roles == roles
    assert io.encode_grid(g) == buf
    assert len(buf) == 8 + 4 + 9 * len(shape) + 1 + 16 * data.size
    m = rng.uniform(size=shape) > 0.3
    assert io.encode_mask(io.decode_mask(io.encode_mask(m))) == io.encode_mask(m)
