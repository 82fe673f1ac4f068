"""Binary grid and mask files.

GridFile (all integers little-endian)::

    magic    8 bytes  b"ALOHAKS1"
    version  uint16   1
    ndims    uint16   >= 1
    dims     ndims x uint64
    roles    ndims x uint8   0=kx 1=ky 2=t 3=coil
    dtype    uint8    1 = complex128
    payload  prod(dims) x (float64 real, float64 imag), row-major

MaskFile::

    magic    8 bytes  b"ALOHAMSK"
    ndims    uint16   >= 1
    dims     ndims x uint64
    payload  prod(dims) bytes, each 0 or 1, row-major
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

GRID_MAGIC = b"ALOHAKS1"
MASK_MAGIC = b"ALOHAMSK"
VERSION = 1
DTYPE_COMPLEX128 = 1
ROLES = ("kx", "ky", "t", "coil")
MAX_ELEMENTS = 1 << 36
PAYLOAD_DTYPE = np.dtype("<c16")


class FormatError(ValueError):
    code = "format"


class BadMagic(FormatError):
    code = "bad-magic"


class Truncated(FormatError):
    code = "truncated"


class DimOverflow(FormatError):
    code = "dim-overflow"


class BadHeader(FormatError):
    code = "bad-header"


class BadPayload(FormatError):
    code = "bad-payload"


@dataclass
class GridFile:
    data: np.ndarray
    roles: tuple

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        self.roles = tuple(self.roles)
        if self.data.ndim == 0:
            raise BadHeader("grids need at least one dimension")
        if len(self.roles) != self.data.ndim:
            raise BadHeader(f"{len(self.roles)} axis roles for a {self.data.ndim}-D grid")
        if any(r not in ROLES for r in self.roles):
            raise BadHeader(f"axis roles must be drawn from {ROLES}, got {self.roles}")

    @property
    def coils(self):
        return self.data.shape[self.roles.index("coil")] if "coil" in self.roles else 1


def default_roles(ndim, coils=False):
    spatial = {1: ("kx",), 2: ("kx", "ky"), 3: ("kx", "ky", "t")}[ndim - int(coils)]
    return (("coil",) if coils else ()) + spatial


def _check_dims(dims):
    if any(d == 0 for d in dims):
        raise BadHeader(f"zero-length dimension in {dims}")
    total = 1
    for d in dims:
        total *= d
        if total > MAX_ELEMENTS:
            raise DimOverflow(f"dims {dims} exceed {MAX_ELEMENTS} elements")
    return total


class _Reader:
    def __init__(self, buf):
        self.buf = buf
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.buf):
            raise Truncated(f"file ends inside {what}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt, what):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def encode_grid(grid: GridFile) -> bytes:
    dims = grid.data.shape
    header = [GRID_MAGIC, struct.pack("<HH", VERSION, len(dims))]
    header.append(struct.pack(f"<{len(dims)}Q", *dims))
    header.append(bytes(ROLES.index(r) for r in grid.roles))
    header.append(struct.pack("<B", DTYPE_COMPLEX128))
    payload = np.ascontiguousarray(grid.data, dtype=PAYLOAD_DTYPE).tobytes()
    return b"".join(header) + payload


def decode_grid(buf: bytes) -> GridFile:
    r = _Reader(buf)
    if r.take(8, "magic") != GRID_MAGIC:
        raise BadMagic("not an ALOHA grid file")
    version, ndims = r.unpack("<HH", "header")
    if version != VERSION:
        raise BadHeader(f"unsupported version {version}")
    if ndims == 0:
        raise BadHeader("0-dimensional grid")
    dims = r.unpack(f"<{ndims}Q", "dims")
    total = _check_dims(dims)
    role_codes = r.take(ndims, "axis roles")
    if any(c >= len(ROLES) for c in role_codes):
        raise BadHeader(f"unknown axis role code in {list(role_codes)}")
    (dtype,) = r.unpack("<B", "dtype")
    if dtype != DTYPE_COMPLEX128:
        raise BadHeader(f"unsupported dtype code {dtype}")
    payload = r.take(total * PAYLOAD_DTYPE.itemsize, "payload")
    if r.pos != len(buf):
        raise BadPayload(f"{len(buf) - r.pos} trailing bytes after payload")
    data = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).astype(np.complex128).reshape(dims)
    return GridFile(data, tuple(ROLES[c] for c in role_codes))


def encode_mask(mask) -> bytes:
    mask = np.asarray(mask)
    if mask.ndim == 0:
        raise BadHeader("masks need at least one dimension")
    dims = mask.shape
    return (MASK_MAGIC + struct.pack("<H", len(dims)) + struct.pack(f"<{len(dims)}Q", *dims)
            + np.ascontiguousarray(mask, dtype=bool).astype(np.uint8).tobytes())


def decode_mask(buf: bytes) -> np.ndarray:
    r = _Reader(buf)
    if r.take(8, "magic") != MASK_MAGIC:
        raise BadMagic("not an ALOHA mask file")
    (ndims,) = r.unpack("<H", "header")
    if ndims == 0:
        raise BadHeader("0-dimensional mask")
    dims = r.unpack(f"<{ndims}Q", "dims")
    total = _check_dims(dims)
    payload = np.frombuffer(r.take(total, "payload"), dtype=np.uint8)
    if r.pos != len(buf):
        raise BadPayload(f"{len(buf) - r.pos} trailing bytes after payload")
    if np.any(payload > 1):
        raise BadPayload("mask bytes must be 0 or 1")
    return payload.astype(bool).reshape(dims)


def write_grid(path, data, roles=None):
    if isinstance(data, GridFile):
        grid = data
    else:
        data = np.asarray(data)
        grid = GridFile(data, roles or default_roles(data.ndim))
    with open(path, "wb") as fh:
        fh.write(encode_grid(grid))


def read_grid(path) -> GridFile:
    with open(path, "rb") as fh:
        return decode_grid(fh.read())


def write_mask(path, mask):
    with open(path, "wb") as fh:
        fh.write(encode_mask(mask))


def read_mask(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_mask(fh.read())
