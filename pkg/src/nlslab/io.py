"""Binary snapshot format for fields.

Layout (little endian):
  magic   4 bytes  b"NLSF"
  version u32
  dim     u32
  per axis: N u64, h f64, x0 f64
  space   u8   (0 = position, 1 = frequency)
  payload interleaved f64 (re, im) pairs, row-major
"""

import struct

import numpy as np

from .core import FREQUENCY, POSITION, ComplexField, GridDescriptor

MAGIC = b"NLSF"
VERSION = 1

_SPACE_CODE = {POSITION: 0, FREQUENCY: 1}
_CODE_SPACE = {v: k for k, v in _SPACE_CODE.items()}


def write_snapshot(path, field: ComplexField):
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", MAGIC, VERSION, g.dim))
        for n, h, x0 in zip(g.counts, g.spacings, g.offsets):
            fh.write(struct.pack("<Qdd", n, h, x0))
        fh.write(struct.pack("<B", _SPACE_CODE[field.space]))
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def read_snapshot(path) -> ComplexField:
    with open(path, "rb") as fh:
        magic, version, dim = struct.unpack("<4sII", fh.read(12))
        if magic != MAGIC:
            raise ValueError(f"not a field snapshot: bad magic {magic!r}")
        if version != VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        counts, spacings, offsets = [], [], []
        for _ in range(dim):
            n, h, x0 = struct.unpack("<Qdd", fh.read(24))
            counts.append(n)
            spacings.append(h)
            offsets.append(x0)
        (code,) = struct.unpack("<B", fh.read(1))
        grid = GridDescriptor(tuple(counts), tuple(spacings), tuple(offsets))
        values = np.frombuffer(fh.read(), dtype="<c16")
    return ComplexField(grid, values.astype(np.complex128), _CODE_SPACE[code])
