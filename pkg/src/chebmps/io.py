"""Binary MPS files.

Layout (all integers unsigned, everything little-endian)::

    offset  bytes  field
    0       4      magic  b"QMPS"
    4       2      format version (currently 1)
    6       1      scalar kind: 0 = float64, 1 = complex128
    7       1      1 if a domain block follows the shape table, else 0
    8       4      n, number of cores
    12      12*n   per core: chi_left, physical dim, chi_right   (u32 x 3)
    ...            domain block (optional):
                     order u8 (0 serial, 1 interleaved), m u32,
                     then per dimension: qubits u32, a f64, b f64
    ...            core payloads in site order, each row-major over
                   (chi_left, physical, chi_right); complex entries are
                   stored as consecutive (real, imag) float64 pairs

Round trips are bit exact.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .mps import MPS, DomainMeta, Order

MAGIC = b"QMPS"
VERSION = 1
_ORDERS = [Order.SERIAL, Order.INTERLEAVED]


def dumps(mps: MPS) -> bytes:
    complex_kind = np.iscomplexobj(np.empty(0, dtype=mps.dtype))
    dtype = np.dtype("<c16") if complex_kind else np.dtype("<f8")
    parts = [MAGIC, struct.pack("<HBBI", VERSION, int(complex_kind), mps.meta is not None, len(mps))]
    for c in mps.cores:
        parts.append(struct.pack("<III", *c.shape))
    if mps.meta is not None:
        meta = mps.meta
        parts.append(struct.pack("<BI", _ORDERS.index(meta.order), meta.dims))
        for q, (a, b) in zip(meta.qubits_per_dim, meta.intervals):
            parts.append(struct.pack("<Idd", q, a, b))
    for c in mps.cores:
        parts.append(np.ascontiguousarray(c, dtype=dtype).tobytes())
    return b"".join(parts)


def loads(data: bytes) -> MPS:
    if data[:4] != MAGIC:
        raise ValueError("not an MPS file (bad magic)")
    version, kind, has_meta, n = struct.unpack_from("<HBBI", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported format version {version}")
    if kind not in (0, 1):
        raise ValueError(f"unknown scalar kind {kind}")
    pos = 12
    shapes = []
    for _ in range(n):
        shapes.append(struct.unpack_from("<III", data, pos))
        pos += 12
    meta = None
    if has_meta:
        order, m = struct.unpack_from("<BI", data, pos)
        pos += 5
        qubits, intervals = [], []
        for _ in range(m):
            q, a, b = struct.unpack_from("<Idd", data, pos)
            pos += 20
            qubits.append(q)
            intervals.append((a, b))
        meta = DomainMeta(tuple(qubits), tuple(intervals), _ORDERS[order])
    dtype = np.dtype("<c16") if kind else np.dtype("<f8")
    cores = []
    for shape in shapes:
        count = int(np.prod(shape))
        core = np.frombuffer(data, dtype=dtype, count=count, offset=pos).reshape(shape)
        cores.append(core.astype(dtype.newbyteorder("="), copy=True))
        pos += count * dtype.itemsize
    if pos != len(data):
        raise ValueError("trailing bytes after the last core")
    return MPS(cores, meta)


def save(path, mps: MPS) -> None:
    Path(path).write_bytes(dumps(mps))


def load(path) -> MPS:
    return loads(Path(path).read_bytes())
