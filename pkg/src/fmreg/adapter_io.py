"""Binary persistence for trained adapter states (format "FMAD" v1).

Layout, little-endian: magic "FMAD" | u32 version | u32 D | u32 Kb |
f64 tau | Kb u32 base indices | D*D f64 W | D f64 b | Kb*D f64 text features.
"""

import struct

import numpy as np

from .errors import BadMagic, CorruptStore, UnsupportedVersion
from .trainer import AdapterState

MAGIC = b"FMAD"
VERSION = 1


def adapter_write(state, path):
    d = state.W.shape[0]
    kb = state.text_feats.shape[0]
    parts = [MAGIC, struct.pack("<3I", VERSION, d, kb), struct.pack("<d", state.tau),
             np.asarray(state.base_indices, dtype="<u4").tobytes(),
             np.ascontiguousarray(state.W, dtype="<f8").tobytes(),
             np.ascontiguousarray(state.b, dtype="<f8").tobytes(),
             np.ascontiguousarray(state.text_feats, dtype="<f8").tobytes()]
    with open(path, "wb") as f:
        f.write(b"".join(parts))


def adapter_read(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise BadMagic("not an FMAD file")
    version, d, kb = struct.unpack("<3I", blob[4:16])
    if version != VERSION:
        raise UnsupportedVersion(f"FMAD version {version} not supported")
    (tau,) = struct.unpack("<d", blob[16:24])
    need = 24 + 4 * kb + 8 * (d * d + d + kb * d)
    if len(blob) != need:
        raise CorruptStore(f"FMAD size {len(blob)} != expected {need}")
    off = 24
    base = tuple(int(i) for i in np.frombuffer(blob, dtype="<u4", count=kb, offset=off))
    off += 4 * kb
    w = np.frombuffer(blob, dtype="<f8", count=d * d, offset=off).reshape(d, d).copy()
    off += 8 * d * d
    b = np.frombuffer(blob, dtype="<f8", count=d, offset=off).copy()
    off += 8 * d
    tf = np.frombuffer(blob, dtype="<f8", count=kb * d, offset=off).reshape(kb, d).copy()
    return AdapterState(W=w, b=b, text_feats=tf, base_indices=base, tau=tau)
