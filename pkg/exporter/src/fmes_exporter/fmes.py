"""Standalone FMES v1 writer.

The byte layout is the exporter's only contract with the consuming artifact:
magic "FMES" | u32 version=1 | u32 D, T, K, N | class table | template table
| T*K*D f32 text block | N u32 labels | N*D f32 image block, little-endian,
string tables as (u16 length, UTF-8 bytes) entries.
"""

import struct

import numpy as np

MAGIC = b"FMES"
VERSION = 1


def _str_table(entries):
    out = []
    for s in entries:
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"string too long for u16 length prefix: {s[:40]!r}...")
        out.append(struct.pack("<H", len(raw)))
        out.append(raw)
    return out


def write_fmes(path, templates, class_names, text, labels, images):
    """Write one store; text is (T, K, D), images (N, D), labels (N,)."""
    text = np.ascontiguousarray(text, dtype="<f4")
    images = np.ascontiguousarray(images, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<u4")
    t, k, d = text.shape
    n = labels.shape[0]
    if len(templates) != t or len(class_names) != k or images.shape != (n, d):
        raise ValueError("block shapes do not match metadata")
    parts = [MAGIC, struct.pack("<5I", VERSION, d, t, k, n)]
    parts += _str_table(class_names)
    parts += _str_table(templates)
    parts += [text.tobytes(), labels.tobytes(), images.tobytes()]
    with open(path, "wb") as f:
        f.write(b"".join(parts))
