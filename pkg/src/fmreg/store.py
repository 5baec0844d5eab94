"""EmbeddingStore container and the FMES v1 binary file format.

FMES v1 layout, little-endian throughout:
  magic "FMES" | u32 version=1 | u32 D, T, K, N
  class table:    K x (u16 byte length, UTF-8 bytes)
  template table: T x (u16 byte length, UTF-8 bytes)
  text block:     T*K*D float32, template-major then class-major then dim
  label block:    N u32
  image block:    N*D float32
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, CorruptStore, UnsupportedVersion

MAGIC = b"FMES"
VERSION = 1


@dataclass
class EmbeddingStore:
    """Frozen text and labeled image embeddings for one dataset split.

    text: float32 array (T, K, D); images: float32 array (N, D);
    labels: int array (N,) with values in [0, K).
    """

    dim: int
    templates: tuple
    class_names: tuple
    text: np.ndarray
    labels: np.ndarray
    images: np.ndarray
    split: str = "train"  # informational only, not persisted

    def __post_init__(self):
        t, k = len(self.templates), len(self.class_names)
        if self.text.shape != (t, k, self.dim):
            raise CorruptStore(f"text block shape {self.text.shape} != {(t, k, self.dim)}")
        n = self.labels.shape[0]
        if self.images.shape != (n, self.dim):
            raise CorruptStore(f"image block shape {self.images.shape} != {(n, self.dim)}")
        if n and (self.labels.min() < 0 or self.labels.max() >= k):
            raise CorruptStore("labels out of range")

    @property
    def n_templates(self):
        return len(self.templates)

    @property
    def n_classes(self):
        return len(self.class_names)

    @property
    def n_images(self):
        return int(self.labels.shape[0])

    def unit_text(self):
        """Text block as float64 with every (template, class) row renormalized."""
        return _renormalize(np.asarray(self.text, dtype=np.float64))

    def unit_images(self):
        """Image block as float64 with every row renormalized."""
        return _renormalize(np.asarray(self.images, dtype=np.float64))


def _renormalize(arr):
    norms = np.linalg.norm(arr, axis=-1, keepdims=True)
    if np.any(norms <= 1e-12):
        raise CorruptStore("zero-norm embedding in store")
    out = arr / norms
    # second pass pins norms to 1 within 1e-12 despite f32 quantization
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def _write_str_table(out, entries):
    for s in entries:
        raw = s.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise CorruptStore("string too long for u16 length prefix")
        out.append(struct.pack("<H", len(raw)))
        out.append(raw)


def store_write(store, path):
    """Serialize a store to an FMES v1 file."""
    parts = [MAGIC, struct.pack("<5I", VERSION, store.dim, store.n_templates,
                                store.n_classes, store.n_images)]
    _write_str_table(parts, store.class_names)
    _write_str_table(parts, store.templates)
    parts.append(np.ascontiguousarray(store.text, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(store.labels, dtype="<u4").tobytes())
    parts.append(np.ascontiguousarray(store.images, dtype="<f4").tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(parts))


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.off = 0

    def take(self, n):
        if self.off + n > len(self.blob):
            raise CorruptStore("file truncated")
        out = self.blob[self.off:self.off + n]
        self.off += n
        return out

    def strings(self, count):
        out = []
        for _ in range(count):
            (ln,) = struct.unpack("<H", self.take(2))
            out.append(self.take(ln).decode("utf-8"))
        return tuple(out)


def store_read(path):
    """Read and validate an FMES v1 file."""
    with open(path, "rb") as f:
        blob = f.read()
    r = _Reader(blob)
    if r.take(4) != MAGIC:
        raise BadMagic("not an FMES file")
    version, d, t, k, n = struct.unpack("<5I", r.take(20))
    if version != VERSION:
        raise UnsupportedVersion(f"FMES version {version} not supported")
    class_names = r.strings(k)
    templates = r.strings(t)
    text = np.frombuffer(r.take(t * k * d * 4), dtype="<f4").reshape(t, k, d)
    labels = np.frombuffer(r.take(n * 4), dtype="<u4").astype(np.int64)
    images = np.frombuffer(r.take(n * d * 4), dtype="<f4").reshape(n, d)
    if r.off != len(blob):
        raise CorruptStore(f"{len(blob) - r.off} trailing bytes")
    for name, arr in (("text", text), ("image", images)):
        if arr.size and not np.all(np.isfinite(arr)):
            raise CorruptStore(f"non-finite values in {name} block")
    return EmbeddingStore(dim=d, templates=templates, class_names=class_names,
                          text=text.copy(), labels=labels, images=images.copy())
