"""Frozen-encoder backends: abstract interface, seeded synthetic world, and a
file-backed encoder over precomputed embeddings.

The synthetic world stands in for a real vision-language backbone at desk
scale: class prototypes live on the unit sphere, text embeddings are
template-perturbed prototypes, images are noise-perturbed prototypes.  Every
embedding is drawn from a stream keyed by (seed, purpose, indices), so any
single embedding can be regenerated independently of generation order.
"""

import abc
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .prompts import default_bank, render_prompt
from .store import EmbeddingStore
from .vecmath import l2_normalize

# stream purposes for the counter-based generator
_P_PROTO = 1
_P_TEXT = 2
_P_IMAGE = 3

_SPLIT_IDS = {"train": 0, "test": 1}


def gaussian_stream(seed, purpose, *indices):
    """D-independent seeded Gaussian source keyed by (seed, purpose, indices)."""
    return np.random.default_rng((int(seed), int(purpose)) + tuple(int(i) for i in indices))


class EncoderInterface(abc.ABC):
    """Frozen encoder: deterministic, unit-normalized outputs."""

    @abc.abstractmethod
    def encode_text(self, prompt):
        """Map a rendered prompt string to a unit vector of dimension dim()."""

    @abc.abstractmethod
    def encode_image(self, image_id):
        """Map an opaque image handle to a unit vector of dimension dim()."""

    @abc.abstractmethod
    def dim(self):
        """Embedding dimension D."""


@dataclass(frozen=True)
class SyntheticWorld:
    """Configuration of the deterministic synthetic embedding universe."""

    seed: int
    n_classes: int
    n_templates: int = 60
    dim: int = 64
    n_per_class: int = 20
    sigma_template: float = 0.0
    sigma_image: float = 0.0

    def __post_init__(self):
        if self.dim < 2 or self.n_classes < 1 or self.n_templates < 1 or self.n_per_class < 1:
            raise InvalidConfig("counts must be >= 1 and dim >= 2")
        if self.sigma_template < 0 or self.sigma_image < 0:
            raise InvalidConfig("sigma values must be >= 0")


class SyntheticEncoder(EncoderInterface):
    """Deterministic encoder over a SyntheticWorld.

    Text prompts are resolved back to their (template, class) cell, so the
    encoder accepts exactly the prompts renderable from its bank and
    vocabulary.  Image handles are (split, class, index) triples.
    """

    def __init__(self, world, bank=None, class_names=None):
        self.world = world
        self.bank = bank if bank is not None else default_bank(world.n_templates)
        if len(self.bank) != world.n_templates:
            raise InvalidConfig("bank size does not match world.n_templates")
        if class_names is None:
            width = max(3, len(str(world.n_classes - 1)))
            class_names = tuple(f"class {i:0{width}d}" for i in range(world.n_classes))
        if len(class_names) != world.n_classes:
            raise InvalidConfig("class name count does not match world.n_classes")
        self.class_names = tuple(class_names)
        self._prompt_index = {
            render_prompt(t, c): (p, k)
            for p, t in enumerate(self.bank.templates)
            for k, c in enumerate(self.class_names)
        }

    def dim(self):
        return self.world.dim

    def prototype(self, k):
        g = gaussian_stream(self.world.seed, _P_PROTO, k)
        return l2_normalize(g.standard_normal(self.world.dim))

    def text_embedding(self, p, k):
        base = self.prototype(k)
        if self.world.sigma_template == 0.0:
            return base
        g = gaussian_stream(self.world.seed, _P_TEXT, p, k)
        return l2_normalize(base + self.world.sigma_template * g.standard_normal(self.world.dim))

    def image_embedding(self, split, k, i):
        base = self.prototype(k)
        if self.world.sigma_image == 0.0:
            return base
        g = gaussian_stream(self.world.seed, _P_IMAGE, _SPLIT_IDS[split], k, i)
        return l2_normalize(base + self.world.sigma_image * g.standard_normal(self.world.dim))

    def encode_text(self, prompt):
        try:
            p, k = self._prompt_index[prompt]
        except KeyError:
            raise InvalidConfig(f"prompt not renderable in this world: {prompt!r}") from None
        return self.text_embedding(p, k)

    def encode_image(self, image_id):
        split, k, i = image_id
        return self.image_embedding(split, k, i)


def synthetic_generate(world, split="train"):
    """Materialize one split of a synthetic world as an EmbeddingStore."""
    if split not in _SPLIT_IDS:
        raise InvalidConfig(f"split must be one of {sorted(_SPLIT_IDS)}")
    enc = SyntheticEncoder(world)
    t, k, d = world.n_templates, world.n_classes, world.dim
    text = np.empty((t, k, d), dtype=np.float32)
    for p in range(t):
        for c in range(k):
            text[p, c] = enc.text_embedding(p, c)
    labels = np.repeat(np.arange(k, dtype=np.int64), world.n_per_class)
    images = np.empty((labels.shape[0], d), dtype=np.float32)
    row = 0
    for c in range(k):
        for i in range(world.n_per_class):
            images[row] = enc.image_embedding(split, c, i)
            row += 1
    return EmbeddingStore(
        dim=d,
        templates=tuple(tpl.pattern for tpl in enc.bank.templates),
        class_names=enc.class_names,
        text=text,
        labels=labels,
        images=images,
        split=split,
    )


class StoreEncoder(EncoderInterface):
    """File-backed encoder reading precomputed embeddings from a store.

    encode_text accepts any prompt present in the store's template x class
    grid; encode_image takes the integer row index.
    """

    def __init__(self, store):
        self.store = store
        self._text = store.unit_text()
        self._images = store.unit_images()
        self._prompt_index = {
            render_prompt(tpl, cls): (p, k)
            for p, tpl in enumerate(store.templates)
            for k, cls in enumerate(store.class_names)
        }

    def dim(self):
        return self.store.dim

    def encode_text(self, prompt):
        try:
            p, k = self._prompt_index[prompt]
        except KeyError:
            raise InvalidConfig(f"prompt not present in store: {prompt!r}") from None
        return self._text[p, k].copy()

    def encode_image(self, image_id):
        return self._images[int(image_id)].copy()
