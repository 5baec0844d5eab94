import json

import numpy as np
import pytest
from PIL import Image


class FakeBackend:
    """Deterministic hash-free stand-in: embeds strings and images as seeded
    Gaussian vectors."""

    def __init__(self, dim=12):
        self.dim = dim

    def _vec(self, key):
        rng = np.random.default_rng(abs(hash(key)) % (2**32))
        return rng.standard_normal(self.dim)

    def encode_texts(self, prompts):
        return np.stack([self._vec(("text", p)) for p in prompts])

    def encode_images(self, pil_images):
        return np.stack([self._vec(("img", img.size, img.getpixel((0, 0))))
                         for img in pil_images])


@pytest.fixture
def fake_backend():
    return FakeBackend()


@pytest.fixture
def tiny_dataset(tmp_path):
    """2 classes x 3 images, template and class files."""
    tpl = tmp_path / "templates.txt"
    tpl.write_text("a photo of a {}.\na drawing of a {}.\n")
    cls = tmp_path / "classes.txt"
    cls.write_text("cat\ndog\n")
    rng = np.random.default_rng(7)
    for name in ("cat", "dog"):
        d = tmp_path / "images" / name
        d.mkdir(parents=True)
        for i in range(3):
            arr = rng.integers(0, 255, (40, 40, 3), dtype=np.uint8)
            Image.fromarray(arr).save(d / f"{i}.png")
    return tmp_path


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Random-weight CLIP checkpoint saved offline (model, tokenizer,
    image processor)."""
    torch = pytest.importorskip("torch")
    transformers = pytest.importorskip("transformers")
    from transformers import CLIPConfig, CLIPImageProcessor, CLIPModel, CLIPTokenizer

    d = tmp_path_factory.mktemp("ckpt")
    cfg = CLIPConfig(
        text_config={"hidden_size": 32, "intermediate_size": 64,
                     "num_hidden_layers": 2, "num_attention_heads": 2,
                     "vocab_size": 200, "bos_token_id": 0, "eos_token_id": 1,
                     "pad_token_id": 1},
        vision_config={"hidden_size": 32, "intermediate_size": 64,
                       "num_hidden_layers": 2, "num_attention_heads": 2,
                       "image_size": 32, "patch_size": 8},
        projection_dim=16)
    torch.manual_seed(0)
    CLIPModel(cfg).save_pretrained(d)

    vocab = {"<|startoftext|>": 0, "<|endoftext|>": 1}
    i = 2
    for c in "abcdefghijklmnopqrstuvwxyz .{}0123456789":
        vocab[c] = i
        vocab[c + "</w>"] = i + 1
        i += 2
    (d / "vocab.json").write_text(json.dumps(vocab))
    (d / "merges.txt").write_text("#version: 0.2\n")
    CLIPTokenizer(str(d / "vocab.json"), str(d / "merges.txt")).save_pretrained(d)
    CLIPImageProcessor(size={"shortest_edge": 32},
                       crop_size={"height": 32, "width": 32}).save_pretrained(d)
    return d
