"""Embedding backends. The HF CLIP backend owns all heavyweight ML
dependencies; everything else in the exporter is plumbing."""

import numpy as np


class ModelLoadError(Exception):
    pass


class HFClipBackend:
    """Frozen CLIP checkpoint via transformers (eval mode, no grad)."""

    def __init__(self, model_tag, device="cpu", batch_size=32):
        try:
            import torch
            from transformers import CLIPImageProcessor, CLIPModel, CLIPTokenizer
        except ImportError as e:
            raise ModelLoadError(f"missing dependency: {e}") from e
        try:
            self.model = CLIPModel.from_pretrained(model_tag).to(device).eval()
            self.tokenizer = CLIPTokenizer.from_pretrained(model_tag)
            self.processor = CLIPImageProcessor.from_pretrained(model_tag)
        except Exception as e:
            raise ModelLoadError(f"cannot load checkpoint {model_tag!r}: {e}") from e
        self.torch = torch
        self.device = device
        self.batch_size = batch_size

    @staticmethod
    def _pooled(out):
        # transformers >= 5 returns a ModelOutput; older versions a tensor
        return out if hasattr(out, "shape") else out.pooler_output

    def encode_texts(self, prompts):
        torch = self.torch
        feats = []
        for i in range(0, len(prompts), self.batch_size):
            batch = self.tokenizer(prompts[i:i + self.batch_size], padding=True,
                                   truncation=True, return_tensors="pt").to(self.device)
            with torch.no_grad():
                out = self._pooled(self.model.get_text_features(**batch))
            feats.append(out.cpu().double().numpy())
        return np.concatenate(feats, axis=0)

    def encode_images(self, pil_images):
        torch = self.torch
        feats = []
        for i in range(0, len(pil_images), self.batch_size):
            px = self.processor(images=pil_images[i:i + self.batch_size],
                                return_tensors="pt").pixel_values.to(self.device)
            with torch.no_grad():
                out = self._pooled(self.model.get_image_features(pixel_values=px))
            feats.append(out.cpu().double().numpy())
        return np.concatenate(feats, axis=0)
