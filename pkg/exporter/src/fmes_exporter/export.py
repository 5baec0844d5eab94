"""Export a frozen checkpoint's template x class text grid and a labeled
image folder into one FMES v1 store."""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import HFClipBackend
from .fmes import write_fmes

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".webp", ".gif", ".tiff"}


class DecodeError(Exception):
    pass


@dataclass
class ExportJob:
    model_tag: str
    template_file: Path
    class_file: Path
    image_root: Path
    out_path: Path
    device: str = "cpu"
    batch_size: int = 32


@dataclass
class ExportReport:
    n_templates: int = 0
    n_classes: int = 0
    n_images: int = 0
    skipped: list = field(default_factory=list)


def read_lines(path):
    out = []
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


def render(template, class_name):
    if template.count("{}") != 1:
        raise ValueError(f"template needs exactly one '{{}}': {template!r}")
    return template.replace("{}", class_name)


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def export(job, backend=None):
    """Run the export; returns an ExportReport (skipped images listed)."""
    templates = read_lines(job.template_file)
    class_names = read_lines(job.class_file)
    root = Path(job.image_root)
    folders = sorted(p.name for p in root.iterdir() if p.is_dir())
    if folders != sorted(class_names):
        raise ValueError(
            f"class names {sorted(class_names)} do not match subfolders {folders}")

    if backend is None:
        backend = HFClipBackend(job.model_tag, device=job.device,
                                batch_size=job.batch_size)

    prompts = [render(t, c) for t in templates for c in class_names]
    text = backend.encode_texts(prompts)
    d = text.shape[1]
    text = _normalize_rows(text).reshape(len(templates), len(class_names), d)

    from PIL import Image

    report = ExportReport(n_templates=len(templates), n_classes=len(class_names))
    pil_images, labels = [], []
    for k, name in enumerate(class_names):
        for f in sorted((root / name).iterdir()):
            if f.suffix.lower() not in IMAGE_SUFFIXES or not f.is_file():
                continue
            try:
                with Image.open(f) as img:
                    pil_images.append(img.convert("RGB"))
            except OSError as e:
                report.skipped.append(f"{f}: {e}")
                continue
            labels.append(k)
    if pil_images:
        images = _normalize_rows(backend.encode_images(pil_images))
    else:
        images = np.zeros((0, d))
    labels = np.asarray(labels, dtype=np.uint32)
    report.n_images = len(labels)

    write_fmes(job.out_path, templates, class_names,
               text.astype(np.float32), labels, images.astype(np.float32))
    return report
