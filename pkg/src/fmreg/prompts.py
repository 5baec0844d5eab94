"""Hand-crafted prompt templates, class vocabularies, and base/novel splits."""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import MalformedTemplate, TooFewClasses

PLACEHOLDER = "{}"


@dataclass(frozen=True)
class PromptTemplate:
    """A text pattern with exactly one `{}` slot for the class name."""

    pattern: str

    def __post_init__(self):
        if not self.pattern:
            raise MalformedTemplate("empty template pattern")
        n = self.pattern.count(PLACEHOLDER)
        if n != 1:
            raise MalformedTemplate(
                f"template must contain exactly one '{{}}', found {n}: {self.pattern!r}"
            )


@dataclass(frozen=True)
class ClassVocabulary:
    """Ordered distinct class names with an optional base/novel partition."""

    names: tuple
    base: tuple = None
    novel: tuple = None

    def __post_init__(self):
        trimmed = tuple(n.strip() for n in self.names)
        if len(set(trimmed)) != len(trimmed):
            raise TooFewClasses("class names not distinct after trimming")
        object.__setattr__(self, "names", trimmed)
        if (self.base is None) != (self.novel is None):
            raise TooFewClasses("base and novel must be given together")
        if self.base is not None:
            b, nv = set(self.base), set(self.novel)
            if b & nv or (b | nv) != set(range(len(trimmed))):
                raise TooFewClasses("base/novel must partition all class indices")

    def __len__(self):
        return len(self.names)


@dataclass(frozen=True)
class TemplateBank:
    """Ordered bank of prompt templates (default ships with 60)."""

    templates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.templates) < 1:
            raise MalformedTemplate("template bank must hold at least one template")

    def __len__(self):
        return len(self.templates)


def render_prompt(template, class_name):
    """Substitute the class name into the template's single slot."""
    if isinstance(template, str):
        template = PromptTemplate(template)
    return template.pattern.replace(PLACEHOLDER, class_name)


def load_template_lines(text):
    """Parse template file content: one pattern per line, '#' comments skipped."""
    patterns = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        patterns.append(PromptTemplate(line))
    return TemplateBank(tuple(patterns))


def default_bank(count=None):
    """The bundled 60-template bank, optionally truncated or extended."""
    text = resources.files("fmreg.data").joinpath("templates.txt").read_text("utf-8")
    bank = load_template_lines(text)
    if count is None or count == len(bank):
        return bank
    pats = list(bank.templates)
    if count <= len(pats):
        return TemplateBank(tuple(pats[:count]))
    extra = [
        PromptTemplate(f"a style-{i} photo of a {{}}.") for i in range(count - len(pats))
    ]
    return TemplateBank(tuple(pats + extra))


def load_class_lines(text):
    """Parse class file content: one name per line, '#' comments skipped."""
    names = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        names.append(line)
    return ClassVocabulary(tuple(names))


def split_base_novel(vocab, seed):
    """Randomly partition classes into ceil(K/2) base and floor(K/2) novel."""
    k = len(vocab)
    if k < 2:
        raise TooFewClasses(f"need at least 2 classes, got {k}")
    rng = np.random.default_rng((int(seed), 0x5B17))
    order = rng.permutation(k)
    n_base = (k + 1) // 2
    base = tuple(sorted(int(i) for i in order[:n_base]))
    novel = tuple(sorted(int(i) for i in order[n_base:]))
    return ClassVocabulary(vocab.names, base=base, novel=novel)
