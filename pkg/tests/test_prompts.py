import pytest

from fmreg.errors import MalformedTemplate, TooFewClasses
from fmreg.prompts import (
    ClassVocabulary,
    PromptTemplate,
    default_bank,
    load_class_lines,
    load_template_lines,
    render_prompt,
    split_base_novel,
)


def test_render_basic():
    assert render_prompt(PromptTemplate("a photo of a {}."), "dog") == "a photo of a dog."


def test_render_identity_template():
    assert render_prompt(PromptTemplate("{}"), "cat") == "cat"


def test_two_placeholders_rejected():
    with pytest.raises(MalformedTemplate):
        PromptTemplate("a {} photo of {}")


def test_zero_placeholders_rejected():
    with pytest.raises(MalformedTemplate):
        PromptTemplate("a photo")


def test_default_bank_has_60():
    assert len(default_bank()) == 60


def test_default_bank_resize():
    assert len(default_bank(10)) == 10
    assert len(default_bank(70)) == 70


def test_template_file_parsing():
    bank = load_template_lines("# comment\na photo of a {}.\n\n{} art\n")
    assert len(bank) == 2
    assert bank.templates[1].pattern == "{} art"


def test_class_file_parsing():
    vocab = load_class_lines("dog\ncat\n# not a class\n")
    assert vocab.names == ("dog", "cat")


def test_duplicate_classes_rejected():
    with pytest.raises(TooFewClasses):
        ClassVocabulary(("dog", " dog "))


def test_split_counts_even():
    vocab = ClassVocabulary(tuple(f"c{i}" for i in range(10)))
    out = split_base_novel(vocab, 42)
    assert len(out.base) == 5 and len(out.novel) == 5
    assert set(out.base) | set(out.novel) == set(range(10))
    assert set(out.base) & set(out.novel) == set()


def test_split_ceiling_on_odd():
    vocab = ClassVocabulary(("a", "b", "c"))
    out = split_base_novel(vocab, 0)
    assert len(out.base) == 2 and len(out.novel) == 1


def test_split_deterministic():
    vocab = ClassVocabulary(tuple(f"c{i}" for i in range(8)))
    assert split_base_novel(vocab, 5).base == split_base_novel(vocab, 5).base


def test_split_varies_across_seeds():
    vocab = ClassVocabulary(tuple(f"c{i}" for i in range(6)))
    splits = {split_base_novel(vocab, s).base for s in range(100)}
    assert len(splits) >= 2


def test_split_too_few_classes():
    with pytest.raises(TooFewClasses):
        split_base_novel(ClassVocabulary(("solo",)), 0)


def test_render_injective_in_class_name():
    tpl = PromptTemplate("a photo of a {}.")
    names = [f"name{i}" for i in range(50)]
    rendered = {render_prompt(tpl, n) for n in names}
    assert len(rendered) == len(names)
