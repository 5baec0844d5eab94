"""The frozen features matrix, per-sample score matrices, and hard-example
selection of unexpected designated / non-designated features.

For a sample of class k, the "designated" entries are the column k of the
matrix; everything else is "non-designated".  Selection picks the beta
lowest-scoring designated entries (hard positives) and the beta
highest-scoring non-designated entries (hard negatives), with deterministic
lexicographic tie-breaking.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BetaTooLarge,
    DimensionMismatch,
    InconsistentSelection,
    LabelOutOfRange,
    TooFewClasses,
)
from .prompts import render_prompt
from .vecmath import l2_normalize


@dataclass(frozen=True)
class FeaturesMatrix:
    """Frozen grid of unit text features, shape (T, K, D)."""

    entries: np.ndarray
    templates: tuple
    class_names: tuple

    def __post_init__(self):
        t, k = len(self.templates), len(self.class_names)
        if self.entries.shape[:2] != (t, k):
            raise DimensionMismatch("entries shape does not match metadata")
        self.entries.setflags(write=False)

    @property
    def n_templates(self):
        return self.entries.shape[0]

    @property
    def n_classes(self):
        return self.entries.shape[1]

    @property
    def dim(self):
        return self.entries.shape[2]

    def restrict_classes(self, class_indices):
        """Sub-matrix over the given class columns (order preserved)."""
        idx = list(class_indices)
        return FeaturesMatrix(
            entries=np.ascontiguousarray(self.entries[:, idx, :]),
            templates=self.templates,
            class_names=tuple(self.class_names[i] for i in idx),
        )


def build_features_matrix(encoder, bank, vocab):
    """Encode every (template, class) prompt into a frozen features matrix."""
    if len(vocab) < 2:
        raise TooFewClasses("features matrix needs at least 2 classes")
    t, k, d = len(bank), len(vocab), encoder.dim()
    entries = np.empty((t, k, d), dtype=np.float64)
    for p, tpl in enumerate(bank.templates):
        for c, name in enumerate(vocab.names):
            entries[p, c] = l2_normalize(encoder.encode_text(render_prompt(tpl, name)))
    return FeaturesMatrix(entries=entries,
                          templates=tuple(tpl.pattern for tpl in bank.templates),
                          class_names=vocab.names)


def features_from_store(store):
    """Features matrix straight from a store's renormalized text block."""
    if store.n_classes < 2:
        raise TooFewClasses("store has fewer than 2 classes")
    return FeaturesMatrix(entries=store.unit_text(),
                          templates=store.templates,
                          class_names=store.class_names)


def compute_score_matrix(fm, v_tun):
    """Cosine of the adapted image feature against every matrix entry.

    Both sides are unit vectors, so the score is a dot product; results are
    clamped to [-1, 1].
    """
    v = np.asarray(v_tun, dtype=np.float64)
    if v.shape != (fm.dim,):
        raise DimensionMismatch(f"feature dim {v.shape} vs matrix dim {fm.dim}")
    return np.clip(fm.entries @ v, -1.0, 1.0)


@dataclass(frozen=True)
class UnexpectedSelection:
    """Index pairs of the selected hard positives and hard negatives."""

    designated: tuple      # beta (template, label) pairs, lowest scores
    non_designated: tuple  # beta (template, class != label) pairs, highest scores
    label: int


def select_unexpected(scores, label, beta, negatives_per_class=False):
    """Pick the low-beta designated and top-beta non-designated entries.

    Ties break toward the smaller template index, then the smaller class
    index.  By default negatives are drawn from the global pool of all
    non-label cells; with negatives_per_class=True each non-label class first
    contributes its single best cell and the beta negatives are drawn from
    those per-class champions (requires beta <= K-1).
    """
    s = np.asarray(scores, dtype=np.float64)
    t, k = s.shape
    if not 0 <= label < k:
        raise LabelOutOfRange(f"label {label} outside [0, {k})")
    neg_pool = (k - 1) if negatives_per_class else t * (k - 1)
    if not 1 <= beta <= min(t, neg_pool):
        raise BetaTooLarge(f"beta {beta} outside [1, min(T={t}, negatives={neg_pool})]")

    col = s[:, label]
    order = np.lexsort((np.arange(t), col))  # score asc, template asc
    designated = tuple((int(p), label) for p in order[:beta])

    pp, kk = np.nonzero(np.ones((t, k), dtype=bool))
    mask = kk != label
    pp, kk = pp[mask], kk[mask]
    vals = s[pp, kk]
    if negatives_per_class:
        champions = []
        for c in range(k):
            if c == label:
                continue
            p_best = int(np.lexsort((np.arange(t), -s[:, c]))[0])
            champions.append((p_best, c))
        pp = np.array([p for p, _ in champions])
        kk = np.array([c for _, c in champions])
        vals = s[pp, kk]
    order = np.lexsort((kk, pp, -vals))  # score desc, template asc, class asc
    non_designated = tuple((int(pp[i]), int(kk[i])) for i in order[:beta])
    return UnexpectedSelection(designated=designated, non_designated=non_designated,
                               label=int(label))


def selection_vectors(fm, sel):
    """Resolve a selection to (positives, negatives) feature-row arrays."""
    for p, c in sel.designated:
        if c != sel.label:
            raise InconsistentSelection("designated pair outside the label column")
    for p, c in sel.non_designated:
        if c == sel.label:
            raise InconsistentSelection("non-designated pair in the label column")
    pos = np.stack([fm.entries[p, c] for p, c in sel.designated])
    neg = np.stack([fm.entries[p, c] for p, c in sel.non_designated])
    return pos, neg
