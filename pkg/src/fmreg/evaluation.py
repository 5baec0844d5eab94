"""Cosine-softmax classifiers, the base-to-novel protocol, and the harmonic
mean headline metric."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyClassSet, NegativeInput, SplitMismatch
from .vecmath import softmax


@dataclass(frozen=True)
class Classifier:
    """K unit text features plus a temperature; provenance records how the
    features were obtained."""

    class_feats: np.ndarray  # (K, D) unit rows
    tau: float
    provenance: str          # zero_shot_single | zero_shot_ensemble | tuned


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    per_class: dict
    n_correct: int
    n_total: int


def zero_shot_classifier(fm, classes, mode="ensemble", tau=0.01):
    """Classifier over the given feature-matrix columns.

    mode "single" uses template 0 only; "ensemble" averages the columns over
    all templates and renormalizes.
    """
    idx = list(classes)
    if not idx:
        raise EmptyClassSet("no classes given")
    if mode == "single":
        feats = fm.entries[0, idx, :].copy()
        prov = "zero_shot_single"
    elif mode == "ensemble":
        means = fm.entries[:, idx, :].mean(axis=0)
        feats = means / np.linalg.norm(means, axis=1, keepdims=True)
        prov = "zero_shot_ensemble"
    else:
        raise EmptyClassSet(f"unknown mode {mode!r}")
    return Classifier(class_feats=feats, tau=tau, provenance=prov)


def tuned_classifier(state):
    """Classifier from an adapter's learned per-base-class text features."""
    tf = state.text_feats
    feats = tf / np.linalg.norm(tf, axis=1, keepdims=True)
    return Classifier(class_feats=feats, tau=state.tau, provenance="tuned")


def predict(clf, v):
    """Most probable class for a unit image feature; ties go to the smaller
    class index (argmax picks the first maximum)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (clf.class_feats.shape[1],):
        raise DimensionMismatch("image feature dim does not match classifier")
    scores = np.clip(clf.class_feats @ v, -1.0, 1.0)
    probs = softmax(scores, clf.tau)
    return int(np.argmax(probs)), probs


def _predict_chunk(clf, feats, labels):
    out = []
    for i in range(feats.shape[0]):
        pred, _ = predict(clf, feats[i])
        out.append((pred, int(labels[i])))
    return out


def evaluate(clf, feats, labels, threads=1):
    """Accuracy of a classifier over unit features with local labels.

    With threads > 1 samples are scored in parallel chunks; chunk results are
    reduced in fixed order so counts are identical to the serial path.
    """
    n = feats.shape[0]
    labels = np.asarray(labels)
    if threads > 1 and n:
        from concurrent.futures import ThreadPoolExecutor

        bounds = np.linspace(0, n, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_predict_chunk, clf, feats[a:b], labels[a:b])
                       for a, b in zip(bounds[:-1], bounds[1:])]
            pairs = [p for f in futures for p in f.result()]
    else:
        pairs = _predict_chunk(clf, feats, labels)
    hits = {}
    totals = {}
    correct = 0
    for pred, lab in pairs:
        totals[lab] = totals.get(lab, 0) + 1
        if pred == lab:
            hits[lab] = hits.get(lab, 0) + 1
            correct += 1
    per_class = {c: hits.get(c, 0) / t for c, t in sorted(totals.items())}
    return EvalResult(accuracy=correct / n if n else 0.0, per_class=per_class,
                      n_correct=correct, n_total=n)


def harmonic_mean(a, b):
    """2ab / (a + b); zero when both inputs are zero."""
    if a < 0 or b < 0:
        raise NegativeInput(f"harmonic mean of negative values ({a}, {b})")
    if a + b == 0:
        return 0.0
    return 2.0 * a * b / (a + b)


def evaluate_base_to_novel(state, fm, store_test, base_indices, novel_indices,
                           threads=1):
    """Base-to-novel protocol: tuned classifier on base classes, frozen
    ensemble classifier on novel classes, harmonic mean of the two
    percentage accuracies.

    The novel-side classifier is built solely from the frozen features
    matrix; it never reads the learned text features.
    """
    base = tuple(sorted(int(i) for i in base_indices))
    novel = tuple(sorted(int(i) for i in novel_indices))
    if base != tuple(state.base_indices):
        raise SplitMismatch("adapter base classes do not match the split")
    labels = np.asarray(store_test.labels)
    covered = set(base) | set(novel)
    if not set(int(l) for l in labels) <= covered:
        raise SplitMismatch("test labels outside the base/novel split")
    images = store_test.unit_images()

    tuned = np.empty_like(images)
    for i in range(images.shape[0]):
        tuned[i] = state.adapt(images[i])

    base_clf = tuned_classifier(state)
    base_local = {g: i for i, g in enumerate(base)}
    mask_b = np.isin(labels, base)
    base_res = evaluate(base_clf, tuned[mask_b],
                        [base_local[int(l)] for l in labels[mask_b]],
                        threads=threads)

    novel_clf = zero_shot_classifier(fm, novel, mode="ensemble", tau=state.tau)
    assert novel_clf.provenance == "zero_shot_ensemble"
    novel_local = {g: i for i, g in enumerate(novel)}
    mask_n = np.isin(labels, novel)
    novel_res = evaluate(novel_clf, tuned[mask_n],
                         [novel_local[int(l)] for l in labels[mask_n]],
                         threads=threads)

    hm = harmonic_mean(100.0 * base_res.accuracy, 100.0 * novel_res.accuracy)
    return base_res, novel_res, hm
