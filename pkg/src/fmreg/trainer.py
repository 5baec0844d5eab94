"""Desk-scale tuning loop: a linear residual visual adapter plus learnable
per-class text features, optimized by plain SGD on the combined objective
with hard-example selection recomputed every step.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyClass, InvalidConfig, NonFiniteLoss
from .features import compute_score_matrix, select_unexpected
from .objective import combine_gradients, contrastive_loss, cross_entropy_loss, total_loss

_SHUFFLE_TAG = 0x7E01
_FEWSHOT_TAG = 0xF501


@dataclass
class TrainConfig:
    gamma: float = 0.1
    beta: int = 5
    tau: float = 0.01
    lr: float = 0.0025
    epochs: int = 30
    shots: int = 16
    batch_size: int = 4
    seed: int = 0
    negatives_per_class: bool = False

    def __post_init__(self):
        if not (self.lr >= 0 and self.epochs >= 1 and self.shots >= 1
                and self.tau > 0 and self.batch_size >= 1):
            raise InvalidConfig("bad training configuration")
        if self.gamma < 0:
            raise InvalidConfig("gamma must be >= 0")


@dataclass
class AdapterState:
    """Learnable parameters: v_tun = normalize(W @ v + b), plus per-base-class
    text features (unit rows)."""

    W: np.ndarray
    b: np.ndarray
    text_feats: np.ndarray
    base_indices: tuple
    tau: float = 0.01

    @classmethod
    def initial(cls, fm, base_indices, tau=0.01):
        d = fm.dim
        base = tuple(sorted(int(i) for i in base_indices))
        cols = fm.entries[:, base, :]          # (T, Kb, D)
        means = cols.mean(axis=0)              # (Kb, D)
        feats = means / np.linalg.norm(means, axis=1, keepdims=True)
        return cls(W=np.eye(d), b=np.zeros(d), text_feats=feats,
                   base_indices=base, tau=tau)

    def adapt(self, v):
        """Apply the adapter and renormalize: the tuned image feature."""
        u = self.W @ v + self.b
        return u / np.linalg.norm(u)


@dataclass
class TrainSet:
    """Few-shot training subset: unit image features plus global labels."""

    features: np.ndarray   # (n, D) float64 unit rows
    labels: np.ndarray     # (n,) global class indices, all within base set
    base_indices: tuple


@dataclass
class EpochRecord:
    epoch: int
    ce: float
    cl: float
    total: float
    train_acc: float


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    final_state: AdapterState = None
    warnings: list = field(default_factory=list)

    def to_csv(self):
        lines = ["epoch,ce,cl,total,train_acc"]
        for r in self.epochs:
            lines.append(f"{r.epoch},{r.ce:.17g},{r.cl:.17g},{r.total:.17g},{r.train_acc:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        payload = {
            "epochs": [{"epoch": r.epoch, "ce": r.ce, "cl": r.cl,
                        "total": r.total, "train_acc": r.train_acc}
                       for r in self.epochs],
            "warnings": list(self.warnings),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def sample_few_shot(store, base_indices, shots, seed):
    """Deterministic per-seed few-shot subset over the base classes."""
    base = tuple(sorted(int(i) for i in base_indices))
    images = store.unit_images()
    labels = np.asarray(store.labels)
    rows, warns = [], []
    for c in base:
        idx = np.nonzero(labels == c)[0]
        if idx.size == 0:
            raise EmptyClass(f"base class {c} has no images")
        if idx.size < shots:
            warns.append(f"class {c}: only {idx.size} images for {shots} shots")
            take = idx
        else:
            rng = np.random.default_rng((int(seed), _FEWSHOT_TAG, c))
            take = np.sort(rng.choice(idx, size=shots, replace=False))
        rows.extend(int(i) for i in take)
    for w in warns:
        warnings.warn(w)
    rows = np.asarray(rows, dtype=np.int64)
    ts = TrainSet(features=images[rows], labels=labels[rows], base_indices=base)
    return ts, warns


def _train_accuracy(state, base_fm_entries, trainset, local_labels):
    tf = state.text_feats
    tf_unit = tf / np.linalg.norm(tf, axis=1, keepdims=True)
    correct = 0
    for i in range(trainset.features.shape[0]):
        v_tun = state.adapt(trainset.features[i])
        pred = int(np.argmax(tf_unit @ v_tun))
        correct += pred == int(local_labels[i])
    return correct / trainset.features.shape[0]


def train(fm, trainset, cfg):
    """SGD on the combined objective with per-step unexpected-feature selection.

    Bitwise deterministic given cfg.seed on a single thread.  Raises
    NonFiniteLoss (with the offending step index) rather than continuing past
    a divergence.
    """
    base = trainset.base_indices
    if not set(int(l) for l in trainset.labels) <= set(base):
        raise InvalidConfig("trainset labels outside the base class set")
    fm_base = fm.restrict_classes(base)
    local = {g: i for i, g in enumerate(base)}
    local_labels = np.asarray([local[int(g)] for g in trainset.labels])
    # validate beta against the restricted matrix up front
    select_unexpected(np.zeros((fm_base.n_templates, fm_base.n_classes)), 0,
                      cfg.beta, cfg.negatives_per_class)

    state = AdapterState.initial(fm, base, tau=cfg.tau)
    report = TrainReport()
    n = trainset.features.shape[0]
    step = 0
    for epoch in range(cfg.epochs):
        rng = np.random.default_rng((int(cfg.seed), _SHUFFLE_TAG, epoch))
        perm = rng.permutation(n)
        ce_sum = cl_sum = tot_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = perm[start:start + cfg.batch_size]
            g_w = np.zeros_like(state.W)
            g_b = np.zeros_like(state.b)
            g_tf = np.zeros_like(state.text_feats)
            for i in batch:
                v_img = trainset.features[i]
                lab = int(local_labels[i])
                u = state.W @ v_img + state.b
                ce, gv_ce, gt_ce = cross_entropy_loss(state.text_feats, u, lab, cfg.tau)
                v_tun = u / np.linalg.norm(u)
                scores = compute_score_matrix(fm_base, v_tun)
                sel = select_unexpected(scores, lab, cfg.beta, cfg.negatives_per_class)
                cl, gv_cl = contrastive_loss(fm_base, sel, u)
                breakdown = total_loss(ce, cl, cfg.gamma)
                if not np.isfinite(breakdown.total):
                    raise NonFiniteLoss(
                        f"non-finite loss at step {step}: ce={ce} cl={cl}")
                g_u = gv_ce if cfg.gamma == 0.0 else combine_gradients(gv_ce, gv_cl, cfg.gamma)
                g_w += np.outer(g_u, v_img)
                g_b += g_u
                g_tf += gt_ce
                ce_sum += ce
                cl_sum += cl
                tot_sum += breakdown.total
            m = batch.shape[0]
            state.W = state.W - cfg.lr * (g_w / m)
            state.b = state.b - cfg.lr * (g_b / m)
            tf = state.text_feats - cfg.lr * (g_tf / m)
            state.text_feats = tf / np.linalg.norm(tf, axis=1, keepdims=True)
            step += 1
            if not (np.all(np.isfinite(state.W)) and np.all(np.isfinite(state.b))
                    and np.all(np.isfinite(state.text_feats))):
                raise NonFiniteLoss(f"non-finite parameters after step {step - 1}")
        acc = _train_accuracy(state, fm_base.entries, trainset, local_labels)
        report.epochs.append(EpochRecord(epoch=epoch, ce=ce_sum / n, cl=cl_sum / n,
                                         total=tot_sum / n, train_acc=acc))
    report.final_state = state
    return report
