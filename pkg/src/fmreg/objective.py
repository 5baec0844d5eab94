"""Losses with exact analytic gradients, plus a central-difference checker.

All losses accept raw (not necessarily unit) parameter vectors and normalize
internally, so the returned gradients are true derivatives of the implemented
expressions with respect to the raw inputs; that is what the finite-difference
harness perturbs.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidTemperature, NegativeGamma, ZeroNorm
from .features import selection_vectors


@dataclass(frozen=True)
class LossBreakdown:
    ce: float
    cl: float
    total: float
    gamma: float


def _unit(v):
    n = float(np.linalg.norm(v))
    if n <= 1e-12:
        raise ZeroNorm("cannot normalize near-zero vector")
    return v / n, n


def _cos_rows(rows, v):
    """Cosines of v against unit rows, with per-row gradient machinery.

    Returns (scores, unit_v, norm_v); d scores_i / dv = (rows_i - s_i u) / n.
    """
    u, n = _unit(np.asarray(v, dtype=np.float64))
    return rows @ u, u, n


def _grad_from_weights(rows, s, u, n, w):
    # sum_i w_i * (rows_i - s_i u) / n
    return (rows.T @ w - float(w @ s) * u) / n


def contrastive_loss(fm, sel, v_tun):
    """Hard-example contrastive loss and its gradient w.r.t. the image feature.

    Averages over the beta hard positives; each term's denominator adds the
    exponentials of all beta hard-negative cosines.  Raw cosines are
    exponentiated (no temperature).
    """
    pos, neg = selection_vectors(fm, sel)
    beta = pos.shape[0]
    v = np.asarray(v_tun, dtype=np.float64)
    sp, u, n = _cos_rows(pos, v)
    sn = neg @ u
    en = np.exp(sn)
    s_neg = float(np.sum(en))
    z = np.exp(sp) + s_neg
    loss = float(np.mean(-sp + np.log(z)))
    # d/d sp_i = (exp(sp_i)/z_i - 1)/beta ; d/d sn_j = sum_i exp(sn_j)/z_i / beta
    wp = (np.exp(sp) / z - 1.0) / beta
    wn = en * float(np.sum(1.0 / z)) / beta
    grad = _grad_from_weights(pos, sp, u, n, wp) + _grad_from_weights(neg, sn, u, n, wn)
    return loss, grad


def cross_entropy_loss(text_feats, v_tun, label, tau):
    """Softmax cross-entropy over cosine logits divided by tau.

    Both the image feature and every class text feature are normalized
    internally; gradients are returned w.r.t. the raw inputs.
    Returns (loss, grad_v, grad_text) with grad_text of shape (K, D).
    """
    if not tau > 0:
        raise InvalidTemperature(f"tau must be positive, got {tau}")
    tf = np.asarray(text_feats, dtype=np.float64)
    v = np.asarray(v_tun, dtype=np.float64)
    t_norms = np.linalg.norm(tf, axis=1, keepdims=True)
    if np.any(t_norms <= 1e-12):
        raise ZeroNorm("zero-norm text feature")
    t_unit = tf / t_norms
    s, u, n = _cos_rows(t_unit, v)
    z = s / tau
    z = z - np.max(z)
    e = np.exp(z)
    p = e / np.sum(e)
    loss = float(-np.log(p[label]))
    w = p.copy()
    w[label] -= 1.0
    w /= tau
    grad_v = _grad_from_weights(t_unit, s, u, n, w)
    # d cos_k / d t_k = (u - s_k t_unit_k) / ||t_k||
    grad_text = w[:, None] * (u[None, :] - s[:, None] * t_unit) / t_norms
    return loss, grad_v, grad_text


def total_loss(ce, cl, gamma):
    """Combine the two loss terms with weight gamma on the contrastive part."""
    if gamma < 0:
        raise NegativeGamma(f"gamma must be >= 0, got {gamma}")
    return LossBreakdown(ce=float(ce), cl=float(cl), total=float(ce + gamma * cl),
                         gamma=float(gamma))


def combine_gradients(grad_ce, grad_cl, gamma):
    """Gradient of the combined loss: CE part plus gamma times CL part."""
    if gamma < 0:
        raise NegativeGamma(f"gamma must be >= 0, got {gamma}")
    return np.asarray(grad_ce, dtype=np.float64) + gamma * np.asarray(grad_cl, dtype=np.float64)


def finite_difference_check(f, point, epsilon=1e-5):
    """Worst-coordinate relative error between analytic and central-difference
    gradients of f at point.

    f maps a flat float64 vector to (scalar value, gradient vector).
    """
    if not 0 < epsilon <= 1e-2:
        raise ValueError(f"epsilon must be in (0, 1e-2], got {epsilon}")
    x0 = np.asarray(point, dtype=np.float64).copy()
    _, analytic = f(x0)
    analytic = np.asarray(analytic, dtype=np.float64)
    worst = 0.0
    for i in range(x0.size):
        x = x0.copy()
        x[i] = x0[i] + epsilon
        fp, _ = f(x)
        x[i] = x0[i] - epsilon
        fm, _ = f(x)
        numeric = (fp - fm) / (2.0 * epsilon)
        a = float(analytic[i])
        err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
        worst = max(worst, err)
    return worst
