"""Soft dice and stable binary cross-entropy losses.

The training loss is their sum. Dice ranges over [0, 1]: 0 for complete
overlap, 1 for disjoint masks. BCE is computed from logits in the
log-sum-exp form, so it never overflows for any finite logit.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor, _node, as_tensor, sigmoid, tensor_sum

DICE_SMOOTH = 1e-6


def _check_shapes(a: Tensor, b: Tensor):
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            f"prediction and target shapes differ: {a.data.shape} vs {b.data.shape}"
        )


def dice_loss(pred_prob, target, smooth: float = DICE_SMOOTH) -> Tensor:
    """1 - 2*sum(y*p) / (sum(y^2) + sum(p^2)), smoothed in both numerator
    and denominator so an empty prediction of an empty target scores 0."""
    p = as_tensor(pred_prob)
    y = as_tensor(target)
    _check_shapes(p, y)
    num = 2.0 * tensor_sum(y * p) + smooth
    den = tensor_sum(y * y) + tensor_sum(p * p) + smooth
    return 1.0 - num / den


def bce_with_logits(logits, target) -> Tensor:
    """Mean pixelwise binary cross-entropy on logits (sigmoid folded in).

    Uses max(z,0) - z*y + log(1 + exp(-|z|)), which is exact and finite
    for any logit magnitude.
    """
    z = as_tensor(logits)
    y = as_tensor(target)
    _check_shapes(z, y)
    zd = np.atleast_1d(z.data)
    yd = np.atleast_1d(y.data)
    n = zd.size
    pixel = np.maximum(zd, 0.0) - zd * yd + np.log1p(np.exp(-np.abs(zd)))
    value = np.asarray(pixel.sum() / n)

    def backward(g):
        sig = np.empty_like(zd)
        pos = zd >= 0
        sig[pos] = 1.0 / (1.0 + np.exp(-zd[pos]))
        ez = np.exp(zd[~pos])
        sig[~pos] = ez / (1.0 + ez)
        z._accumulate((float(g) * (sig - yd) / n).reshape(z.data.shape))

    return _node(value, (z,), backward)


def total_loss(logits, target, smooth: float = DICE_SMOOTH) -> Tensor:
    """Sum of the soft dice loss (on sigmoid probabilities) and the BCE."""
    z = as_tensor(logits)
    return dice_loss(sigmoid(z), target, smooth=smooth) + bce_with_logits(z, target)
