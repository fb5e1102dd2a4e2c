"""
Mask scoring: weighted per-class binary cross-entropy, mIoU and mean pixel
accuracy, plus the helpers that produce weights and emulated predictions.
"""

import logging
from typing import Optional, Union

import numpy as np
import structlog
from scipy import ndimage

from shakingbot_sim.perception.models import (
    FloatArray,
    Masks,
    PerceptionConfig,
    ScoreResult,
)

logger = logging.getLogger(__name__)
structured_logger = structlog.get_logger(__name__)

PROB_EPS = 1e-7
DECISION_THRESHOLD = 0.5

MaskInput = Union[Masks, np.ndarray]


def _as_probabilities(pred: MaskInput) -> FloatArray:
    if isinstance(pred, Masks):
        if pred.probabilities is not None:
            return np.asarray(pred.probabilities, dtype=np.float64)
        return pred.stack().astype(np.float64)
    probabilities = np.asarray(pred, dtype=np.float64)
    if probabilities.ndim == 1:
        probabilities = probabilities[None, :]
    return probabilities


def _as_truth(truth: MaskInput) -> np.ndarray:
    if isinstance(truth, Masks):
        return truth.stack()
    stacked = np.asarray(truth)
    if stacked.ndim == 1:
        stacked = stacked[None, :]
    return stacked.astype(bool)


def _broadcast_weights(
    weights: Optional[np.ndarray], shape: tuple[int, ...]
) -> FloatArray:
    if weights is None:
        return np.ones(shape)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape == shape[1:]:
        w = np.broadcast_to(w, shape)
    if w.shape != shape:
        raise ValueError(
            f"Weights of shape {w.shape} do not match predictions {shape}"
        )
    if (w < 0).any():
        raise ValueError("Weights must be >= 0")
    return w


def _prepare(
    pred: MaskInput, truth: MaskInput, weights: Optional[np.ndarray]
) -> tuple[FloatArray, np.ndarray, FloatArray]:
    o = _as_probabilities(pred)
    t = _as_truth(truth)
    if o.shape != t.shape:
        raise ValueError(
            f"Prediction shape {o.shape} does not match truth shape {t.shape}"
        )
    clipped = np.clip(o, PROB_EPS, 1.0 - PROB_EPS)
    return clipped, t, _broadcast_weights(weights, o.shape)


def weighted_bce(
    pred: MaskInput, truth: MaskInput, weights: Optional[np.ndarray] = None
) -> float:
    """Class-averaged weighted binary cross-entropy."""
    o, t, w = _prepare(pred, truth, weights)
    per_pixel = -w * (t * np.log(o) + (~t) * np.log(1.0 - o))
    k = o.shape[0]
    per_class = per_pixel.reshape(k, -1).mean(axis=1)
    return float(per_class.mean())


def bce_gradient(
    pred: MaskInput, truth: MaskInput, weights: Optional[np.ndarray] = None
) -> FloatArray:
    """
    Derivative of ``weighted_bce`` with respect to every probability.

    Clamped entries are differentiated at their clamped value.
    """
    o, t, w = _prepare(pred, truth, weights)
    k = o.shape[0]
    n = o[0].size
    return -w * (t / o - (~t) / (1.0 - o)) / (k * n)


def score_masks(
    pred: MaskInput, truth: MaskInput, weights: Optional[np.ndarray] = None
) -> ScoreResult:
    """
    Score a probabilistic prediction against boolean ground truth.

    Args:
        pred: Masks with probabilities (booleans are read as 0/1), or an array
            stacked as (K, ...)
        truth: Boolean masks in the same layout
        weights: Per-pixel weights shaped like ``pred`` or like one class

    Returns:
        ScoreResult with the loss, mIoU and mean pixel accuracy

    Raises:
        ValueError: If shapes do not match or a weight is negative
    """
    loss = weighted_bce(pred, truth, weights)
    o, t, _ = _prepare(pred, truth, weights)
    decided = o >= DECISION_THRESHOLD
    k = o.shape[0]
    ious = []
    accuracies = []
    for cls in range(k):
        p, g = decided[cls], t[cls]
        union = np.logical_or(p, g).sum()
        inter = np.logical_and(p, g).sum()
        ious.append(1.0 if union == 0 else inter / union)
        accuracies.append(float((p == g).mean()))
    return ScoreResult(loss, float(np.mean(ious)), float(np.mean(accuracies)))


def balanced_weights(truth: MaskInput) -> FloatArray:
    """
    Inverse-frequency weights per class: N/(2 N_pos) on positives and
    N/(2 N_neg) on negatives. A class with no positives (or no negatives)
    gets uniform weights.
    """
    t = _as_truth(truth)
    weights = np.ones(t.shape)
    for cls in range(t.shape[0]):
        n = t[cls].size
        n_pos = int(t[cls].sum())
        n_neg = n - n_pos
        if n_pos == 0 or n_neg == 0:
            continue
        weights[cls] = np.where(t[cls], n / (2.0 * n_pos), n / (2.0 * n_neg))
    return weights


def noisy_probabilities(
    masks: Masks,
    rng: np.random.Generator,
    config: Optional[PerceptionConfig] = None,
) -> Masks:
    """Blur and perturb boolean masks into probabilities, like an imperfect net."""
    cfg = config or PerceptionConfig()
    stacked = masks.stack().astype(np.float64)
    blurred = np.stack(
        [
            ndimage.gaussian_filter(layer, cfg.prob_blur_sigma, mode="nearest")
            for layer in stacked
        ]
    )
    noise = rng.normal(0.0, cfg.prob_noise_sigma, size=blurred.shape)
    probabilities = np.clip(blurred + noise, 0.0, 1.0)
    return Masks.from_stack(probabilities >= DECISION_THRESHOLD, probabilities)
