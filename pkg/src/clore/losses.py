"""Reference losses for validating an external training pipeline.

The primary loss is a normalized focal loss over per-pixel prediction
accuracy p' = 1 - |g - p|, with the modulating factor beta = (1 - p')^gamma
rescaled by m = N / (sum beta + eps) so the average modulation weight is 1.
The combined training loss adds a BCE auxiliary: k1 * NFL + k2 * BCE.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NflParams:
    alpha: float = 1.0
    gamma_focal: float = 2.0
    epsilon: float = 1e-12

    def __post_init__(self):
        if self.alpha <= 0 or self.gamma_focal < 0 or self.epsilon <= 0:
            raise ValueError("need alpha > 0, gamma_focal >= 0, epsilon > 0")


@dataclass
class CombinedParams:
    k1: float = 1.0
    k2: float = 0.4
    nfl: NflParams = field(default_factory=NflParams)

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("k1 and k2 must be >= 0")


def _check_pair(pred: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, np.float64)
    gt = np.asarray(gt, np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    return pred, gt


def _accuracy_terms(pred, gt, params: NflParams):
    p_acc = 1.0 - np.abs(gt - pred)
    beta = np.power(1.0 - p_acc, params.gamma_focal)
    m = p_acc.size / (beta.sum() + params.epsilon)
    return p_acc, beta, m


def nfl(pred: np.ndarray, gt: np.ndarray, params: NflParams | None = None) -> float:
    """Normalized focal loss, averaged over pixels; 0 iff pred equals gt."""
    if params is None:
        params = NflParams()
    pred, gt = _check_pair(pred, gt)
    p_acc, beta, m = _accuracy_terms(pred, gt, params)
    log_term = np.log(np.minimum(p_acc + params.epsilon, 1.0))
    return float(np.mean(-params.alpha * beta * m * log_term))


def nfl_grad(pred: np.ndarray, gt: np.ndarray,
             params: NflParams | None = None) -> np.ndarray:
    """Analytic per-pixel d(nfl)/d(pred), with the normalizer m detached.

    d p'/d p is +1 where p < g and -1 where p > g (0 at equality, where the
    loss term vanishes anyway).
    """
    if params is None:
        params = NflParams()
    pred, gt = _check_pair(pred, gt)
    p_acc, beta, m = _accuracy_terms(pred, gt, params)
    g = params.gamma_focal
    clamped = np.minimum(p_acc + params.epsilon, 1.0)
    log_term = np.log(clamped)
    d_by_dpacc = beta / clamped * (p_acc + params.epsilon < 1.0)
    if g > 0:
        inexact = p_acc < 1.0  # at exact pixels log_term is 0, avoid 0^(g-1)
        d_by_dpacc = d_by_dpacc - np.where(
            inexact, g * np.power(1.0 - p_acc, g - 1.0, where=inexact,
                                  out=np.zeros_like(p_acc)) * log_term, 0.0)
    dpacc_dp = np.sign(gt - pred)
    return (-params.alpha * m / p_acc.size) * d_by_dpacc * dpacc_dp


def bce(pred: np.ndarray, gt: np.ndarray, epsilon: float = 1e-12) -> float:
    """Mean binary cross-entropy with epsilon-clamped logs."""
    pred, gt = _check_pair(pred, gt)
    log_p = np.log(np.clip(pred, epsilon, 1.0))
    log_q = np.log(np.clip(1.0 - pred, epsilon, 1.0))
    return float(np.mean(-(gt * log_p + (1.0 - gt) * log_q)))


def combined(pred: np.ndarray, gt: np.ndarray,
             params: CombinedParams | None = None) -> float:
    """k1 * nfl + k2 * bce."""
    if params is None:
        params = CombinedParams()
    return (params.k1 * nfl(pred, gt, params.nfl)
            + params.k2 * bce(pred, gt, params.nfl.epsilon))
