"""Alignment losses and their analytic gradients with respect to the
projection weights.

The contrastive loss is the in-batch form: each projected input is
scored against every target in the batch by cosine similarity over
temperature, and the matched pair sits on the diagonal.  All softmax
reductions go through log-sum-exp.  ``infonce_loss_as_printed`` is a
diagnostic variant whose denominator runs over matched pairs only; it
carries no gradient signal between pairs and exists purely for
comparison.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError
from .projection import ProjectionHead


def _normalized_rows(m: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        row = int(np.flatnonzero(norms == 0.0)[0])
        raise NumericError(f"zero-norm row {row} in {what}; cosine undefined",
                           code="zero-norm")
    return m / norms[:, None], norms


def _check_batch(projected: np.ndarray, targets: np.ndarray):
    projected = np.asarray(projected, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if projected.shape != targets.shape or projected.ndim != 2:
        raise DimensionError(
            f"batch shapes differ: {projected.shape} vs {targets.shape}"
        )
    if not (np.all(np.isfinite(projected)) and np.all(np.isfinite(targets))):
        raise NumericError("non-finite value in batch", code="non-finite")
    return projected, targets


def _log_softmax_rows(s: np.ndarray) -> np.ndarray:
    shifted = s - s.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def infonce_loss(projected: np.ndarray, targets: np.ndarray,
                 tau: float) -> tuple[float, np.ndarray]:
    """In-batch contrastive loss.

    Returns (loss, similarity matrix) where S[i, j] is the cosine of
    projected row i against target row j, divided by ``tau``.
    """
    projected, targets = _check_batch(projected, targets)
    n = projected.shape[0]
    if n < 2:
        raise NumericError("contrastive batch needs at least 2 rows",
                           code="degenerate-batch")
    if tau <= 0:
        raise NumericError("temperature must be positive", code="bad-tau")
    phat, _ = _normalized_rows(projected, "projected")
    that, _ = _normalized_rows(targets, "targets")
    sims = (phat @ that.T) / tau
    log_probs = _log_softmax_rows(sims)
    loss = -float(np.mean(np.diag(log_probs)))
    return loss, sims


def infonce_loss_as_printed(projected: np.ndarray, targets: np.ndarray,
                            tau: float) -> float:
    """Diagnostic: softmax over matched-pair similarities only."""
    projected, targets = _check_batch(projected, targets)
    phat, _ = _normalized_rows(projected, "projected")
    that, _ = _normalized_rows(targets, "targets")
    diag = np.sum(phat * that, axis=1) / tau
    shifted = diag - diag.max()
    log_probs = shifted - np.log(np.exp(shifted).sum())
    return -float(np.mean(log_probs))


def mse_loss(projected: np.ndarray, targets: np.ndarray) -> float:
    """Mean over the batch of squared Euclidean pair distance."""
    projected, targets = _check_batch(projected, targets)
    return float(np.mean(np.sum((targets - projected) ** 2, axis=1)))


def batch_loss(projected, targets, loss: str, tau: float) -> float:
    if loss == "infonce":
        return infonce_loss(projected, targets, tau)[0]
    if loss == "mse":
        return mse_loss(projected, targets)
    raise NumericError(f"unknown loss {loss!r}", code="bad-loss")


def loss_gradient(head: ProjectionHead, batch_inputs: np.ndarray,
                  targets: np.ndarray, loss: str = "infonce",
                  tau: float = 0.01) -> np.ndarray:
    """Analytic d(loss)/d(weights), shape in_dim x out_dim.

    Only the weights receive gradient; inputs and targets are frozen.
    """
    x = np.asarray(batch_inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != head.in_dim:
        raise DimensionError(
            f"inputs shape {x.shape} does not match head in_dim {head.in_dim}"
        )
    projected = x @ head.weights
    projected, t = _check_batch(projected, targets)
    n = x.shape[0]

    if loss == "mse":
        d_projected = (2.0 / n) * (projected - t)
    elif loss == "infonce":
        if n < 2:
            raise NumericError("contrastive batch needs at least 2 rows",
                               code="degenerate-batch")
        if tau <= 0:
            raise NumericError("temperature must be positive", code="bad-tau")
        phat, norms = _normalized_rows(projected, "projected")
        that, _ = _normalized_rows(t, "targets")
        sims = (phat @ that.T) / tau
        probs = np.exp(_log_softmax_rows(sims))
        coeff = (probs - np.eye(n)) / (n * tau)
        d_phat = coeff @ that
        # back through row normalization: (I - phat phat^T) / ||row||
        radial = np.sum(d_phat * phat, axis=1, keepdims=True)
        d_projected = (d_phat - radial * phat) / norms[:, None]
    else:
        raise NumericError(f"unknown loss {loss!r}", code="bad-loss")

    return x.T @ d_projected
