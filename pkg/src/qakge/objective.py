"""Training objective: numeric-edge modulation, margin loss, regularizer,
and their analytic gradients.

Raw scores f are squashed through softplus and scaled by a weight-dependent
factor alpha:

    positives:  alpha = beta + (1 - beta) * w
    negatives:  alpha = beta + (1 - beta) * (1 - w)   (w of the parent positive)

At beta = 1 the edge weights are invisible; as beta anneals to 0 a
low-weight positive stops pulling its score up while its corruptions barely
push back, so it behaves like a soft negative. The batch loss is a summed
pairwise hinge over each positive and its eta corruptions,

    L = sum max(0, margin + g(neg) - g(pos)),

plus an L_p penalty over the set of embeddings the batch touches.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from .errors import InputError
from .model import ModelParams

if TYPE_CHECKING:  # pragma: no cover
    from .training import Hyperparams


def softplus(x):
    """log(1 + e^x), overflow-safe for any float64 input."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))


def focuse_modulate(raw_score, weight, beta, is_positive: bool):
    """Modulated score alpha * softplus(raw). Accepts scalars or arrays."""
    w = np.asarray(weight, dtype=np.float64)
    if np.any(w < 0.0) or np.any(w > 1.0):
        raise InputError("edge weights must lie in [0, 1]")
    if not (0.0 <= beta <= 1.0):
        raise InputError(f"beta must lie in [0, 1], got {beta}")
    influence = w if is_positive else 1.0 - w
    alpha = beta + (1.0 - beta) * influence
    result = alpha * softplus(raw_score)
    return float(result) if np.ndim(result) == 0 else result


def pairwise_loss(pos_scores, neg_scores, margin: float) -> float:
    """Summed hinge over every (positive, corruption) pair.

    ``neg_scores`` must hold a whole number of corruption groups: its length
    is B * eta with rows i*eta..(i+1)*eta-1 belonging to positive i.
    """
    if margin < 0.0:
        raise InputError(f"margin must be >= 0, got {margin}")
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.ndim != 1 or neg.ndim != 1 or pos.size == 0:
        raise InputError("scores must be non-empty 1-d arrays")
    if neg.size % pos.size != 0:
        raise InputError(
            f"corruption group mismatch: {neg.size} negatives for {pos.size} positives"
        )
    eta = neg.size // pos.size
    viol = margin + neg.reshape(pos.size, eta) - pos[:, None]
    return float(np.clip(viol, 0.0, None).sum())


def lp_regularizer(embeddings: Iterable[np.ndarray], p: int, lam: float) -> float:
    """lam * sum |x|^p over every component of the given arrays."""
    if p < 1:
        raise InputError(f"regularizer order p must be >= 1, got {p}")
    if lam < 0.0:
        raise InputError(f"regularizer weight must be >= 0, got {lam}")
    total = 0.0
    for arr in embeddings:
        total += float(np.sum(np.abs(arr) ** p))
    return lam * total


@dataclass(frozen=True)
class TrainingBatch:
    """One optimization step's worth of data: positives, their weights,
    pre-drawn corruptions (eta per positive, grouped), and the current beta."""

    pos: np.ndarray  # (B, 3) int64
    pos_weights: np.ndarray  # (B,)
    neg: np.ndarray  # (B * eta, 3) int64
    eta: int
    beta: float

    def __post_init__(self):
        if self.pos.shape[0] * self.eta != self.neg.shape[0]:
            raise InputError(
                f"batch of {self.pos.shape[0]} positives needs {self.pos.shape[0] * self.eta} "
                f"corruptions, got {self.neg.shape[0]}"
            )
        if self.pos.shape[0] != self.pos_weights.shape[0]:
            raise InputError("one weight per positive required")

    def touched_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique entity and relation rows this batch references."""
        ent = np.unique(np.concatenate([self.pos[:, [0, 2]].ravel(), self.neg[:, [0, 2]].ravel()]))
        rel = np.unique(np.concatenate([self.pos[:, 1], self.neg[:, 1]]))
        return ent, rel


@dataclass
class Gradients:
    """Dense gradients matching the four parameter matrices."""

    ent_re: np.ndarray
    ent_im: np.ndarray
    rel_re: np.ndarray
    rel_im: np.ndarray

    @classmethod
    def zeros_like(cls, model: ModelParams) -> "Gradients":
        return cls(*(np.zeros_like(a) for a in model.arrays()))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.ent_re, self.ent_im, self.rel_re, self.rel_im)


def _neg_weights(batch: TrainingBatch) -> np.ndarray:
    return np.repeat(batch.pos_weights, batch.eta)


def _modulated_scores(model: ModelParams, batch: TrainingBatch):
    from .model import score_triples

    f_pos = score_triples(model, batch.pos)
    f_neg = score_triples(model, batch.neg)
    g_pos = focuse_modulate(f_pos, batch.pos_weights, batch.beta, True)
    g_neg = focuse_modulate(f_neg, _neg_weights(batch), batch.beta, False)
    return f_pos, f_neg, g_pos, g_neg


def batch_objective(model: ModelParams, batch: TrainingBatch, hp: "Hyperparams") -> float:
    """Hinge loss plus L_p penalty over the batch's touched embeddings."""
    _, _, g_pos, g_neg = _modulated_scores(model, batch)
    loss = pairwise_loss(g_pos, g_neg, hp.margin)
    ent_rows, rel_rows = batch.touched_rows()
    loss += lp_regularizer(
        (model.ent_re[ent_rows], model.ent_im[ent_rows], model.rel_re[rel_rows], model.rel_im[rel_rows]),
        hp.reg_p,
        hp.reg_lambda,
    )
    return loss


def _scatter_score_grads(
    model: ModelParams, grads: Gradients, idx: np.ndarray, coeff: np.ndarray
) -> None:
    """Accumulate coeff_t * (d f_t / d component) for each triple t in idx."""
    live = coeff != 0.0
    if not live.any():
        return
    idx = idx[live]
    coeff = coeff[live][:, None]
    s, p, o = idx[:, 0], idx[:, 1], idx[:, 2]
    sr, si = model.ent_re[s], model.ent_im[s]
    pr, pi = model.rel_re[p], model.rel_im[p]
    or_, oi = model.ent_re[o], model.ent_im[o]
    # df/dsr = pr*or + pi*oi        df/dsi = pr*oi - pi*or
    # df/dpr = sr*or + si*oi        df/dpi = sr*oi - si*or
    # df/dor = sr*pr - si*pi        df/doi = sr*pi + si*pr
    np.add.at(grads.ent_re, s, coeff * (pr * or_ + pi * oi))
    np.add.at(grads.ent_im, s, coeff * (pr * oi - pi * or_))
    np.add.at(grads.rel_re, p, coeff * (sr * or_ + si * oi))
    np.add.at(grads.rel_im, p, coeff * (sr * oi - si * or_))
    np.add.at(grads.ent_re, o, coeff * (sr * pr - si * pi))
    np.add.at(grads.ent_im, o, coeff * (si * pr + sr * pi))


def hinge_part(
    model: ModelParams, batch: TrainingBatch, margin: float, grads: Gradients
) -> float:
    """Accumulate the hinge term's gradient into ``grads``; returns its loss.

    The hinge subgradient at an exactly-zero violation is taken as zero, so
    only strictly positive violations propagate.
    """
    f_pos, f_neg, g_pos, g_neg = _modulated_scores(model, batch)
    b, eta = batch.pos.shape[0], batch.eta
    viol = margin + g_neg.reshape(b, eta) - g_pos[:, None]
    active = viol > 0.0
    loss = float(viol[active].sum()) if active.any() else 0.0

    w_pos = np.asarray(batch.pos_weights, dtype=np.float64)
    alpha_pos = batch.beta + (1.0 - batch.beta) * w_pos
    alpha_neg = batch.beta + (1.0 - batch.beta) * (1.0 - _neg_weights(batch))
    # dL/df_pos = -alpha_pos * sigmoid(f_pos) * (#active pairs of that positive)
    coeff_pos = -alpha_pos * sigmoid(f_pos) * active.sum(axis=1)
    # dL/df_neg = alpha_neg * sigmoid(f_neg) for each active pair
    coeff_neg = alpha_neg * sigmoid(f_neg) * active.reshape(-1)
    _scatter_score_grads(model, grads, batch.pos, coeff_pos)
    _scatter_score_grads(model, grads, batch.neg, coeff_neg)
    return loss


def regularizer_part(
    model: ModelParams,
    ent_rows: np.ndarray,
    rel_rows: np.ndarray,
    p: int,
    lam: float,
    grads: Gradients,
) -> float:
    """Accumulate d/dx lam*|x|^p = lam * p * |x|^(p-1) * sign(x) for the
    touched rows; returns the penalty value."""
    if lam == 0.0:
        return 0.0
    loss = 0.0
    for rows, arr, g in (
        (ent_rows, model.ent_re, grads.ent_re),
        (ent_rows, model.ent_im, grads.ent_im),
        (rel_rows, model.rel_re, grads.rel_re),
        (rel_rows, model.rel_im, grads.rel_im),
    ):
        x = arr[rows]
        loss += float(np.sum(np.abs(x) ** p))
        g[rows] += lam * p * np.abs(x) ** (p - 1) * np.sign(x)
    return lam * loss


def gradient_of_loss(model: ModelParams, batch: TrainingBatch, hp: "Hyperparams") -> Gradients:
    """Full analytic gradient of :func:`batch_objective` w.r.t. all parameters.

    Returned arrays are dense and zero outside the touched rows.
    """
    grads = Gradients.zeros_like(model)
    hinge_part(model, batch, hp.margin, grads)
    ent_rows, rel_rows = batch.touched_rows()
    regularizer_part(model, ent_rows, rel_rows, hp.reg_p, hp.reg_lambda, grads)
    return grads
