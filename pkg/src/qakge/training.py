"""Training loop: hyperparameters, beta schedule, Adam, epoch iteration.

All randomness (shuffling, corruption draws) flows from one seeded generator
owned by :func:`train`, so a (graph, hyperparams) pair fully determines the
final parameters bit for bit in the default single-threaded mode.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .errors import InputError, TrainingDiverged
from .model import ModelParams, init_model, score_triples
from .objective import Gradients, TrainingBatch, hinge_part, regularizer_part
from .sampling import CORRUPTION_MODES, sample_corruptions
from .triples import TripleGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparams:
    """Model and optimization settings.

    ``beta_decay_epochs=None`` means the modulation anneal spans the whole
    run; ``focuse=False`` pins beta at 1 so edge weights are ignored
    entirely.
    """

    k: int = 50
    eta: int = 5
    batch_size: int = 64
    learning_rate: float = 1e-5
    margin: float = 0.5
    epochs: int = 5000
    corruption_mode: str = "all"
    reg_p: int = 4
    reg_lambda: float = 1e-4
    beta_decay_epochs: int | None = None
    focuse: bool = True
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.eta < 1:
            raise InputError(f"eta must be >= 1, got {self.eta}")
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if not (self.learning_rate > 0.0):
            raise InputError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.margin < 0.0:
            raise InputError(f"margin must be >= 0, got {self.margin}")
        if self.epochs < 1:
            raise InputError(f"epochs must be >= 1, got {self.epochs}")
        if self.corruption_mode not in CORRUPTION_MODES:
            raise InputError(
                f"corruption_mode must be one of {CORRUPTION_MODES}, got {self.corruption_mode!r}"
            )
        if self.reg_p < 1:
            raise InputError(f"reg_p must be >= 1, got {self.reg_p}")
        if self.reg_lambda < 0.0:
            raise InputError(f"reg_lambda must be >= 0, got {self.reg_lambda}")
        if self.beta_decay_epochs is not None and self.beta_decay_epochs < 0:
            raise InputError(f"beta_decay_epochs must be >= 0, got {self.beta_decay_epochs}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise InputError("adam moment decays must lie in [0, 1)")
        if self.adam_eps <= 0.0:
            raise InputError(f"adam_eps must be > 0, got {self.adam_eps}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_HP_KEYS = {f.name for f in fields(Hyperparams)}


def hyperparams_from_dict(doc: dict) -> Hyperparams:
    if not isinstance(doc, dict):
        raise InputError(f"hyperparams must be a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - _HP_KEYS
    if unknown:
        raise InputError(f"unknown hyperparameter fields: {sorted(unknown)}")
    return Hyperparams(**doc)


def beta_value(epoch: int, hp: Hyperparams) -> float:
    """Modulation strength for an epoch: linear from 1 down to 0.

    With decay span D, beta(e) = max(0, 1 - e/D); D = 0 puts full weight
    influence on from the first epoch. ``focuse=False`` holds beta at 1.
    """
    if not hp.focuse:
        return 1.0
    span = hp.epochs if hp.beta_decay_epochs is None else hp.beta_decay_epochs
    if span <= 0:
        return 0.0
    return max(0.0, 1.0 - epoch / span)


@dataclass
class TrainReport:
    """Per-epoch loss trace and run provenance."""

    losses: list[float]
    wall_time: float
    final_beta: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "losses": self.losses,
            "wall_time": self.wall_time,
            "final_beta": self.final_beta,
            "seed": self.seed,
        }


class _Adam:
    """Dense Adam with bias correction; one moment pair per matrix."""

    def __init__(self, model: ModelParams, hp: Hyperparams):
        self.lr = hp.learning_rate
        self.b1 = hp.adam_beta1
        self.b2 = hp.adam_beta2
        self.eps = hp.adam_eps
        self.t = 0
        self.m = [np.zeros_like(a) for a in model.arrays()]
        self.v = [np.zeros_like(a) for a in model.arrays()]

    def step(self, model: ModelParams, grads: Gradients) -> None:
        self.t += 1
        bc1 = 1.0 - self.b1**self.t
        bc2 = 1.0 - self.b2**self.t
        scale = self.lr / bc1
        for param, g, m, v in zip(model.arrays(), grads.arrays(), self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * np.square(g)
            param -= scale * m / (np.sqrt(v / bc2) + self.eps)


def _chunk_bounds(n: int, parts: int) -> list[tuple[int, int]]:
    sizes = [n // parts + (1 if i < n % parts else 0) for i in range(parts)]
    bounds, start = [], 0
    for size in sizes:
        if size:
            bounds.append((start, start + size))
            start += size
    return bounds


def _batch_loss_and_grad(
    model: ModelParams,
    batch: TrainingBatch,
    hp: Hyperparams,
    grads: Gradients,
    pool: ThreadPoolExecutor | None,
    workers: int,
) -> float:
    """Hinge + regularizer loss for one batch, gradient accumulated in place.

    With ``workers > 1`` the hinge term is computed over contiguous chunks of
    positives concurrently and reduced in chunk order, so the result is
    deterministic (though not bit-identical to the serial path).
    """
    if pool is None or batch.pos.shape[0] < workers * 2:
        loss = hinge_part(model, batch, hp.margin, grads)
    else:
        bounds = _chunk_bounds(batch.pos.shape[0], workers)

        def run(lo_hi: tuple[int, int]) -> tuple[float, Gradients]:
            lo, hi = lo_hi
            sub = TrainingBatch(
                pos=batch.pos[lo:hi],
                pos_weights=batch.pos_weights[lo:hi],
                neg=batch.neg[lo * batch.eta : hi * batch.eta],
                eta=batch.eta,
                beta=batch.beta,
            )
            part = Gradients.zeros_like(model)
            return hinge_part(model, sub, hp.margin, part), part

        loss = 0.0
        for chunk_loss, part in pool.map(run, bounds):
            loss += chunk_loss
            for total, piece in zip(grads.arrays(), part.arrays()):
                total += piece

    ent_rows, rel_rows = batch.touched_rows()
    loss += regularizer_part(model, ent_rows, rel_rows, hp.reg_p, hp.reg_lambda, grads)
    return loss


def train(
    graph: TripleGraph,
    hp: Hyperparams,
    *,
    workers: int = 1,
    initial: ModelParams | None = None,
) -> tuple[ModelParams, TrainReport]:
    """Fit embeddings to a weighted graph.

    ``initial`` warm-starts from existing parameters (their vocabulary must
    match the graph's). Raises :class:`TrainingDiverged` with the epoch,
    batch, and offending triple rows if the loss leaves the finite range.
    """
    if len(graph) == 0:
        raise InputError("cannot train on an empty graph")
    if workers < 1:
        raise InputError(f"workers must be >= 1, got {workers}")
    idx, weights = graph.index_arrays()
    if initial is None:
        model = init_model(graph.vocab, hp.k, hp.seed)
    else:
        if initial.vocab != graph.vocab:
            raise InputError("warm-start parameters use a different vocabulary than the graph")
        if initial.k != hp.k:
            raise InputError(f"warm-start k={initial.k} does not match hp.k={hp.k}")
        model = initial.copy()

    rng = np.random.default_rng((hp.seed, 1))
    adam = _Adam(model, hp)
    grads = Gradients.zeros_like(model)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    n = len(graph)
    losses: list[float] = []
    beta = beta_value(0, hp)
    started = time.perf_counter()
    try:
        for epoch in range(hp.epochs):
            beta = beta_value(epoch, hp)
            perm = rng.permutation(n)
            epoch_loss = 0.0
            for batch_no, start in enumerate(range(0, n, hp.batch_size)):
                take = perm[start : start + hp.batch_size]
                pos = idx[take]
                neg = sample_corruptions(pos, hp.eta, hp.corruption_mode, graph.vocab, rng)
                batch = TrainingBatch(pos, weights[take], neg, hp.eta, beta)
                for g in grads.arrays():
                    g.fill(0.0)
                loss = _batch_loss_and_grad(model, batch, hp, grads, pool, workers)
                if not np.isfinite(loss):
                    rows = _non_finite_rows(model, batch)
                    raise TrainingDiverged(epoch, batch_no, rows)
                adam.step(model, grads)
                epoch_loss += loss
            losses.append(epoch_loss)
    finally:
        if pool is not None:
            pool.shutdown()
    report = TrainReport(
        losses=losses,
        wall_time=time.perf_counter() - started,
        final_beta=beta,
        seed=hp.seed,
    )
    return model, report


def _non_finite_rows(model: ModelParams, batch: TrainingBatch) -> list[int]:
    """Vocab row ids of triples whose raw score is no longer finite."""
    stacked = np.concatenate([batch.pos, batch.neg])
    with np.errstate(all="ignore"):
        scores = score_triples(model, stacked)
    bad = ~np.isfinite(scores)
    if not bad.any():
        return []
    return sorted({int(r) for r in stacked[bad].ravel()})
