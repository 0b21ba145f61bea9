"""Hand-built oracles the test suite checks the library against.

Everything here is written the slow, obvious way on purpose: python
complex numbers, per-component finite differences, exhaustive loops.
"""
from __future__ import annotations

import math
import random

import numpy as np

from qakge.model import ModelParams, init_model
from qakge.objective import TrainingBatch, batch_objective
from qakge.triples import TripleGraph, Vocabulary, WeightedTriple


def fd_gradients(model: ModelParams, batch: TrainingBatch, hp, h: float = 1e-6) -> dict[str, np.ndarray]:
    """Central finite differences of the batch objective, touched rows only."""
    ent_rows, rel_rows = batch.touched_rows()
    out = {
        "ent_re": np.zeros_like(model.ent_re),
        "ent_im": np.zeros_like(model.ent_im),
        "rel_re": np.zeros_like(model.rel_re),
        "rel_im": np.zeros_like(model.rel_im),
    }
    plan = [("ent_re", ent_rows), ("ent_im", ent_rows),
            ("rel_re", rel_rows), ("rel_im", rel_rows)]
    for name, rows in plan:
        arr = getattr(model, name)
        for i in rows:
            for j in range(model.k):
                orig = arr[i, j]
                arr[i, j] = orig + h
                f_plus = batch_objective(model, batch, hp)
                arr[i, j] = orig - h
                f_minus = batch_objective(model, batch, hp)
                arr[i, j] = orig
                out[name][i, j] = (f_plus - f_minus) / (2.0 * h)
    return out


def max_relative_error(analytic: dict[str, np.ndarray], numeric: dict[str, np.ndarray],
                       floor: float = 1e-5) -> float:
    """Worst componentwise relative error; tiny components compare absolutely.

    Central differences at h=1e-6 carry ~2e-10 of rounding noise, so
    components below `floor` are judged on |a-n| against floor*tol instead
    of a meaningless ratio of two near-zero numbers.
    """
    worst = 0.0
    for name, a in analytic.items():
        n = numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def score_py(model: ModelParams, s: int, p: int, o: int) -> float:
    """Triple score via python complex arithmetic, one component at a time."""
    total = 0.0
    for j in range(model.k):
        e_s = complex(model.ent_re[s, j], model.ent_im[s, j])
        w_p = complex(model.rel_re[p, j], model.rel_im[p, j])
        e_o = complex(model.ent_re[o, j], model.ent_im[o, j])
        total += (e_s * w_p * e_o.conjugate()).real
    return total


def oracle_rank(
    model: ModelParams,
    triple: tuple[int, int, int],
    side: str,
    known: set[tuple[int, int, int]],
    mode: str,
) -> int:
    """Exhaustive-scoring rank with half-up tie splitting."""
    s, p, o = triple
    n = model.vocab.n_entities
    if side == "object":
        scores = [score_py(model, s, p, e) for e in range(n)]
        true_idx = o
        excluded = {e for (s2, p2, e) in known if s2 == s and p2 == p and e != o}
    else:
        scores = [score_py(model, e, p, o) for e in range(n)]
        true_idx = s
        excluded = {e for (e, p2, o2) in known if p2 == p and o2 == o and e != s}
    if mode == "raw":
        excluded = set()
    s_true = scores[true_idx]
    others = [scores[e] for e in range(n) if e != true_idx and e not in excluded]
    n_greater = sum(1 for x in others if x > s_true)
    n_equal = sum(1 for x in others if x == s_true)
    return 1 + n_greater + int(math.floor(n_equal / 2.0 + 0.5))


def toy_graph(n_entities: int = 20, n_relations: int = 3, n_triples: int = 50,
              seed: int = 123, weight_range: tuple[float, float] = (0.5, 1.0)) -> TripleGraph:
    """Small random graph with distinct triples and mid-to-high weights."""
    rng = random.Random(seed)
    entities = [f"e{i:02d}" for i in range(n_entities)]
    relations = [f"r{i}" for i in range(n_relations)]
    seen: set[tuple[str, str, str]] = set()
    triples: list[WeightedTriple] = []
    while len(triples) < n_triples:
        s = rng.choice(entities)
        o = rng.choice(entities)
        p = rng.choice(relations)
        if s == o or (s, p, o) in seen:
            continue
        seen.add((s, p, o))
        triples.append(WeightedTriple(s, p, o, round(rng.uniform(*weight_range), 4)))
    return TripleGraph.from_triples(triples)


def small_vocab(n_entities: int = 8, n_relations: int = 3) -> Vocabulary:
    return Vocabulary.from_names(
        [f"e{i}" for i in range(n_entities)], [f"r{i}" for i in range(n_relations)]
    )


def random_model(n_entities: int = 8, n_relations: int = 3, k: int = 4,
                 seed: int = 0) -> ModelParams:
    return init_model(small_vocab(n_entities, n_relations), k, seed)


def random_batch(n_entities: int, n_relations: int, rng: np.random.Generator,
                 n_pos: int = 6, eta: int = 3, beta: float = 0.3,
                 weights: np.ndarray | None = None) -> TrainingBatch:
    """Random positives plus one-sided corruptions, shapes only (no semantics)."""
    pos = np.stack([
        rng.integers(0, n_entities, n_pos),
        rng.integers(0, n_relations, n_pos),
        rng.integers(0, n_entities, n_pos),
    ], axis=1).astype(np.int64)
    if weights is None:
        weights = rng.uniform(0.0, 1.0, n_pos)
    neg = np.repeat(pos, eta, axis=0)
    side = rng.integers(0, 2, n_pos * eta)
    neg[np.arange(n_pos * eta), side * 2] = rng.integers(0, n_entities, n_pos * eta)
    return TrainingBatch(pos, np.asarray(weights, dtype=np.float64), neg, eta, beta)
