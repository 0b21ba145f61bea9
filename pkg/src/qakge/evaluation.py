"""Link prediction evaluation: ranks, MRR/MR/Hits@N, validation loss.

Each test triple is ranked twice, once per corruption side, against every
entity in the model's vocabulary. The filtered protocol removes candidates
that would re-create a different known-positive triple, so the model is not
punished for preferring another true fact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError
from .model import ModelParams, score_all_objects, score_all_subjects
from .objective import TrainingBatch, batch_objective
from .sampling import sample_corruptions
from .training import Hyperparams
from .triples import TripleGraph

PROTOCOLS = ("raw", "filtered")

DEFAULT_HITS = (1, 3, 10)


def aggregate_ranks(
    ranks: Iterable[int], hits_at: tuple[int, ...] = DEFAULT_HITS
) -> dict[str, float | dict[int, float]]:
    """MRR, MR and Hits@N over a list of ranks."""
    arr = np.asarray(list(ranks), dtype=np.float64)
    if arr.size == 0:
        raise InputError("cannot aggregate an empty rank list")
    if (arr < 1).any():
        raise InputError("ranks must be >= 1")
    return {
        "mrr": float(np.mean(1.0 / arr)),
        "mr": float(np.mean(arr)),
        "hits": {n: float(np.mean(arr <= n)) for n in hits_at},
    }


def _rank_from_scores(scores: np.ndarray, true_idx: int, excluded: np.ndarray | None) -> int:
    """Competition rank with half-up tie splitting.

    rank = 1 + #{strictly better} + round_half_up(#{tied others} / 2).
    """
    s_true = scores[true_idx]
    valid = np.ones(scores.shape[0], dtype=bool)
    if excluded is not None and excluded.size:
        valid[excluded] = False
    valid[true_idx] = False
    n_greater = int(np.count_nonzero(scores[valid] > s_true))
    n_equal = int(np.count_nonzero(scores[valid] == s_true))
    return 1 + n_greater + int(math.floor(n_equal / 2.0 + 0.5))


def _known_sets(
    known: Iterable[tuple[str, str, str]], model: ModelParams
) -> tuple[dict[tuple[int, int], list[int]], dict[tuple[int, int], list[int]]]:
    """Index the filter sets: (s, p) -> known objects, (p, o) -> known subjects."""
    by_sp: dict[tuple[int, int], list[int]] = {}
    by_po: dict[tuple[int, int], list[int]] = {}
    e_idx, r_idx = model.vocab.entity_index, model.vocab.relation_index
    for s_name, p_name, o_name in known:
        s, p, o = e_idx.get(s_name), r_idx.get(p_name), e_idx.get(o_name)
        if s is None or p is None or o is None:
            continue  # facts outside the model's world cannot affect candidate ranks
        by_sp.setdefault((s, p), []).append(o)
        by_po.setdefault((p, o), []).append(s)
    return by_sp, by_po


def _resolve(model: ModelParams, triple: tuple[str, str, str]) -> tuple[int, int, int]:
    s_name, p_name, o_name = triple
    try:
        return (
            model.vocab.entity_index[s_name],
            model.vocab.relation_index[p_name],
            model.vocab.entity_index[o_name],
        )
    except KeyError as exc:
        raise InputError(f"symbol not in model vocabulary: {exc.args[0]!r}") from exc


def rank_triple(
    model: ModelParams,
    triple: tuple[str, str, str],
    side: str,
    known_positives: Iterable[tuple[str, str, str]],
    mode: str = "filtered",
) -> int:
    """Rank of the true entity among all replacements of one side."""
    if side not in ("subject", "object"):
        raise InputError(f"side must be 'subject' or 'object', got {side!r}")
    if mode not in PROTOCOLS:
        raise InputError(f"mode must be one of {PROTOCOLS}, got {mode!r}")
    s, p, o = _resolve(model, triple)
    by_sp, by_po = _known_sets(known_positives, model) if mode == "filtered" else ({}, {})
    if side == "object":
        scores = score_all_objects(model, s, p)
        true_idx = o
        excluded = np.array([e for e in by_sp.get((s, p), []) if e != o], dtype=np.int64)
    else:
        scores = score_all_subjects(model, p, o)
        true_idx = s
        excluded = np.array([e for e in by_po.get((p, o), []) if e != s], dtype=np.int64)
    return _rank_from_scores(scores, true_idx, excluded if mode == "filtered" else None)


@dataclass(frozen=True, slots=True)
class RankRecord:
    source: str
    relation: str
    target: str
    side: str  # which side was corrupted
    rank: int


@dataclass
class EvalMetrics:
    loss: float
    mrr: float
    mr: float
    hits: dict[int, float]
    n_test: int
    protocol: str
    ranks: list[RankRecord] = field(repr=False)
    per_relation_mrr: dict[str, float] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "loss": self.loss,
            "mrr": self.mrr,
            "mr": self.mr,
            "hits": {str(n): v for n, v in sorted(self.hits.items())},
            "n_test": self.n_test,
            "protocol": self.protocol,
        }


def validation_loss(
    model: ModelParams,
    graph: TripleGraph,
    hp: Hyperparams,
    *,
    beta: float = 0.0,
    seed: int = 0,
) -> float:
    """Mean per-positive training objective on held-out triples.

    Corruptions are drawn from a dedicated generator seeded by ``seed``, so
    the number is reproducible. ``beta=0`` reflects a fully annealed run and
    keeps values comparable across configurations.
    """
    if len(graph) == 0:
        raise InputError("cannot evaluate loss on an empty graph")
    idx, weights = graph.index_arrays(model.vocab)
    rng = np.random.default_rng((seed, 99))
    total = 0.0
    for start in range(0, len(graph), hp.batch_size):
        pos = idx[start : start + hp.batch_size]
        neg = sample_corruptions(pos, hp.eta, hp.corruption_mode, model.vocab, rng)
        batch = TrainingBatch(pos, weights[start : start + hp.batch_size], neg, hp.eta, beta)
        total += batch_objective(model, batch, hp)
    return total / len(graph)


def evaluate(
    model: ModelParams,
    test_graph: TripleGraph,
    known_positives: TripleGraph | Iterable[tuple[str, str, str]],
    hits_at: tuple[int, ...] = DEFAULT_HITS,
    protocol: str = "filtered",
    *,
    hp: Hyperparams | None = None,
    loss_seed: int = 0,
) -> EvalMetrics:
    """Rank every test triple on both sides and aggregate.

    ``known_positives`` should contain all facts treated as true (typically
    train + test) when the protocol is filtered.
    """
    if protocol not in PROTOCOLS:
        raise InputError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if len(test_graph.triples) == 0:
        raise InputError("empty test set")
    if any(n < 1 for n in hits_at):
        raise InputError(f"hits_at cutoffs must be >= 1, got {hits_at}")
    known = known_positives.keys() if isinstance(known_positives, TripleGraph) else known_positives
    by_sp, by_po = _known_sets(known, model) if protocol == "filtered" else ({}, {})

    records: list[RankRecord] = []
    for t in test_graph.triples:
        s, p, o = _resolve(model, t.key)
        obj_scores = score_all_objects(model, s, p)
        excl_o = np.array([e for e in by_sp.get((s, p), []) if e != o], dtype=np.int64)
        records.append(
            RankRecord(t.source, t.relation, t.target, "object",
                       _rank_from_scores(obj_scores, o, excl_o if protocol == "filtered" else None))
        )
        sub_scores = score_all_subjects(model, p, o)
        excl_s = np.array([e for e in by_po.get((p, o), []) if e != s], dtype=np.int64)
        records.append(
            RankRecord(t.source, t.relation, t.target, "subject",
                       _rank_from_scores(sub_scores, s, excl_s if protocol == "filtered" else None))
        )

    agg = aggregate_ranks([r.rank for r in records], hits_at)
    hp = hp if hp is not None else Hyperparams()
    loss = validation_loss(model, test_graph, hp, seed=loss_seed)

    by_relation: dict[str, list[float]] = {}
    for r in records:
        by_relation.setdefault(r.relation, []).append(1.0 / r.rank)
    per_relation = {rel: float(np.mean(vals)) for rel, vals in sorted(by_relation.items())}

    return EvalMetrics(
        loss=loss,
        mrr=agg["mrr"],
        mr=agg["mr"],
        hits=agg["hits"],
        n_test=len(test_graph.triples),
        protocol=protocol,
        ranks=records,
        per_relation_mrr=per_relation,
    )
