"""Assessment plan generation from a trained link predictor.

A new context is merged into the metadata graph, the embedding model is
(re)trained on the merged graph, and candidate quality checks are ranked by
their link scores. Raw scores are mapped to [0, 1] weights with a
per-relation min-max calibration fitted on the known edges.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .contexts import (
    REL_CONTRIBUTES,
    REL_QUALITY_RULE,
    AssessmentPlan,
    ContextDescriptor,
    DimensionEdge,
    RuleEdge,
    attribute_base_name,
    context_to_triples,
)
from .errors import ContextMismatchError, InputError
from .model import ModelParams, score_all_objects, score_triples
from .synth import KIND_DIMENSION, KIND_MEASURE, REL_KIND
from .training import Hyperparams, TrainReport, train
from .triples import TripleGraph, WeightedTriple

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PredictedEdge:
    source: str
    relation: str
    target: str
    raw_score: float
    calibrated_weight: float


@dataclass(frozen=True, slots=True)
class CalibrationStats:
    """Per-relation raw score range observed on the training edges."""

    by_relation: dict[str, tuple[float, float]]

    def range_of(self, relation: str) -> tuple[float, float]:
        if relation not in self.by_relation:
            raise InputError(f"no calibration fitted for relation {relation!r}")
        return self.by_relation[relation]


def fit_calibration(model: ModelParams, graph: TripleGraph) -> CalibrationStats:
    """Score every existing edge and record the min/max per relation."""
    idx, _ = graph.index_arrays(model.vocab)
    raw = score_triples(model, idx) if idx.shape[0] else np.empty(0)
    by_relation: dict[str, tuple[float, float]] = {}
    for rel_id, rel_name in enumerate(model.vocab.relations):
        mask = idx[:, 1] == rel_id if idx.shape[0] else np.zeros(0, dtype=bool)
        if not mask.any():
            logger.warning("relation %r has no edges to calibrate on", rel_name)
            continue
        scores = raw[mask]
        by_relation[rel_name] = (float(scores.min()), float(scores.max()))
    return CalibrationStats(by_relation)


def calibrate_weight(raw: float, relation: str, stats: CalibrationStats) -> float:
    """Min-max map a raw score into [0, 1], clamped at the boundaries."""
    lo, hi = stats.range_of(relation)
    if hi == lo:
        return 0.5  # degenerate range carries no ordering information
    return float(min(1.0, max(0.0, (raw - lo) / (hi - lo))))


def _predict_edges(
    model: ModelParams,
    source: str,
    relation: str,
    pool: Sequence[str],
    stats: CalibrationStats,
    tau: float,
    top_m: int,
) -> list[PredictedEdge]:
    """Rank ``pool`` as objects of (source, relation, ?) and select.

    Candidates scoring a calibrated weight >= tau are kept; if none pass,
    the best ``top_m`` by raw score are kept instead, so the result is
    never empty for a non-empty pool.
    """
    if not pool:
        raise InputError(f"empty candidate pool for relation {relation!r}")
    s = model.vocab.entity_index.get(source)
    if s is None:
        raise InputError(f"unknown entity {source!r}")
    p = model.vocab.relation_index.get(relation)
    if p is None:
        raise InputError(f"unknown relation {relation!r}")
    all_scores = score_all_objects(model, s, p)
    pool_ids = [model.vocab.entity_index[name] for name in pool]
    scored = [(float(all_scores[i]), name) for i, name in zip(pool_ids, pool)]
    scored.sort(key=lambda t: (-t[0], t[1]))

    edges = [
        PredictedEdge(source, relation, name, raw,
                      calibrate_weight(raw, relation, stats))
        for raw, name in scored
    ]
    kept = [e for e in edges if e.calibrated_weight >= tau]
    if not kept:
        kept = edges[: min(top_m, len(edges))]
    return kept


def predict_rules_for_attribute(
    model: ModelParams,
    attribute_node: str,
    pool: Sequence[str],
    stats: CalibrationStats,
    *,
    tau: float = 0.5,
    top_m: int = 3,
) -> list[PredictedEdge]:
    return _predict_edges(model, attribute_node, REL_QUALITY_RULE, pool, stats, tau, top_m)


def predict_dimensions_for_rule(
    model: ModelParams,
    rule_node: str,
    pool: Sequence[str],
    stats: CalibrationStats,
    *,
    tau: float = 0.5,
    top_m: int = 3,
) -> list[PredictedEdge]:
    return _predict_edges(model, rule_node, REL_CONTRIBUTES, pool, stats, tau, top_m)


def _inventory(graph: TripleGraph, kind: str, relation: str) -> tuple[str, ...]:
    """Candidate node pool: declared members of ``kind``, else observed targets."""
    declared = sorted(
        t.source for t in graph.triples
        if t.relation == REL_KIND and t.target == kind
    )
    if declared:
        return tuple(declared)
    observed = sorted({t.target for t in graph.triples if t.relation == relation})
    if not observed:
        raise InputError(
            f"graph has no {kind!r} declarations and no {relation!r} edges; "
            "cannot form a candidate pool"
        )
    logger.warning("no %r declarations; falling back to %d observed %r targets",
                   kind, len(observed), relation)
    return tuple(observed)


def rule_pool(graph: TripleGraph) -> tuple[str, ...]:
    return _inventory(graph, KIND_MEASURE, REL_QUALITY_RULE)


def dimension_pool(graph: TripleGraph) -> tuple[str, ...]:
    return _inventory(graph, KIND_DIMENSION, REL_CONTRIBUTES)


@dataclass
class PlanProvenance:
    """Everything needed to audit one generated plan."""

    context_id: str
    hyperparams: Hyperparams
    train_report: TrainReport
    raw_scores: dict[tuple[str, str], float]
    tau: float
    top_m: int
    seconds: float
    model: ModelParams = field(repr=False)


def generate_plan(
    graph: TripleGraph,
    new_context: ContextDescriptor,
    hp: Hyperparams,
    tau: float = 0.5,
    top_m: int = 3,
    *,
    warm_start: ModelParams | None = None,
    workers: int = 1,
) -> tuple[AssessmentPlan, PlanProvenance]:
    """Predict a quality assessment plan for a previously unseen context.

    The context's description triples are appended to the graph (weight 1)
    and a fresh model is trained on the merged graph; ``warm_start`` seeds
    the shared rows from an earlier model to speed this up. Rules are
    predicted per attribute, dimensions per distinct predicted rule.
    """
    if not 0.0 <= tau <= 1.0:
        raise InputError(f"tau must lie in [0, 1], got {tau}")
    if top_m < 1:
        raise InputError(f"top_m must be >= 1, got {top_m}")
    if new_context.context_id in graph.vocab.entity_index:
        raise InputError(
            f"context id collision: {new_context.context_id!r} already in graph"
        )
    t0 = time.perf_counter()
    merged = graph.extended(context_to_triples(new_context))

    initial = None
    if warm_start is not None:
        initial = _carry_over(warm_start, merged, hp)
    model, report = train(merged, hp, workers=workers, initial=initial)
    stats = fit_calibration(model, merged)

    rules_avail = rule_pool(merged)
    dims_avail = dimension_pool(merged)

    raw_scores: dict[tuple[str, str], float] = {}
    rule_edges: list[RuleEdge] = []
    seen_rules: list[str] = []
    for attr in new_context.attributes:
        node = new_context.attribute_node(attr.name)
        for e in predict_rules_for_attribute(model, node, rules_avail, stats,
                                             tau=tau, top_m=top_m):
            rule_edges.append(RuleEdge(e.source, e.target, e.calibrated_weight))
            raw_scores[(e.source, e.target)] = e.raw_score
            if e.target not in seen_rules:
                seen_rules.append(e.target)

    dim_edges: list[DimensionEdge] = []
    dim_seen: set[tuple[str, str]] = set()
    for rule in seen_rules:
        for e in predict_dimensions_for_rule(model, rule, dims_avail, stats,
                                             tau=tau, top_m=top_m):
            if (e.source, e.target) in dim_seen:
                continue
            dim_seen.add((e.source, e.target))
            dim_edges.append(DimensionEdge(e.source, e.target, e.calibrated_weight))
            raw_scores[(e.source, e.target)] = e.raw_score

    plan = AssessmentPlan(new_context.context_id, tuple(rule_edges), tuple(dim_edges))
    prov = PlanProvenance(
        context_id=new_context.context_id,
        hyperparams=hp,
        train_report=report,
        raw_scores=raw_scores,
        tau=tau,
        top_m=top_m,
        seconds=time.perf_counter() - t0,
        model=model,
    )
    return plan, prov


def _carry_over(
    warm: ModelParams, merged: TripleGraph, hp: Hyperparams
) -> ModelParams:
    """Fresh init for the merged vocab with rows copied for shared names."""
    from .model import init_model

    if warm.k != hp.k:
        raise InputError(
            f"warm start dimension {warm.k} does not match configured k {hp.k}"
        )
    initial = init_model(merged.vocab, hp.k, hp.seed)
    for name, i in merged.vocab.entity_index.items():
        j = warm.vocab.entity_index.get(name)
        if j is not None:
            initial.ent_re[i] = warm.ent_re[j]
            initial.ent_im[i] = warm.ent_im[j]
    for name, i in merged.vocab.relation_index.items():
        j = warm.vocab.relation_index.get(name)
        if j is not None:
            initial.rel_re[i] = warm.rel_re[j]
            initial.rel_im[i] = warm.rel_im[j]
    return initial


@dataclass(frozen=True, slots=True)
class PlanCoverage:
    """How much of a reference plan another plan reproduces."""

    covered: tuple[str, ...]
    uncovered: tuple[str, ...]
    total: int
    n_rules: int
    n_dimensions: int

    @property
    def fraction(self) -> float:
        return len(self.covered) / self.total if self.total else 1.0


@dataclass(frozen=True, slots=True)
class PlanComparison:
    context_id: str
    coverage_a: PlanCoverage
    coverage_b: PlanCoverage
    shared_rules: tuple[str, ...]
    only_a: tuple[str, ...]
    only_b: tuple[str, ...]


def _attribute_coverage(plan: AssessmentPlan, context: ContextDescriptor) -> PlanCoverage:
    """Attributes of ``context`` that the plan assigns at least one rule.

    Matching is by attribute base name so plans copied from another context
    (whose edges mention that context's attribute nodes) still count.
    """
    wanted = [a.name for a in context.attributes]
    have = {attribute_base_name(e.attribute) for e in plan.rule_edges}
    covered = tuple(n for n in wanted if n in have)
    uncovered = tuple(n for n in wanted if n not in have)
    return PlanCoverage(
        covered=covered,
        uncovered=uncovered,
        total=len(wanted),
        n_rules=len(plan.rules),
        n_dimensions=len(plan.dimensions),
    )


def compare_plans(
    plan_a: AssessmentPlan,
    plan_b: AssessmentPlan,
    context: ContextDescriptor,
) -> PlanComparison:
    """Side-by-side coverage of two plans for the same context."""
    ids = {plan_a.context_id, plan_b.context_id, context.context_id}
    if len(ids) != 1:
        raise ContextMismatchError(
            f"plans and context disagree on the context id: {sorted(ids)}"
        )
    cov_a = _attribute_coverage(plan_a, context)
    cov_b = _attribute_coverage(plan_b, context)
    rules_a, rules_b = set(plan_a.rules), set(plan_b.rules)
    return PlanComparison(
        context_id=context.context_id,
        coverage_a=cov_a,
        coverage_b=cov_b,
        shared_rules=tuple(sorted(rules_a & rules_b)),
        only_a=tuple(sorted(rules_a - rules_b)),
        only_b=tuple(sorted(rules_b - rules_a)),
    )


def comparison_report(
    cmp: PlanComparison, label_a: str = "plan A", label_b: str = "plan B"
) -> str:
    """Human-readable comparison summary."""
    lines = [f"context: {cmp.context_id}"]
    for label, cov in ((label_a, cmp.coverage_a), (label_b, cmp.coverage_b)):
        lines.append(
            f"{label}: covers {len(cov.covered)}/{cov.total} attributes, "
            f"{cov.n_rules} rules, {cov.n_dimensions} dimensions"
        )
        if cov.uncovered:
            lines.append(f"{label} misses: {', '.join(cov.uncovered)}")
    lines.append(f"shared rules: {', '.join(cmp.shared_rules) or '(none)'}")
    if cmp.only_a:
        lines.append(f"only {label_a}: {', '.join(cmp.only_a)}")
    if cmp.only_b:
        lines.append(f"only {label_b}: {', '.join(cmp.only_b)}")
    return "\n".join(lines)
