"""Data context descriptors, assessment plans, and their triple encodings.

A context describes a dataset (schema, provenance, size, domain, governance)
and maps onto a star-shaped subgraph rooted at the context node. Assessment
plans are edge sets linking schema attributes to quality measures and those
measures to quality dimensions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError, MalformedContextError
from .triples import TripleGraph, WeightedTriple


class AttributeType(str, Enum):
    DATE = "date"
    TEXT = "text"
    NUMERIC = "numeric"


DATA_TYPES = ("structured", "semi-structured", "unstructured")

SIZE_BUCKETS = ("tiny", "small", "medium", "large", "xlarge")

# row-count thresholds (exclusive upper bounds) for the first four buckets
_SIZE_LIMITS = ((1_000, "tiny"), (100_000, "small"), (10_000_000, "medium"), (1_000_000_000, "large"))


def size_bucket_for_rows(n_rows: int) -> str:
    if n_rows < 0:
        raise InputError(f"row count must be non-negative, got {n_rows}")
    for limit, bucket in _SIZE_LIMITS:
        if n_rows < limit:
            return bucket
    return "xlarge"


# closed relation vocabulary for context subgraphs
REL_SCHEMA = "hasSchema"
REL_ATTRIBUTE = "hasAttribute"
REL_TYPE = "hasType"
REL_QUALITY_RULE = "hasQualityRule"
REL_CONTRIBUTES = "contributesTo"

# scalar/list descriptor fields and their relations, in canonical emission order
FIELD_RELATIONS: tuple[tuple[str, str], ...] = (
    ("data_type", "hasDataType"),
    ("data_source", "hasDataSource"),
    ("size_bucket", "hasSizeBucket"),
    ("analysis_scope", "hasAnalysisScope"),
    ("domain", "hasDomain"),
    ("content_type", "hasContentType"),
    ("file_format", "hasFileFormat"),
    ("org_standards", "hasStandard"),
    ("org_policies", "hasPolicy"),
    ("security_level", "hasSecurityLevel"),
    ("est_resources", "hasResourceBudget"),
    ("est_time", "hasTimeBudget"),
)

_LIST_FIELDS = ("org_standards", "org_policies")

CONTEXT_RELATIONS = (REL_SCHEMA, REL_ATTRIBUTE, REL_TYPE) + tuple(
    rel for _, rel in FIELD_RELATIONS
) + (REL_QUALITY_RULE, REL_CONTRIBUTES)


@dataclass(frozen=True, slots=True)
class Attribute:
    """One schema column: a name and its inferred or declared type."""

    name: str
    type: AttributeType

    def __post_init__(self):
        if not self.name:
            raise InputError("attribute name must be non-empty")
        if not isinstance(self.type, AttributeType):
            try:
                object.__setattr__(self, "type", AttributeType(self.type))
            except ValueError:
                raise InputError(f"unknown attribute type {self.type!r}") from None


@dataclass(frozen=True)
class ContextDescriptor:
    """Everything known about one dataset's context.

    ``data_type``, ``data_source``, ``size_bucket``, ``domain`` and
    ``file_format`` are plain text (empty string means unknown, no edge is
    emitted); the remaining fields are optional.
    """

    context_id: str
    data_type: str
    attributes: tuple[Attribute, ...]
    data_source: str = ""
    size_bucket: str = ""
    domain: str = ""
    file_format: str = ""
    analysis_scope: str | None = None
    content_type: str | None = None
    org_standards: tuple[str, ...] | None = None
    org_policies: tuple[str, ...] | None = None
    security_level: str | None = None
    est_resources: str | None = None
    est_time: str | None = None

    def __post_init__(self):
        if not self.context_id:
            raise InputError("context_id must be non-empty")
        if self.data_type not in DATA_TYPES:
            raise InputError(
                f"data_type must be one of {DATA_TYPES}, got {self.data_type!r}"
            )
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if self.data_type in ("structured", "semi-structured") and not self.attributes:
            raise InputError(
                f"context {self.context_id!r}: {self.data_type} data requires at least one attribute"
            )
        names = [a.name for a in self.attributes]
        if len(names) != len(set(names)):
            raise InputError(f"context {self.context_id!r}: duplicate attribute names")
        for f_name in _LIST_FIELDS:
            value = getattr(self, f_name)
            if value is not None:
                object.__setattr__(self, f_name, tuple(value))

    @property
    def schema_node(self) -> str:
        return f"{self.context_id}_schema"

    def attribute_node(self, name: str) -> str:
        return f"{self.context_id}_attr_{name}"


def attribute_base_name(node: str) -> str:
    """Strip the ``<context>_attr_`` namespace from an attribute node name."""
    return node.split("_attr_", 1)[1] if "_attr_" in node else node


@dataclass(frozen=True, slots=True)
class RuleEdge:
    attribute: str  # namespaced attribute node
    rule: str
    weight: float


@dataclass(frozen=True, slots=True)
class DimensionEdge:
    rule: str
    dimension: str
    weight: float


@dataclass(frozen=True)
class AssessmentPlan:
    """Quality plan for one context: attribute->measure and measure->dimension edges."""

    context_id: str
    rule_edges: tuple[RuleEdge, ...]
    dimension_edges: tuple[DimensionEdge, ...]

    def __post_init__(self):
        object.__setattr__(self, "rule_edges", tuple(self.rule_edges))
        object.__setattr__(self, "dimension_edges", tuple(self.dimension_edges))
        rule_pairs = [(e.attribute, e.rule) for e in self.rule_edges]
        if len(rule_pairs) != len(set(rule_pairs)):
            raise InputError(f"plan {self.context_id!r}: duplicate (attribute, rule) edges")
        dim_pairs = [(e.rule, e.dimension) for e in self.dimension_edges]
        if len(dim_pairs) != len(set(dim_pairs)):
            raise InputError(f"plan {self.context_id!r}: duplicate (rule, dimension) edges")
        known_rules = {e.rule for e in self.rule_edges}
        orphans = {e.rule for e in self.dimension_edges} - known_rules
        if orphans:
            raise InputError(
                f"plan {self.context_id!r}: dimension edges for rules absent from rule edges: "
                f"{sorted(orphans)}"
            )

    @property
    def rules(self) -> tuple[str, ...]:
        """Distinct rules in first-appearance order."""
        return tuple(dict.fromkeys(e.rule for e in self.rule_edges))

    @property
    def dimensions(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(e.dimension for e in self.dimension_edges))


def context_to_triples(ctx: ContextDescriptor) -> list[WeightedTriple]:
    """Encode a descriptor as its star subgraph, all weights 1.0.

    Emission order is fixed: schema edge, then per-attribute membership and
    type edges, then scalar/list field edges in declared field order. Empty
    or absent fields emit nothing.
    """
    out = [WeightedTriple(ctx.context_id, REL_SCHEMA, ctx.schema_node)]
    for attr in ctx.attributes:
        node = ctx.attribute_node(attr.name)
        out.append(WeightedTriple(ctx.schema_node, REL_ATTRIBUTE, node))
        out.append(WeightedTriple(node, REL_TYPE, attr.type.value))
    for field_name, relation in FIELD_RELATIONS:
        value = getattr(ctx, field_name)
        if value is None or value == "":
            continue
        if field_name in _LIST_FIELDS:
            for item in value:
                out.append(WeightedTriple(ctx.context_id, relation, item))
        else:
            out.append(WeightedTriple(ctx.context_id, relation, value))
    return out


def _schema_and_attributes(graph: TripleGraph, context_id: str) -> tuple[str, list[str]]:
    """Resolve the schema node and its attribute nodes, in graph order."""
    if context_id not in graph.vocab.entity_index:
        raise InputError(f"unknown context: {context_id!r}")
    schemas = [t.target for t in graph.triples if t.source == context_id and t.relation == REL_SCHEMA]
    if not schemas:
        raise MalformedContextError(f"context {context_id!r} has no {REL_SCHEMA} edge")
    if len(schemas) > 1:
        raise MalformedContextError(f"context {context_id!r} has {len(schemas)} schema nodes")
    schema = schemas[0]
    attrs = [t.target for t in graph.triples if t.source == schema and t.relation == REL_ATTRIBUTE]
    return schema, attrs


def triples_to_context(graph: TripleGraph, context_id: str) -> ContextDescriptor:
    """Inverse of :func:`context_to_triples` for one context subgraph."""
    schema, attr_nodes = _schema_and_attributes(graph, context_id)

    attributes = []
    prefix = f"{context_id}_attr_"
    for node in attr_nodes:
        types = [t.target for t in graph.triples if t.source == node and t.relation == REL_TYPE]
        if len(types) != 1:
            raise MalformedContextError(
                f"attribute {node!r} of context {context_id!r} has {len(types)} type edges, expected 1"
            )
        try:
            a_type = AttributeType(types[0])
        except ValueError:
            raise MalformedContextError(f"attribute {node!r} has unknown type {types[0]!r}") from None
        name = node[len(prefix):] if node.startswith(prefix) else attribute_base_name(node)
        attributes.append(Attribute(name, a_type))

    values: dict[str, object] = {}
    for field_name, relation in FIELD_RELATIONS:
        targets = [t.target for t in graph.triples if t.source == context_id and t.relation == relation]
        if field_name in _LIST_FIELDS:
            values[field_name] = tuple(targets) if targets else None
        elif len(targets) > 1:
            raise MalformedContextError(
                f"context {context_id!r} has {len(targets)} {relation} edges, expected at most 1"
            )
        elif targets:
            values[field_name] = targets[0]

    if "data_type" not in values:
        raise MalformedContextError(f"context {context_id!r} has no hasDataType edge")
    return ContextDescriptor(context_id=context_id, attributes=tuple(attributes), **values)


def extract_plan(graph: TripleGraph, context_id: str) -> AssessmentPlan:
    """Collect the plan stored for a context: its attributes' rule edges and
    every dimension edge reachable from those rules."""
    _, attr_nodes = _schema_and_attributes(graph, context_id)
    attr_set = set(attr_nodes)
    rule_edges = tuple(
        RuleEdge(t.source, t.target, t.weight)
        for t in graph.triples
        if t.relation == REL_QUALITY_RULE and t.source in attr_set
    )
    selected = {e.rule for e in rule_edges}
    dim_edges = tuple(
        DimensionEdge(t.source, t.target, t.weight)
        for t in graph.triples
        if t.relation == REL_CONTRIBUTES and t.source in selected
    )
    return AssessmentPlan(context_id, rule_edges, dim_edges)


def plan_to_triples(plan: AssessmentPlan) -> list[WeightedTriple]:
    """Encode a plan as weighted graph edges (rule edges first)."""
    out = [WeightedTriple(e.attribute, REL_QUALITY_RULE, e.rule, e.weight) for e in plan.rule_edges]
    out += [WeightedTriple(e.rule, REL_CONTRIBUTES, e.dimension, e.weight) for e in plan.dimension_edges]
    return out


# --- JSON encodings ---------------------------------------------------------

def context_to_dict(ctx: ContextDescriptor) -> dict:
    return {
        "context_id": ctx.context_id,
        "data_type": ctx.data_type,
        "attributes": [{"name": a.name, "type": a.type.value} for a in ctx.attributes],
        "data_source": ctx.data_source,
        "size_bucket": ctx.size_bucket,
        "analysis_scope": ctx.analysis_scope,
        "domain": ctx.domain,
        "content_type": ctx.content_type,
        "file_format": ctx.file_format,
        "org_standards": list(ctx.org_standards) if ctx.org_standards is not None else None,
        "org_policies": list(ctx.org_policies) if ctx.org_policies is not None else None,
        "security_level": ctx.security_level,
        "est_resources": ctx.est_resources,
        "est_time": ctx.est_time,
    }


_KNOWN_CONTEXT_KEYS = {f.name for f in fields(ContextDescriptor)}


def context_from_dict(doc: dict) -> ContextDescriptor:
    if not isinstance(doc, dict):
        raise InputError(f"context document must be a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - _KNOWN_CONTEXT_KEYS
    if unknown:
        raise InputError(f"unknown context fields: {sorted(unknown)}")
    for key in ("context_id", "data_type", "attributes"):
        if key not in doc:
            raise InputError(f"context document missing required field {key!r}")
    raw_attrs = doc["attributes"]
    if not isinstance(raw_attrs, list):
        raise InputError("context field 'attributes' must be a list of {name, type} objects")
    attributes = []
    for item in raw_attrs:
        if not isinstance(item, dict) or set(item) != {"name", "type"}:
            raise InputError(f"bad attribute entry: {item!r}")
        try:
            attributes.append(Attribute(item["name"], AttributeType(item["type"])))
        except ValueError:
            raise InputError(f"unknown attribute type {item['type']!r}") from None
    kwargs = {k: v for k, v in doc.items() if k not in ("context_id", "attributes") and v is not None}
    for f_name in _LIST_FIELDS:
        if f_name in kwargs:
            kwargs[f_name] = tuple(kwargs[f_name])
    # required text fields may arrive as null; treat as empty
    for f_name in ("data_source", "size_bucket", "domain", "file_format"):
        kwargs.setdefault(f_name, "")
    return ContextDescriptor(context_id=doc["context_id"], attributes=tuple(attributes), **kwargs)


def plan_to_dict(plan: AssessmentPlan, raw_scores: dict[tuple[str, str], float] | None = None,
                 model_meta: dict | None = None) -> dict:
    """Plan as a JSON-ready dict; optional per-edge raw scores and model metadata."""
    def rule_entry(e: RuleEdge) -> dict:
        entry = {"attribute": e.attribute, "rule": e.rule, "weight": e.weight}
        if raw_scores is not None and (e.attribute, e.rule) in raw_scores:
            entry["raw_score"] = raw_scores[(e.attribute, e.rule)]
        return entry

    def dim_entry(e: DimensionEdge) -> dict:
        entry = {"rule": e.rule, "dimension": e.dimension, "weight": e.weight}
        if raw_scores is not None and (e.rule, e.dimension) in raw_scores:
            entry["raw_score"] = raw_scores[(e.rule, e.dimension)]
        return entry

    doc = {
        "context_id": plan.context_id,
        "rule_edges": [rule_entry(e) for e in plan.rule_edges],
        "dimension_edges": [dim_entry(e) for e in plan.dimension_edges],
    }
    if model_meta is not None:
        doc["model_meta"] = model_meta
    return doc


def plan_from_dict(doc: dict) -> AssessmentPlan:
    if not isinstance(doc, dict):
        raise InputError(f"plan document must be a JSON object, got {type(doc).__name__}")
    for key in ("context_id", "rule_edges", "dimension_edges"):
        if key not in doc:
            raise InputError(f"plan document missing required field {key!r}")
    try:
        rule_edges = tuple(
            RuleEdge(e["attribute"], e["rule"], float(e["weight"])) for e in doc["rule_edges"]
        )
        dim_edges = tuple(
            DimensionEdge(e["rule"], e["dimension"], float(e["weight"]))
            for e in doc["dimension_edges"]
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed plan edge: {exc}") from exc
    return AssessmentPlan(doc["context_id"], rule_edges, dim_edges)


def load_json(path: str | Path) -> dict | list:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    try:
        with open(p, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}:{exc.lineno}: invalid JSON: {exc.msg}") from exc


def save_json(doc: dict | list, path: str | Path) -> None:
    p = Path(path)
    try:
        with open(p, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, sort_keys=False)
            f.write("\n")
    except OSError as exc:
        raise InputError(f"cannot write {p}: {exc}") from exc
