"""Dataset profiling: column type inference and context construction.

The profiler reads a delimited text file with a header row, infers a coarse
type per column from a bounded value sample, buckets the row count, and
assembles a :class:`ContextDescriptor`. Fields that cannot be read off the
data (domain, provenance, governance) stay empty unless an overlay supplies
them.
"""
from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, fields
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Sequence

from .contexts import Attribute, AttributeType, ContextDescriptor, size_bucket_for_rows
from .errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_SAMPLE_CAP = 10_000

# share of sampled values that must agree before a column gets a non-text type
TYPE_AGREEMENT = 0.95

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_ISO_DATETIME = re.compile(
    r"^(\d{4}-\d{2}-\d{2})[T ]\d{2}:\d{2}(:\d{2}(\.\d{1,6})?)?(Z|[+-]\d{2}:?\d{2})?$"
)
_SLASH_DATE = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")
_SLASH_DATE_YMD = re.compile(r"^\d{4}/(\d{1,2})/(\d{1,2})$")


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def _is_date(value: str) -> bool:
    """Accepts ISO-8601 dates/datetimes and slash dates in either day/month order."""
    v = value.strip()
    if _ISO_DATE.match(v):
        try:
            date.fromisoformat(v)
        except ValueError:
            return False
        return True
    m = _ISO_DATETIME.match(v)
    if m:
        try:
            date.fromisoformat(m.group(1))
        except ValueError:
            return False
        return True
    m = _SLASH_DATE.match(v)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        # plausible as DD/MM or MM/DD; the ambiguity is deliberately not resolved
        return (1 <= a <= 31 and 1 <= b <= 12) or (1 <= a <= 12 and 1 <= b <= 31)
    m = _SLASH_DATE_YMD.match(v)
    if m:
        return 1 <= int(m.group(1)) <= 12 and 1 <= int(m.group(2)) <= 31
    return False


def infer_attribute_type(values: Iterable[str], sample_cap: int = DEFAULT_SAMPLE_CAP) -> AttributeType:
    """Type of a column from up to ``sample_cap`` non-empty values.

    Numeric wins if at least 95% of the sample parses as a real number,
    then date by the same rule over the accepted patterns; otherwise text.
    An all-empty column degrades to text with a logged warning.
    """
    if sample_cap < 1:
        raise InputError(f"sample_cap must be >= 1, got {sample_cap}")
    sample: list[str] = []
    for v in values:
        if v.strip() == "":
            continue
        sample.append(v)
        if len(sample) >= sample_cap:
            break
    if not sample:
        logger.warning("all values empty; defaulting attribute type to text")
        return AttributeType.TEXT
    n = len(sample)
    if sum(_is_number(v) for v in sample) / n >= TYPE_AGREEMENT:
        return AttributeType.NUMERIC
    if sum(_is_date(v) for v in sample) / n >= TYPE_AGREEMENT:
        return AttributeType.DATE
    return AttributeType.TEXT


@dataclass(frozen=True)
class ProfileOverlay:
    """User-supplied context facts that the data itself cannot reveal.

    ``context_id`` is mandatory; every other present field overrides the
    inferred value.
    """

    context_id: str
    data_type: str | None = None
    data_source: str | None = None
    size_bucket: str | None = None
    analysis_scope: str | None = None
    domain: str | None = None
    content_type: str | None = None
    file_format: str | None = None
    org_standards: tuple[str, ...] | None = None
    org_policies: tuple[str, ...] | None = None
    security_level: str | None = None
    est_resources: str | None = None
    est_time: str | None = None

    def __post_init__(self):
        if not self.context_id:
            raise InputError("overlay requires a non-empty context_id")
        for name in ("org_standards", "org_policies"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))


_OVERLAY_KEYS = {f.name for f in fields(ProfileOverlay)}


def overlay_from_dict(doc: dict) -> ProfileOverlay:
    if not isinstance(doc, dict):
        raise InputError(f"overlay must be a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - _OVERLAY_KEYS
    if unknown:
        raise InputError(f"unknown overlay fields: {sorted(unknown)}")
    if "context_id" not in doc:
        raise InputError("overlay missing required field 'context_id'")
    return ProfileOverlay(**{k: v for k, v in doc.items() if v is not None})


def profile_dataset(
    data_path: str | Path,
    overlay: ProfileOverlay,
    *,
    delimiter: str = ",",
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> ContextDescriptor:
    """Profile a delimited file into a context descriptor.

    Streams the file once: the row count is exact while per-column type
    samples are capped at ``sample_cap`` values, so memory stays bounded.
    """
    p = Path(data_path)
    if not p.is_file():
        raise InputError(f"no such file: {p}")
    with open(p, newline="", encoding="utf-8") as f:
        reader = csv.reader(f, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{p}: empty file, expected a header row")
        names = [h.strip() for h in header]
        if any(not name for name in names):
            raise InputError(f"{p}: header contains an empty column name")
        if len(names) != len(set(names)):
            raise InputError(f"{p}: duplicate column names in header")

        samples: list[list[str]] = [[] for _ in names]
        n_rows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise InputError(
                    f"{p}:{lineno}: row has {len(row)} fields, header has {len(names)}"
                )
            n_rows += 1
            for col, value in enumerate(row):
                bucket = samples[col]
                if len(bucket) < sample_cap and value.strip() != "":
                    bucket.append(value)

    attributes = tuple(
        Attribute(name, infer_attribute_type(samples[i], sample_cap)) for i, name in enumerate(names)
    )
    inferred = {
        "data_type": "structured",
        "data_source": "",
        "size_bucket": size_bucket_for_rows(n_rows),
        "domain": "",
        "file_format": p.suffix.lstrip(".").lower(),
    }
    optional = {}
    for f_def in fields(ProfileOverlay):
        if f_def.name == "context_id":
            continue
        value = getattr(overlay, f_def.name)
        if value is not None:
            if f_def.name in inferred:
                inferred[f_def.name] = value
            else:
                optional[f_def.name] = value
    return ContextDescriptor(
        context_id=overlay.context_id,
        attributes=attributes,
        **inferred,
        **optional,
    )
