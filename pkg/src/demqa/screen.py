"""Validity screening and Tukey fence outlier removal.

Quartiles use linear interpolation between order statistics (the
inclusive spreadsheet convention): with sorted values v[0..n-1] the
p-quantile sits at position h = (n-1)*p and equals
v[floor(h)] + (h - floor(h)) * (v[floor(h)+1] - v[floor(h)]).
Other quantile conventions shift the fences, so the convention is echoed
in every report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InsufficientDataError
from .sample import SampleRecord

FENCE_MULTIPLIER = 1.5

FILTER_FIELDS = ("delta_h", "h_dem")


@dataclass(frozen=True)
class TukeyFences:
    """Quartiles and the derived outlier bounds q1 - 1.5*iqr, q3 + 1.5*iqr."""

    q1: float
    q3: float
    iqr: float
    lower: float
    upper: float


def quartiles(values: Sequence[float]) -> tuple[float, float]:
    """Lower and upper quartiles by linear interpolation.

    Raises InsufficientDataError for fewer than two values.
    """
    n = len(values)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 values for quartiles, got {n}")
    v = sorted(float(x) for x in values)
    return _quantile_sorted(v, 0.25), _quantile_sorted(v, 0.75)


def _quantile_sorted(v: list[float], p: float) -> float:
    h = (len(v) - 1) * p
    lo = math.floor(h)
    frac = h - lo
    if frac == 0.0:
        return v[lo]
    return v[lo] + frac * (v[lo + 1] - v[lo])


def fences_of(values: Sequence[float]) -> TukeyFences:
    """Tukey fences of a value set."""
    q1, q3 = quartiles(values)
    iqr = q3 - q1
    return TukeyFences(
        q1=q1,
        q3=q3,
        iqr=iqr,
        lower=q1 - FENCE_MULTIPLIER * iqr,
        upper=q3 + FENCE_MULTIPLIER * iqr,
    )


def tukey_filter(
    records: Sequence[SampleRecord], field: str = "delta_h"
) -> tuple[list[SampleRecord], list[SampleRecord], TukeyFences]:
    """Split records into (kept, removed) by Tukey fences on ``field``.

    Only values strictly outside [lower, upper] are outliers; a value
    exactly on a fence is kept. Fences come from the records where the
    field is present; records missing the field are kept (they are not
    outside the fences). Single pass: fences are computed once, so
    re-filtering the kept set with the same fences removes nothing.
    """
    if field not in FILTER_FIELDS:
        raise ValueError(f"filter field must be one of {FILTER_FIELDS}, got '{field}'")
    present = [getattr(r, field) for r in records if getattr(r, field) is not None]
    if len(present) < 2:
        raise InsufficientDataError(
            f"need at least 2 records with '{field}' present, got {len(present)}"
        )
    fences = fences_of(present)
    kept: list[SampleRecord] = []
    removed: list[SampleRecord] = []
    for r in records:
        v = getattr(r, field)
        if v is not None and (v < fences.lower or v > fences.upper):
            removed.append(r)
        else:
            kept.append(r)
    return kept, removed, fences


def validity_filter(
    records: Sequence[SampleRecord],
    exclude_classes: Iterable[int] = (),
    min_h: float | None = None,
    require_class: bool = True,
) -> tuple[list[SampleRecord], list[SampleRecord]]:
    """Drop records that cannot enter the accuracy assessment.

    Removed: records with no extracted height, records on excluded
    land-cover classes (water bodies, etc.), unclassified records
    (unless ``require_class`` is False for runs without a class map),
    and records with h_dem below ``min_h`` when given.
    """
    excluded = set(exclude_classes)
    kept: list[SampleRecord] = []
    removed: list[SampleRecord] = []
    for r in records:
        bad = (
            r.h_dem is None
            or (require_class and r.class_code is None)
            or (r.class_code is not None and r.class_code in excluded)
            or (min_h is not None and r.h_dem is not None and r.h_dem < min_h)
        )
        (removed if bad else kept).append(r)
    return kept, removed
